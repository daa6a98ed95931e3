// weave: fixture/forge/train/eval/report pipeline driver.
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "weave/checkpoint.hpp"
#include "weave/config.hpp"
#include "weave/evaluate.hpp"
#include "weave/fixture.hpp"
#include "weave/forge.hpp"
#include "weave/jsonl.hpp"
#include "weave/rephrase_client.hpp"
#include "weave/trainer.hpp"

namespace fs = std::filesystem;
using namespace weave;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 2;   // IO / malformed or mismatched artifacts
constexpr int kExitUsage = 64; // bad flags or configuration
constexpr int kExitInternal = 70;

int guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "weave: %s\n", e.what());
        return kExitUsage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "weave: %s\n", e.what());
        return kExitData;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "weave: %s\n", e.what());
        return kExitData;
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "weave: %s\n", e.what());
        return kExitData;
    } catch (const IntegrityError& e) {
        std::fprintf(stderr, "weave: %s\n", e.what());
        return kExitData;
    } catch (const CorruptFeature& e) {
        std::fprintf(stderr, "weave: %s\n", e.what());
        return kExitData;
    } catch (const Error& e) {
        std::fprintf(stderr, "weave: internal error: %s\n", e.what());
        return kExitInternal;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "weave: internal error: %s\n", e.what());
        return kExitInternal;
    }
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path,
                    "Run configuration file (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed,
                    "Master seed overriding the configured one");
    cmd->add_option("--out-dir", flags.out_dir,
                    "Artifact directory (default: runs/<stamp>-s<seed>)");
}

RunConfig effective_config(const CommonFlags& flags) {
    RunConfig rc =
        flags.config_path.empty() ? RunConfig{} : RunConfig::load(flags.config_path);
    if (flags.seed) rc.seed = *flags.seed;
    // the master seed drives every stochastic component
    rc.train.seed = rc.seed;
    rc.validate();
    return rc;
}

std::string resolve_out_dir(const CommonFlags& flags, const RunConfig& rc) {
    if (!flags.out_dir.empty()) return flags.out_dir;
    char stamp[32];
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &tm_utc);
    return "runs/" + std::string(stamp) + "-s" + std::to_string(rc.seed);
}

// Lenient line-by-line read: malformed lines become warnings, the rest flow on.
std::vector<Json> read_dataset(const std::string& path) {
    JsonlReadResult res = read_jsonl(path, /*strict=*/false);
    for (const LineError& e : res.errors) {
        std::fprintf(stderr, "weave: warning: %s:%zu: %s\n", path.c_str(),
                     e.line_no, e.message.c_str());
    }
    return std::move(res.records);
}

Vocabulary build_vocab(const std::vector<Json>& records, int vocab_max) {
    std::vector<std::string> corpus = lexicon_corpus_lines();
    for (const Json& r : records) {
        for (const char* key :
             {"original_prompt", "interleaved_prompt", "answer"}) {
            if (r.contains(key) && r.at(key).is_string()) {
                corpus.push_back(r.at(key).get<std::string>());
            }
        }
    }
    return Vocabulary::build(corpus, static_cast<std::size_t>(vocab_max));
}

bool parse_interleaved(const std::string& format) {
    if (format == "interleaved") return true;
    if (format == "noninterleaved") return false;
    throw ConfigError("unknown format \"" + format +
                      "\" (expected interleaved|noninterleaved)");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

int cmd_fixture(const CommonFlags& flags, int words, int clips) {
    return guarded([&] {
        RunConfig rc = effective_config(flags);
        if (words > 0) rc.fixture_words = words;
        if (clips > 0) rc.fixture_clips = clips;
        rc.validate();
        const std::string dir = resolve_out_dir(flags, rc);
        fs::create_directories(dir);

        const auto items = build_shard_fixture(dir, rc.frontend, rc.seed,
                                               rc.fixture_words,
                                               rc.fixture_clips);
        std::vector<Json> item_rows;
        item_rows.reserve(items.size());
        for (const ShardItem& it : items) item_rows.push_back(it.to_json());
        write_jsonl(dir + "/items.jsonl", item_rows);

        const auto sources = make_source_records(dir, rc.frontend, rc.seed,
                                                 rc.fixture_words,
                                                 rc.fixture_clips);
        std::vector<Json> source_rows;
        source_rows.reserve(sources.size());
        for (const SourceRecord& s : sources) source_rows.push_back(s.to_json());
        write_jsonl(dir + "/sources.jsonl", source_rows);

        rc.save(dir + "/config.json");
        std::printf("wrote %zu eval items, %zu source records under %s\n",
                    items.size(), sources.size(), dir.c_str());
    });
}

int cmd_forge(const CommonFlags& flags, const std::string& in_path,
              const std::string& out_path, const std::string& quarantine_path,
              const std::string& backend) {
    return guarded([&] {
        RunConfig rc = effective_config(flags);
        if (!backend.empty()) rc.forge.backend = backend;

        std::vector<SourceRecord> sources;
        for (const Json& row : read_dataset(in_path)) {
            sources.push_back(SourceRecord::from_json(row));
        }

        const TemplateBank bank = TemplateBank::standard();
        ForgeBatchResult result;
        if (rc.forge.backend == "offline") {
            result = forge_batch_offline(sources, bank, rc.seed);
        } else if (rc.forge.backend == "external") {
            HttpRephrasingClient client = HttpRephrasingClient::from_env();
            result = forge_batch_external(sources, client, bank, rc.seed,
                                          rc.forge.min_temperature,
                                          rc.forge.max_temperature);
        } else {
            throw ConfigError("unknown backend \"" + rc.forge.backend +
                              "\" (expected offline|external)");
        }

        if (auto parent = fs::path(out_path).parent_path(); !parent.empty()) {
            fs::create_directories(parent);
        }
        std::vector<Json> out_rows;
        out_rows.reserve(result.accepted.size());
        for (const ForgeRecord& r : result.accepted) {
            out_rows.push_back(r.to_json());
        }
        write_jsonl(out_path, out_rows);

        const std::string qpath = quarantine_path.empty()
                                      ? out_path + ".quarantine.jsonl"
                                      : quarantine_path;
        std::vector<Json> qrows;
        qrows.reserve(result.quarantined.size());
        for (const QuarantinedRecord& q : result.quarantined) {
            qrows.push_back(Json{{"source", q.source.to_json()},
                                 {"reason", q.reason}});
        }
        write_jsonl(qpath, qrows);

        std::printf("forged %zu records, quarantined %zu\n",
                    result.accepted.size(), result.quarantined.size());
    });
}

int cmd_train(const CommonFlags& flags, const std::string& data_path,
              const std::string& format, const std::string& resume_path) {
    return guarded([&] {
        RunConfig rc = effective_config(flags);
        const bool interleaved = parse_interleaved(format);
        const std::string dir = resolve_out_dir(flags, rc);
        fs::create_directories(dir);

        const std::vector<Json> records = read_dataset(data_path);

        std::optional<Checkpoint> resumed;
        std::optional<Model> fresh;
        std::optional<Vocabulary> built_vocab;
        if (!resume_path.empty()) {
            if (!fs::exists(resume_path)) {
                throw IoError("resume checkpoint not found: " + resume_path);
            }
            resumed = read_checkpoint(resume_path);
        } else {
            built_vocab = build_vocab(records, rc.vocab_max);
            if (rc.model.vocab_size == 0) {
                rc.model.vocab_size = static_cast<int>(built_vocab->size());
            } else if (rc.model.vocab_size <
                       static_cast<int>(built_vocab->size())) {
                throw ConfigError(
                    "model.vocab_size smaller than the built vocabulary (" +
                    std::to_string(built_vocab->size()) + " tokens)");
            }
            rc.validate();
            fresh.emplace(rc.model, rc.seed);
        }
        Model& model = resumed ? resumed->model : *fresh;
        const Vocabulary& vocab = resumed ? resumed->vocab : *built_vocab;

        const auto items =
            build_train_items(records, vocab, rc.frontend, interleaved);
        Trainer trainer(model, rc.train);
        const std::string ckpt = trainer.run(items, vocab, dir);
        rc.model = model.config();
        rc.save(dir + "/config.json");
        std::printf("wrote %s\n", ckpt.c_str());
    });
}

int cmd_eval(const CommonFlags& flags, const std::string& ckpt_path,
             const std::string& fixture_path, const std::string& format,
             std::optional<int> repeats) {
    return guarded([&] {
        RunConfig rc = effective_config(flags);
        const bool interleaved = parse_interleaved(format);
        if (repeats) rc.eval.repeats = *repeats;
        rc.validate();
        const std::string dir = resolve_out_dir(flags, rc);
        fs::create_directories(dir);

        Checkpoint ckpt = read_checkpoint(ckpt_path);
        // the checkpoint owns the model geometry; the frontend must agree
        rc.frontend.d_model = ckpt.model.config().d_model;
        rc.frontend.d_audio = ckpt.model.config().d_audio;

        std::vector<ShardItem> items;
        for (const Json& row : read_dataset(fixture_path)) {
            items.push_back(ShardItem::from_json(row));
        }

        EvalOptions opt;
        opt.interleaved = interleaved;
        opt.repeats = rc.eval.repeats;
        opt.temperature = rc.eval.temperature;
        opt.max_new_tokens = rc.eval.max_new_tokens;
        opt.seed = rc.seed;
        EvalOutcome outcome =
            run_eval(ckpt.model, ckpt.vocab, rc.frontend, items, opt);

        const std::string rendered = render_report(outcome.report, format);
        write_text(dir + "/report.txt", rendered);
        write_text(dir + "/report.json",
                   report_to_json(outcome.report, format).dump(2) + "\n");
        write_jsonl(dir + "/trace.jsonl", outcome.trace);
        std::fputs(rendered.c_str(), stdout);
    });
}

int cmd_report(const std::string& in_path, const std::string& out_path) {
    return guarded([&] {
        std::ifstream in(in_path, std::ios::binary);
        if (!in) throw IoError("cannot read " + in_path);
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw ParseError(in_path + ": " + e.what());
        }
        auto [report, condition] = report_from_json(j);
        const std::string rendered = render_report(report, condition);
        if (!out_path.empty()) write_text(out_path, rendered);
        std::fputs(rendered.c_str(), stdout);
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interleaved audio instruction-tuning pipeline"};
    app.require_subcommand(1);

    CommonFlags fixture_flags;
    int fixture_words = 0, fixture_clips = 0;
    CLI::App* fixture = app.add_subcommand(
        "fixture", "Generate the synthetic benchmark and source records");
    add_common(fixture, fixture_flags);
    fixture->add_option("--words", fixture_words, "Words to draw (default 12)");
    fixture->add_option("--clips", fixture_clips, "Clips per word (default 4)");

    CommonFlags forge_flags;
    std::string forge_in, forge_out, forge_quarantine, forge_backend;
    CLI::App* forge =
        app.add_subcommand("forge", "Rewrite source prompts into interleaved form");
    add_common(forge, forge_flags);
    forge->add_option("--in", forge_in, "Source records (JSONL)")->required();
    forge->add_option("--out", forge_out, "Forged records (JSONL)")->required();
    forge->add_option("--quarantine", forge_quarantine,
                      "Rejected records (default: <out>.quarantine.jsonl)");
    forge->add_option("--backend", forge_backend, "offline|external");

    CommonFlags train_flags;
    std::string train_data, train_format = "interleaved", train_resume;
    CLI::App* train = app.add_subcommand("train", "Fine-tune on a forged dataset");
    add_common(train, train_flags);
    train->add_option("--data", train_data, "Training records (JSONL)")
        ->required();
    train->add_option("--format", train_format, "interleaved|noninterleaved");
    train->add_option("--resume", train_resume, "Checkpoint to continue from");

    CommonFlags eval_flags;
    std::string eval_ckpt, eval_fixture, eval_format = "interleaved";
    std::optional<int> eval_repeats;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "Score a checkpoint on the benchmark");
    add_common(eval_cmd, eval_flags);
    eval_cmd->add_option("--ckpt", eval_ckpt, "Model checkpoint")->required();
    eval_cmd->add_option("--fixture", eval_fixture, "Benchmark items (JSONL)")
        ->required();
    eval_cmd->add_option("--format", eval_format, "interleaved|noninterleaved");
    eval_cmd->add_option("--repeats", eval_repeats,
                         "Prompt repetitions per item (default 4)");

    std::string report_in, report_out;
    CLI::App* report =
        app.add_subcommand("report", "Render a metrics JSON as a table");
    report->add_option("--in", report_in, "Metrics report (JSON)")->required();
    report->add_option("--out", report_out, "Also write the table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (fixture->parsed()) {
        return cmd_fixture(fixture_flags, fixture_words, fixture_clips);
    }
    if (forge->parsed()) {
        return cmd_forge(forge_flags, forge_in, forge_out, forge_quarantine,
                         forge_backend);
    }
    if (train->parsed()) {
        return cmd_train(train_flags, train_data, train_format, train_resume);
    }
    if (eval_cmd->parsed()) {
        return cmd_eval(eval_flags, eval_ckpt, eval_fixture, eval_format,
                        eval_repeats);
    }
    if (report->parsed()) return cmd_report(report_in, report_out);
    return kExitUsage;
}
