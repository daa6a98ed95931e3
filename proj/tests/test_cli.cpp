#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "weave/config.hpp"
#include "weave/jsonl.hpp"

using namespace weave;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

std::size_t count_lines(const std::string& path) {
    const std::string text = slurp(path);
    std::size_t n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

struct Workspace {
    fs::path dir;
    Workspace() : dir(fs::temp_directory_path() / "weave_cli_ws") {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }

    std::string path(const std::string& rel) const {
        return (dir / rel).string();
    }

    RunResult run(const std::string& args) const {
        const std::string out_f = path("_stdout.txt");
        const std::string err_f = path("_stderr.txt");
        const std::string cmd = std::string(WEAVE_CLI_PATH) + " " + args +
                                " >" + out_f + " 2>" + err_f;
        const int rc = std::system(cmd.c_str());
        RunResult r;
        r.code = rc == -1 ? -1 : WEXITSTATUS(rc);
        r.out = slurp(out_f);
        r.err = slurp(err_f);
        return r;
    }

    // desk-sized run config so train/eval finish in well under a second
    std::string write_small_config(std::uint64_t seed = 5) const {
        RunConfig rc;
        rc.seed = seed;
        rc.fixture_words = 3;
        rc.fixture_clips = 1;
        rc.frontend.audio_slot_count = 2;
        rc.frontend.d_audio = 8;
        rc.frontend.d_model = 16;
        rc.model.d_model = 16;
        rc.model.n_layers = 1;
        rc.model.n_heads = 2;
        rc.model.d_ff = 32;
        rc.model.max_seq_len = 64;
        rc.model.lora_rank = 2;
        rc.model.lora_alpha = 4.0;
        rc.model.d_audio = 8;
        rc.train.steps = 5;
        rc.train.batch_size = 4;
        rc.eval.max_new_tokens = 8;
        const std::string p = path("cfg.json");
        rc.save(p);
        return p;
    }
};

} // namespace

TEST_CASE("help works and bad invocations exit with usage code") {
    Workspace ws;
    const RunResult help = ws.run("--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("fixture") != std::string::npos);
    CHECK(help.out.find("forge") != std::string::npos);
    CHECK(help.out.find("eval") != std::string::npos);

    CHECK(ws.run("").code == 64);               // a subcommand is required
    CHECK(ws.run("transmogrify").code == 64);   // unknown subcommand
    CHECK(ws.run("forge --out x.jsonl").code == 64); // missing required --in
    CHECK(ws.run("fixture --no-such-flag").code == 64);
}

TEST_CASE("fixture, forge, train, eval, report chain end to end") {
    Workspace ws;
    const std::string cfg = ws.write_small_config();

    const RunResult fix = ws.run("fixture --config " + cfg + " --out-dir " +
                                 ws.path("fix"));
    CAPTURE(fix.err);
    REQUIRE(fix.code == 0);
    CHECK(fix.out.find("wrote 27 eval items, 15 source records") !=
          std::string::npos);
    CHECK(count_lines(ws.path("fix/items.jsonl")) == 27); // 3 words x 9
    CHECK(count_lines(ws.path("fix/sources.jsonl")) == 15); // 3 words x 5
    CHECK(fs::exists(ws.path("fix/config.json")));

    // the saved config is reloadable and keeps the run parameters
    const RunConfig saved = RunConfig::load(ws.path("fix/config.json"));
    CHECK(saved.seed == 5);
    CHECK(saved.fixture_words == 3);
    CHECK(saved.model.d_model == 16);

    const RunResult forge =
        ws.run("forge --config " + cfg + " --in " + ws.path("fix/sources.jsonl") +
               " --out " + ws.path("forged.jsonl"));
    CAPTURE(forge.err);
    REQUIRE(forge.code == 0);
    CHECK(forge.out.find("forged 15 records, quarantined 0") !=
          std::string::npos);
    CHECK(count_lines(ws.path("forged.jsonl")) == 15);
    CHECK(fs::exists(ws.path("forged.jsonl.quarantine.jsonl")));
    CHECK(count_lines(ws.path("forged.jsonl.quarantine.jsonl")) == 0);

    // every forged prompt is interleaved and sourced from our records
    for (const Json& row : read_jsonl(ws.path("forged.jsonl"), true).records) {
        CHECK(row.at("interleaved_prompt").get<std::string>().find("[AUDIO]") !=
              std::string::npos);
        CHECK(row.at("backend") == "offline");
    }

    const RunResult train =
        ws.run("train --config " + cfg + " --data " + ws.path("forged.jsonl") +
               " --out-dir " + ws.path("run1"));
    CAPTURE(train.err);
    REQUIRE(train.code == 0);
    CHECK(train.out.find("wrote ") != std::string::npos);
    CHECK(fs::exists(ws.path("run1/model.ckpt")));
    CHECK(count_lines(ws.path("run1/train.log")) == 5); // one line per step
    CHECK(fs::exists(ws.path("run1/config.json")));

    const std::string eval_args = "eval --config " + cfg + " --ckpt " +
                                  ws.path("run1/model.ckpt") + " --fixture " +
                                  ws.path("fix/items.jsonl") + " --repeats 1";
    const RunResult ev = ws.run(eval_args + " --out-dir " + ws.path("eval1"));
    CAPTURE(ev.err);
    REQUIRE(ev.code == 0);
    CHECK(ev.out.find("Condition: interleaved") != std::string::npos);
    CHECK(ev.out.find("Identity") != std::string::npos);
    CHECK(fs::exists(ws.path("eval1/report.txt")));
    CHECK(fs::exists(ws.path("eval1/report.json")));
    CHECK(count_lines(ws.path("eval1/trace.jsonl")) == 27); // items x 1 repeat

    // identical invocation, identical artifacts
    const RunResult ev2 = ws.run(eval_args + " --out-dir " + ws.path("eval2"));
    REQUIRE(ev2.code == 0);
    CHECK(slurp(ws.path("eval2/report.txt")) ==
          slurp(ws.path("eval1/report.txt")));
    CHECK(slurp(ws.path("eval2/trace.jsonl")) ==
          slurp(ws.path("eval1/trace.jsonl")));

    // the other arm exercises the non-interleaved builder
    const RunResult ni = ws.run("eval --config " + cfg + " --ckpt " +
                                ws.path("run1/model.ckpt") + " --fixture " +
                                ws.path("fix/items.jsonl") +
                                " --repeats 1 --format noninterleaved"
                                " --out-dir " +
                                ws.path("eval_ni"));
    CAPTURE(ni.err);
    REQUIRE(ni.code == 0);
    CHECK(ni.out.find("Condition: noninterleaved") != std::string::npos);

    const RunResult rep =
        ws.run("report --in " + ws.path("eval1/report.json"));
    REQUIRE(rep.code == 0);
    CHECK(rep.out == slurp(ws.path("eval1/report.txt")));

    // resuming from the checkpoint continues without rebuilding the vocab
    const RunResult resume =
        ws.run("train --config " + cfg + " --data " + ws.path("forged.jsonl") +
               " --resume " + ws.path("run1/model.ckpt") + " --out-dir " +
               ws.path("run2"));
    CAPTURE(resume.err);
    REQUIRE(resume.code == 0);
    CHECK(fs::exists(ws.path("run2/model.ckpt")));
}

TEST_CASE("seed flag overrides the configured seed") {
    Workspace ws;
    const std::string cfg = ws.write_small_config(5);
    const RunResult fix = ws.run("fixture --config " + cfg +
                                 " --seed 9 --out-dir " + ws.path("fix9"));
    REQUIRE(fix.code == 0);
    CHECK(RunConfig::load(ws.path("fix9/config.json")).seed == 9);
}

TEST_CASE("failures map to the documented exit codes") {
    Workspace ws;
    const std::string cfg = ws.write_small_config();

    SUBCASE("missing input data is a data error naming the path") {
        const RunResult r = ws.run("forge --in " + ws.path("nope.jsonl") +
                                   " --out " + ws.path("out.jsonl"));
        CHECK(r.code == 2);
        CHECK(r.err.find("nope.jsonl") != std::string::npos);
    }
    SUBCASE("unknown forge backend is a usage error") {
        Workspace inner;
        const std::string src = inner.path("src.jsonl");
        std::ofstream(src) << ""; // backend is checked before any forging
        const RunResult r = inner.run("forge --in " + src + " --out " +
                                      inner.path("out.jsonl") +
                                      " --backend telepathy");
        CHECK(r.code == 64);
        CHECK(r.err.find("telepathy") != std::string::npos);
    }
    SUBCASE("unknown eval format is a usage error") {
        const RunResult r = ws.run("eval --ckpt x.ckpt --fixture y.jsonl "
                                   "--format sideways");
        CHECK(r.code == 64);
        CHECK(r.err.find("sideways") != std::string::npos);
    }
    SUBCASE("missing resume checkpoint is a data error") {
        std::ofstream(ws.path("d.jsonl")) << "";
        const RunResult r =
            ws.run("train --config " + cfg + " --data " + ws.path("d.jsonl") +
                   " --resume " + ws.path("gone.ckpt") + " --out-dir " +
                   ws.path("r"));
        CHECK(r.code == 2);
        CHECK(r.err.find("resume checkpoint not found") != std::string::npos);
    }
    SUBCASE("missing eval checkpoint is a data error") {
        std::ofstream(ws.path("items.jsonl")) << "";
        const RunResult r = ws.run("eval --ckpt " + ws.path("gone.ckpt") +
                                   " --fixture " + ws.path("items.jsonl") +
                                   " --out-dir " + ws.path("e"));
        CHECK(r.code == 2);
    }
    SUBCASE("malformed config file is a data error") {
        std::ofstream(ws.path("bad.json")) << "{oops";
        const RunResult r = ws.run("fixture --config " + ws.path("bad.json") +
                                   " --out-dir " + ws.path("f"));
        CHECK(r.code == 2);
        CHECK(r.err.find("config load") != std::string::npos);
    }
    SUBCASE("invalid config values are a usage error") {
        RunConfig rc;
        rc.eval.repeats = -1;
        rc.save(ws.path("neg.json"));
        const RunResult r = ws.run("fixture --config " + ws.path("neg.json") +
                                   " --out-dir " + ws.path("g"));
        CHECK(r.code == 64);
        CHECK(r.err.find("repeats") != std::string::npos);
    }
    SUBCASE("report rejects non-JSON input") {
        std::ofstream(ws.path("trace.jsonl")) << "{\"a\":1}\n{\"b\":2}\n";
        CHECK(ws.run("report --in " + ws.path("trace.jsonl")).code == 2);
        CHECK(ws.run("report --in " + ws.path("gone.json")).code == 2);
    }
    SUBCASE("lenient dataset read warns but continues") {
        Workspace inner;
        const std::string cfg2 = inner.write_small_config();
        REQUIRE(inner.run("fixture --config " + cfg2 + " --out-dir " +
                          inner.path("fix"))
                    .code == 0);
        // append one broken line to the source records
        std::ofstream(inner.path("fix/sources.jsonl"), std::ios::app)
            << "{broken\n";
        const RunResult r = inner.run(
            "forge --config " + cfg2 + " --in " + inner.path("fix/sources.jsonl") +
            " --out " + inner.path("forged.jsonl"));
        CHECK(r.code == 0);
        CHECK(r.err.find("warning") != std::string::npos);
        CHECK(r.out.find("forged 15 records") != std::string::npos);
    }
}
