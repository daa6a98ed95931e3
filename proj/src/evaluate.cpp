#include "weave/evaluate.hpp"

#include <cstdio>
#include <map>

#include "weave/sequence.hpp"

namespace weave {

namespace {

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    while (s.size() < width) s.push_back(' ');
    return s;
}

Json relation_json(const RelationMetrics& m) {
    return Json{{"tp", m.tp},
                {"fp", m.fp},
                {"tn", m.tn},
                {"fn", m.fn},
                {"unparsed_count", m.unparsed_count},
                {"accuracy", m.accuracy},
                {"precision", m.precision},
                {"precision_defined", m.precision_defined},
                {"recall", m.recall},
                {"recall_defined", m.recall_defined},
                {"f1", m.f1},
                {"f1_defined", m.f1_defined}};
}

} // namespace

EvalOutcome run_eval(Model& model, const Vocabulary& vocab,
                     const FrontendConfig& fcfg,
                     const std::vector<ShardItem>& items,
                     const EvalOptions& opt) {
    const auto queries = build_queries(items, opt.interleaved, opt.repeats);
    // clips repeat across items: encode each feature file once
    std::map<std::string, Tensor> feature_cache;
    auto features_for = [&](const AudioClipRef& clip) -> const Tensor& {
        auto it = feature_cache.find(clip.feature_path);
        if (it == feature_cache.end()) {
            it = feature_cache
                     .emplace(clip.feature_path, encode_audio(clip, fcfg))
                     .first;
        }
        return it->second;
    };

    Rng seed_rng(opt.seed);
    std::vector<RelationTrial> syn_trials, hyp_trials;
    long long identity_total = 0, identity_correct = 0;
    EvalOutcome out;
    for (const Query& q : queries) {
        const ShardItem& item = items[q.item_index];
        const std::uint64_t query_seed = seed_rng.next_u64();
        AudioEmbeddingBlock block =
            model.project_audio(nullptr, features_for(item.audio));

        std::vector<TokenId> prompt_ids = {Vocabulary::kBos};
        for (TokenId id : vocab.encode(q.prompt)) prompt_ids.push_back(id);
        TokenSequence seq =
            opt.interleaved
                ? build_interleaved(prompt_ids, {}, block)
                : build_noninterleaved(prompt_ids, {}, block);
        const std::string response =
            model.generate(seq, block, opt.max_new_tokens, opt.temperature,
                           query_seed, vocab);

        Json row{{"item", q.item_index},
                 {"repeat", q.repeat},
                 {"word", item.word},
                 {"relation", relation_name(item.relation)},
                 {"prompt", q.prompt},
                 {"response", response}};
        if (item.relation == Relation::Identity) {
            const bool hit = score_identity(response, {item.truth});
            ++identity_total;
            identity_correct += hit;
            row["correct"] = hit;
        } else {
            const Decision d = extract_decision(response);
            RelationTrial trial{d, item.truth == "Yes"};
            (item.relation == Relation::Synonym ? syn_trials : hyp_trials)
                .push_back(trial);
            row["parsed"] = d.parsed == Parsed::Yes   ? "Yes"
                            : d.parsed == Parsed::No ? "No"
                                                     : "Unparsed";
            row["truth"] = item.truth;
        }
        out.trace.push_back(std::move(row));
    }
    out.report = compute_metrics(syn_trials, hyp_trials, identity_correct,
                                 identity_total);
    return out;
}

std::string render_report(const MetricsReport& report,
                          const std::string& condition) {
    std::string s;
    s += "Condition: " + condition + "\n";
    s += pad("Task", 10) + pad("Accuracy", 10) + pad("Precision", 11) +
         pad("Recall", 8) + pad("F1", 8) + "Unparsed\n";
    auto row = [&](const std::string& name, const RelationMetrics& m) {
        s += pad(name, 10) + pad(pct(m.accuracy), 10) +
             pad(m.precision_defined ? pct(m.precision) : "0.00*", 11) +
             pad(m.recall_defined ? pct(m.recall) : "0.00*", 8) +
             pad(m.f1_defined ? pct(m.f1) : "0.00*", 8) +
             std::to_string(m.unparsed_count) + "\n";
    };
    row("Synonym", report.synonym);
    row("Hypernym", report.hypernym);
    s += pad("Identity", 10) + pad(pct(report.identity_accuracy), 10) +
         pad("-", 11) + pad("-", 8) + pad("-", 8) + "-\n";
    s += "(* zero-denominator metric reported as 0)\n";
    return s;
}

Json report_to_json(const MetricsReport& report,
                    const std::string& condition) {
    return Json{{"condition", condition},
                {"synonym", relation_json(report.synonym)},
                {"hypernym", relation_json(report.hypernym)},
                {"identity",
                 {{"total", report.identity_total},
                  {"correct", report.identity_correct},
                  {"accuracy", report.identity_accuracy}}}};
}

namespace {

RelationMetrics relation_from_json(const Json& j) {
    require_keys(j,
                 {"tp", "fp", "tn", "fn", "unparsed_count", "accuracy",
                  "precision", "recall", "f1", "precision_defined",
                  "recall_defined", "f1_defined"},
                 "relation metrics");
    RelationMetrics m;
    m.tp = j.at("tp").get<long long>();
    m.fp = j.at("fp").get<long long>();
    m.tn = j.at("tn").get<long long>();
    m.fn = j.at("fn").get<long long>();
    m.unparsed_count = j.at("unparsed_count").get<long long>();
    m.accuracy = j.at("accuracy").get<double>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.precision_defined = j.at("precision_defined").get<bool>();
    m.recall_defined = j.at("recall_defined").get<bool>();
    m.f1_defined = j.at("f1_defined").get<bool>();
    return m;
}

} // namespace

std::pair<MetricsReport, std::string> report_from_json(const Json& j) {
    require_keys(j, {"condition", "synonym", "hypernym", "identity"},
                 "metrics report");
    MetricsReport report;
    report.synonym = relation_from_json(j.at("synonym"));
    report.hypernym = relation_from_json(j.at("hypernym"));
    const Json& id = j.at("identity");
    require_keys(id, {"total", "correct", "accuracy"}, "identity metrics");
    report.identity_total = id.at("total").get<long long>();
    report.identity_correct = id.at("correct").get<long long>();
    report.identity_accuracy = id.at("accuracy").get<double>();
    return {report, j.at("condition").get<std::string>()};
}

} // namespace weave
