#pragma once

#include <string>
#include <utility>
#include <vector>

#include "weave/config.hpp"
#include "weave/model.hpp"
#include "weave/shard.hpp"

namespace weave {

struct EvalOptions {
    bool interleaved = true;
    int repeats = 4;
    double temperature = 0.0;
    int max_new_tokens = 12;
    std::uint64_t seed = 0;
};

struct EvalOutcome {
    MetricsReport report;
    // one row per query: item index, repeat, prompt, response, parsed
    std::vector<Json> trace;
};

// Runs every query against the model and aggregates SHARD metrics.
EvalOutcome run_eval(Model& model, const Vocabulary& vocab,
                     const FrontendConfig& fcfg,
                     const std::vector<ShardItem>& items,
                     const EvalOptions& opt);

// Aligned plain-text table with percentage metrics (no paths, no
// timestamps: reports from identical runs are byte-identical).
std::string render_report(const MetricsReport& report,
                          const std::string& condition);

Json report_to_json(const MetricsReport& report, const std::string& condition);

// Inverse of report_to_json; second element is the condition string.
std::pair<MetricsReport, std::string> report_from_json(const Json& j);

} // namespace weave
