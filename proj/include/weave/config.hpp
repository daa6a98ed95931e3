#pragma once

#include <string>

#include "weave/audio_frontend.hpp"
#include "weave/jsonl.hpp"
#include "weave/model.hpp"
#include "weave/trainer.hpp"

namespace weave {

struct ForgeSettings {
    std::string backend = "offline"; // offline | external
    double min_temperature = 0.7;
    double max_temperature = 1.1;
};

struct EvalSettings {
    int repeats = 4;         // reference protocol repeats each query 4 times
    double temperature = 0.0; // greedy by default: deterministic comparisons
    int max_new_tokens = 12;
};

// Merged configuration for the whole pipeline, loadable from a JSON file
// with command-line overrides.
struct RunConfig {
    FrontendConfig frontend;
    ModelConfig model; // vocab_size 0 = derive from the built vocabulary
    TrainConfig train;
    ForgeSettings forge;
    EvalSettings eval;
    std::uint64_t seed = 0;
    int vocab_max = 512;
    int fixture_words = 12;
    int fixture_clips = 4;

    // Cross-field consistency; throws ConfigError naming the mismatch.
    void validate() const;

    static RunConfig from_json(const Json& j);
    Json to_json() const;
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;
};

} // namespace weave
