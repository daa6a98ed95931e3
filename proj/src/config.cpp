#include "weave/config.hpp"

#include <fstream>

namespace weave {

namespace {

// tolerate partial objects: only named keys override defaults
template <typename T>
void get_if(const Json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

void RunConfig::validate() const {
    frontend.validate();
    if (frontend.d_model != model.d_model) {
        throw ConfigError("config: frontend d_model " +
                          std::to_string(frontend.d_model) +
                          " != model d_model " +
                          std::to_string(model.d_model));
    }
    if (frontend.d_audio != model.d_audio) {
        throw ConfigError("config: frontend d_audio " +
                          std::to_string(frontend.d_audio) +
                          " != model d_audio " +
                          std::to_string(model.d_audio));
    }
    if (model.d_model % model.n_heads != 0) {
        throw ConfigError("config: d_model " + std::to_string(model.d_model) +
                          " not divisible by n_heads " +
                          std::to_string(model.n_heads));
    }
    train.validate();
    if (forge.backend != "offline" && forge.backend != "external") {
        throw ConfigError("config: unknown forge backend '" + forge.backend +
                          "'");
    }
    if (forge.min_temperature > forge.max_temperature) {
        throw ConfigError("config: forge temperature bounds inverted");
    }
    if (eval.repeats < 1) throw ConfigError("config: eval repeats < 1");
    if (eval.temperature < 0) {
        throw ConfigError("config: eval temperature < 0");
    }
    if (eval.max_new_tokens < 0) {
        throw ConfigError("config: eval max_new_tokens < 0");
    }
    if (vocab_max < 5) throw ConfigError("config: vocab_max < 5");
    if (fixture_words < 1 || fixture_clips < 1) {
        throw ConfigError("config: fixture sizes must be >= 1");
    }
}

RunConfig RunConfig::from_json(const Json& j) {
    RunConfig c;
    if (j.contains("frontend")) {
        const Json& f = j["frontend"];
        get_if(f, "audio_slot_count", c.frontend.audio_slot_count);
        get_if(f, "d_audio", c.frontend.d_audio);
        get_if(f, "d_model", c.frontend.d_model);
    }
    if (j.contains("model")) {
        const Json& m = j["model"];
        get_if(m, "vocab_size", c.model.vocab_size);
        get_if(m, "d_model", c.model.d_model);
        get_if(m, "n_layers", c.model.n_layers);
        get_if(m, "n_heads", c.model.n_heads);
        get_if(m, "d_ff", c.model.d_ff);
        get_if(m, "max_seq_len", c.model.max_seq_len);
        get_if(m, "lora_rank", c.model.lora_rank);
        get_if(m, "lora_alpha", c.model.lora_alpha);
        get_if(m, "d_audio", c.model.d_audio);
    }
    if (j.contains("train")) {
        const Json& t = j["train"];
        get_if(t, "batch_size", c.train.batch_size);
        get_if(t, "learning_rate", c.train.learning_rate);
        get_if(t, "steps", c.train.steps);
        get_if(t, "seed", c.train.seed);
        if (t.contains("loss_reduction")) {
            const std::string r = t["loss_reduction"].get<std::string>();
            if (r == "mean") {
                c.train.loss_reduction = ops::Reduction::Mean;
            } else if (r == "sum") {
                c.train.loss_reduction = ops::Reduction::Sum;
            } else {
                throw ConfigError("config: loss_reduction must be mean|sum");
            }
        }
        get_if(t, "mask_prompt_text", c.train.mask_prompt_text);
        get_if(t, "freeze_projection", c.train.freeze_projection);
        get_if(t, "freeze_backbone", c.train.freeze_backbone);
        get_if(t, "train_norm_gains", c.train.train_norm_gains);
        get_if(t, "checkpoint_every", c.train.checkpoint_every);
    }
    if (j.contains("forge")) {
        const Json& f = j["forge"];
        get_if(f, "backend", c.forge.backend);
        get_if(f, "min_temperature", c.forge.min_temperature);
        get_if(f, "max_temperature", c.forge.max_temperature);
    }
    if (j.contains("eval")) {
        const Json& e = j["eval"];
        get_if(e, "repeats", c.eval.repeats);
        get_if(e, "temperature", c.eval.temperature);
        get_if(e, "max_new_tokens", c.eval.max_new_tokens);
    }
    get_if(j, "seed", c.seed);
    get_if(j, "vocab_max", c.vocab_max);
    get_if(j, "fixture_words", c.fixture_words);
    get_if(j, "fixture_clips", c.fixture_clips);
    c.validate();
    return c;
}

Json RunConfig::to_json() const {
    return Json{
        {"frontend",
         {{"audio_slot_count", frontend.audio_slot_count},
          {"d_audio", frontend.d_audio},
          {"d_model", frontend.d_model}}},
        {"model",
         {{"vocab_size", model.vocab_size},
          {"d_model", model.d_model},
          {"n_layers", model.n_layers},
          {"n_heads", model.n_heads},
          {"d_ff", model.d_ff},
          {"max_seq_len", model.max_seq_len},
          {"lora_rank", model.lora_rank},
          {"lora_alpha", model.lora_alpha},
          {"d_audio", model.d_audio}}},
        {"train",
         {{"batch_size", train.batch_size},
          {"learning_rate", train.learning_rate},
          {"steps", train.steps},
          {"seed", train.seed},
          {"loss_reduction",
           train.loss_reduction == ops::Reduction::Mean ? "mean" : "sum"},
          {"mask_prompt_text", train.mask_prompt_text},
          {"freeze_projection", train.freeze_projection},
          {"freeze_backbone", train.freeze_backbone},
          {"train_norm_gains", train.train_norm_gains},
          {"checkpoint_every", train.checkpoint_every}}},
        {"forge",
         {{"backend", forge.backend},
          {"min_temperature", forge.min_temperature},
          {"max_temperature", forge.max_temperature}}},
        {"eval",
         {{"repeats", eval.repeats},
          {"temperature", eval.temperature},
          {"max_new_tokens", eval.max_new_tokens}}},
        {"seed", seed},
        {"vocab_max", vocab_max},
        {"fixture_words", fixture_words},
        {"fixture_clips", fixture_clips}};
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config load: cannot open " + path);
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    const Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw ParseError("config load: " + path + " is not a JSON object");
    }
    return from_json(j);
}

void RunConfig::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("config save: cannot open " + path);
    out << to_json().dump(2) << '\n';
    if (!out) throw IoError("config save: write failed for " + path);
}

} // namespace weave
