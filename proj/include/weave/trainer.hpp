#pragma once

#include <string>
#include <vector>

#include "weave/audio_frontend.hpp"
#include "weave/checkpoint.hpp"
#include "weave/jsonl.hpp"
#include "weave/model.hpp"
#include "weave/optim.hpp"
#include "weave/sequence.hpp"

namespace weave {

struct TrainConfig {
    int batch_size = 4;          // reference value 4
    double learning_rate = 1e-3; // reference 2e-5; desk default for the toy
    int steps = 200;
    std::uint64_t seed = 0;
    ops::Reduction loss_reduction = ops::Reduction::Mean;
    bool mask_prompt_text = false; // default: prompt text is supervised too
    bool freeze_projection = false;
    bool freeze_backbone = true;
    // The frozen random readout cannot sharpen its logits on its own (the
    // final rmsnorm caps the hidden norm), so norm gains train by default
    // alongside the adapters.
    bool train_norm_gains = true;
    int checkpoint_every = 0; // 0 = final checkpoint only

    void validate() const {
        if (batch_size < 1) throw ConfigError("train config: batch_size < 1");
        if (learning_rate <= 0) {
            throw ConfigError("train config: learning_rate must be > 0");
        }
        if (steps < 1) throw ConfigError("train config: steps < 1");
    }
};

// One dataset record, ready to train on: the prebuilt position sequence and
// the raw encoder output (re-projected through P every step since P trains).
struct TrainItem {
    TokenSequence seq;
    Tensor features; // [K × d_audio]
};

// Dataset records → train items. interleaved=true uses interleaved_prompt
// (placeholder expands in place), false uses original_prompt with the audio
// block prepended. BOS opens the text, EOS closes the answer.
std::vector<TrainItem> build_train_items(const std::vector<Json>& records,
                                         const Vocabulary& vocab,
                                         const FrontendConfig& fcfg,
                                         bool interleaved);

class Trainer {
public:
    Trainer(Model& model, TrainConfig cfg);

    // forward → masked loss → backward → Adam update. Deterministic given
    // fixed seed/config; throws NoSupervisedTokens on a fully masked batch
    // and DivergenceError (before touching the weights) on non-finite loss.
    double train_step(const std::vector<TrainItem>& batch);

    // Loss only, no tape and no update.
    double eval_loss(const std::vector<TrainItem>& items);

    // Seeded shuffled epochs for cfg.steps steps; appends "step<TAB>loss"
    // lines to out_dir/train.log and returns the final checkpoint path.
    std::string run(const std::vector<TrainItem>& items,
                    const Vocabulary& vocab, const std::string& out_dir);

    const TrainConfig& config() const { return cfg_; }

private:
    Model& model_;
    TrainConfig cfg_;
    Adam opt_;
};

} // namespace weave
