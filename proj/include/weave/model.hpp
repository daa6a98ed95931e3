#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "weave/audio_frontend.hpp"
#include "weave/ops.hpp"
#include "weave/rng.hpp"
#include "weave/sequence.hpp"
#include "weave/tokenizer.hpp"

namespace weave {

struct ModelConfig {
    int vocab_size = 0;
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    int d_ff = 128;
    int max_seq_len = 128;
    int lora_rank = 8;      // reference value 8
    double lora_alpha = 16; // reference value 16
    int d_audio = 16;       // input width of the audio projection P

    void validate() const;
};

// out = x·Wᵀ + (α/r)·x·Aᵀ·Bᵀ. B starts at zero so the adapted output
// equals the base output until training moves it.
struct LoraAdapter {
    Tensor A; // [r × d_in]
    Tensor B; // [d_out × r]
    double scale = 2.0; // α/r

    static LoraAdapter init(int d_in, int d_out, int rank, double alpha,
                            Rng& rng);
};

Tensor lora_apply(Tape* tape, const Tensor& x, const Tensor& base_w,
                  const LoraAdapter& adapter);

// Decoder-only transformer: per layer rmsnorm → causal attention (LoRA on
// q and v projections) → rmsnorm → SiLU MLP, with learned absolute position
// embeddings. Owns the audio projection P so one checkpoint carries the
// whole trainable state.
class Model {
public:
    struct Layer {
        Tensor attn_gain;
        Tensor wq, wk, wv, wo; // [d_model × d_model], x·Wᵀ convention
        LoraAdapter lora_q, lora_v;
        Tensor mlp_gain;
        Tensor w1, b1; // [d_ff × d_model], [d_ff]
        Tensor w2, b2; // [d_model × d_ff], [d_model]
    };

    Model(ModelConfig cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }

    // inputs [N × d_model] -> logits [N × vocab]; adds position embeddings
    // internally. N > max_seq_len → SeqLenError.
    Tensor forward(Tape* tape, const Tensor& inputs);

    // Assemble a token sequence (text rows from the embedding table, audio
    // rows from the block) and run forward.
    Tensor forward_seq(Tape* tape, const TokenSequence& seq,
                       const AudioEmbeddingBlock& block);

    // E_A features [K × d_audio] -> Z_A via the owned projection P.
    AudioEmbeddingBlock project_audio(Tape* tape, const Tensor& features);

    // Seeded autoregressive sampling; temperature 0 = greedy argmax. Stops
    // at EOS, max_new tokens, or the context limit. Returns decoded text of
    // the newly generated tokens only.
    std::string generate(const TokenSequence& prompt_seq,
                         const AudioEmbeddingBlock& block, int max_new,
                         double temperature, std::uint64_t seed,
                         const Vocabulary& vocab);

    // Marks the trainable set: LoRA adapters, plus the projection P unless
    // frozen, plus rmsnorm gains unless norm-gain training is off, plus the
    // whole backbone when freeze_backbone is false.
    void set_trainable(bool freeze_backbone, bool freeze_projection,
                       bool train_norm_gains);
    std::vector<Tensor> trainable_params() const;

    // Stable name → tensor view of every parameter, in serialization order.
    std::vector<std::pair<std::string, Tensor>> named_params();
    std::vector<std::pair<std::string, const Tensor*>> named_params() const;

    Tensor embed; // [V × d_model]
    Tensor pos;   // [max_seq_len × d_model]
    std::vector<Layer> layers;
    Tensor final_gain;
    Tensor w_out;  // [V × d_model]
    Tensor proj_w; // [d_audio × d_model]
    Tensor proj_b; // [d_model]

private:
    ModelConfig cfg_;
};

} // namespace weave
