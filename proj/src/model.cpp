#include "weave/model.hpp"

#include <cmath>

namespace weave {

void ModelConfig::validate() const {
    if (vocab_size < 1) throw ConfigError("model config: vocab_size < 1");
    if (d_model < 1 || n_layers < 1 || n_heads < 1 || d_ff < 1 ||
        max_seq_len < 1 || d_audio < 1) {
        throw ConfigError("model config: all dims must be positive");
    }
    if (d_model % n_heads != 0) {
        throw ConfigError("model config: d_model " + std::to_string(d_model) +
                          " not divisible by n_heads " +
                          std::to_string(n_heads));
    }
    if (lora_rank < 1) throw ConfigError("model config: lora_rank < 1");
}

LoraAdapter LoraAdapter::init(int d_in, int d_out, int rank, double alpha,
                              Rng& rng) {
    LoraAdapter a;
    a.A = Tensor::randn({rank, d_in}, rng, 0.02);
    a.B = Tensor::zeros({d_out, rank}); // zero init: adapter starts inert
    a.scale = alpha / static_cast<double>(rank);
    return a;
}

Tensor lora_apply(Tape* tape, const Tensor& x, const Tensor& base_w,
                  const LoraAdapter& adapter) {
    Tensor base = ops::matmul_nt(tape, x, base_w);
    Tensor down = ops::matmul_nt(tape, x, adapter.A);    // [N × r]
    Tensor up = ops::matmul_nt(tape, down, adapter.B);   // [N × d_out]
    return ops::add(tape, base, ops::scale(tape, up, adapter.scale));
}

Model::Model(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng(seed);
    const int d = cfg_.d_model;
    const double w_sigma = 1.0 / std::sqrt(static_cast<double>(d));
    embed = Tensor::randn({cfg_.vocab_size, d}, rng, 0.02);
    pos = Tensor::randn({cfg_.max_seq_len, d}, rng, 0.02);
    for (int l = 0; l < cfg_.n_layers; ++l) {
        Layer layer;
        layer.attn_gain = Tensor::full({d}, 1.0);
        layer.wq = Tensor::randn({d, d}, rng, w_sigma);
        layer.wk = Tensor::randn({d, d}, rng, w_sigma);
        layer.wv = Tensor::randn({d, d}, rng, w_sigma);
        layer.wo = Tensor::randn({d, d}, rng, w_sigma);
        layer.lora_q =
            LoraAdapter::init(d, d, cfg_.lora_rank, cfg_.lora_alpha, rng);
        layer.lora_v =
            LoraAdapter::init(d, d, cfg_.lora_rank, cfg_.lora_alpha, rng);
        layer.mlp_gain = Tensor::full({d}, 1.0);
        layer.w1 = Tensor::randn({cfg_.d_ff, d}, rng, w_sigma);
        layer.b1 = Tensor::zeros({cfg_.d_ff});
        layer.w2 = Tensor::randn(
            {d, cfg_.d_ff}, rng,
            1.0 / std::sqrt(static_cast<double>(cfg_.d_ff)));
        layer.b2 = Tensor::zeros({d});
        layers.push_back(std::move(layer));
    }
    final_gain = Tensor::full({d}, 1.0);
    // small logit scale keeps the initial loss near ln(V)
    w_out = Tensor::randn({cfg_.vocab_size, d}, rng, 0.05);
    proj_w = Tensor::randn({cfg_.d_audio, d}, rng, 0.02);
    proj_b = Tensor::zeros({d});
}

Tensor Model::forward(Tape* tape, const Tensor& inputs) {
    const Dim N = inputs.rows();
    if (N > cfg_.max_seq_len) {
        throw SeqLenError("forward: sequence length " + std::to_string(N) +
                          " exceeds max_seq_len " +
                          std::to_string(cfg_.max_seq_len));
    }
    if (inputs.cols() != cfg_.d_model) {
        throw ShapeError("forward: input width " + shape_str(inputs.shape()) +
                         " does not match d_model " +
                         std::to_string(cfg_.d_model));
    }
    std::vector<TokenId> iota(static_cast<std::size_t>(N));
    for (Dim n = 0; n < N; ++n) iota[static_cast<std::size_t>(n)] = n;
    Tensor x = ops::add(tape, inputs, ops::embedding_rows(tape, pos, iota));

    const int hd = cfg_.d_model / cfg_.n_heads;
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));
    for (Layer& layer : layers) {
        Tensor h = ops::rmsnorm(tape, x, layer.attn_gain);
        Tensor q = lora_apply(tape, h, layer.wq, layer.lora_q);
        Tensor k = ops::matmul_nt(tape, h, layer.wk);
        Tensor v = lora_apply(tape, h, layer.wv, layer.lora_v);
        std::vector<Tensor> heads;
        heads.reserve(static_cast<std::size_t>(cfg_.n_heads));
        for (int i = 0; i < cfg_.n_heads; ++i) {
            Tensor qi = ops::slice_cols(tape, q, i * hd, hd);
            Tensor ki = ops::slice_cols(tape, k, i * hd, hd);
            Tensor vi = ops::slice_cols(tape, v, i * hd, hd);
            Tensor scores =
                ops::scale(tape, ops::matmul_nt(tape, qi, ki), inv_sqrt_hd);
            Tensor attn = ops::causal_softmax(tape, scores);
            heads.push_back(ops::matmul(tape, attn, vi));
        }
        Tensor cat = ops::concat_cols(tape, heads);
        x = ops::add(tape, x, ops::matmul_nt(tape, cat, layer.wo));

        Tensor h2 = ops::rmsnorm(tape, x, layer.mlp_gain);
        Tensor m = ops::add_bias(tape, ops::matmul_nt(tape, h2, layer.w1),
                                 layer.b1);
        m = ops::silu(tape, m);
        Tensor m2 =
            ops::add_bias(tape, ops::matmul_nt(tape, m, layer.w2), layer.b2);
        x = ops::add(tape, x, m2);
    }
    x = ops::rmsnorm(tape, x, final_gain);
    return ops::matmul_nt(tape, x, w_out);
}

Tensor Model::forward_seq(Tape* tape, const TokenSequence& seq,
                          const AudioEmbeddingBlock& block) {
    return forward(tape, assemble_embeddings(tape, seq, embed, block));
}

AudioEmbeddingBlock Model::project_audio(Tape* tape, const Tensor& features) {
    return project(tape, features, proj_w, proj_b);
}

std::string Model::generate(const TokenSequence& prompt_seq,
                            const AudioEmbeddingBlock& block, int max_new,
                            double temperature, std::uint64_t seed,
                            const Vocabulary& vocab) {
    if (temperature < 0.0) {
        throw ConfigError("generate: temperature must be >= 0");
    }
    Rng rng(seed);
    TokenSequence seq = prompt_seq;
    std::vector<TokenId> out_ids;
    const int V = cfg_.vocab_size;
    for (int step = 0; step < max_new; ++step) {
        if (static_cast<Dim>(seq.size()) >= cfg_.max_seq_len) break;
        Tensor logits = forward_seq(nullptr, seq, block);
        const Dim last = logits.rows() - 1;
        TokenId next = 0;
        if (temperature == 0.0) {
            double best = logits.at(last, 0);
            for (Dim t = 1; t < V; ++t) {
                if (logits.at(last, t) > best) {
                    best = logits.at(last, t);
                    next = t;
                }
            }
        } else {
            // softmax sample at the given temperature
            double mx = logits.at(last, 0);
            for (Dim t = 1; t < V; ++t) mx = std::max(mx, logits.at(last, t));
            std::vector<double> p(static_cast<std::size_t>(V));
            double z = 0.0;
            for (Dim t = 0; t < V; ++t) {
                p[static_cast<std::size_t>(t)] =
                    std::exp((logits.at(last, t) - mx) / temperature);
                z += p[static_cast<std::size_t>(t)];
            }
            double u = rng.uniform() * z;
            double acc = 0.0;
            next = V - 1;
            for (Dim t = 0; t < V; ++t) {
                acc += p[static_cast<std::size_t>(t)];
                if (u < acc) {
                    next = t;
                    break;
                }
            }
        }
        if (next == Vocabulary::kEos) break;
        out_ids.push_back(next);
        Position p;
        p.kind = Kind::Text;
        p.source = Source::Answer;
        p.token_id = next;
        seq.positions.push_back(p);
    }
    return vocab.decode(out_ids);
}

void Model::set_trainable(bool freeze_backbone, bool freeze_projection,
                          bool train_norm_gains) {
    for (auto& [name, t] : named_params()) t.set_requires_grad(false);
    if (!freeze_backbone) {
        for (auto& [name, t] : named_params()) t.set_requires_grad(true);
    }
    for (Layer& layer : layers) {
        layer.lora_q.A.set_requires_grad(true);
        layer.lora_q.B.set_requires_grad(true);
        layer.lora_v.A.set_requires_grad(true);
        layer.lora_v.B.set_requires_grad(true);
        if (train_norm_gains) {
            layer.attn_gain.set_requires_grad(true);
            layer.mlp_gain.set_requires_grad(true);
        }
    }
    if (train_norm_gains) final_gain.set_requires_grad(true);
    if (!freeze_projection) {
        proj_w.set_requires_grad(true);
        proj_b.set_requires_grad(true);
    }
}

std::vector<Tensor> Model::trainable_params() const {
    std::vector<Tensor> out;
    for (const auto& [name, t] : named_params()) {
        if (t->requires_grad()) out.push_back(*t);
    }
    return out;
}

std::vector<std::pair<std::string, Tensor>> Model::named_params() {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("embed", embed);
    out.emplace_back("pos", pos);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        Layer& layer = layers[l];
        out.emplace_back(p + "attn_gain", layer.attn_gain);
        out.emplace_back(p + "wq", layer.wq);
        out.emplace_back(p + "wk", layer.wk);
        out.emplace_back(p + "wv", layer.wv);
        out.emplace_back(p + "wo", layer.wo);
        out.emplace_back(p + "lora_q.A", layer.lora_q.A);
        out.emplace_back(p + "lora_q.B", layer.lora_q.B);
        out.emplace_back(p + "lora_v.A", layer.lora_v.A);
        out.emplace_back(p + "lora_v.B", layer.lora_v.B);
        out.emplace_back(p + "mlp_gain", layer.mlp_gain);
        out.emplace_back(p + "w1", layer.w1);
        out.emplace_back(p + "b1", layer.b1);
        out.emplace_back(p + "w2", layer.w2);
        out.emplace_back(p + "b2", layer.b2);
    }
    out.emplace_back("final_gain", final_gain);
    out.emplace_back("w_out", w_out);
    out.emplace_back("proj.w", proj_w);
    out.emplace_back("proj.b", proj_b);
    return out;
}

std::vector<std::pair<std::string, const Tensor*>> Model::named_params()
    const {
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.emplace_back("embed", &embed);
    out.emplace_back("pos", &pos);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        const Layer& layer = layers[l];
        out.emplace_back(p + "attn_gain", &layer.attn_gain);
        out.emplace_back(p + "wq", &layer.wq);
        out.emplace_back(p + "wk", &layer.wk);
        out.emplace_back(p + "wv", &layer.wv);
        out.emplace_back(p + "wo", &layer.wo);
        out.emplace_back(p + "lora_q.A", &layer.lora_q.A);
        out.emplace_back(p + "lora_q.B", &layer.lora_q.B);
        out.emplace_back(p + "lora_v.A", &layer.lora_v.A);
        out.emplace_back(p + "lora_v.B", &layer.lora_v.B);
        out.emplace_back(p + "mlp_gain", &layer.mlp_gain);
        out.emplace_back(p + "w1", &layer.w1);
        out.emplace_back(p + "b1", &layer.b1);
        out.emplace_back(p + "w2", &layer.w2);
        out.emplace_back(p + "b2", &layer.b2);
    }
    out.emplace_back("final_gain", &final_gain);
    out.emplace_back("w_out", &w_out);
    out.emplace_back("proj.w", &proj_w);
    out.emplace_back("proj.b", &proj_b);
    return out;
}

} // namespace weave
