#include "weave/sequence.hpp"

#include <algorithm>

namespace weave {

namespace {

void append_text(std::vector<Position>& out, const std::vector<TokenId>& ids,
                 Source source) {
    for (TokenId id : ids) {
        Position p;
        p.kind = Kind::Text;
        p.source = source;
        p.token_id = id;
        out.push_back(p);
    }
}

void append_audio_run(std::vector<Position>& out, int K, int block_id) {
    for (int s = 0; s < K; ++s) {
        Position p;
        p.kind = Kind::Audio;
        p.source = Source::Audio;
        p.audio_slot = s;
        p.block_id = block_id;
        out.push_back(p);
    }
}

// label[n] targets x_{n+1}; defined only when both ends are text.
void fill_labels(std::vector<Position>& pos) {
    for (std::size_t n = 0; n + 1 < pos.size(); ++n) {
        if (pos[n].kind == Kind::Text && pos[n + 1].kind == Kind::Text) {
            pos[n].label = pos[n + 1].token_id;
        }
    }
}

} // namespace

TokenSequence build_noninterleaved(const std::vector<TokenId>& prompt_ids,
                                   const std::vector<TokenId>& answer_ids,
                                   const AudioEmbeddingBlock& block) {
    for (TokenId id : prompt_ids) {
        if (id == Vocabulary::kAudioPlaceholder) {
            throw PlaceholderInNonInterleaved(
                "non-interleaved prompt contains the [AUDIO] placeholder");
        }
    }
    TokenSequence seq;
    const int K = static_cast<int>(block.slots.rows());
    append_audio_run(seq.positions, K, 0);
    append_text(seq.positions, prompt_ids, Source::Prompt);
    append_text(seq.positions, answer_ids, Source::Answer);
    fill_labels(seq.positions);
    return seq;
}

TokenSequence build_interleaved(
    const std::vector<TokenId>& prompt_ids_with_placeholder,
    const std::vector<TokenId>& answer_ids, const AudioEmbeddingBlock& block,
    bool allow_multiple) {
    const auto n_placeholders = std::count(
        prompt_ids_with_placeholder.begin(),
        prompt_ids_with_placeholder.end(), Vocabulary::kAudioPlaceholder);
    if (n_placeholders == 0) {
        throw MissingPlaceholder(
            "interleaved prompt has no [AUDIO] placeholder");
    }
    if (!allow_multiple && n_placeholders > 1) {
        throw ExtraPlaceholder("interleaved prompt has " +
                               std::to_string(n_placeholders) +
                               " [AUDIO] placeholders, expected exactly 1");
    }
    TokenSequence seq;
    const int K = static_cast<int>(block.slots.rows());
    int block_id = 0;
    for (TokenId id : prompt_ids_with_placeholder) {
        if (id == Vocabulary::kAudioPlaceholder) {
            append_audio_run(seq.positions, K, block_id++);
        } else {
            Position p;
            p.kind = Kind::Text;
            p.source = Source::Prompt;
            p.token_id = id;
            seq.positions.push_back(p);
        }
    }
    append_text(seq.positions, answer_ids, Source::Answer);
    fill_labels(seq.positions);
    return seq;
}

Tensor assemble_embeddings(Tape* tape, const TokenSequence& seq,
                           const Tensor& embed_table,
                           const std::vector<AudioEmbeddingBlock>& blocks) {
    const Dim N = static_cast<Dim>(seq.size());
    const Dim d = embed_table.cols();
    const Dim V = embed_table.rows();
    for (const AudioEmbeddingBlock& b : blocks) {
        if (b.slots.cols() != d) {
            throw ShapeError("assemble: block width " +
                             shape_str(b.slots.shape()) +
                             " does not match embedding width " +
                             shape_str(embed_table.shape()));
        }
    }
    Tensor out = Tensor::zeros({N, d});
    for (Dim n = 0; n < N; ++n) {
        const Position& p = seq.positions[static_cast<std::size_t>(n)];
        if (p.kind == Kind::Text) {
            if (p.token_id < 0 || p.token_id >= V) {
                throw IndexError("assemble: token id " +
                                 std::to_string(p.token_id) +
                                 " outside vocab of " + std::to_string(V));
            }
            for (Dim j = 0; j < d; ++j) {
                out.at(n, j) = embed_table.at(p.token_id, j);
            }
        } else {
            if (p.block_id < 0 ||
                static_cast<std::size_t>(p.block_id) >= blocks.size()) {
                throw IndexError("assemble: block id " +
                                 std::to_string(p.block_id) +
                                 " but only " + std::to_string(blocks.size()) +
                                 " blocks supplied");
            }
            const Tensor& slots = blocks[static_cast<std::size_t>(p.block_id)].slots;
            if (p.audio_slot < 0 || p.audio_slot >= slots.rows()) {
                throw IndexError("assemble: audio slot " +
                                 std::to_string(p.audio_slot) +
                                 " outside block of " +
                                 std::to_string(slots.rows()));
            }
            for (Dim j = 0; j < d; ++j) {
                out.at(n, j) = slots.at(p.audio_slot, j);
            }
        }
    }

    bool any_grad = embed_table.requires_grad();
    for (const AudioEmbeddingBlock& b : blocks) {
        any_grad = any_grad || b.slots.requires_grad();
    }
    if (tape && any_grad) {
        out.set_requires_grad(true);
        Tensor table_c = embed_table;
        std::vector<Tensor> block_c;
        block_c.reserve(blocks.size());
        for (const AudioEmbeddingBlock& b : blocks) block_c.push_back(b.slots);
        TokenSequence seq_c = seq;
        Tensor out_c = out;
        tape->record([table_c, block_c, seq_c, out_c, N, d]() mutable {
            if (!out_c.has_grad()) return;
            const auto& go = out_c.grad();
            for (Dim n = 0; n < N; ++n) {
                const Position& p = seq_c.positions[static_cast<std::size_t>(n)];
                if (p.kind == Kind::Text) {
                    if (!table_c.requires_grad()) continue;
                    auto& gt = table_c.grad();
                    for (Dim j = 0; j < d; ++j) {
                        gt[static_cast<std::size_t>(p.token_id * d + j)] +=
                            go[static_cast<std::size_t>(n * d + j)];
                    }
                } else {
                    Tensor& slots = block_c[static_cast<std::size_t>(p.block_id)];
                    if (!slots.requires_grad()) continue;
                    auto& gb = slots.grad();
                    for (Dim j = 0; j < d; ++j) {
                        gb[static_cast<std::size_t>(p.audio_slot * d + j)] +=
                            go[static_cast<std::size_t>(n * d + j)];
                    }
                }
            }
        });
    }
    return out;
}

Tensor assemble_embeddings(Tape* tape, const TokenSequence& seq,
                           const Tensor& embed_table,
                           const AudioEmbeddingBlock& block) {
    return assemble_embeddings(tape, seq, embed_table,
                               std::vector<AudioEmbeddingBlock>{block});
}

std::vector<TokenId> supervision_labels(const TokenSequence& seq,
                                        bool mask_prompt_text) {
    std::vector<TokenId> labels(seq.size(), ops::kIgnoreIndex);
    for (std::size_t n = 0; n + 1 < seq.size(); ++n) {
        const Position& here = seq.positions[n];
        const Position& next = seq.positions[n + 1];
        if (here.kind != Kind::Text || next.kind != Kind::Text) continue;
        if (mask_prompt_text && next.source == Source::Prompt) continue;
        labels[n] = next.token_id;
    }
    return labels;
}

std::vector<TokenId> text_ids(const TokenSequence& seq) {
    std::vector<TokenId> ids;
    for (const Position& p : seq.positions) {
        if (p.kind == Kind::Text) ids.push_back(p.token_id);
    }
    return ids;
}

} // namespace weave
