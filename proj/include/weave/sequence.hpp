#pragma once

#include <vector>

#include "weave/audio_frontend.hpp"
#include "weave/ops.hpp"
#include "weave/tokenizer.hpp"

namespace weave {

enum class Kind { Text, Audio };
enum class Source { Prompt, Answer, Audio };

struct Position {
    Kind kind = Kind::Text;
    Source source = Source::Prompt;
    TokenId token_id = -1;  // valid for Text
    int audio_slot = -1;    // 0..K-1 for Audio
    int block_id = -1;      // which audio block, for Audio
    // next-token target with no prompt masking applied; audio positions and
    // the final position always carry the ignore index
    TokenId label = ops::kIgnoreIndex;
};

struct TokenSequence {
    std::vector<Position> positions;
    std::size_t size() const { return positions.size(); }
};

// Baseline layout: [K audio slots] ++ prompt text ++ answer text.
// The prompt must not contain the placeholder id.
TokenSequence build_noninterleaved(const std::vector<TokenId>& prompt_ids,
                                   const std::vector<TokenId>& answer_ids,
                                   const AudioEmbeddingBlock& block);

// Placeholder ids inside the prompt are replaced in place by K audio
// positions each. Default: exactly one placeholder required; allow_multiple
// permits >= 1 (each occurrence gets its own block id).
TokenSequence build_interleaved(
    const std::vector<TokenId>& prompt_ids_with_placeholder,
    const std::vector<TokenId>& answer_ids, const AudioEmbeddingBlock& block,
    bool allow_multiple = false);

// Row n of the result: embedding lookup for text, block slot row for audio.
Tensor assemble_embeddings(Tape* tape, const TokenSequence& seq,
                           const Tensor& embed_table,
                           const std::vector<AudioEmbeddingBlock>& blocks);
Tensor assemble_embeddings(Tape* tape, const TokenSequence& seq,
                           const Tensor& embed_table,
                           const AudioEmbeddingBlock& block);

// Shifted next-token targets. Audio positions always get the ignore index;
// with mask_prompt_text, targets that are prompt tokens are ignored too, so
// only answer text is supervised.
std::vector<TokenId> supervision_labels(const TokenSequence& seq,
                                        bool mask_prompt_text);

// Token ids at text positions, in order (used by generation).
std::vector<TokenId> text_ids(const TokenSequence& seq);

} // namespace weave
