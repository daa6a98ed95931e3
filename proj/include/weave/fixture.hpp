#pragma once

#include <string>
#include <vector>

#include "weave/audio_frontend.hpp"
#include "weave/forge.hpp"
#include "weave/shard.hpp"

namespace weave {

// Bundled stand-in for the WordNet-sourced word table: sound words with two
// synonyms and two hypernyms each, balanced across the three sound classes.
struct LexiconEntry {
    std::string word;
    SoundClass sound_class;
    std::vector<std::string> synonyms;  // 2
    std::vector<std::string> hypernyms; // 2
};

// 78 entries, 26 per class. Every synonym/hypernym string belongs to
// exactly one class, so cross-class distractors can never collide with a
// word's own relations.
const std::vector<LexiconEntry>& mini_lexicon();

// Deterministic synthetic benchmark. Per word: `per_word_audio` clips of
// seeded per-word Gaussian features (written under out_dir/features), and
// per clip: 1 identity item, 2+2 synonym items (positives + cross-class
// distractors), 2+2 hypernym items. words > lexicon size → FixtureError.
std::vector<ShardItem> build_shard_fixture(const std::string& out_dir,
                                           const FrontendConfig& cfg,
                                           std::uint64_t seed, int words = 78,
                                           int per_word_audio = 4);

// Non-interleaved source QA records over the same clips, for forging and
// fine-tuning: per clip one label-classification record plus four yes/no
// relation records (synonym/hypernym × positive/negative) phrased in the
// evaluation wording.
std::vector<SourceRecord> make_source_records(const std::string& out_dir,
                                              const FrontendConfig& cfg,
                                              std::uint64_t seed, int words,
                                              int per_word_audio = 4);

// Text lines covering every word, relation candidate, template, and answer
// the toy pipeline can produce — the vocabulary-building corpus.
std::vector<std::string> lexicon_corpus_lines();

} // namespace weave
