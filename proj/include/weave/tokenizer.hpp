#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "weave/errors.hpp"

namespace weave {

using TokenId = std::int64_t;

// Deterministic whitespace-and-punctuation tokenizer with reserved special
// tokens. Text is case-folded; the "[AUDIO]" placeholder is matched
// case-sensitively so prose like "audio" never becomes a placeholder.
class Vocabulary {
public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr TokenId kAudioPlaceholder = 3;
    static constexpr const char* kBosText = "<bos>";
    static constexpr const char* kEosText = "<eos>";
    static constexpr const char* kUnkText = "<unk>";
    static constexpr const char* kAudioText = "[AUDIO]";

    // Most frequent tokens kept, ties broken lexicographically; specials
    // occupy ids 0..3. max_size must leave room for them.
    static Vocabulary build(const std::vector<std::string>& corpus,
                            std::size_t max_size);

    // One token per line, line number = id.
    static Vocabulary load(const std::string& path);
    void save(const std::string& path) const;

    // From an id-ordered token list (checkpoint config block); validates the
    // reserved ids like load does.
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    std::vector<TokenId> encode(const std::string& text) const;
    std::string decode(const std::vector<TokenId>& ids) const;

    std::size_t size() const { return id_to_token_.size(); }
    bool contains(const std::string& token) const {
        return token_to_id_.count(token) > 0;
    }
    TokenId id_of(const std::string& token) const;
    const std::string& token_of(TokenId id) const;
    const std::vector<std::string>& tokens() const { return id_to_token_; }

    // Splitter shared by build and encode: lowercased words ([a-z0-9]+),
    // single-character punctuation tokens, and verbatim "[AUDIO]".
    static std::vector<std::string> split(const std::string& text);

    // Canonical text form: split tokens joined by single spaces.
    static std::string normalize(const std::string& text);

private:
    explicit Vocabulary(std::vector<std::string> id_to_token);

    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, TokenId> token_to_id_;
};

} // namespace weave
