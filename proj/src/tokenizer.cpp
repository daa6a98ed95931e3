#include "weave/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace weave {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

} // namespace

std::vector<std::string> Vocabulary::split(const std::string& text) {
    std::vector<std::string> out;
    const std::string audio = kAudioText;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (text.compare(i, audio.size(), audio) == 0) {
            out.push_back(audio);
            i += audio.size();
            continue;
        }
        if (is_word_char(c)) {
            std::size_t j = i;
            std::string word;
            while (j < text.size() && is_word_char(text[j])) {
                word.push_back(static_cast<char>(
                    std::tolower(static_cast<unsigned char>(text[j]))));
                ++j;
            }
            out.push_back(std::move(word));
            i = j;
            continue;
        }
        // single punctuation char becomes its own token
        out.push_back(std::string(1, c));
        ++i;
    }
    return out;
}

std::string Vocabulary::normalize(const std::string& text) {
    std::ostringstream oss;
    bool first = true;
    for (const std::string& tok : split(text)) {
        if (!first) oss << ' ';
        oss << tok;
        first = false;
    }
    return oss.str();
}

Vocabulary::Vocabulary(std::vector<std::string> id_to_token)
    : id_to_token_(std::move(id_to_token)) {
    for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
        auto [it, inserted] =
            token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i));
        if (!inserted) {
            throw SchemaError("vocabulary: duplicate token '" +
                              id_to_token_[i] + "'");
        }
    }
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus,
                             std::size_t max_size) {
    if (corpus.empty()) throw EmptyCorpus("vocabulary build: empty corpus");
    if (max_size < 5) {
        throw ConfigError("vocabulary build: max_size must be >= 5");
    }
    // std::map gives the lexicographic order we need for tie-breaking
    std::map<std::string, std::size_t> counts;
    for (const std::string& line : corpus) {
        for (std::string& tok : split(line)) {
            if (tok == kAudioText) continue; // special, always present
            ++counts[std::move(tok)];
        }
    }
    if (counts.empty()) {
        throw EmptyCorpus("vocabulary build: corpus has no tokens");
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                            counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                         return a.second > b.second;
                     });
    std::vector<std::string> toks = {kBosText, kEosText, kUnkText, kAudioText};
    for (const auto& [tok, n] : ranked) {
        if (toks.size() >= max_size) break;
        toks.push_back(tok);
    }
    return Vocabulary(std::move(toks));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < 4 || tokens[0] != kBosText || tokens[1] != kEosText ||
        tokens[2] != kUnkText || tokens[3] != kAudioText) {
        throw SchemaError(
            "vocabulary: reserved tokens missing from ids 0..3");
    }
    return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("vocabulary load: cannot open " + path);
    std::vector<std::string> toks;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        toks.push_back(line);
    }
    try {
        return from_tokens(std::move(toks));
    } catch (const SchemaError&) {
        throw SchemaError("vocabulary load: missing reserved tokens in " +
                          path);
    }
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary); // binary: no \r\n translation
    if (!out) throw IoError("vocabulary save: cannot open " + path);
    for (const std::string& tok : id_to_token_) out << tok << '\n';
    if (!out) throw IoError("vocabulary save: write failed for " + path);
}

std::vector<TokenId> Vocabulary::encode(const std::string& text) const {
    std::vector<TokenId> ids;
    for (const std::string& tok : split(text)) {
        auto it = token_to_id_.find(tok);
        ids.push_back(it == token_to_id_.end() ? kUnk : it->second);
    }
    return ids;
}

std::string Vocabulary::decode(const std::vector<TokenId>& ids) const {
    std::ostringstream oss;
    bool first = true;
    for (TokenId id : ids) {
        oss << (first ? "" : " ") << token_of(id);
        first = false;
    }
    return oss.str();
}

TokenId Vocabulary::id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    if (it == token_to_id_.end()) {
        throw UnknownId("vocabulary: unknown token '" + token + "'");
    }
    return it->second;
}

const std::string& Vocabulary::token_of(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
        throw UnknownId("vocabulary: id " + std::to_string(id) +
                        " out of range (size " +
                        std::to_string(id_to_token_.size()) + ")");
    }
    return id_to_token_[static_cast<std::size_t>(id)];
}

} // namespace weave
