#pragma once

#include <algorithm>
#include <cctype>
#include <string>

namespace weave::textmatch {

inline std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

inline bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Earliest case-insensitive whole-word (whole-phrase) occurrence; npos if
// absent. Boundaries: adjacent characters must not be alphanumeric, so
// "no" never matches inside "noise".
inline std::size_t find_word(const std::string& text,
                             const std::string& phrase) {
    if (phrase.empty()) return std::string::npos;
    const std::string hay = lower(text);
    const std::string needle = lower(phrase);
    std::size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !word_char(hay[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right_ok = end >= hay.size() || !word_char(hay[end]);
        if (left_ok && right_ok) return pos;
        ++pos;
    }
    return std::string::npos;
}

inline bool contains_word(const std::string& text, const std::string& phrase) {
    return find_word(text, phrase) != std::string::npos;
}

} // namespace weave::textmatch
