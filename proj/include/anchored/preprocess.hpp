#pragma once

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "anchored/porter.hpp"

namespace anchored {

struct PreprocessConfig {
    bool lowercase = true;
    bool strip_punctuation = true;
    std::string number_token = "X";
    bool stem = true;
    int vocab_max = 100000;
    double subsample_threshold = 1e-5;
    uint64_t seed = 0;
};

inline void validate(const PreprocessConfig& cfg) {
    if (cfg.subsample_threshold <= 0)
        throw std::invalid_argument("subsample_threshold must be > 0");
    if (cfg.vocab_max < 2)
        throw std::invalid_argument("vocab_max must be >= 2");
    if (cfg.number_token.empty())
        throw std::invalid_argument("number_token must be nonempty");
}

// Throws if `text` is not valid UTF-8; the message names the byte offset.
inline void check_utf8(const std::string& text) {
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        size_t len;
        if (c < 0x80) len = 1;
        else if ((c & 0xE0) == 0xC0) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0) len = 4;
        else throw std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(i));
        if (i + len > n)
            throw std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(i));
        for (size_t k = 1; k < len; k++) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80)
                throw std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(i + k));
        }
        i += len;
    }
}

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Replaces each maximal digit run (optionally with internal , or . separators
// that are followed by another digit) with `token`.
inline std::string replace_numbers(const std::string& s, const std::string& token) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (is_digit(s[i])) {
            size_t j = i + 1;
            while (j < s.size()) {
                if (is_digit(s[j])) { j++; continue; }
                if ((s[j] == ',' || s[j] == '.') && j + 1 < s.size() && is_digit(s[j + 1])) {
                    j += 2;
                    continue;
                }
                break;
            }
            out += token;
            i = j;
        } else {
            out += s[i++];
        }
    }
    return out;
}

inline bool is_ascii_punct(unsigned char c) {
    return c < 0x80 && std::ispunct(c);
}

}  // namespace detail

/// Full normalization pipeline: lowercase, number replacement, punctuation
/// removal, whitespace tokenization, Porter stemming.
inline std::vector<std::string> preprocess_text(const std::string& raw,
                                                const PreprocessConfig& cfg) {
    check_utf8(raw);
    std::string text = raw;
    if (cfg.lowercase) {
        for (char& c : text)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    text = detail::replace_numbers(text, cfg.number_token);
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&]() {
        if (!cur.empty()) {
            if (cfg.stem && cur != cfg.number_token) cur = porter_stem(cur);
            if (!cur.empty()) tokens.push_back(cur);
            cur.clear();
        }
    };
    for (size_t i = 0; i < text.size(); i++) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80 && std::isspace(c)) {
            flush();
        } else if (cfg.strip_punctuation && detail::is_ascii_punct(c)) {
            // joined punctuation is deleted, not split on
        } else {
            cur += static_cast<char>(c);
        }
    }
    flush();
    return tokens;
}

/// Normalizes a single word the same way corpus tokens are normalized.
/// Returns empty string if the word vanishes under the pipeline.
inline std::string normalize_word(const std::string& word, const PreprocessConfig& cfg) {
    auto toks = preprocess_text(word, cfg);
    if (toks.empty()) return "";
    return toks.front();
}

}  // namespace anchored
