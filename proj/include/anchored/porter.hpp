#pragma once

#include <array>
#include <cstring>
#include <string>
#include <string_view>

namespace anchored {

// English (Porter2) stemming algorithm, following the Snowball definition.
// Operates on lowercase ASCII words; anything else is returned unchanged.
namespace porter_detail {

// 'Y' marks a y acting as a consonant.
inline bool is_vowel_marked(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

struct Stemmer {
    std::string w;
    size_t r1 = 0;
    size_t r2 = 0;

    bool ends(std::string_view suffix) const {
        if (suffix.size() > w.size()) return false;
        return w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
    }

    // suffix lies within R1/R2 iff its start index is >= the region start
    bool in_r1(size_t suffix_len) const { return w.size() - suffix_len >= r1; }
    bool in_r2(size_t suffix_len) const { return w.size() - suffix_len >= r2; }

    void replace(size_t suffix_len, std::string_view repl) {
        w.replace(w.size() - suffix_len, suffix_len, repl);
    }

    bool contains_vowel(size_t from, size_t to) const {  // [from, to)
        for (size_t i = from; i < to && i < w.size(); i++)
            if (is_vowel_marked(w[i])) return true;
        return false;
    }

    // short syllable: non-vowel + vowel + non-vowel(not w,x,Y), or a vowel
    // followed by a non-vowel at the start of the word
    bool ends_short_syllable() const {
        size_t n = w.size();
        if (n >= 3 && !is_vowel_marked(w[n - 3]) && is_vowel_marked(w[n - 2]) &&
            !is_vowel_marked(w[n - 1]) && w[n - 1] != 'w' && w[n - 1] != 'x' && w[n - 1] != 'Y')
            return true;
        if (n == 2 && is_vowel_marked(w[0]) && !is_vowel_marked(w[1])) return true;
        return false;
    }

    bool is_short_word() const { return ends_short_syllable() && r1 >= w.size(); }

    void compute_regions() {
        if (w.rfind("gener", 0) == 0) r1 = 5;
        else if (w.rfind("commun", 0) == 0) r1 = 6;
        else if (w.rfind("arsen", 0) == 0) r1 = 5;
        else r1 = region_after_vc_strict(0);
        r2 = region_after_vc_strict(r1);
    }

    // R1 = region after the first non-vowel following a vowel
    size_t region_after_vc_strict(size_t start) const {
        for (size_t i = start; i + 1 < w.size(); i++)
            if (is_vowel_marked(w[i]) && !is_vowel_marked(w[i + 1])) return i + 2;
        return w.size();
    }

    void mark_consonant_y() {
        if (!w.empty() && w[0] == 'y') w[0] = 'Y';
        for (size_t i = 1; i < w.size(); i++)
            if (w[i] == 'y' && is_vowel_marked(w[i - 1]) && w[i - 1] != 'Y') w[i] = 'Y';
    }

    void step1a() {
        if (ends("sses")) { replace(4, "ss"); return; }
        if (ends("ied") || ends("ies")) {
            replace(3, w.size() - 3 > 1 ? "i" : "ie");
            return;
        }
        if (ends("us") || ends("ss")) return;
        if (ends("s")) {
            // delete if the preceding part contains a vowel not immediately
            // before the s
            if (w.size() >= 2 && contains_vowel(0, w.size() - 2)) w.pop_back();
        }
    }

    void step1b() {
        if (ends("eedly")) {
            if (in_r1(5)) replace(5, "ee");
            return;
        }
        if (ends("eed")) {
            if (in_r1(3)) replace(3, "ee");
            return;
        }
        size_t len = 0;
        if (ends("ingly")) len = 5;
        else if (ends("edly")) len = 4;
        else if (ends("ing")) len = 3;
        else if (ends("ed")) len = 2;
        if (len == 0) return;
        if (!contains_vowel(0, w.size() - len)) return;
        w.erase(w.size() - len);
        if (ends("at") || ends("bl") || ends("iz")) {
            w += 'e';
        } else if (ends_double()) {
            w.pop_back();
        } else {
            compute_regions();
            if (is_short_word()) w += 'e';
        }
        compute_regions();
    }

    bool ends_double() const {
        static constexpr std::string_view doubles = "bdfgmnprt";
        size_t n = w.size();
        if (n < 2 || w[n - 1] != w[n - 2]) return false;
        return doubles.find(w[n - 1]) != std::string_view::npos;
    }

    void step1c() {
        size_t n = w.size();
        if (n > 2 && (w[n - 1] == 'y' || w[n - 1] == 'Y') && !is_vowel_marked(w[n - 2]))
            w[n - 1] = 'i';
    }

    struct Rule {
        std::string_view suffix;
        std::string_view repl;
    };

    void step2() {
        static constexpr std::array<Rule, 24> rules{{
            {"ational", "ate"}, {"fulness", "ful"}, {"iveness", "ive"}, {"ization", "ize"},
            {"ousness", "ous"}, {"biliti", "ble"},  {"lessli", "less"}, {"tional", "tion"},
            {"alism", "al"},    {"aliti", "al"},    {"ation", "ate"},   {"entli", "ent"},
            {"fulli", "ful"},   {"iviti", "ive"},   {"ousli", "ous"},   {"abli", "able"},
            {"alli", "al"},     {"anci", "ance"},   {"ator", "ate"},    {"enci", "ence"},
            {"izer", "ize"},    {"bli", "ble"},     {"ogi", "og"},      {"li", ""},
        }};
        for (const auto& rule : rules) {
            if (!ends(rule.suffix)) continue;
            size_t len = rule.suffix.size();
            if (!in_r1(len)) return;
            if (rule.suffix == "ogi") {
                if (w.size() > len && w[w.size() - len - 1] == 'l') replace(len, rule.repl);
            } else if (rule.suffix == "li") {
                static constexpr std::string_view li_endings = "cdeghkmnrt";
                if (w.size() > len &&
                    li_endings.find(w[w.size() - len - 1]) != std::string_view::npos)
                    replace(len, rule.repl);
            } else {
                replace(len, rule.repl);
            }
            return;
        }
    }

    void step3() {
        static constexpr std::array<Rule, 9> rules{{
            {"ational", "ate"}, {"tional", "tion"}, {"alize", "al"}, {"icate", "ic"},
            {"iciti", "ic"},    {"ative", ""},      {"ical", "ic"},  {"ness", ""},
            {"ful", ""},
        }};
        for (const auto& rule : rules) {
            if (!ends(rule.suffix)) continue;
            size_t len = rule.suffix.size();
            if (!in_r1(len)) return;
            if (rule.suffix == "ative") {
                if (in_r2(len)) replace(len, rule.repl);
            } else {
                replace(len, rule.repl);
            }
            return;
        }
    }

    void step4() {
        static constexpr std::array<std::string_view, 18> suffixes{
            "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism",
            "ate",   "iti",  "ous",  "ive",  "ize",  "ion",  "al",  "er",  "ic",
        };
        for (auto suffix : suffixes) {
            if (!ends(suffix)) continue;
            size_t len = suffix.size();
            if (!in_r2(len)) return;
            if (suffix == "ion") {
                char prev = w.size() > len ? w[w.size() - len - 1] : '\0';
                if (prev == 's' || prev == 't') w.erase(w.size() - len);
            } else {
                w.erase(w.size() - len);
            }
            return;
        }
    }

    void step5() {
        if (!w.empty() && w.back() == 'e') {
            if (in_r2(1)) {
                w.pop_back();
            } else if (in_r1(1)) {
                w.pop_back();
                if (ends_short_syllable()) w += 'e';  // keep e after a short syllable
            }
            return;
        }
        size_t n = w.size();
        if (n >= 2 && w[n - 1] == 'l' && in_r2(1) && w[n - 2] == 'l') w.pop_back();
    }

    std::string run(const std::string& word) {
        // whole-word exceptions
        static const std::pair<std::string_view, std::string_view> exceptions[] = {
            {"skis", "ski"},     {"skies", "sky"},   {"dying", "die"},  {"lying", "lie"},
            {"tying", "tie"},    {"idly", "idl"},    {"gently", "gentl"}, {"ugly", "ugli"},
            {"early", "earli"},  {"only", "onli"},   {"singly", "singl"}, {"sky", "sky"},
            {"news", "news"},    {"howe", "howe"},   {"atlas", "atlas"}, {"cosmos", "cosmos"},
            {"bias", "bias"},    {"andes", "andes"},
        };
        for (const auto& [from, to] : exceptions)
            if (word == from) return std::string(to);

        w = word;
        mark_consonant_y();
        compute_regions();
        step1a();

        static constexpr std::string_view invariants_after_1a[] = {
            "inning", "outing", "canning", "herring", "earring",
            "proceed", "exceed", "succeed",
        };
        for (auto inv : invariants_after_1a)
            if (w == inv) return finish();

        step1b();
        step1c();
        compute_regions();
        step2();
        compute_regions();
        step3();
        compute_regions();
        step4();
        compute_regions();
        step5();
        return finish();
    }

    std::string finish() {
        for (char& c : w)
            if (c == 'Y') c = 'y';
        return w;
    }
};

}  // namespace porter_detail

/// Stems a lowercase ASCII word; non-alphabetic input is returned unchanged.
inline std::string porter_stem(const std::string& word) {
    for (char c : word)
        if (c < 'a' || c > 'z') return word;
    if (word.size() <= 2) return word;
    porter_detail::Stemmer st;
    return st.run(word);
}

}  // namespace anchored
