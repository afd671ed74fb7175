#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace anchored {

/// Word-type table. Ids are contiguous 0..V-1 in order of descending count,
/// ties broken lexicographically ascending.
class Vocabulary {
public:
    Vocabulary() = default;

    Vocabulary(std::vector<std::pair<std::string, int64_t>> sorted_entries)
        : words_(), counts_(), total_tokens_(0) {
        words_.reserve(sorted_entries.size());
        counts_.reserve(sorted_entries.size());
        for (auto& [w, c] : sorted_entries) {
            index_[w] = static_cast<int>(words_.size());
            words_.push_back(std::move(w));
            counts_.push_back(c);
            total_tokens_ += c;
        }
    }

    int size() const { return static_cast<int>(words_.size()); }
    int64_t total_tokens() const { return total_tokens_; }

    const std::string& word(int id) const { return words_.at(static_cast<size_t>(id)); }
    int64_t count(int id) const { return counts_.at(static_cast<size_t>(id)); }

    /// Relative frequency count_i / total_tokens.
    double frequency(int id) const {
        return static_cast<double>(count(id)) / static_cast<double>(total_tokens_);
    }

    /// Returns the id of `word`, or -1 if absent.
    int lookup(const std::string& word) const {
        auto it = index_.find(word);
        return it == index_.end() ? -1 : it->second;
    }

    void write_tsv(std::ostream& out) const {
        for (int id = 0; id < size(); id++)
            out << words_[static_cast<size_t>(id)] << '\t' << id << '\t'
                << counts_[static_cast<size_t>(id)] << '\n';
    }

    void write_tsv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        write_tsv(out);
    }

    static Vocabulary read_tsv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
        std::vector<std::pair<std::string, int64_t>> entries;
        std::string word;
        int id;
        int64_t cnt;
        while (in >> word >> id >> cnt) {
            if (id != static_cast<int>(entries.size()))
                throw std::runtime_error("non-contiguous ids in vocabulary file: " + path);
            entries.emplace_back(word, cnt);
        }
        return Vocabulary(std::move(entries));
    }

private:
    std::vector<std::string> words_;
    std::vector<int64_t> counts_;
    std::unordered_map<std::string, int> index_;
    int64_t total_tokens_ = 0;
};

/// Keeps the vocab_max most frequent types; ties broken lexicographically
/// ascending so the result is deterministic.
inline Vocabulary build_vocabulary(const std::vector<std::string>& tokens, int vocab_max) {
    if (tokens.empty()) throw std::runtime_error("empty token stream");
    std::unordered_map<std::string, int64_t> counts;
    for (const auto& t : tokens) counts[t]++;
    std::vector<std::pair<std::string, int64_t>> entries(counts.begin(), counts.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(entries.size()) > vocab_max)
        entries.resize(static_cast<size_t>(vocab_max));
    return Vocabulary(std::move(entries));
}

}  // namespace anchored
