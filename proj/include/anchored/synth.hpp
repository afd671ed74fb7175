#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "anchored/corpus.hpp"

namespace anchored {

/// Planted-dimension corpus generator. Half the signal types carry latent
/// sign +, half -; documents draw from their own polarity's signal pool with
/// probability `mix`, else from the neutral pool.
struct PlantedSpec {
    int V = 500;
    int n_signal = 100;   // must be even
    int n_docs = 2000;    // per slice
    int doc_len = 100;
    double mix = 0.7;
    uint64_t seed = 0;
    int n_slices = 1;
    // optional polarity flip: signal word `flip_word` switches pools for
    // slices >= flip_slice
    int flip_word = -1;
    int flip_slice = -1;
};

inline void validate(const PlantedSpec& spec) {
    if (spec.V < 4 || spec.n_signal < 2 || spec.n_signal % 2 != 0 || spec.n_signal > spec.V)
        throw std::invalid_argument("invalid planted spec: signal/vocab sizes");
    if (spec.mix < 0.0 || spec.mix > 1.0) throw std::invalid_argument("mix must lie in [0,1]");
    if (spec.n_docs < 1 || spec.doc_len < 2 || spec.n_slices < 1)
        throw std::invalid_argument("invalid planted spec: document counts");
}

/// Word strings are all-consonant so the preprocessing pipeline (stemming
/// included) leaves them untouched.
inline std::string planted_word(int index) {
    static const char alphabet[] = "bcdfghjklmnpqrtvwz";
    const int base = 18;
    std::string suffix;
    int i = index;
    do {
        suffix += alphabet[i % base];
        i /= base;
    } while (i > 0);
    return "w" + suffix;
}

struct PlantedResult {
    std::vector<std::string> words;                    // index -> word string
    std::unordered_map<std::string, int> truth;        // word -> +1 / -1 / 0
    std::vector<std::vector<std::string>> slice_docs;  // [slice][doc] raw text
};

inline PlantedResult generate(const PlantedSpec& spec) {
    validate(spec);
    PlantedResult res;
    res.words.reserve(static_cast<size_t>(spec.V));
    for (int i = 0; i < spec.V; i++) res.words.push_back(planted_word(i));

    const int half = spec.n_signal / 2;
    for (int i = 0; i < spec.V; i++) {
        int sign = i < half ? 1 : (i < spec.n_signal ? -1 : 0);
        res.truth[res.words[static_cast<size_t>(i)]] = sign;
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);

    for (int t = 0; t < spec.n_slices; t++) {
        // signal pool membership at this slice (flip applied if requested)
        std::vector<int> pos_pool, neg_pool, neutral_pool;
        for (int i = 0; i < half; i++) pos_pool.push_back(i);
        for (int i = half; i < spec.n_signal; i++) neg_pool.push_back(i);
        for (int i = spec.n_signal; i < spec.V; i++) neutral_pool.push_back(i);
        if (spec.flip_word >= 0 && spec.flip_slice >= 0 && t >= spec.flip_slice) {
            auto move = [&](std::vector<int>& from, std::vector<int>& to) {
                auto it = std::find(from.begin(), from.end(), spec.flip_word);
                if (it != from.end()) {
                    to.push_back(*it);
                    from.erase(it);
                }
            };
            if (spec.flip_word < half) move(pos_pool, neg_pool);
            else if (spec.flip_word < spec.n_signal) move(neg_pool, pos_pool);
        }
        if (neutral_pool.empty()) neutral_pool = pos_pool;  // degenerate n_signal == V

        std::uniform_int_distribution<size_t> pick_pos(0, pos_pool.size() - 1);
        std::uniform_int_distribution<size_t> pick_neg(0, neg_pool.size() - 1);
        std::uniform_int_distribution<size_t> pick_neutral(0, neutral_pool.size() - 1);

        std::vector<std::string> docs;
        docs.reserve(static_cast<size_t>(spec.n_docs));
        for (int d = 0; d < spec.n_docs; d++) {
            bool positive = coin(rng) == 1;
            std::string doc;
            for (int j = 0; j < spec.doc_len; j++) {
                int w;
                if (unif(rng) < spec.mix)
                    w = positive ? pos_pool[pick_pos(rng)] : neg_pool[pick_neg(rng)];
                else
                    w = neutral_pool[pick_neutral(rng)];
                if (j) doc += ' ';
                doc += res.words[static_cast<size_t>(w)];
            }
            docs.push_back(std::move(doc));
        }
        res.slice_docs.push_back(std::move(docs));
    }
    return res;
}

/// Writes one text file per slice (one document per line) plus a standard
/// corpus manifest, so the full preprocessing pipeline can run on the output.
/// Returns the manifest path.
inline std::string write_planted(const PlantedResult& res, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::string manifest_path = (fs::path(dir) / "manifest.tsv").string();
    std::ofstream manifest(manifest_path);
    if (!manifest) throw std::runtime_error("cannot open for writing: " + manifest_path);
    for (size_t t = 0; t < res.slice_docs.size(); t++) {
        std::string name = "slice_" + std::to_string(t) + ".txt";
        std::string path = (fs::path(dir) / name).string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        for (const auto& doc : res.slice_docs[t]) out << doc << '\n';
        manifest << "t" << t << '\t' << path << '\n';
    }
    return manifest_path;
}

}  // namespace anchored
