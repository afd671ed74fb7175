#pragma once

#include <glob.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "anchored/preprocess.hpp"
#include "anchored/vocabulary.hpp"

namespace anchored {

struct CorpusSlice {
    std::string label;
    std::vector<int> tokens;
};

/// Preprocessed token-id streams, one slice per time point (t = 0..T-1 in
/// slice order). Single-slice corpora have exactly one slice.
struct Corpus {
    std::vector<CorpusSlice> slices;

    size_t num_tokens() const {
        size_t n = 0;
        for (const auto& s : slices) n += s.tokens.size();
        return n;
    }
};

/// One manifest entry: slice label plus a glob of text file paths.
struct ManifestEntry {
    std::string label;
    std::string pattern;
};

/// Manifest format: one `label<TAB>glob` line per slice, temporal order.
inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    std::vector<ManifestEntry> entries;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("manifest line missing tab separator: " + line);
        ManifestEntry e{line.substr(0, tab), line.substr(tab + 1)};
        if (!seen.insert(e.label).second)
            throw std::runtime_error("duplicate slice label: " + e.label);
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw std::runtime_error("empty manifest: " + path);
    return entries;
}

inline std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g;
    int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<std::string> paths;
    if (rc == 0) {
        for (size_t i = 0; i < g.gl_pathc; i++) paths.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH)
        throw std::runtime_error("glob failed for pattern: " + pattern);
    if (paths.empty())
        throw std::runtime_error("no files match pattern: " + pattern);
    return paths;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Each token is removed independently with probability
/// max(0, 1 - sqrt(threshold / f_i)); survivor order is preserved.
inline std::vector<int> subsample(const std::vector<int>& tokens, const Vocabulary& vocab,
                                  double threshold, std::mt19937_64& rng) {
    std::vector<double> keep_prob(static_cast<size_t>(vocab.size()));
    for (int v = 0; v < vocab.size(); v++) {
        double f = vocab.frequency(v);
        double p = std::sqrt(threshold / f);
        keep_prob[static_cast<size_t>(v)] = p >= 1.0 ? 1.0 : p;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> out;
    out.reserve(tokens.size());
    for (int t : tokens) {
        if (unif(rng) < keep_prob[static_cast<size_t>(t)]) out.push_back(t);
    }
    return out;
}

struct LoadStats {
    size_t tokens_before_subsampling = 0;
    size_t tokens_after_subsampling = 0;
};

/// Builds the vocabulary over the union of all slices, drops tokens of
/// excluded types, then subsamples against the global frequency table.
inline std::pair<Corpus, Vocabulary> load_corpus(const std::vector<ManifestEntry>& sources,
                                                 const PreprocessConfig& cfg,
                                                 LoadStats* stats = nullptr) {
    validate(cfg);
    if (sources.empty()) throw std::runtime_error("no corpus sources given");

    std::vector<std::vector<std::string>> slice_tokens;
    std::vector<std::string> all_tokens;
    for (const auto& src : sources) {
        std::vector<std::string> toks;
        for (const auto& path : expand_glob(src.pattern)) {
            auto file_toks = preprocess_text(read_file(path), cfg);
            toks.insert(toks.end(), file_toks.begin(), file_toks.end());
        }
        all_tokens.insert(all_tokens.end(), toks.begin(), toks.end());
        slice_tokens.push_back(std::move(toks));
    }
    if (all_tokens.empty()) throw std::runtime_error("empty corpus after preprocessing");

    Vocabulary vocab = build_vocabulary(all_tokens, cfg.vocab_max);

    std::mt19937_64 rng(cfg.seed);
    Corpus corpus;
    size_t before = 0, after = 0;
    for (size_t i = 0; i < sources.size(); i++) {
        std::vector<int> ids;
        ids.reserve(slice_tokens[i].size());
        for (const auto& t : slice_tokens[i]) {
            int id = vocab.lookup(t);
            if (id >= 0) ids.push_back(id);
        }
        before += ids.size();
        ids = subsample(ids, vocab, cfg.subsample_threshold, rng);
        after += ids.size();
        corpus.slices.push_back({sources[i].label, std::move(ids)});
    }
    if (stats) {
        stats->tokens_before_subsampling = before;
        stats->tokens_after_subsampling = after;
    }
    return {std::move(corpus), std::move(vocab)};
}

// Token stream cache: one slice per file, first line `V <int> N <int>`,
// then space-separated ids.
inline void write_slice_cache(const std::string& path, const CorpusSlice& slice, int vocab_size) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "V " << vocab_size << " N " << slice.tokens.size() << '\n';
    for (size_t i = 0; i < slice.tokens.size(); i++) {
        if (i) out << ' ';
        out << slice.tokens[i];
    }
    out << '\n';
}

inline CorpusSlice read_slice_cache(const std::string& path, const std::string& label) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cache file: " + path);
    std::string v_tag, n_tag;
    int vocab_size;
    size_t n;
    if (!(in >> v_tag >> vocab_size >> n_tag >> n) || v_tag != "V" || n_tag != "N")
        throw std::runtime_error("malformed cache header in " + path);
    CorpusSlice slice;
    slice.label = label;
    slice.tokens.reserve(n);
    int id;
    while (in >> id) {
        if (id < 0 || id >= vocab_size)
            throw std::runtime_error("token id out of range in " + path);
        slice.tokens.push_back(id);
    }
    if (slice.tokens.size() != n)
        throw std::runtime_error("token count mismatch in " + path);
    return slice;
}

}  // namespace anchored
