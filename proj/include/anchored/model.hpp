#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "anchored/matrix.hpp"
#include "anchored/vocabulary.hpp"

namespace anchored {

/// Embedding matrix rho (word vectors) and context matrix alpha, both V x K.
struct EmbeddingModel {
    Matrix rho;
    Matrix alpha;

    int V() const { return rho.rows; }
    int K() const { return rho.cols; }
};

/// Dynamic variant: one rho per time slice, shared alpha.
struct DynamicModel {
    std::vector<Matrix> rho_t;
    Matrix alpha;
    std::vector<std::string> slice_labels;

    int T() const { return static_cast<int>(rho_t.size()); }
    int V() const { return alpha.rows; }
    int K() const { return alpha.cols; }
};

struct ContextWindow {
    int center;                 // center token's vocabulary id
    std::vector<int> context;   // surrounding token ids (with multiplicity)
};

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow or catastrophic cancellation.
inline double log_sigmoid(double x) {
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

/// Sum of alpha rows over the window's context ids.
inline std::vector<double> context_sum(const ContextWindow& window, const Matrix& alpha) {
    if (window.context.empty()) throw std::invalid_argument("empty context window");
    std::vector<double> s(static_cast<size_t>(alpha.cols), 0.0);
    for (int u : window.context) {
        const double* row = alpha.row(u);
        for (int k = 0; k < alpha.cols; k++) s[static_cast<size_t>(k)] += row[k];
    }
    return s;
}

/// Conditional probability logit^-1(rho_v . s).
inline double eta(const double* rho_v, const double* s, int K) {
    return sigmoid(dot(rho_v, s, K));
}

/// Context windows over one token sequence: up to window_size/2 tokens per
/// side, truncated at the boundaries; positions with empty context skipped.
inline std::vector<ContextWindow> windows(const std::vector<int>& tokens, int window_size) {
    if (window_size < 2 || window_size % 2 != 0)
        throw std::invalid_argument("window_size must be even and >= 2");
    const int half = window_size / 2;
    const int n = static_cast<int>(tokens.size());
    std::vector<ContextWindow> out;
    if (n < 2) return out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; i++) {
        ContextWindow w;
        w.center = tokens[static_cast<size_t>(i)];
        int lo = std::max(0, i - half);
        int hi = std::min(n - 1, i + half);
        w.context.reserve(static_cast<size_t>(hi - lo));
        for (int j = lo; j <= hi; j++)
            if (j != i) w.context.push_back(tokens[static_cast<size_t>(j)]);
        if (!w.context.empty()) out.push_back(std::move(w));
    }
    return out;
}

/// Draws negative samples i.i.d. proportional to count_v^power, resampling
/// on collision with the excluded id.
class NegativeSampler {
public:
    NegativeSampler(const Vocabulary& vocab, double power) {
        if (vocab.size() < 2)
            throw std::invalid_argument("negative sampling needs vocabulary size >= 2");
        std::vector<double> weights(static_cast<size_t>(vocab.size()));
        for (int v = 0; v < vocab.size(); v++)
            weights[static_cast<size_t>(v)] = std::pow(static_cast<double>(vocab.count(v)), power);
        dist_ = std::discrete_distribution<int>(weights.begin(), weights.end());
    }

    std::vector<int> draw(int count, int exclude, std::mt19937_64& rng) {
        std::vector<int> out;
        out.reserve(static_cast<size_t>(count));
        while (static_cast<int>(out.size()) < count) {
            int v = dist_(rng);
            if (v == exclude) continue;
            out.push_back(v);
        }
        return out;
    }

private:
    std::discrete_distribution<int> dist_;
};

inline std::vector<int> draw_negatives(const Vocabulary& vocab, int count, int exclude,
                                       double power, std::mt19937_64& rng) {
    NegativeSampler sampler(vocab, power);
    return sampler.draw(count, exclude, rng);
}

/// Sparse row-keyed gradient accumulator.
using SparseGrad = std::unordered_map<int, std::vector<double>>;

inline void axpy_row(SparseGrad& grad, int row, double scale, const double* vec, int K) {
    auto& g = grad[row];
    if (g.empty()) g.assign(static_cast<size_t>(K), 0.0);
    for (int k = 0; k < K; k++) g[static_cast<size_t>(k)] += scale * vec[k];
}

struct BatchResult {
    double objective = 0.0;
    SparseGrad grad_rho;
    SparseGrad grad_alpha;
};

/// Negative-sampled Bernoulli objective and analytic gradients for a batch
/// of windows, with the negative draws given explicitly (one list per
/// window). The rho matrix may differ from the alpha matrix's model (dynamic
/// training passes the slice's rho).
inline BatchResult batch_objective_and_grad_frozen(
    const std::vector<ContextWindow>& batch, const Matrix& rho, const Matrix& alpha,
    const std::vector<std::vector<int>>& negatives) {
    const int K = rho.cols;
    BatchResult res;
    for (size_t i = 0; i < batch.size(); i++) {
        const ContextWindow& w = batch[i];
        std::vector<double> s = context_sum(w, alpha);
        const double* rho_c = rho.row(w.center);
        double dot_c = dot(rho_c, s.data(), K);
        double eta_c = sigmoid(dot_c);
        res.objective += log_sigmoid(dot_c);
        axpy_row(res.grad_rho, w.center, 1.0 - eta_c, s.data(), K);

        // accumulated coefficient vector for the context gradient
        std::vector<double> ctx_coeff(static_cast<size_t>(K), 0.0);
        for (int k = 0; k < K; k++) ctx_coeff[static_cast<size_t>(k)] = (1.0 - eta_c) * rho_c[k];

        for (int vn : negatives[i]) {
            const double* rho_n = rho.row(vn);
            double dot_n = dot(rho_n, s.data(), K);
            double eta_n = sigmoid(dot_n);
            res.objective += log_sigmoid(-dot_n);
            axpy_row(res.grad_rho, vn, -eta_n, s.data(), K);
            for (int k = 0; k < K; k++) ctx_coeff[static_cast<size_t>(k)] -= eta_n * rho_n[k];
        }
        for (int u : w.context) axpy_row(res.grad_alpha, u, 1.0, ctx_coeff.data(), K);
    }
    return res;
}

struct NegSamplingConfig {
    int count = 10;
    double power = 0.75;
};

inline BatchResult batch_objective_and_grad(const std::vector<ContextWindow>& batch,
                                            const EmbeddingModel& model, NegativeSampler& sampler,
                                            const NegSamplingConfig& neg, std::mt19937_64& rng) {
    std::vector<std::vector<int>> negatives;
    negatives.reserve(batch.size());
    for (const auto& w : batch) negatives.push_back(sampler.draw(neg.count, w.center, rng));
    return batch_objective_and_grad_frozen(batch, model.rho, model.alpha, negatives);
}

// ---------------------------------------------------------------------------
// Plain-text serialization. Header `V K` (static) or `V K T` plus a labels
// line (dynamic), then one `word v1 ... vK` line per word per matrix.
// Values round-trip via 17 significant digits.

namespace detail {

inline void write_matrix(std::ostream& out, const Matrix& m,
                         const std::vector<std::string>& words) {
    out << std::setprecision(17);
    for (int v = 0; v < m.rows; v++) {
        out << words[static_cast<size_t>(v)];
        const double* row = m.row(v);
        for (int k = 0; k < m.cols; k++) out << ' ' << row[k];
        out << '\n';
    }
}

inline void read_matrix(std::istream& in, Matrix& m, std::vector<std::string>& words,
                        bool fill_words) {
    for (int v = 0; v < m.rows; v++) {
        std::string word;
        if (!(in >> word)) throw std::runtime_error("truncated model file");
        if (fill_words) words[static_cast<size_t>(v)] = word;
        else if (words[static_cast<size_t>(v)] != word)
            throw std::runtime_error("inconsistent word order in model file");
        double* row = m.row(v);
        for (int k = 0; k < m.cols; k++)
            if (!(in >> row[k])) throw std::runtime_error("truncated model file");
    }
}

}  // namespace detail

inline void write_model(std::ostream& out, const EmbeddingModel& model,
                        const std::vector<std::string>& words) {
    out << model.V() << ' ' << model.K() << '\n';
    detail::write_matrix(out, model.rho, words);
    detail::write_matrix(out, model.alpha, words);
}

inline void write_model(std::ostream& out, const DynamicModel& model,
                        const std::vector<std::string>& words) {
    out << model.V() << ' ' << model.K() << ' ' << model.T() << '\n';
    out << "labels";
    for (const auto& l : model.slice_labels) out << ' ' << l;
    out << '\n';
    for (const auto& rho : model.rho_t) detail::write_matrix(out, rho, words);
    detail::write_matrix(out, model.alpha, words);
}

template <typename ModelT>
void write_model_file(const std::string& path, const ModelT& model,
                      const std::vector<std::string>& words) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_model(out, model, words);
}

/// A deserialized model plus its word list (static or dynamic; T == 0 for
/// static models and rho_t holds the single rho matrix view via `static_rho`).
struct LoadedModel {
    std::vector<std::string> words;
    EmbeddingModel model;           // valid when !dynamic
    DynamicModel dynamic_model;     // valid when dynamic
    bool dynamic = false;

    int id_of(const std::string& word) const {
        auto it = index_.find(word);
        return it == index_.end() ? -1 : it->second;
    }
    void build_index() {
        for (size_t i = 0; i < words.size(); i++) index_[words[i]] = static_cast<int>(i);
    }

private:
    std::unordered_map<std::string, int> index_;
};

inline LoadedModel read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty model file: " + path);
    std::istringstream hs(header);
    int V, K, T = 0;
    if (!(hs >> V >> K)) throw std::runtime_error("malformed model header: " + path);
    bool dynamic = static_cast<bool>(hs >> T);

    LoadedModel loaded;
    loaded.words.resize(static_cast<size_t>(V));
    loaded.dynamic = dynamic;
    if (dynamic) {
        std::string tag;
        if (!(in >> tag) || tag != "labels")
            throw std::runtime_error("missing labels line in dynamic model: " + path);
        loaded.dynamic_model.slice_labels.resize(static_cast<size_t>(T));
        for (auto& l : loaded.dynamic_model.slice_labels)
            if (!(in >> l)) throw std::runtime_error("truncated labels line: " + path);
        loaded.dynamic_model.rho_t.assign(static_cast<size_t>(T), Matrix(V, K));
        for (int t = 0; t < T; t++)
            detail::read_matrix(in, loaded.dynamic_model.rho_t[static_cast<size_t>(t)],
                                loaded.words, t == 0);
        loaded.dynamic_model.alpha = Matrix(V, K);
        detail::read_matrix(in, loaded.dynamic_model.alpha, loaded.words, false);
    } else {
        loaded.model.rho = Matrix(V, K);
        loaded.model.alpha = Matrix(V, K);
        detail::read_matrix(in, loaded.model.rho, loaded.words, true);
        detail::read_matrix(in, loaded.model.alpha, loaded.words, false);
    }
    loaded.build_index();
    return loaded;
}

}  // namespace anchored
