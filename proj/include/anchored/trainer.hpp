#pragma once

#include <algorithm>
#include <functional>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "anchored/adam.hpp"
#include "anchored/anchors.hpp"
#include "anchored/corpus.hpp"
#include "anchored/model.hpp"
#include "anchored/priors.hpp"

namespace anchored {

struct TrainConfig {
    int K = 100;
    int window = 8;
    double sigma = 1.0;
    int neg_count = 10;
    double neg_power = 0.75;
    int epochs = 20;
    int batch_size = 1024;
    double learning_rate = 1e-2;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double sigma_d = -1.0;  // <= 0 selects the sigma/100 default
    uint64_t seed = 0;
    double init_scale = 0.1;
    int threads = 1;  // >1 evaluates batches concurrently against a snapshot

    double effective_sigma_d() const { return sigma_d > 0 ? sigma_d : sigma / 100.0; }

    AdamConfig adam() const {
        return {learning_rate, adam_beta1, adam_beta2, adam_eps};
    }
};

inline void validate(const TrainConfig& cfg) {
    if (cfg.K < 1 || cfg.window < 2 || cfg.window % 2 != 0 || cfg.sigma <= 0 ||
        cfg.neg_count < 1 || cfg.epochs < 0 || cfg.batch_size < 1 ||
        cfg.learning_rate <= 0 || cfg.init_scale <= 0 || cfg.threads < 1)
        throw std::invalid_argument("invalid training configuration");
    if (cfg.adam_beta1 <= 0 || cfg.adam_beta1 >= 1 || cfg.adam_beta2 <= 0 || cfg.adam_beta2 >= 1)
        throw std::invalid_argument("adam betas must lie in (0,1)");
}

struct EpochLog {
    int epoch;
    double objective;
    double log_prior;
    double log_likelihood;
};

struct TrainResult {
    EmbeddingModel model;
    std::vector<EpochLog> log;
};

struct DynamicTrainResult {
    DynamicModel model;
    std::vector<EpochLog> log;
};

/// Non-anchor entries ~ N(0, init_scale^2); anchor rows start at their prior
/// modes so strong priors cannot flip signs early.
inline EmbeddingModel init_model(int V, const TrainConfig& cfg, const AnchorSpec& spec,
                                 std::mt19937_64& rng) {
    if (V < 2) throw std::invalid_argument("need vocabulary size >= 2");
    EmbeddingModel model;
    model.rho = Matrix(V, cfg.K);
    model.alpha = Matrix(V, cfg.K);
    std::normal_distribution<double> base(0.0, cfg.init_scale);
    for (double& x : model.rho.data) x = base(rng);
    for (double& x : model.alpha.data) x = base(rng);

    auto set_anchor_rows = [&](Matrix& theta) {
        const int K = theta.cols;
        if (spec.kind != PriorKind::None) {
            double off_sd = std::sqrt(std::min(spec.omega, cfg.init_scale * cfg.init_scale));
            std::normal_distribution<double> off(0.0, off_sd);
            auto set_rows = [&](const std::vector<int>& ids, double sign) {
                for (int v : ids) {
                    double* row = theta.row(v);
                    for (int k = 0; k < K - 1; k++) row[k] = off(rng);
                    row[K - 1] = spec.kind == PriorKind::StandardBasis ? sign
                                                                       : sign * cfg.init_scale;
                }
            };
            set_rows(spec.positive_ids, +1.0);
            set_rows(spec.negative_ids, -1.0);
        }
        if (spec.use_neutral)
            for (int v : spec.neutral_ids) theta(v, K - 1) = 0.0;
    };
    set_anchor_rows(model.rho);
    set_anchor_rows(model.alpha);
    return model;
}

namespace detail {

inline void check_finite(const Matrix& m, int step, const char* name) {
    for (int r = 0; r < m.rows; r++) {
        const double* row = m.row(r);
        for (int k = 0; k < m.cols; k++) {
            if (!std::isfinite(row[k]))
                throw std::runtime_error("non-finite parameter in " + std::string(name) +
                                         " at step " + std::to_string(step) + ", row " +
                                         std::to_string(r));
        }
    }
}

// Dense grad = weight * prior grad, plus the batch's sparse likelihood rows.
inline Matrix combine_grads(const Matrix& prior_grad, double weight, const SparseGrad& sparse) {
    Matrix g = prior_grad;
    for (double& x : g.data) x *= weight;
    for (const auto& [row, vec] : sparse) {
        double* dst = g.row(row);
        for (int k = 0; k < g.cols; k++) dst[k] += vec[static_cast<size_t>(k)];
    }
    return g;
}

// Anchor/neutral rows only; plain rows get zero gradient. Used for
// time slices t >= 1, whose plain rows are tied by the random walk instead.
inline Matrix grad_anchor_prior_only(const Matrix& theta, const AnchorSpec& spec) {
    Matrix g = grad_log_prior(theta, spec);
    const auto roles = compile_roles(spec, theta.rows);
    for (int v = 0; v < theta.rows; v++)
        if (roles[static_cast<size_t>(v)] == Role::Plain)
            std::fill_n(g.row(v), g.cols, 0.0);
    return g;
}

inline double log_anchor_prior_only(const Matrix& theta, const AnchorSpec& spec) {
    // evaluate full prior, then subtract plain rows' base terms
    double total = log_prior(theta, spec);
    const auto roles = compile_roles(spec, theta.rows);
    for (int v = 0; v < theta.rows; v++) {
        if (roles[static_cast<size_t>(v)] != Role::Plain) continue;
        const double* row = theta.row(v);
        for (int k = 0; k < theta.cols; k++)
            total -= gaussian_log_density(row[k], 0.0, spec.sigma);
    }
    return total;
}

}  // namespace detail

using StepCallback = std::function<void(int step, const EmbeddingModel&)>;

/// Static MAP training: minibatch Adam ascent on
/// batch log-likelihood + (batch/total windows) * log prior,
/// with truncation support re-projected after every step.
inline TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const AnchorSpec& spec,
                         const Vocabulary& vocab, const StepCallback& on_step = nullptr) {
    validate(cfg);
    if (corpus.slices.size() != 1)
        throw std::invalid_argument("static training expects a single-slice corpus");
    validate(spec, vocab.size());

    std::mt19937_64 rng(cfg.seed);
    EmbeddingModel model = init_model(vocab.size(), cfg, spec, rng);
    project_support(model.rho, spec);
    project_support(model.alpha, spec);

    std::vector<ContextWindow> wins = windows(corpus.slices[0].tokens, cfg.window);
    if (wins.empty()) throw std::runtime_error("corpus yields no context windows");
    const double total_positives = static_cast<double>(wins.size());

    NegativeSampler sampler(vocab, cfg.neg_power);
    NegSamplingConfig neg{cfg.neg_count, cfg.neg_power};
    AdamConfig adam = cfg.adam();
    AdamState state_rho(vocab.size(), cfg.K), state_alpha(vocab.size(), cfg.K);

    TrainResult result;
    std::vector<size_t> order(wins.size());
    std::iota(order.begin(), order.end(), 0);
    int step = 0;
    for (int epoch = 0; epoch < cfg.epochs; epoch++) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_ll = 0.0;

        std::vector<size_t> starts;
        for (size_t s = 0; s < order.size(); s += static_cast<size_t>(cfg.batch_size))
            starts.push_back(s);

        const size_t group = cfg.threads > 1 ? static_cast<size_t>(cfg.threads) : 1;
        for (size_t gi = 0; gi < starts.size(); gi += group) {
            size_t gend = std::min(starts.size(), gi + group);
            // materialize batches and pre-draw negatives in batch order so
            // the schedule is deterministic regardless of thread count
            std::vector<std::vector<ContextWindow>> batches;
            std::vector<std::vector<std::vector<int>>> negatives;
            for (size_t b = gi; b < gend; b++) {
                size_t start = starts[b];
                size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
                std::vector<ContextWindow> batch;
                batch.reserve(end - start);
                for (size_t i = start; i < end; i++) batch.push_back(wins[order[i]]);
                std::vector<std::vector<int>> negs;
                negs.reserve(batch.size());
                for (const auto& w : batch) negs.push_back(sampler.draw(neg.count, w.center, rng));
                batches.push_back(std::move(batch));
                negatives.push_back(std::move(negs));
            }

            std::vector<BatchResult> results(batches.size());
            if (group > 1 && batches.size() > 1) {
                std::vector<std::future<BatchResult>> futures;
                for (size_t b = 0; b < batches.size(); b++)
                    futures.push_back(std::async(std::launch::async, [&, b] {
                        return batch_objective_and_grad_frozen(batches[b], model.rho, model.alpha,
                                                               negatives[b]);
                    }));
                for (size_t b = 0; b < batches.size(); b++) results[b] = futures[b].get();
            } else {
                for (size_t b = 0; b < batches.size(); b++)
                    results[b] = batch_objective_and_grad_frozen(batches[b], model.rho, model.alpha,
                                                                 negatives[b]);
            }

            // gradients applied serially in batch-index order
            for (size_t b = 0; b < batches.size(); b++) {
                BatchResult& br = results[b];
                epoch_ll += br.objective;
                double weight = static_cast<double>(batches[b].size()) / total_positives;
                Matrix g_rho = detail::combine_grads(grad_log_prior(model.rho, spec), weight,
                                                     br.grad_rho);
                Matrix g_alpha = detail::combine_grads(grad_log_prior(model.alpha, spec), weight,
                                                       br.grad_alpha);
                adam_step_dense(model.rho, g_rho, state_rho, adam);
                adam_step_dense(model.alpha, g_alpha, state_alpha, adam);
                project_support(model.rho, spec);
                project_support(model.alpha, spec);
                step++;
                if (step % 100 == 0) {
                    detail::check_finite(model.rho, step, "rho");
                    detail::check_finite(model.alpha, step, "alpha");
                }
                if (on_step) on_step(step, model);
            }
        }
        double lp = log_prior(model.rho, spec) + log_prior(model.alpha, spec);
        result.log.push_back({epoch, epoch_ll + lp, lp, epoch_ll});
    }
    detail::check_finite(model.rho, step, "rho");
    detail::check_finite(model.alpha, step, "alpha");
    result.model = std::move(model);
    return result;
}

using DynamicStepCallback = std::function<void(int step, const DynamicModel&)>;

/// Dynamic MAP training: per-slice rho with shared alpha, Gaussian random
/// walk tying consecutive slices (variance sigma_d), base prior on slice 0,
/// anchor priors on every slice.
inline DynamicTrainResult train_dynamic(const Corpus& corpus, const TrainConfig& cfg,
                                        const AnchorSpec& spec, const Vocabulary& vocab,
                                        const DynamicStepCallback& on_step = nullptr) {
    validate(cfg);
    const int T = static_cast<int>(corpus.slices.size());
    if (T < 2) throw std::invalid_argument("dynamic training expects >= 2 slices");
    validate(spec, vocab.size());
    const double sigma_d = cfg.effective_sigma_d();

    std::mt19937_64 rng(cfg.seed);
    EmbeddingModel base = init_model(vocab.size(), cfg, spec, rng);
    DynamicModel model;
    model.alpha = std::move(base.alpha);
    model.rho_t.assign(static_cast<size_t>(T), base.rho);
    for (const auto& s : corpus.slices) model.slice_labels.push_back(s.label);
    for (auto& rho : model.rho_t) project_support(rho, spec);
    project_support(model.alpha, spec);

    // batches never span slices; batch order is shuffled globally
    std::vector<std::vector<ContextWindow>> slice_wins;
    size_t total_windows = 0;
    for (const auto& s : corpus.slices) {
        slice_wins.push_back(windows(s.tokens, cfg.window));
        total_windows += slice_wins.back().size();
    }
    if (total_windows == 0) throw std::runtime_error("corpus yields no context windows");
    const double total_positives = static_cast<double>(total_windows);

    NegativeSampler sampler(vocab, cfg.neg_power);
    NegSamplingConfig neg{cfg.neg_count, cfg.neg_power};
    AdamConfig adam = cfg.adam();
    std::vector<AdamState> state_rho(static_cast<size_t>(T), AdamState(vocab.size(), cfg.K));
    AdamState state_alpha(vocab.size(), cfg.K);

    auto walk_log_density = [&](const DynamicModel& m) {
        double total = 0.0;
        for (int t = 1; t < T; t++) {
            const auto& cur = m.rho_t[static_cast<size_t>(t)];
            const auto& prev = m.rho_t[static_cast<size_t>(t - 1)];
            for (size_t i = 0; i < cur.data.size(); i++)
                total += gaussian_log_density(cur.data[i], prev.data[i], sigma_d);
        }
        return total;
    };

    DynamicTrainResult result;
    int step = 0;
    for (int epoch = 0; epoch < cfg.epochs; epoch++) {
        // (slice, start offset) batch schedule, windows shuffled within slices
        std::vector<std::vector<size_t>> orders(static_cast<size_t>(T));
        std::vector<std::pair<int, size_t>> schedule;
        for (int t = 0; t < T; t++) {
            auto& ord = orders[static_cast<size_t>(t)];
            ord.resize(slice_wins[static_cast<size_t>(t)].size());
            std::iota(ord.begin(), ord.end(), 0);
            std::shuffle(ord.begin(), ord.end(), rng);
            for (size_t s = 0; s < ord.size(); s += static_cast<size_t>(cfg.batch_size))
                schedule.emplace_back(t, s);
        }
        std::shuffle(schedule.begin(), schedule.end(), rng);

        double epoch_ll = 0.0;
        for (const auto& [t, start] : schedule) {
            const auto& wins = slice_wins[static_cast<size_t>(t)];
            const auto& ord = orders[static_cast<size_t>(t)];
            size_t end = std::min(ord.size(), start + static_cast<size_t>(cfg.batch_size));
            std::vector<ContextWindow> batch;
            batch.reserve(end - start);
            for (size_t i = start; i < end; i++) batch.push_back(wins[ord[i]]);

            std::vector<std::vector<int>> negatives;
            negatives.reserve(batch.size());
            for (const auto& w : batch) negatives.push_back(sampler.draw(neg.count, w.center, rng));
            Matrix& rho_slice = model.rho_t[static_cast<size_t>(t)];
            BatchResult br = batch_objective_and_grad_frozen(batch, rho_slice, model.alpha,
                                                             negatives);
            epoch_ll += br.objective;
            double weight = static_cast<double>(batch.size()) / total_positives;

            // prior gradients for every slice, plus the random walk coupling
            std::vector<Matrix> g_rho;
            g_rho.reserve(static_cast<size_t>(T));
            for (int u = 0; u < T; u++) {
                const Matrix& rho = model.rho_t[static_cast<size_t>(u)];
                g_rho.push_back(u == 0 ? grad_log_prior(rho, spec)
                                       : detail::grad_anchor_prior_only(rho, spec));
            }
            for (int u = 1; u < T; u++) {
                const auto& cur = model.rho_t[static_cast<size_t>(u)].data;
                const auto& prev = model.rho_t[static_cast<size_t>(u - 1)].data;
                auto& gc = g_rho[static_cast<size_t>(u)].data;
                auto& gp = g_rho[static_cast<size_t>(u - 1)].data;
                for (size_t i = 0; i < cur.size(); i++) {
                    double d = (cur[i] - prev[i]) / sigma_d;
                    gc[i] -= d;
                    gp[i] += d;
                }
            }
            for (int u = 0; u < T; u++) {
                Matrix g = g_rho[static_cast<size_t>(u)];
                for (double& x : g.data) x *= weight;
                if (u == t) {
                    for (const auto& [row, vec] : br.grad_rho) {
                        double* dst = g.row(row);
                        for (int k = 0; k < g.cols; k++) dst[k] += vec[static_cast<size_t>(k)];
                    }
                }
                adam_step_dense(model.rho_t[static_cast<size_t>(u)], g,
                                state_rho[static_cast<size_t>(u)], adam);
            }
            Matrix g_alpha = detail::combine_grads(grad_log_prior(model.alpha, spec), weight,
                                                   br.grad_alpha);
            adam_step_dense(model.alpha, g_alpha, state_alpha, adam);

            for (auto& rho : model.rho_t) project_support(rho, spec);
            project_support(model.alpha, spec);
            step++;
            if (step % 100 == 0) {
                for (const auto& rho : model.rho_t) detail::check_finite(rho, step, "rho");
                detail::check_finite(model.alpha, step, "alpha");
            }
            if (on_step) on_step(step, model);
        }
        double lp = log_prior(model.rho_t[0], spec) + log_prior(model.alpha, spec) +
                    walk_log_density(model);
        for (int t = 1; t < T; t++)
            lp += detail::log_anchor_prior_only(model.rho_t[static_cast<size_t>(t)], spec);
        result.log.push_back({epoch, epoch_ll + lp, lp, epoch_ll});
    }
    for (const auto& rho : model.rho_t) detail::check_finite(rho, step, "rho");
    detail::check_finite(model.alpha, step, "alpha");
    result.model = std::move(model);
    return result;
}

}  // namespace anchored
