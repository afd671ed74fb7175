#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "anchored/anchors.hpp"
#include "anchored/model.hpp"
#include "anchored/preprocess.hpp"

namespace anchored {

/// Hold-out words with known expected signs, resolved against the model's
/// word list and required to be disjoint from the anchor sets.
struct HoldoutSet {
    std::vector<std::pair<int, int>> entries;  // (id, expected sign +1/-1)
    std::vector<std::string> words;            // aligned with entries
    std::vector<std::string> missing;
    std::vector<std::string> dropped_anchor_overlap;
};

struct HoldoutRequest {
    std::vector<std::string> positive;
    std::vector<std::string> negative;
};

inline HoldoutRequest read_holdout_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open hold-out file: " + path);
    nlohmann::json j;
    in >> j;
    HoldoutRequest req;
    if (j.contains("positive")) req.positive = j["positive"].get<std::vector<std::string>>();
    if (j.contains("negative")) req.negative = j["negative"].get<std::vector<std::string>>();
    return req;
}

template <typename LookupFn>
HoldoutSet resolve_holdout(const HoldoutRequest& req, LookupFn&& lookup,
                           const AnchorSpec& spec, const PreprocessConfig& cfg) {
    std::unordered_set<int> anchor_ids;
    for (int v : spec.positive_ids) anchor_ids.insert(v);
    for (int v : spec.negative_ids) anchor_ids.insert(v);
    for (int v : spec.neutral_ids) anchor_ids.insert(v);

    HoldoutSet hs;
    std::unordered_set<int> seen;
    auto add = [&](const std::vector<std::string>& words, int sign) {
        for (const auto& w : words) {
            std::string norm = normalize_word(w, cfg);
            int id = norm.empty() ? -1 : lookup(norm);
            if (id < 0) {
                hs.missing.push_back(w);
            } else if (anchor_ids.count(id)) {
                hs.dropped_anchor_overlap.push_back(w);
            } else if (seen.insert(id).second) {
                hs.entries.emplace_back(id, sign);
                hs.words.push_back(w);
            }
        }
    };
    add(req.positive, +1);
    add(req.negative, -1);
    return hs;
}

struct WordOutcome {
    std::string word;
    int expected;   // +1 / -1
    int rho_sign;   // sign of the score; 0 counts as incorrect
    int alpha_sign;
};

struct EvalReport {
    int n = 0;
    double accuracy_rho = 0.0;
    double accuracy_alpha = 0.0;
    double accuracy_joint = 0.0;
    std::pair<double, double> ci_rho{0.0, 0.0};
    std::pair<double, double> ci_alpha{0.0, 0.0};
    std::vector<WordOutcome> per_word;
};

/// Normal-approximation binomial interval p +- z*sqrt(p(1-p)/n), clamped
/// to [0,1].
inline std::pair<double, double> binomial_ci(double p_hat, int n, double z = 1.96) {
    double half = z * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
    return {std::max(0.0, p_hat - half), std::min(1.0, p_hat + half)};
}

namespace detail {

inline int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

template <typename RhoScore, typename AlphaScore>
EvalReport score_holdout(const HoldoutSet& holdout, RhoScore&& rho_score,
                         AlphaScore&& alpha_score) {
    if (holdout.entries.empty()) throw std::runtime_error("no hold-out words resolved");
    EvalReport report;
    int rho_ok = 0, alpha_ok = 0, joint_ok = 0;
    for (size_t i = 0; i < holdout.entries.size(); i++) {
        auto [id, expected] = holdout.entries[i];
        int rs = sign_of(rho_score(id));
        int as = sign_of(alpha_score(id));
        bool r_ok = rs == expected;
        bool a_ok = as == expected;
        rho_ok += r_ok;
        alpha_ok += a_ok;
        joint_ok += r_ok && a_ok;
        report.per_word.push_back({holdout.words[i], expected, rs, as});
    }
    report.n = static_cast<int>(holdout.entries.size());
    report.accuracy_rho = static_cast<double>(rho_ok) / report.n;
    report.accuracy_alpha = static_cast<double>(alpha_ok) / report.n;
    report.accuracy_joint = static_cast<double>(joint_ok) / report.n;
    report.ci_rho = binomial_ci(report.accuracy_rho, report.n);
    report.ci_alpha = binomial_ci(report.accuracy_alpha, report.n);
    return report;
}

}  // namespace detail

/// Sign accuracy on the interpretable (last) dimension; a word is correct
/// iff its value lies strictly on the expected side of 0.
inline EvalReport holdout_accuracy(const EmbeddingModel& model, const HoldoutSet& holdout) {
    const int K = model.K();
    return detail::score_holdout(
        holdout, [&](int id) { return model.rho(id, K - 1); },
        [&](int id) { return model.alpha(id, K - 1); });
}

/// Post-hoc concept axis: sum over antonym pairs of the difference of
/// normalized embedding vectors.
inline std::vector<double> sota_axis(const EmbeddingModel& model,
                                     const std::vector<std::pair<int, int>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("need at least one antonym pair");
    const int K = model.K();
    std::vector<double> axis(static_cast<size_t>(K), 0.0);
    for (auto [pos, neg] : pairs) {
        const double* rp = model.rho.row(pos);
        const double* rn = model.rho.row(neg);
        double np = std::sqrt(dot(rp, rp, K));
        double nn = std::sqrt(dot(rn, rn, K));
        if (np == 0.0 || nn == 0.0)
            throw std::runtime_error("zero-norm embedding vector in antonym pair");
        for (int k = 0; k < K; k++)
            axis[static_cast<size_t>(k)] += rp[k] / np - rn[k] / nn;
    }
    return axis;
}

/// Classifies hold-out words by the sign of their cosine similarity with
/// the axis (equivalently the sign of the dot product).
inline EvalReport sota_accuracy(const EmbeddingModel& model, const std::vector<double>& axis,
                                const HoldoutSet& holdout) {
    const int K = model.K();
    double norm = std::sqrt(dot(axis.data(), axis.data(), K));
    if (norm == 0.0) throw std::invalid_argument("zero axis");
    return detail::score_holdout(
        holdout, [&](int id) { return dot(model.rho.row(id), axis.data(), K); },
        [&](int id) { return dot(model.alpha.row(id), axis.data(), K); });
}

/// Dimension-K value of one word across all time slices, in slice order.
inline std::vector<std::pair<std::string, double>> trajectory(const DynamicModel& model,
                                                              int word_id) {
    const int K = model.K();
    std::vector<std::pair<std::string, double>> series;
    for (int t = 0; t < model.T(); t++)
        series.emplace_back(model.slice_labels[static_cast<size_t>(t)],
                            model.rho_t[static_cast<size_t>(t)](word_id, K - 1));
    return series;
}

inline void write_report(std::ostream& out, const EvalReport& report) {
    nlohmann::json j;
    j["n"] = report.n;
    j["accuracy_rho"] = report.accuracy_rho;
    j["accuracy_alpha"] = report.accuracy_alpha;
    j["accuracy_joint"] = report.accuracy_joint;
    j["ci_rho"] = {report.ci_rho.first, report.ci_rho.second};
    j["ci_alpha"] = {report.ci_alpha.first, report.ci_alpha.second};
    out << j.dump(2) << '\n';
}

inline void write_per_word_table(std::ostream& out, const EvalReport& report) {
    out << "word\texpected\trho_sign\talpha_sign\n";
    for (const auto& w : report.per_word)
        out << w.word << '\t' << w.expected << '\t' << w.rho_sign << '\t' << w.alpha_sign << '\n';
}

}  // namespace anchored
