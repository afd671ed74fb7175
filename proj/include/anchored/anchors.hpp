#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "anchored/preprocess.hpp"
#include "anchored/vocabulary.hpp"

namespace anchored {

enum class PriorKind { None, StandardBasis, Truncated };

inline std::string to_string(PriorKind k) {
    switch (k) {
        case PriorKind::None: return "none";
        case PriorKind::StandardBasis: return "standard_basis";
        case PriorKind::Truncated: return "truncated";
    }
    return "none";
}

inline PriorKind prior_kind_from_string(const std::string& s) {
    if (s == "none") return PriorKind::None;
    if (s == "standard_basis" || s == "standard-basis") return PriorKind::StandardBasis;
    if (s == "truncated") return PriorKind::Truncated;
    throw std::invalid_argument("unknown prior kind: " + s);
}

/// Resolved anchor sets plus prior hyperparameters. All variances use the
/// variance parameterization. The interpretable dimension is always the last
/// embedding dimension.
struct AnchorSpec {
    std::vector<int> positive_ids;
    std::vector<int> negative_ids;
    std::vector<int> neutral_ids;
    PriorKind kind = PriorKind::None;
    bool use_neutral = false;
    double sigma = 1.0;      // base variance
    double gamma = 1e-6;     // dimension-K variance for anchors
    double omega = 1.0;      // off-dimension variance for anchors
    double psi = 0.01;       // dimension-K variance for neutral words

    bool has_anchor_prior() const { return kind != PriorKind::None; }
};

inline void validate(const AnchorSpec& spec, int vocab_size) {
    if (spec.sigma <= 0 || spec.gamma <= 0 || spec.omega <= 0 || spec.psi <= 0)
        throw std::invalid_argument("all prior variances must be > 0");
    if (spec.kind != PriorKind::None &&
        (spec.positive_ids.empty() || spec.negative_ids.empty()))
        throw std::invalid_argument("anchored prior requires nonempty positive and negative sets");
    std::unordered_set<int> seen;
    auto check = [&](const std::vector<int>& ids, const char* name) {
        for (int id : ids) {
            if (id < 0 || id >= vocab_size)
                throw std::invalid_argument(std::string(name) + " anchor id out of range");
            if (!seen.insert(id).second)
                throw std::invalid_argument("anchor sets are not disjoint");
        }
    };
    check(spec.positive_ids, "positive");
    check(spec.negative_ids, "negative");
    check(spec.neutral_ids, "neutral");
}

/// Raw (unresolved) anchor request, as read from an anchor file.
struct AnchorRequest {
    std::vector<std::string> positive;
    std::vector<std::string> negative;
    std::vector<std::string> neutral;
    PriorKind kind = PriorKind::None;
    bool use_neutral = false;
    double sigma = 1.0;
    double gamma = 1e-6;
    double omega = 1.0;
    double psi = 0.01;
};

struct AnchorResolution {
    std::unordered_map<std::string, int> resolved;  // requested word -> id
    std::vector<std::string> missing;
};

/// Passes each requested word through the preprocessing pipeline before
/// lookup. Missing words are reported, not fatal, unless a required set
/// ends up empty. A word resolving into two different sets is an error.
inline std::pair<AnchorSpec, AnchorResolution> resolve_anchors(const Vocabulary& vocab,
                                                               const AnchorRequest& req,
                                                               const PreprocessConfig& cfg) {
    AnchorSpec spec;
    spec.kind = req.kind;
    spec.use_neutral = req.use_neutral;
    spec.sigma = req.sigma;
    spec.gamma = req.gamma;
    spec.omega = req.omega;
    spec.psi = req.psi;

    AnchorResolution res;
    std::unordered_map<int, int> id_set;  // id -> set index, for collision detection
    auto resolve_set = [&](const std::vector<std::string>& words, std::vector<int>& out,
                           int set_index) {
        std::unordered_set<int> dedup;
        for (const auto& w : words) {
            std::string norm = normalize_word(w, cfg);
            int id = norm.empty() ? -1 : vocab.lookup(norm);
            if (id < 0) {
                res.missing.push_back(w);
                continue;
            }
            res.resolved[w] = id;
            auto [it, inserted] = id_set.emplace(id, set_index);
            if (!inserted && it->second != set_index)
                throw std::runtime_error("anchor word '" + w + "' (stem '" + norm +
                                         "') resolves into two different sets");
            if (dedup.insert(id).second) out.push_back(id);
        }
    };
    resolve_set(req.positive, spec.positive_ids, 0);
    resolve_set(req.negative, spec.negative_ids, 1);
    resolve_set(req.neutral, spec.neutral_ids, 2);

    if (req.kind != PriorKind::None) {
        if (spec.positive_ids.empty())
            throw std::runtime_error("no positive anchor words resolved against the vocabulary");
        if (spec.negative_ids.empty())
            throw std::runtime_error("no negative anchor words resolved against the vocabulary");
    }
    if (spec.use_neutral && spec.neutral_ids.empty() && !req.neutral.empty())
        throw std::runtime_error("no neutral words resolved against the vocabulary");
    return {std::move(spec), std::move(res)};
}

/// Anchor file: JSON with word arrays `positive`, `negative`, `neutral` and
/// a hyperparameter block (`kind`, `sigma`, `gamma`, `omega`, `psi`).
inline AnchorRequest read_anchor_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open anchor file: " + path);
    nlohmann::json j;
    in >> j;
    AnchorRequest req;
    if (j.contains("positive")) req.positive = j["positive"].get<std::vector<std::string>>();
    if (j.contains("negative")) req.negative = j["negative"].get<std::vector<std::string>>();
    if (j.contains("neutral")) req.neutral = j["neutral"].get<std::vector<std::string>>();
    if (j.contains("kind")) req.kind = prior_kind_from_string(j["kind"].get<std::string>());
    if (j.contains("use_neutral")) req.use_neutral = j["use_neutral"].get<bool>();
    if (j.contains("sigma")) req.sigma = j["sigma"].get<double>();
    if (j.contains("gamma")) req.gamma = j["gamma"].get<double>();
    if (j.contains("omega")) req.omega = j["omega"].get<double>();
    if (j.contains("psi")) req.psi = j["psi"].get<double>();
    return req;
}

inline void write_anchor_file(const std::string& path, const AnchorRequest& req) {
    nlohmann::json j;
    j["kind"] = to_string(req.kind);
    j["use_neutral"] = req.use_neutral;
    j["sigma"] = req.sigma;
    j["gamma"] = req.gamma;
    j["omega"] = req.omega;
    j["psi"] = req.psi;
    j["positive"] = req.positive;
    j["negative"] = req.negative;
    j["neutral"] = req.neutral;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace anchored
