#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "anchored/anchors.hpp"
#include "anchored/matrix.hpp"
#include "anchored/model.hpp"
#include "anchored/vocabulary.hpp"

namespace testutil {

inline anchored::Matrix random_matrix(int rows, int cols, std::mt19937_64& rng,
                                      double scale = 0.5) {
    anchored::Matrix m(rows, cols);
    std::normal_distribution<double> dist(0.0, scale);
    for (double& x : m.data) x = dist(rng);
    return m;
}

/// Central finite difference of a scalar function of one matrix entry.
template <typename F>
double central_diff(anchored::Matrix& theta, int r, int c, F&& f, double h = 1e-6) {
    double orig = theta(r, c);
    theta(r, c) = orig + h;
    double plus = f(theta);
    theta(r, c) = orig - h;
    double minus = f(theta);
    theta(r, c) = orig;
    return (plus - minus) / (2.0 * h);
}

inline double rel_err(double got, double want) {
    double denom = std::max({std::abs(got), std::abs(want), 1e-12});
    return std::abs(got - want) / denom;
}

/// Vocabulary with synthetic counts (descending), words "w0", "w1", ...
inline anchored::Vocabulary toy_vocab(int V) {
    std::vector<std::pair<std::string, int64_t>> entries;
    for (int i = 0; i < V; i++) entries.emplace_back("w" + std::to_string(i), V - i + 1);
    return anchored::Vocabulary(std::move(entries));
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / (name + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testutil
