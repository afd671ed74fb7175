#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "anchored/trainer.hpp"
#include "helpers.hpp"

using namespace anchored;

namespace {

AnchorSpec small_spec(PriorKind kind) {
    AnchorSpec spec;
    spec.kind = kind;
    spec.positive_ids = {0};
    spec.negative_ids = {1};
    spec.sigma = 1.0;
    spec.gamma = kind == PriorKind::Truncated ? 1000.0 : 1e-6;
    spec.omega = 1.0;
    return spec;
}

Corpus tiny_corpus(int n_tokens, int V, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, V - 1);
    Corpus c;
    c.slices.push_back({"all", {}});
    for (int i = 0; i < n_tokens; i++) c.slices[0].tokens.push_back(pick(rng));
    return c;
}

}  // namespace

TEST_CASE("adam sparse step") {
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    Matrix params(3, 2, 0.0);
    AdamState state(3, 2);

    SECTION("zero-gradient rows stay untouched") {
        SparseGrad grads;
        grads[1] = {1.0, -1.0};
        adam_step(params, grads, state, cfg);
        CHECK(params(0, 0) == 0.0);
        CHECK(state.step[0] == 0);
        CHECK(state.step[1] == 1);
        CHECK(params(1, 0) != 0.0);
    }

    SECTION("first step is lr * g / (|g| + eps) after bias correction") {
        SparseGrad grads;
        grads[0] = {2.0, -0.5};
        adam_step(params, grads, state, cfg);
        // bias-corrected m_hat = g, v_hat = g^2 at t=1
        for (int k = 0; k < 2; k++) {
            double g = grads[0][static_cast<size_t>(k)];
            double expected = cfg.learning_rate * g / (std::abs(g) + cfg.eps);
            CHECK_THAT(params(0, k), Catch::Matchers::WithinRel(expected, 1e-9));
        }
    }

    SECTION("state equals a hand-rolled two-step recurrence") {
        double g1 = 0.8, g2 = -0.3;
        SparseGrad s1, s2;
        s1[2] = {g1, 0.0};
        s2[2] = {g2, 0.0};
        adam_step(params, s1, state, cfg);
        adam_step(params, s2, state, cfg);

        double m = 0, v = 0, x = 0;
        for (int t = 1; t <= 2; t++) {
            double g = t == 1 ? g1 : g2;
            m = cfg.beta1 * m + (1 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
            double mh = m / (1 - std::pow(cfg.beta1, t));
            double vh = v / (1 - std::pow(cfg.beta2, t));
            x += cfg.learning_rate * mh / (std::sqrt(vh) + cfg.eps);
        }
        CHECK_THAT(params(2, 0), Catch::Matchers::WithinRel(x, 1e-12));
        CHECK(state.step[2] == 2);
    }
}

TEST_CASE("init_model") {
    TrainConfig cfg;
    cfg.K = 5;
    std::mt19937_64 rng(1);

    SECTION("kind none is fully random at init_scale") {
        AnchorSpec spec;
        auto model = init_model(50, cfg, spec, rng);
        double var = 0.0;
        for (double x : model.rho.data) var += x * x;
        var /= static_cast<double>(model.rho.data.size());
        CHECK_THAT(var, Catch::Matchers::WithinAbs(cfg.init_scale * cfg.init_scale, 0.005));
    }
    SECTION("standard basis anchors start at the basis vectors") {
        auto spec = small_spec(PriorKind::StandardBasis);
        auto model = init_model(10, cfg, spec, rng);
        CHECK(model.rho(0, 4) == 1.0);
        CHECK(model.rho(1, 4) == -1.0);
        CHECK(model.alpha(0, 4) == 1.0);
    }
    SECTION("truncated anchors start inside their support") {
        auto spec = small_spec(PriorKind::Truncated);
        auto model = init_model(10, cfg, spec, rng);
        CHECK(model.rho(0, 4) == cfg.init_scale);
        CHECK(model.rho(1, 4) == -cfg.init_scale);
    }
    SECTION("deterministic under seed") {
        AnchorSpec spec;
        std::mt19937_64 a(9), b(9);
        auto m1 = init_model(10, cfg, spec, a);
        auto m2 = init_model(10, cfg, spec, b);
        CHECK(m1.rho.data == m2.rho.data);
    }
}

TEST_CASE("zero epochs returns the initialization") {
    TrainConfig cfg;
    cfg.K = 4;
    cfg.epochs = 0;
    auto vocab = testutil::toy_vocab(8);
    auto corpus = tiny_corpus(100, 8, 3);
    AnchorSpec spec;
    auto result = train(corpus, cfg, spec, vocab);
    std::mt19937_64 rng(cfg.seed);
    auto init = init_model(8, cfg, spec, rng);
    CHECK(result.model.rho.data == init.rho.data);
    CHECK(result.model.alpha.data == init.alpha.data);
}

TEST_CASE("pure-prior adam ascent reaches the standard basis mode") {
    // likelihood disabled: optimize the prior alone from a random start
    auto spec = small_spec(PriorKind::StandardBasis);
    spec.gamma = 1e-12;
    spec.omega = 1e-12;
    const int V = 6, K = 4;
    std::mt19937_64 rng(17);
    Matrix theta = testutil::random_matrix(V, K, rng, 0.3);
    AdamConfig adam;
    adam.learning_rate = 1e-3;
    AdamState state(V, K);
    for (int i = 0; i < 4000; i++) {
        Matrix g = grad_log_prior(theta, spec);
        adam_step_dense(theta, g, state, adam);
    }
    for (int k = 0; k < K; k++) {
        double target_pos = k == K - 1 ? 1.0 : 0.0;
        double target_neg = k == K - 1 ? -1.0 : 0.0;
        CHECK_THAT(theta(0, k), Catch::Matchers::WithinAbs(target_pos, 1e-3));
        CHECK_THAT(theta(1, k), Catch::Matchers::WithinAbs(target_neg, 1e-3));
    }
}

TEST_CASE("per-epoch prior weights sum to one") {
    // the minibatch prior scaling batch/total must partition each epoch
    const size_t total = 1234;
    const size_t batch_size = 100;
    double sum = 0.0;
    for (size_t start = 0; start < total; start += batch_size)
        sum += static_cast<double>(std::min(total, start + batch_size) - start) /
               static_cast<double>(total);
    CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("truncated training keeps every anchor on its side after every step") {
    TrainConfig cfg;
    cfg.K = 3;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    auto vocab = testutil::toy_vocab(10);
    auto corpus = tiny_corpus(300, 10, 5);
    auto spec = small_spec(PriorKind::Truncated);

    int checks = 0;
    auto result = train(corpus, cfg, spec, vocab, [&](int, const EmbeddingModel& m) {
        checks++;
        for (int v : spec.positive_ids) {
            REQUIRE(m.rho(v, cfg.K - 1) >= 1e-8);
            REQUIRE(m.alpha(v, cfg.K - 1) >= 1e-8);
        }
        for (int v : spec.negative_ids) {
            REQUIRE(m.rho(v, cfg.K - 1) <= -1e-8);
            REQUIRE(m.alpha(v, cfg.K - 1) <= -1e-8);
        }
    });
    CHECK(checks > 0);
}

TEST_CASE("training is deterministic in single-threaded mode") {
    TrainConfig cfg;
    cfg.K = 3;
    cfg.epochs = 2;
    cfg.batch_size = 32;
    cfg.seed = 123;
    auto vocab = testutil::toy_vocab(12);
    auto corpus = tiny_corpus(400, 12, 8);
    auto spec = small_spec(PriorKind::StandardBasis);

    auto r1 = train(corpus, cfg, spec, vocab);
    auto r2 = train(corpus, cfg, spec, vocab);
    std::vector<std::string> words;
    for (int v = 0; v < vocab.size(); v++) words.push_back(vocab.word(v));
    std::ostringstream a, b;
    write_model(a, r1.model, words);
    write_model(b, r2.model, words);
    CHECK(a.str() == b.str());
}

TEST_CASE("dynamic training basics") {
    TrainConfig cfg;
    cfg.K = 3;
    cfg.batch_size = 32;
    auto vocab = testutil::toy_vocab(10);
    Corpus corpus;
    corpus.slices.push_back(tiny_corpus(200, 10, 1).slices[0]);
    corpus.slices.push_back(tiny_corpus(200, 10, 2).slices[0]);
    corpus.slices[0].label = "t0";
    corpus.slices[1].label = "t1";
    AnchorSpec spec;

    SECTION("zero epochs: every slice equals the initialization") {
        cfg.epochs = 0;
        auto result = train_dynamic(corpus, cfg, spec, vocab);
        REQUIRE(result.model.T() == 2);
        CHECK(result.model.rho_t[0].data == result.model.rho_t[1].data);
        CHECK(result.model.slice_labels == std::vector<std::string>{"t0", "t1"});
    }

    SECTION("tight random walk keeps identical slices together") {
        cfg.epochs = 3;
        cfg.sigma_d = 1e-6;
        Corpus same;
        same.slices.push_back(tiny_corpus(200, 10, 1).slices[0]);
        same.slices.push_back(tiny_corpus(200, 10, 1).slices[0]);
        same.slices[0].label = "t0";
        same.slices[1].label = "t1";
        auto result = train_dynamic(same, cfg, spec, vocab);
        double max_gap = 0.0;
        for (size_t i = 0; i < result.model.rho_t[0].data.size(); i++)
            max_gap = std::max(max_gap, std::abs(result.model.rho_t[0].data[i] -
                                                 result.model.rho_t[1].data[i]));
        CHECK(max_gap < 0.05);
    }

    SECTION("single slice rejected") {
        Corpus one;
        one.slices.push_back(corpus.slices[0]);
        CHECK_THROWS(train_dynamic(one, cfg, spec, vocab));
    }
}

TEST_CASE("roughness decreases with sigma_d on a fixed corpus and seed") {
    TrainConfig cfg;
    cfg.K = 3;
    cfg.epochs = 3;
    cfg.batch_size = 32;
    cfg.seed = 4;
    auto vocab = testutil::toy_vocab(10);
    Corpus corpus;
    for (int t = 0; t < 3; t++) {
        corpus.slices.push_back(tiny_corpus(150, 10, static_cast<uint64_t>(t + 10)).slices[0]);
        corpus.slices.back().label = "t" + std::to_string(t);
    }
    AnchorSpec spec;

    auto roughness = [&](double sigma_d) {
        cfg.sigma_d = sigma_d;
        auto result = train_dynamic(corpus, cfg, spec, vocab);
        double r = 0.0;
        for (int t = 1; t < result.model.T(); t++)
            for (size_t i = 0; i < result.model.alpha.data.size(); i++) {
                double d = result.model.rho_t[static_cast<size_t>(t)].data[i] -
                           result.model.rho_t[static_cast<size_t>(t - 1)].data[i];
                r += d * d;
            }
        return r;
    };
    double r_loose = roughness(0.5);
    double r_mid = roughness(0.05);
    double r_tight = roughness(0.005);
    CHECK(r_loose >= r_mid);
    CHECK(r_mid >= r_tight);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    SECTION("odd window") {
        cfg.window = 7;
        CHECK_THROWS(validate(cfg));
    }
    SECTION("bad betas") {
        cfg.adam_beta1 = 1.0;
        CHECK_THROWS(validate(cfg));
    }
    SECTION("sigma_d default is sigma/100") {
        cfg.sigma = 2.0;
        CHECK(cfg.effective_sigma_d() == 0.02);
        cfg.sigma_d = 0.05;
        CHECK(cfg.effective_sigma_d() == 0.05);
    }
}
