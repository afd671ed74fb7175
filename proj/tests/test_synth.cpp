#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "anchored/porter.hpp"
#include "anchored/synth.hpp"
#include "helpers.hpp"

using namespace anchored;

namespace {

PlantedSpec small_spec() {
    PlantedSpec spec;
    spec.V = 40;
    spec.n_signal = 10;
    spec.n_docs = 50;
    spec.doc_len = 30;
    spec.seed = 7;
    return spec;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

TEST_CASE("planted words survive the preprocessing pipeline unchanged") {
    for (int i : {0, 1, 17, 18, 19, 100, 499, 5000}) {
        std::string w = planted_word(i);
        CHECK(porter_stem(w) == w);
        for (char c : w) CHECK(std::string("bcdfghjklmnpqrtvwz").find(c) != std::string::npos);
    }
    // indices map to distinct strings
    std::set<std::string> seen;
    for (int i = 0; i < 2000; i++) seen.insert(planted_word(i));
    CHECK(seen.size() == 2000);
}

TEST_CASE("truth labels split the signal words into equal halves") {
    auto res = generate(small_spec());
    int pos = 0, neg = 0, neutral = 0;
    for (const auto& [word, sign] : res.truth) {
        if (sign > 0) pos++;
        else if (sign < 0) neg++;
        else neutral++;
    }
    CHECK(pos == 5);
    CHECK(neg == 5);
    CHECK(neutral == 30);
    // first half of the index range is positive
    CHECK(res.truth.at(planted_word(0)) == 1);
    CHECK(res.truth.at(planted_word(4)) == 1);
    CHECK(res.truth.at(planted_word(5)) == -1);
    CHECK(res.truth.at(planted_word(9)) == -1);
    CHECK(res.truth.at(planted_word(10)) == 0);
}

TEST_CASE("generation is bit-exact under a fixed seed") {
    auto a = generate(small_spec());
    auto b = generate(small_spec());
    CHECK(a.slice_docs == b.slice_docs);
    auto spec = small_spec();
    spec.seed = 8;
    auto c = generate(spec);
    CHECK(a.slice_docs != c.slice_docs);
}

TEST_CASE("documents have the requested shape") {
    auto spec = small_spec();
    spec.n_slices = 2;
    auto res = generate(spec);
    REQUIRE(res.slice_docs.size() == 2);
    for (const auto& docs : res.slice_docs) {
        REQUIRE(static_cast<int>(docs.size()) == spec.n_docs);
        for (const auto& doc : docs)
            CHECK(static_cast<int>(split_ws(doc).size()) == spec.doc_len);
    }
}

TEST_CASE("mix controls the signal fraction") {
    auto count_signal = [](const PlantedResult& res, const PlantedSpec& spec) {
        int64_t signal = 0, total = 0;
        for (const auto& doc : res.slice_docs[0])
            for (const auto& w : split_ws(doc)) {
                signal += res.truth.at(w) != 0;
                total++;
            }
        (void)spec;
        return static_cast<double>(signal) / static_cast<double>(total);
    };
    auto spec = small_spec();
    spec.n_docs = 400;

    SECTION("mix 0.7 puts ~70% of tokens in the signal pools") {
        spec.mix = 0.7;
        CHECK_THAT(count_signal(generate(spec), spec), Catch::Matchers::WithinAbs(0.7, 0.02));
    }
    SECTION("mix 0 never emits signal words") {
        spec.mix = 0.0;
        CHECK(count_signal(generate(spec), spec) == 0.0);
    }
    SECTION("mix 1 only emits signal words") {
        spec.mix = 1.0;
        CHECK(count_signal(generate(spec), spec) == 1.0);
    }
}

TEST_CASE("signal words co-occur with their own polarity") {
    // oracle: per document, signal tokens should be of a single polarity,
    // so the cross-polarity co-occurrence count within documents is zero
    auto spec = small_spec();
    spec.n_docs = 200;
    auto res = generate(spec);
    for (const auto& doc : res.slice_docs[0]) {
        bool saw_pos = false, saw_neg = false;
        for (const auto& w : split_ws(doc)) {
            int s = res.truth.at(w);
            saw_pos |= s > 0;
            saw_neg |= s < 0;
        }
        CHECK_FALSE((saw_pos && saw_neg));
    }
}

TEST_CASE("polarity flip moves one word at the requested slice") {
    auto spec = small_spec();
    spec.n_slices = 3;
    spec.flip_word = 0;  // a positive word
    spec.flip_slice = 2;
    spec.n_docs = 300;
    auto res = generate(spec);
    std::string flipped = planted_word(0);
    std::string anchor_neg = planted_word(5);

    auto co_occurs_with_neg = [&](int slice) {
        for (const auto& doc : res.slice_docs[static_cast<size_t>(slice)]) {
            auto toks = split_ws(doc);
            bool has_flip = std::find(toks.begin(), toks.end(), flipped) != toks.end();
            bool has_neg = false;
            for (const auto& w : toks)
                if (w != flipped && res.truth.at(w) < 0) has_neg = true;
            if (has_flip && has_neg) return true;
        }
        return false;
    };
    CHECK_FALSE(co_occurs_with_neg(0));
    CHECK_FALSE(co_occurs_with_neg(1));
    CHECK(co_occurs_with_neg(2));
    (void)anchor_neg;
}

TEST_CASE("write_planted emits a loadable manifest") {
    testutil::TempDir dir("planted");
    auto spec = small_spec();
    spec.n_slices = 2;
    auto res = generate(spec);
    std::string manifest = write_planted(res, dir.file("corpus"));

    auto sources = read_manifest(manifest);
    REQUIRE(sources.size() == 2);
    CHECK(sources[0].label == "t0");

    PreprocessConfig cfg;
    cfg.subsample_threshold = 1e9;  // keep everything
    auto [corpus, vocab] = load_corpus(sources, cfg);
    REQUIRE(corpus.slices.size() == 2);
    // every planted type should survive preprocessing verbatim
    for (const auto& [word, sign] : res.truth) {
        (void)sign;
        if (vocab.lookup(word) < 0) continue;  // rare types may not appear
        CHECK(vocab.word(vocab.lookup(word)) == word);
    }
    int64_t expected_tokens =
        static_cast<int64_t>(spec.n_docs) * spec.doc_len * spec.n_slices;
    CHECK(vocab.total_tokens() == expected_tokens);
}

TEST_CASE("planted spec validation") {
    PlantedSpec spec = small_spec();
    CHECK_NOTHROW(validate(spec));
    SECTION("odd signal count") {
        spec.n_signal = 7;
        CHECK_THROWS(validate(spec));
    }
    SECTION("mix out of range") {
        spec.mix = 1.5;
        CHECK_THROWS(validate(spec));
    }
    SECTION("doc_len too small") {
        spec.doc_len = 1;
        CHECK_THROWS(validate(spec));
    }
}
