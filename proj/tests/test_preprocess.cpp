#include <catch2/catch_amalgamated.hpp>

#include "anchored/corpus.hpp"
#include "anchored/preprocess.hpp"
#include "anchored/vocabulary.hpp"
#include "helpers.hpp"

using namespace anchored;

TEST_CASE("porter stemming matches known forms") {
    CHECK(porter_stem("celebration") == "celebr");
    CHECK(porter_stem("positive") == "posit");
    CHECK(porter_stem("negative") == "negat");
    CHECK(porter_stem("happy") == "happi");
    CHECK(porter_stem("running") == "run");
    CHECK(porter_stem("september") == "septemb");
    CHECK(porter_stem("man") == "man");
    CHECK(porter_stem("woman") == "woman");
    CHECK(porter_stem("dying") == "die");
    CHECK(porter_stem("news") == "news");
    CHECK(porter_stem("cry") == "cri");
    CHECK(porter_stem("by") == "by");
    CHECK(porter_stem("hoping") == "hope");
    CHECK(porter_stem("hopping") == "hop");
    CHECK(porter_stem("X") == "X");  // non-alphabetic left alone
}

TEST_CASE("preprocess_text examples") {
    PreprocessConfig cfg;
    CHECK(preprocess_text("Celebration!", cfg) == std::vector<std::string>{"celebr"});
    CHECK(preprocess_text("", cfg).empty());
    CHECK(preprocess_text("He spent $1,000 running", cfg) ==
          std::vector<std::string>{"he", "spent", "X", "run"});
}

TEST_CASE("preprocess_text number handling") {
    PreprocessConfig cfg;
    CHECK(preprocess_text("1 22 3,000 4.5", cfg) ==
          std::vector<std::string>{"X", "X", "X", "X"});
    CHECK(preprocess_text("a1b", cfg) == std::vector<std::string>{"aXb"});
}

TEST_CASE("preprocess_text rejects invalid utf-8 with byte offset") {
    PreprocessConfig cfg;
    std::string bad = "abc";
    bad += static_cast<char>(0xFF);
    CHECK_THROWS_WITH(preprocess_text(bad, cfg),
                      Catch::Matchers::ContainsSubstring("byte offset 3"));
}

TEST_CASE("preprocess_text is a projection") {
    PreprocessConfig cfg;
    cfg.number_token = "x";  // lowercase so re-running the pipeline is stable
    std::string raw = "The CATS were running, hopefully! Prices rose 3,000%... "
                      "Negative celebration of September's happiness.";
    auto once = preprocess_text(raw, cfg);
    std::string rejoined;
    for (const auto& t : once) rejoined += t + " ";
    CHECK(preprocess_text(rejoined, cfg) == once);
}

TEST_CASE("build_vocabulary examples") {
    auto v1 = build_vocabulary({"a", "b", "a"}, 2);
    REQUIRE(v1.size() == 2);
    CHECK(v1.word(0) == "a");
    CHECK(v1.count(0) == 2);
    CHECK(v1.count(1) == 1);

    auto v2 = build_vocabulary({"a", "b", "a", "c"}, 2);
    REQUIRE(v2.size() == 2);
    CHECK(v2.word(0) == "a");
    CHECK(v2.word(1) == "b");  // b beats c lexicographically at count 1
    CHECK(v2.lookup("c") == -1);

    auto v3 = build_vocabulary({"x"}, 10);
    REQUIRE(v3.size() == 1);
    CHECK(v3.count(0) == 1);

    CHECK_THROWS(build_vocabulary({}, 5));
}

TEST_CASE("vocabulary lookup is a bijection and total matches") {
    auto vocab = build_vocabulary({"a", "b", "a", "c", "b", "a"}, 10);
    int64_t total = 0;
    for (int id = 0; id < vocab.size(); id++) {
        CHECK(vocab.lookup(vocab.word(id)) == id);
        total += vocab.count(id);
    }
    CHECK(vocab.total_tokens() == total);
}

TEST_CASE("vocabulary tsv round trip") {
    testutil::TempDir dir("vocab_tsv");
    auto vocab = build_vocabulary({"a", "b", "a", "c"}, 10);
    vocab.write_tsv(dir.file("vocab.tsv"));
    auto loaded = Vocabulary::read_tsv(dir.file("vocab.tsv"));
    REQUIRE(loaded.size() == vocab.size());
    for (int id = 0; id < vocab.size(); id++) {
        CHECK(loaded.word(id) == vocab.word(id));
        CHECK(loaded.count(id) == vocab.count(id));
    }
}

TEST_CASE("subsample removal probabilities") {
    Vocabulary vocab({{"hi", 100000}, {"lo", 1}});  // f_hi ~ 1, f_lo ~ 1e-5
    std::mt19937_64 rng(7);

    SECTION("threshold at frequency keeps everything") {
        std::vector<int> lo_stream(5000, 1);
        auto kept = subsample(lo_stream, vocab, 1e-5, rng);
        CHECK(kept.size() == lo_stream.size());  // f_lo = 1e-5 close to threshold
    }

    SECTION("infinite threshold keeps every token") {
        std::vector<int> stream(1000, 0);
        auto kept = subsample(stream, vocab, std::numeric_limits<double>::infinity(), rng);
        CHECK(kept.size() == stream.size());
    }

    SECTION("fixed seed reproduces the stream") {
        std::vector<int> stream(2000);
        for (size_t i = 0; i < stream.size(); i++) stream[i] = static_cast<int>(i % 2);
        std::mt19937_64 a(42), b(42);
        CHECK(subsample(stream, vocab, 1e-3, a) == subsample(stream, vocab, 1e-3, b));
    }
}

TEST_CASE("subsample empirical removal rate at f = 4 * threshold") {
    // with f = 4t the removal probability is 1 - sqrt(1/4) = 0.5
    const int n = 200000;
    Vocabulary vocab({{"a", 4}, {"b", 96}});  // f_a = 0.04
    double threshold = 0.01;
    std::vector<int> stream(n, 0);
    std::mt19937_64 rng(123);
    auto kept = subsample(stream, vocab, threshold, rng);
    double removal = 1.0 - static_cast<double>(kept.size()) / n;
    CHECK_THAT(removal, Catch::Matchers::WithinAbs(0.5, 0.02));
}

TEST_CASE("load_corpus over a manifest") {
    testutil::TempDir dir("load_corpus");
    testutil::write_text(dir.file("a.txt"), "the cat sat on the mat\n");
    testutil::write_text(dir.file("b.txt"), "the dog sat on the log\n");
    PreprocessConfig cfg;
    cfg.subsample_threshold = 1e9;  // keep everything

    SECTION("single slice") {
        auto [corpus, vocab] = load_corpus({{"all", dir.file("*.txt")}}, cfg);
        REQUIRE(corpus.slices.size() == 1);
        CHECK(corpus.slices[0].tokens.size() == 12);
        CHECK(vocab.lookup("the") == 0);  // most frequent
    }

    SECTION("slices keep manifest order") {
        auto [corpus, vocab] = load_corpus(
            {{"t0", dir.file("a.txt")}, {"t1", dir.file("b.txt")}}, cfg);
        REQUIRE(corpus.slices.size() == 2);
        CHECK(corpus.slices[0].label == "t0");
        CHECK(corpus.slices[1].label == "t1");
        for (const auto& s : corpus.slices)
            for (int t : s.tokens) CHECK(t < vocab.size());
    }

    SECTION("missing file errors") {
        CHECK_THROWS(load_corpus({{"x", dir.file("nope_*.txt")}}, cfg));
    }

    SECTION("punctuation-only corpus is empty") {
        testutil::write_text(dir.file("p.txt"), "!!! ... ???\n");
        CHECK_THROWS_WITH(load_corpus({{"p", dir.file("p.txt")}}, cfg),
                          Catch::Matchers::ContainsSubstring("empty corpus"));
    }
}

TEST_CASE("manifest parsing rejects duplicate labels") {
    testutil::TempDir dir("manifest");
    testutil::write_text(dir.file("m.tsv"), "a\tx.txt\na\ty.txt\n");
    CHECK_THROWS_WITH(read_manifest(dir.file("m.tsv")),
                      Catch::Matchers::ContainsSubstring("duplicate slice label"));
}

TEST_CASE("slice cache round trip") {
    testutil::TempDir dir("cache");
    CorpusSlice slice{"t0", {0, 3, 1, 2, 0, 1}};
    write_slice_cache(dir.file("s.ids"), slice, 4);
    auto loaded = read_slice_cache(dir.file("s.ids"), "t0");
    CHECK(loaded.tokens == slice.tokens);
    CHECK(loaded.label == "t0");
}
