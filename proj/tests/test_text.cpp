#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "vatd/text.hpp"

using namespace vatd;

TEST_CASE("vocab reserves pad and unk") {
    Vocab v;
    CHECK(v.size() == 2);
    CHECK(v.token(Vocab::kPadId) == "<pad>");
    CHECK(v.token(Vocab::kUnkId) == "<unk>");
}

TEST_CASE("encode maps unknown tokens to unk") {
    Vocab v = Vocab::from_tokens({"hello", "world"});
    Sentence s = v.encode("hello there world");
    CHECK(s.ids == std::vector<int32_t>{2, Vocab::kUnkId, 3});
    CHECK(v.decode(s) == "hello <unk> world");
}

TEST_CASE("encode rejects empty text") {
    Vocab v;
    CHECK_THROWS_AS(v.encode("   "), std::invalid_argument);
}

TEST_CASE("from_tokens rejects duplicates") {
    CHECK_THROWS_AS(Vocab::from_tokens({"a", "a"}), std::invalid_argument);
}

TEST_CASE("build_vocab ranks by frequency then lexicographically") {
    Vocab v = build_vocab({"b a a", "c b", "c c"});
    // freq: a=2, b=2, c=3 -> c, then a before b
    CHECK(v.token(2) == "c");
    CHECK(v.token(3) == "a");
    CHECK(v.token(4) == "b");
}

TEST_CASE("build_vocab honors min_freq and max_size") {
    Vocab v = build_vocab({"a a b"}, 2);
    CHECK(v.size() == 3);
    CHECK(v.contains("a"));
    CHECK(!v.contains("b"));

    Vocab w = build_vocab({"a a a b b c"}, 1, 4);
    CHECK(w.size() == 4);  // pad, unk, a, b
    CHECK(!w.contains("c"));
}

TEST_CASE("vocab file roundtrip") {
    Vocab v = build_vocab({"x y z z"});
    const std::string path = "test_vocab_roundtrip.txt";
    save_vocab(v, path);
    Vocab w = load_vocab(path);
    CHECK(w.size() == v.size());
    for (int i = 0; i < v.size(); ++i) {
        CHECK(w.token(i) == v.token(i));
    }
    std::remove(path.c_str());
}

TEST_CASE("load_vocab rejects files without the reserved header") {
    const std::string path = "test_vocab_bad.txt";
    {
        std::ofstream out(path);
        out << "hello\nworld\n";
    }
    CHECK_THROWS_AS(load_vocab(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("hamming distance") {
    Sentence a{{1, 2, 3}};
    Sentence b{{1, 5, 3}};
    CHECK(hamming(a, a) == 0);
    CHECK(hamming(a, b) == 1);
    Sentence c{{1, 2}};
    CHECK_THROWS_AS(hamming(a, c), std::invalid_argument);
}

TEST_CASE("perturbation budget") {
    CHECK(perturbation_budget(4, 0.25) == 1);
    CHECK(perturbation_budget(20, 0.25) == 5);
    CHECK(perturbation_budget(1, 0.25) == 1);   // clamp from below
    CHECK(perturbation_budget(3, 0.25) == 1);   // floor(0.75)=0 -> clamp
    CHECK(perturbation_budget(10, 1.0) == 10);
    CHECK(perturbation_budget(7, 0.5) == 3);
    CHECK_THROWS_AS(perturbation_budget(0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(perturbation_budget(5, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(perturbation_budget(5, 1.1), std::invalid_argument);
}
