#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "vatd/checkpoint.hpp"
#include "vatd/classifier.hpp"
#include "vatd/mlm.hpp"

using namespace vatd;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void corrupt_byte(const std::string& path, long offset, char value) {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(offset);
    f.put(value);
}

}  // namespace

TEST_CASE("raw checkpoint roundtrip") {
    TempFile tmp("test_ckpt_raw.bin");
    nlohmann::json meta;
    meta["kind"] = "test";
    meta["n"] = 3;
    Vec a = {1.0, -2.5, 3.25};
    write_checkpoint(tmp.path, meta, {std::span<const double>(a)});

    RawCheckpoint r = read_checkpoint(tmp.path);
    CHECK(r.meta["kind"] == "test");
    CHECK(r.data == a);
}

TEST_CASE("checkpoint rejects bad magic") {
    TempFile tmp("test_ckpt_magic.bin");
    write_checkpoint(tmp.path, nlohmann::json::object(), {});
    corrupt_byte(tmp.path, 0, 'X');
    CHECK_THROWS_WITH_AS(read_checkpoint(tmp.path),
                         doctest::Contains("incompatible checkpoint"),
                         std::runtime_error);
}

TEST_CASE("checkpoint rejects unknown version") {
    TempFile tmp("test_ckpt_version.bin");
    write_checkpoint(tmp.path, nlohmann::json::object(), {});
    corrupt_byte(tmp.path, 4, 9);  // version lives after the 4 magic bytes
    CHECK_THROWS_WITH_AS(read_checkpoint(tmp.path),
                         doctest::Contains("incompatible checkpoint"),
                         std::runtime_error);
}

TEST_CASE("classifier checkpoint roundtrip is bit identical") {
    TempFile tmp("test_ckpt_clf.bin");
    ClassifierParams p = init_classifier(20, 6, 4, 8, 3, 42);
    save_classifier(p, tmp.path, {"red", "green", "blue"}, "abc123");

    ClassifierCheckpoint c = load_classifier(tmp.path);
    CHECK(c.params.vocab_size == p.vocab_size);
    CHECK(c.params.seed == p.seed);
    CHECK(c.labels == std::vector<std::string>{"red", "green", "blue"});
    CHECK(c.config_hash == "abc123");
    CHECK(c.params.E.a == p.E.a);
    CHECK(c.params.W_a.a == p.W_a.a);
    CHECK(c.params.b_a == p.b_a);
    CHECK(c.params.v_a == p.v_a);
    CHECK(c.params.W_1.a == p.W_1.a);
    CHECK(c.params.b_1 == p.b_1);
    CHECK(c.params.W_2.a == p.W_2.a);
    CHECK(c.params.b_2 == p.b_2);
}

TEST_CASE("truncated classifier checkpoint is rejected") {
    TempFile tmp("test_ckpt_trunc.bin");
    ClassifierParams p = init_classifier(20, 6, 4, 8, 3, 42);
    save_classifier(p, tmp.path);

    // chop off the last 16 bytes
    std::ifstream in(tmp.path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(tmp.path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16));
    out.close();

    CHECK_THROWS_WITH_AS(load_classifier(tmp.path),
                         doctest::Contains("incompatible checkpoint"),
                         std::runtime_error);
}

TEST_CASE("model kind fields are enforced") {
    TempFile clf_file("test_ckpt_kind_clf.bin");
    TempFile mlm_file("test_ckpt_kind_mlm.bin");
    save_classifier(init_classifier(10, 4, 3, 5, 2, 1), clf_file.path);
    MLMTrainConfig mc;
    mc.d_m = 4;
    mc.h_m = 5;
    mc.window = 2;
    save_mlm(init_mlm(10, mc), mlm_file.path);

    CHECK_THROWS_AS(load_mlm(clf_file.path), std::runtime_error);
    CHECK_THROWS_AS(load_classifier(mlm_file.path), std::runtime_error);
}

TEST_CASE("mlm checkpoint roundtrip is bit identical") {
    TempFile tmp("test_ckpt_mlm.bin");
    MLMTrainConfig mc;
    mc.d_m = 6;
    mc.h_m = 7;
    mc.window = 2;
    mc.seed = 99;
    MLMParams m = init_mlm(15, mc);
    save_mlm(m, tmp.path);

    MLMParams r = load_mlm(tmp.path);
    CHECK(r.vocab_size == m.vocab_size);
    CHECK(r.w == m.w);
    CHECK(r.seed == m.seed);
    CHECK(r.E_m.a == m.E_m.a);
    CHECK(r.W_c.a == m.W_c.a);
    CHECK(r.b_c == m.b_c);
    CHECK(r.W_o.a == m.W_o.a);
    CHECK(r.b_o == m.b_o);
}
