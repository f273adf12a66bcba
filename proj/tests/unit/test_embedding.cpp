#include <doctest.h>

#include <cmath>
#include <cstring>

#include "pahc/embedding.hpp"
#include "pahc/error.hpp"
#include "pahc/rng.hpp"
#include "test_util.hpp"

using namespace pahc;
using pahc::testing::TempDir;
using pahc::testing::spit;

namespace {

std::string binary_bytes(std::uint32_t n, std::uint32_t d, const std::vector<float>& values) {
    std::string out = "EMB1";
    auto push_u32 = [&](std::uint32_t v) {
        for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
    };
    push_u32(n);
    push_u32(d);
    for (float f : values) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        push_u32(bits);
    }
    return out;
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("binary load parses header and row-major f32 payload") {
    TempDir tmp;
    spit(tmp.file("a.emb"), binary_bytes(3, 2, {1, 2, 3, 4, 5, 6}));
    EmbeddingSet set = load_embeddings(tmp.file("a.emb"), EmbeddingFormat::binary);
    CHECK(set.rows == 3);
    CHECK(set.cols == 2);
    CHECK(set.row(0)[0] == 1.0);
    CHECK(set.row(2)[1] == 6.0);
    CHECK_FALSE(set.has_ids());
}

TEST_CASE("csv with leading id column") {
    TempDir tmp;
    spit(tmp.file("a.csv"), "id1,1.0,0.0\nid2,0.0,1.0\n");
    EmbeddingSet set = load_embeddings(tmp.file("a.csv"), EmbeddingFormat::csv);
    CHECK(set.rows == 2);
    CHECK(set.cols == 2);
    REQUIRE(set.has_ids());
    CHECK(set.ids[0] == "id1");
    CHECK(set.ids[1] == "id2");
    CHECK(set.row(1)[1] == 1.0);
}

TEST_CASE("csv without ids is auto-detected") {
    TempDir tmp;
    spit(tmp.file("a.csv"), "1.5,2.5\n3.5,4.5\n");
    EmbeddingSet set = load_embeddings(tmp.file("a.csv"), EmbeddingFormat::csv);
    CHECK_FALSE(set.has_ids());
    CHECK(set.row(0)[1] == 2.5);
}

TEST_CASE("non-finite value is rejected with the row index") {
    TempDir tmp;
    spit(tmp.file("a.emb"),
         binary_bytes(3, 2, {1, 2, std::nanf(""), 4, 5, 6}));
    CHECK_THROWS_WITH_AS(load_embeddings(tmp.file("a.emb"), EmbeddingFormat::binary),
                         doctest::Contains("row 1"), IoError);
    spit(tmp.file("b.csv"), "1.0,2.0\nnan,4.0\n");
    CHECK_THROWS_AS(load_embeddings(tmp.file("b.csv"), EmbeddingFormat::csv), IoError);
}

TEST_CASE("malformed inputs carry byte or line positions") {
    TempDir tmp;
    spit(tmp.file("bad_magic.emb"), std::string("XXXX") + binary_bytes(1, 1, {1}).substr(4));
    CHECK_THROWS_WITH_AS(load_embeddings(tmp.file("bad_magic.emb"), EmbeddingFormat::binary),
                         doctest::Contains("byte 0"), IoError);

    std::string truncated = binary_bytes(3, 2, {1, 2, 3});
    spit(tmp.file("short.emb"), truncated);
    CHECK_THROWS_WITH_AS(load_embeddings(tmp.file("short.emb"), EmbeddingFormat::binary),
                         doctest::Contains("byte"), IoError);

    spit(tmp.file("ragged.csv"), "1.0,2.0\n3.0\n");
    CHECK_THROWS_WITH_AS(load_embeddings(tmp.file("ragged.csv"), EmbeddingFormat::csv),
                         doctest::Contains("line 2"), IoError);
}

TEST_CASE("sidecar files attach and must match the row count") {
    TempDir tmp;
    spit(tmp.file("a.emb"), binary_bytes(2, 2, {1, 0, 0, 1}));
    spit(tmp.file("a.emb.ids"), "u\nv\n");
    spit(tmp.file("a.emb.labels"), "7\n7\n");
    spit(tmp.file("a.emb.media"), "0\n1\n");
    EmbeddingSet set = load_embeddings(tmp.file("a.emb"), EmbeddingFormat::binary);
    CHECK(set.ids == std::vector<std::string>{"u", "v"});
    CHECK(set.labels == std::vector<std::int64_t>{7, 7});
    CHECK(set.media_ids == std::vector<std::int64_t>{0, 1});

    spit(tmp.file("a.emb.labels"), "7\n");
    CHECK_THROWS_AS(load_embeddings(tmp.file("a.emb"), EmbeddingFormat::binary), IoError);
}

TEST_CASE("normalize scales rows to unit norm") {
    EmbeddingSet set;
    set.rows = 2;
    set.cols = 2;
    set.data = {3, 4, 1, 0};
    EmbeddingSet out = normalize(set);
    CHECK(out.row(0)[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(out.row(0)[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(out.row(1)[0] == 1.0);  // already unit: unchanged
    CHECK(out.row(1)[1] == 0.0);
}

TEST_CASE("normalize rejects a zero row naming its index") {
    EmbeddingSet set;
    set.rows = 2;
    set.cols = 2;
    set.data = {1, 0, 0, 0};
    CHECK_THROWS_WITH_AS(normalize(set), doctest::Contains("row 1"), NumericError);
}

TEST_CASE("normalize is idempotent") {
    Rng rng(11, 0, 0);
    EmbeddingSet set;
    set.rows = 20;
    set.cols = 7;
    for (std::size_t i = 0; i < set.rows * set.cols; ++i)
        set.data.push_back(rng.next_normal() * 3.0);
    EmbeddingSet once = normalize(set);
    EmbeddingSet twice = normalize(once);
    for (std::size_t i = 0; i < once.data.size(); ++i)
        CHECK(twice.data[i] == doctest::Approx(once.data[i]).epsilon(1e-15));
    for (std::size_t i = 0; i < once.rows; ++i) {
        double sq = 0;
        for (std::size_t j = 0; j < once.cols; ++j) sq += once.row(i)[j] * once.row(i)[j];
        CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("binary write/load round-trips bit-exactly") {
    TempDir tmp;
    Rng rng(5, 0, 0);
    EmbeddingSet set;
    set.rows = 13;
    set.cols = 5;
    for (std::size_t i = 0; i < set.rows * set.cols; ++i) set.data.push_back(rng.next_normal());
    set.labels.assign(set.rows, 3);
    EmbeddingSet q = quantize_f32(set);
    save_embeddings(q, tmp.file("x.emb"));
    EmbeddingSet back = load_embeddings(tmp.file("x.emb"), EmbeddingFormat::binary);
    REQUIRE(back.data.size() == q.data.size());
    for (std::size_t i = 0; i < q.data.size(); ++i) CHECK(back.data[i] == q.data[i]);
    CHECK(back.labels == q.labels);

    // A second save of the loaded set reproduces the file byte for byte.
    save_embeddings(back, tmp.file("y.emb"));
    CHECK(pahc::testing::slurp(tmp.file("x.emb")) == pahc::testing::slurp(tmp.file("y.emb")));
}

TEST_CASE("media_pool averages within media then across media") {
    EmbeddingSet set;
    set.rows = 3;
    set.cols = 2;
    set.data = {1, 0, 0, 1, 0, 1};
    set.media_ids = {0, 1, 1};
    EmbeddingSet out = media_pool(set, {{0, 1, 2}});
    REQUIRE(out.rows == 1);
    CHECK(out.row(0)[0] == doctest::Approx(0.7071067811865475).epsilon(1e-12));
    CHECK(out.row(0)[1] == doctest::Approx(0.7071067811865475).epsilon(1e-12));
}

TEST_CASE("media_pool keeps a single-sample template unchanged") {
    EmbeddingSet set;
    set.rows = 2;
    set.cols = 2;
    set.data = {0.6, 0.8, 1, 0};
    set.media_ids = {0, 0};
    set.ids = {"a", "b"};
    EmbeddingSet out = media_pool(set, {{0}});
    CHECK(out.rows == 1);
    CHECK(out.row(0)[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(out.row(0)[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(out.ids[0] == "a");
}

TEST_CASE("media_pool rejects degenerate and malformed templates") {
    EmbeddingSet set;
    set.rows = 2;
    set.cols = 2;
    set.data = {1, 0, -1, 0};
    set.media_ids = {0, 1};
    CHECK_THROWS_AS(media_pool(set, {{0, 1}}), NumericError);  // pooled to zero
    CHECK_THROWS_AS(media_pool(set, {{}}), ConfigError);       // empty template
    CHECK_THROWS_AS(media_pool(set, {{0, 5}}), ConfigError);   // out of range
    CHECK_THROWS_AS(media_pool(set, {{0}, {0}}), ConfigError); // duplicate membership
    set.media_ids.clear();
    CHECK_THROWS_AS(media_pool(set, {{0}}), ConfigError);      // no media ids
}

TEST_CASE("media_pool of identical members returns that vector, unit norm") {
    EmbeddingSet set;
    set.rows = 3;
    set.cols = 3;
    double v[3] = {0.48, 0.6, 0.64};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) set.data.push_back(v[j]);
    set.media_ids = {0, 1, 2};
    EmbeddingSet out = media_pool(set, {{0, 1, 2}});
    for (int j = 0; j < 3; ++j)
        CHECK(out.row(0)[j] == doctest::Approx(v[j]).epsilon(1e-12));
    double sq = 0;
    for (int j = 0; j < 3; ++j) sq += out.row(0)[j] * out.row(0)[j];
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
