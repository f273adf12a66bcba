#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pahc/embedding.hpp"
#include "pahc/error.hpp"
#include "pahc/synth.hpp"

using namespace pahc;

namespace {

double cosine(const EmbeddingSet& s, std::size_t i, std::size_t j) {
    double v = 0;
    for (std::size_t k = 0; k < s.cols; ++k) v += s.row(i)[k] * s.row(j)[k];
    return v;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("huge concentration collapses identities to near-points") {
    SynthConfig cfg;
    cfg.num_identities = 2;
    cfg.samples_per_identity = 5;
    cfg.dim = 8;
    cfg.concentration = 1e9;
    cfg.seed = 7;
    EmbeddingSet s = generate(cfg);
    REQUIRE(s.rows == 10);
    validate(s);
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t j = i + 1; j < s.rows; ++j)
            if (s.labels[i] == s.labels[j]) CHECK(cosine(s, i, j) >= 0.999);
}

TEST_CASE("noise fraction corrupts exactly round(f * n) labels") {
    SynthConfig cfg;
    cfg.num_identities = 2;
    cfg.samples_per_identity = 5;
    cfg.dim = 8;
    cfg.concentration = 1e9;
    cfg.seed = 7;
    EmbeddingSet clean = generate(cfg);
    cfg.noise_fraction = 0.2;
    EmbeddingSet noisy = generate(cfg);
    int changed = 0;
    for (std::size_t i = 0; i < clean.rows; ++i) changed += clean.labels[i] != noisy.labels[i];
    CHECK(changed == 2);
    // Geometry is untouched by label noise.
    CHECK(clean.data == noisy.data);
}

TEST_CASE("single identity gives a single label") {
    SynthConfig cfg;
    cfg.num_identities = 1;
    cfg.samples_per_identity = 3;
    cfg.dim = 4;
    cfg.concentration = 2.0;
    EmbeddingSet s = generate(cfg);
    CHECK(s.labels == std::vector<std::int64_t>{0, 0, 0});
}

TEST_CASE("identical seeds are bit-identical; rows are unit norm") {
    SynthConfig cfg;
    cfg.num_identities = 4;
    cfg.samples_per_identity = 6;
    cfg.dim = 16;
    cfg.concentration = 3.0;
    cfg.noise_fraction = 0.25;
    cfg.seed = 99;
    EmbeddingSet a = generate(cfg);
    EmbeddingSet b = generate(cfg);
    CHECK(a.data == b.data);
    CHECK(a.labels == b.labels);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double sq = 0;
        for (std::size_t j = 0; j < a.cols; ++j) sq += a.row(i)[j] * a.row(i)[j];
        CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-12);
    }
}

TEST_CASE("per-identity counts override the uniform count") {
    SynthConfig cfg;
    cfg.num_identities = 3;
    cfg.per_identity_counts = {2, 3, 4};
    cfg.dim = 4;
    cfg.concentration = 5.0;
    EmbeddingSet s = generate(cfg);
    CHECK(s.rows == 9);
    CHECK(std::count(s.labels.begin(), s.labels.end(), 2) == 4);
}

TEST_CASE("config validation") {
    SynthConfig cfg;
    cfg.num_identities = 1;
    cfg.samples_per_identity = 10;
    cfg.dim = 4;
    cfg.noise_fraction = 0.5;  // needs a second identity to relabel onto
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.noise_fraction = 1.5;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.noise_fraction = 0;
    cfg.concentration = 0;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
}

}  // TEST_SUITE
