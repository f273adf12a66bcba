#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "oracles.hpp"
#include "pahc/agglomerative.hpp"
#include "pahc/error.hpp"
#include "pahc/rng.hpp"
#include "test_util.hpp"

using namespace pahc;

namespace {

DistanceMatrix matrix_from(std::size_t n, std::vector<double> condensed,
                           DistanceKind kind = DistanceKind::cosine) {
    DistanceMatrix m;
    m.n = n;
    m.kind = kind;
    m.values = std::move(condensed);
    return m;
}

DistanceMatrix random_matrix(std::size_t n, std::uint64_t seed) {
    Rng rng(seed, 0xA661, 0);
    std::vector<double> v(n * (n - 1) / 2);
    for (auto& x : v) x = rng.next_double();
    return matrix_from(n, std::move(v));
}

bool same_merges(const Dendrogram& a, const Dendrogram& b, double tol = 1e-9) {
    if (a.merges.size() != b.merges.size()) return false;
    for (std::size_t t = 0; t < a.merges.size(); ++t) {
        if (a.merges[t].a != b.merges[t].a) return false;
        if (a.merges[t].b != b.merges[t].b) return false;
        if (a.merges[t].new_size != b.merges[t].new_size) return false;
        double scale = std::max(1.0, std::abs(b.merges[t].height));
        if (std::abs(a.merges[t].height - b.merges[t].height) > tol * scale) return false;
    }
    return true;
}

// Refinement: every cluster of `fine` sits inside one cluster of `coarse`.
bool refines(const Clustering& fine, const Clustering& coarse) {
    std::map<std::int32_t, std::int32_t> image;
    for (std::size_t i = 0; i < fine.assignment.size(); ++i) {
        auto [it, inserted] = image.try_emplace(fine.assignment[i], coarse.assignment[i]);
        if (!inserted && it->second != coarse.assignment[i]) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("agglomerative") {

TEST_CASE("three 1-d points merge at 1 then at the 4.5 average") {
    // points {0, 1, 5}: pairwise distances 1, 5, 4
    DistanceMatrix D = matrix_from(3, {1.0, 5.0, 4.0});
    Dendrogram dend = build_dendrogram(D);
    REQUIRE(dend.merges.size() == 2);
    CHECK(dend.merges[0].a == 0);
    CHECK(dend.merges[0].b == 1);
    CHECK(dend.merges[0].height == 1.0);
    CHECK(dend.merges[1].a == 2);
    CHECK(dend.merges[1].b == 3);
    CHECK(dend.merges[1].height == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(dend.merges[1].new_size == 3);

    Clustering cut2 = cut_dendrogram(dend, 2.0);
    CHECK(cut2.num_clusters == 2);
    CHECK(cut2.assignment[0] == cut2.assignment[1]);
    CHECK(cut2.assignment[2] != cut2.assignment[0]);
}

TEST_CASE("degenerate sizes") {
    DistanceMatrix one = matrix_from(1, {});
    Dendrogram d1 = build_dendrogram(one);
    CHECK(d1.merges.empty());
    Clustering c1 = cut_dendrogram(d1, 0.5);
    CHECK(c1.num_clusters == 1);

    DistanceMatrix two = matrix_from(2, {0.3});
    Dendrogram d2 = build_dendrogram(two);
    REQUIRE(d2.merges.size() == 1);
    CHECK(d2.merges[0].height == 0.3);
}

TEST_CASE("cut threshold is strict: boundary-equal heights stay unmerged") {
    DistanceMatrix two = matrix_from(2, {0.3});
    Dendrogram dend = build_dendrogram(two);
    CHECK(cut_dendrogram(dend, 0.3).num_clusters == 2);
    CHECK(cut_dendrogram(dend, std::nextafter(0.3, 1.0)).num_clusters == 1);
}

TEST_CASE("cut extremes") {
    DistanceMatrix D = random_matrix(9, 3);
    Dendrogram dend = build_dendrogram(D);
    double min_h = dend.merges.front().height;
    double max_h = dend.merges.back().height;
    CHECK(cut_dendrogram(dend, min_h).num_clusters == 9);
    CHECK(cut_dendrogram(dend, max_h + 1).num_clusters == 1);
    CHECK(hierarchical(D, max_h + 1).num_clusters == 1);
}

TEST_CASE("matches the naive recompute oracle on random instances") {
    Rng rng(17, 3, 0);
    for (int t = 0; t < 40; ++t) {
        std::size_t n = 2 + rng.next_below(11);
        DistanceMatrix D = random_matrix(n, 9000 + t);
        Dendrogram got = build_dendrogram(D);
        Dendrogram ref = oracle::average_linkage_reference(D);
        CHECK(same_merges(got, ref));
    }
}

TEST_CASE("tie-breaking picks the smallest cluster-id pair") {
    // All distances equal: merge order is forced entirely by the tie rule.
    DistanceMatrix D = matrix_from(4, std::vector<double>(6, 0.5));
    Dendrogram got = build_dendrogram(D);
    Dendrogram ref = oracle::average_linkage_reference(D);
    CHECK(same_merges(got, ref));
    CHECK(got.merges[0].a == 0);
    CHECK(got.merges[0].b == 1);
    CHECK(got.merges[1].a == 2);
    CHECK(got.merges[1].b == 3);
    CHECK(got.merges[2].a == 4);
    CHECK(got.merges[2].b == 5);
}

TEST_CASE("merge heights never decrease") {
    for (std::uint64_t seed : {100, 101, 102, 103}) {
        DistanceMatrix D = random_matrix(30, seed);
        Dendrogram dend = build_dendrogram(D);
        for (std::size_t t = 1; t < dend.merges.size(); ++t)
            CHECK(dend.merges[t].height >= dend.merges[t - 1].height);
    }
}

TEST_CASE("cuts nest: lower thresholds refine higher ones") {
    DistanceMatrix D = random_matrix(20, 55);
    Dendrogram dend = build_dendrogram(D);
    Rng rng(56, 4, 0);
    for (int t = 0; t < 25; ++t) {
        double e1 = rng.next_double() * 1.2;
        double e2 = rng.next_double() * 1.2;
        if (e1 > e2) std::swap(e1, e2);
        CHECK(refines(cut_dendrogram(dend, e1), cut_dendrogram(dend, e2)));
    }
}

TEST_CASE("permuting samples relabels but does not change the partition") {
    const std::size_t n = 12;
    DistanceMatrix D = random_matrix(n, 77);  // continuous values: tie-free
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(78, 5, 0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        std::swap(perm[i], perm[i + rng.next_below(n - i)]);

    DistanceMatrix P = matrix_from(n, std::vector<double>(D.values.size()));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            P.values[DistanceMatrix::condensed_index(n, perm[i], perm[j])] = D.at(i, j);

    double eta = 0.45;
    Clustering orig = hierarchical(D, eta);
    Clustering permuted = hierarchical(P, eta);
    // Same partition after pulling the permutation back.
    std::map<std::int32_t, std::int32_t> image;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, inserted] =
            image.try_emplace(orig.assignment[i], permuted.assignment[perm[i]]);
        CHECK(it->second == permuted.assignment[perm[i]]);
    }
    CHECK(orig.num_clusters == permuted.num_clusters);
}

TEST_CASE("dendrogram csv rows carry merge_index,a,b,height,new_size") {
    pahc::testing::TempDir tmp;
    DistanceMatrix D = matrix_from(3, {1.0, 5.0, 4.0});
    save_dendrogram_csv(build_dendrogram(D), tmp.file("d.csv"));
    std::string text = pahc::testing::slurp(tmp.file("d.csv"));
    CHECK(text == "0,0,1,1,2\n1,2,3,4.5,3\n");
}

TEST_CASE("invalid matrices are rejected") {
    CHECK_THROWS_AS(build_dendrogram(matrix_from(0, {})), ConfigError);
    CHECK_THROWS_AS(build_dendrogram(matrix_from(3, {1.0, 2.0})), ConfigError);
    CHECK_THROWS_AS(build_dendrogram(matrix_from(2, {std::nan("")})), NumericError);
}

}  // TEST_SUITE
