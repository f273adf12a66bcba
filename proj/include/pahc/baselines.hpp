#pragma once

#include <cstdint>
#include <vector>

#include "pahc/agglomerative.hpp"
#include "pahc/embedding.hpp"

namespace pahc {

// Lloyd's algorithm with k-means++ seeding on the unit-norm embeddings.
// Squared Euclidean distance is monotone in cosine similarity on the sphere,
// so this matches the usual cosine-feature usage. Deterministic given the
// seed; empty clusters are repaired by reseeding on the farthest point.
Clustering kmeans(const EmbeddingSet& set, std::size_t k, std::uint64_t seed,
                  std::size_t max_iter = 100, int threads = 0,
                  std::vector<double>* wcss_trace = nullptr);

struct RankOrderConfig {
    std::size_t k_list = 20;   // neighbor-list depth, self included
    double threshold = 1.0;    // pairs with distance strictly below merge
};

// One scored pair; only pairs where one sample appears in the other's
// neighbor list are ever scored.
struct RankOrderPair {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double dist = 0.0;
};

// Approximate rank-order distances, reconstructed from the shared-neighbor
// description (normative definition for this project):
//
//   d_m(a,b) = sum_{i=1}^{min(O_a(b), k)} 1[ F_a(i) not in top-k of b ]
//   D(a,b)   = (d_m(a,b) + d_m(b,a)) / min(O_a(b), O_b(a))
//
// F_a(i) is the i-th entry of a's neighbor list (self at position 1);
// O_a(b) is b's 1-based position in a's list, k+1 when absent. A pair is
// scored when either sample lies in the other's top-k list.
std::vector<RankOrderPair> rank_order_scores(const EmbeddingSet& set, std::size_t k_list,
                                             int threads = 0);

// Links every scored pair with D < threshold and returns the connected
// components. Samples never scored against each other can only end up
// together through transitive links, which is the recall ceiling the
// shared-neighbor construction implies.
Clustering rank_order_cluster(const EmbeddingSet& set, const RankOrderConfig& cfg,
                              int threads = 0);

Clustering components_from_links(std::size_t n, const std::vector<RankOrderPair>& pairs,
                                 double threshold);

}  // namespace pahc
