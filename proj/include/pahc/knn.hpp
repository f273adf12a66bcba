#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pahc/embedding.hpp"

namespace pahc {

// Positive/negative window over the per-sample neighbor lists, 1-based and
// inclusive: positions [1:K] are the SVM positives (self sits at position 1),
// positions [N1:N2] the negatives. N1 <= K is rejected rather than clamped
// because an overlap corrupts the SVM labels, while window truncation at the
// end of the list is benign.
struct NeighborWindow {
    int K = 5;
    int N1 = 50;
    int N2 = 100;
};

void validate(const NeighborWindow& w);

// Exact ordered nearest-neighbor lists under inner product, one per sample.
// list(i)[0] is always i itself; the remainder is sorted by non-increasing
// inner product with ties broken by ascending sample index.
struct NeighborLists {
    std::size_t n = 0;
    std::size_t depth = 0;
    int K = 0;   // 0 while no window is attached
    int N1 = 0;
    int N2 = 0;
    std::vector<std::uint32_t> idx;  // n * depth, row-major

    std::span<const std::uint32_t> list(std::size_t i) const {
        return {idx.data() + i * depth, depth};
    }
};

// Brute-force exact top-`depth` lists (blocked inner-product scan).
NeighborLists build_nn_lists(const EmbeddingSet& set, std::size_t depth, int threads = 0);

// Same, with a positive/negative window attached. K and N2 are clamped to
// n_s; depth is min(N2, n_s).
NeighborLists build_nn_lists(const EmbeddingSet& set, const NeighborWindow& window,
                             int threads = 0);

// NNList[1:K]: the K nearest neighbors of i including i itself.
std::vector<std::uint32_t> positive_set(const NeighborLists& nn, std::size_t i);

// NNList[N1:min(N2, n_s)]. May be empty when N1 lies past the end of the list.
std::vector<std::uint32_t> negative_set(const NeighborLists& nn, std::size_t i);

}  // namespace pahc
