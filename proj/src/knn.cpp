#include "pahc/knn.hpp"

#include <algorithm>
#include <cmath>

#include "pahc/error.hpp"
#include "pahc/parallel.hpp"

namespace pahc {

namespace {

// Rows of the similarity matrix are computed in blocks so the scratch buffer
// stays cache-sized even for large n.
constexpr std::size_t kRowBlock = 64;

}  // namespace

void validate(const NeighborWindow& w) {
    if (w.K < 1) throw ConfigError("K must be >= 1");
    if (w.N1 <= w.K)
        throw ConfigError("N1 (" + std::to_string(w.N1) + ") must exceed K (" +
                          std::to_string(w.K) + "): positive and negative sets would overlap");
    if (w.N2 < w.N1) throw ConfigError("N2 must be >= N1");
}

NeighborLists build_nn_lists(const EmbeddingSet& set, std::size_t depth, int threads) {
    validate(set);
    const std::size_t n = set.rows;
    const std::size_t d = set.cols;
    if (depth < 1) throw ConfigError("nn list depth must be >= 1");
    if (depth > n)
        throw ConfigError("nn list depth " + std::to_string(depth) + " exceeds n_s " +
                          std::to_string(n));

    NeighborLists nn;
    nn.n = n;
    nn.depth = depth;
    nn.idx.resize(n * depth);

    parallel_for(
        (n + kRowBlock - 1) / kRowBlock, threads, [&](std::size_t b0, std::size_t b1) {
            std::vector<double> sims(kRowBlock * n);
            std::vector<std::uint32_t> order(n > 0 ? n - 1 : 0);
            for (std::size_t blk = b0; blk < b1; ++blk) {
                std::size_t lo = blk * kRowBlock;
                std::size_t hi = std::min(n, lo + kRowBlock);
                for (std::size_t i = lo; i < hi; ++i) {
                    const double* xi = set.row(i);
                    double* srow = sims.data() + (i - lo) * n;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double* xj = set.row(j);
                        double dot = 0;
                        for (std::size_t k = 0; k < d; ++k) dot += xi[k] * xj[k];
                        srow[j] = dot;
                    }
                }
                for (std::size_t i = lo; i < hi; ++i) {
                    const double* srow = sims.data() + (i - lo) * n;
                    // Self is pinned to position 1; the rest sorts by
                    // (similarity desc, index asc).
                    std::size_t m = 0;
                    for (std::size_t j = 0; j < n; ++j)
                        if (j != i) order[m++] = static_cast<std::uint32_t>(j);
                    auto cmp = [&](std::uint32_t a, std::uint32_t b) {
                        if (srow[a] != srow[b]) return srow[a] > srow[b];
                        return a < b;
                    };
                    std::size_t take = depth - 1;
                    if (take < m) {
                        std::partial_sort(order.begin(), order.begin() + take,
                                          order.begin() + m, cmp);
                    } else {
                        std::sort(order.begin(), order.begin() + m, cmp);
                    }
                    std::uint32_t* out = nn.idx.data() + i * depth;
                    out[0] = static_cast<std::uint32_t>(i);
                    for (std::size_t k = 0; k < take; ++k) out[k + 1] = order[k];
                }
            }
        });
    return nn;
}

NeighborLists build_nn_lists(const EmbeddingSet& set, const NeighborWindow& window,
                             int threads) {
    validate(window);
    const std::size_t n = set.rows;
    int K = static_cast<int>(std::min<std::size_t>(window.K, n));
    int N2 = static_cast<int>(std::min<std::size_t>(window.N2, n));
    std::size_t depth = std::max<std::size_t>(static_cast<std::size_t>(K),
                                              static_cast<std::size_t>(N2));
    NeighborLists nn = build_nn_lists(set, depth, threads);
    nn.K = K;
    nn.N1 = window.N1;
    nn.N2 = N2;
    return nn;
}

std::vector<std::uint32_t> positive_set(const NeighborLists& nn, std::size_t i) {
    if (nn.K < 1) throw ConfigError("neighbor lists carry no positive/negative window");
    if (i >= nn.n) throw ConfigError("sample index out of range");
    auto l = nn.list(i);
    return {l.begin(), l.begin() + nn.K};
}

std::vector<std::uint32_t> negative_set(const NeighborLists& nn, std::size_t i) {
    if (nn.K < 1) throw ConfigError("neighbor lists carry no positive/negative window");
    if (i >= nn.n) throw ConfigError("sample index out of range");
    auto l = nn.list(i);
    if (static_cast<std::size_t>(nn.N1) > l.size()) return {};
    return {l.begin() + (nn.N1 - 1), l.begin() + nn.N2};
}

}  // namespace pahc
