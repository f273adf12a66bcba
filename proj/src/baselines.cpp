#include "pahc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pahc/error.hpp"
#include "pahc/knn.hpp"
#include "pahc/parallel.hpp"
#include "pahc/rng.hpp"

namespace pahc {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) {
        double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

struct UnionFind {
    std::vector<std::int32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::int32_t find(std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::int32_t a, std::int32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

Clustering kmeans(const EmbeddingSet& set, std::size_t k, std::uint64_t seed,
                  std::size_t max_iter, int threads, std::vector<double>* wcss_trace) {
    validate(set);
    const std::size_t n = set.rows;
    const std::size_t d = set.cols;
    if (k < 1 || k > n) throw ConfigError("kmeans: k must be in [1, n_s]");

    // k-means++ seeding, sequential by construction.
    std::vector<double> centroids(k * d);
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);
    Rng rng(seed, 0x6B6D65616E73ULL, 0);  // "kmeans"
    std::size_t first = static_cast<std::size_t>(rng.next_below(n));
    std::copy_n(set.row(first), d, centroids.begin());
    chosen[first] = true;
    for (std::size_t c = 1; c < k; ++c) {
        const double* prev = centroids.data() + (c - 1) * d;
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            min_sq[i] = std::min(min_sq[i], sq_dist(set.row(i), prev, d));
            if (!chosen[i]) total += min_sq[i];
        }
        std::size_t pick = n;
        if (total > 0) {
            double target = rng.next_double() * total;
            double acc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i]) continue;
                acc += min_sq[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) {
            // All remaining mass is zero (duplicates); take the first unchosen.
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        chosen[pick] = true;
        std::copy_n(set.row(pick), d, centroids.begin() + c * d);
    }

    std::vector<std::int32_t> assign(n, 0), prev_assign(n, -1);
    std::vector<double> dist_to_own(n, 0.0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                double best = std::numeric_limits<double>::infinity();
                std::int32_t best_c = 0;
                for (std::size_t c = 0; c < k; ++c) {
                    double dd = sq_dist(set.row(i), centroids.data() + c * d, d);
                    if (dd < best) {
                        best = dd;
                        best_c = static_cast<std::int32_t>(c);
                    }
                }
                assign[i] = best_c;
                dist_to_own[i] = best;
            }
        });
        if (wcss_trace)
            wcss_trace->push_back(std::accumulate(dist_to_own.begin(), dist_to_own.end(), 0.0));
        if (assign == prev_assign) break;
        prev_assign = assign;

        std::vector<double> sums(k * d, 0.0);
        std::vector<std::int64_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            const double* x = set.row(i);
            double* s = sums.data() + static_cast<std::size_t>(assign[i]) * d;
            for (std::size_t j = 0; j < d; ++j) s[j] += x[j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t j = 0; j < d; ++j)
                    centroids[c * d + j] = sums[c * d + j] / counts[c];
            } else {
                // Reseed an emptied cluster on the farthest point.
                std::size_t far = 0;
                for (std::size_t i = 1; i < n; ++i)
                    if (dist_to_own[i] > dist_to_own[far]) far = i;
                std::copy_n(set.row(far), d, centroids.begin() + c * d);
                dist_to_own[far] = 0;
            }
        }
    }
    return canonicalize_clustering(assign);
}

std::vector<RankOrderPair> rank_order_scores(const EmbeddingSet& set, std::size_t k_list,
                                             int threads) {
    validate(set);
    const std::size_t n = set.rows;
    if (k_list < 1) throw ConfigError("rank_order: k_list must be >= 1");
    const std::size_t k = std::min(k_list, n);
    NeighborLists nn = build_nn_lists(set, k, threads);

    // Per-row membership index sorted by sample id; rank 0 means absent.
    std::vector<std::uint32_t> members(n * k), ranks(n * k);
    for (std::size_t a = 0; a < n; ++a) {
        auto l = nn.list(a);
        std::vector<std::uint32_t> order(k);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(),
                  [&](std::uint32_t x, std::uint32_t y) { return l[x] < l[y]; });
        for (std::size_t p = 0; p < k; ++p) {
            members[a * k + p] = l[order[p]];
            ranks[a * k + p] = order[p] + 1;
        }
    }
    // 1-based rank of b in a's list, k+1 when absent.
    auto rank_of = [&](std::size_t a, std::size_t b) -> std::size_t {
        const std::uint32_t* lo = members.data() + a * k;
        const std::uint32_t* hi = lo + k;
        const std::uint32_t* it = std::lower_bound(lo, hi, static_cast<std::uint32_t>(b));
        if (it != hi && *it == b) return ranks[a * k + (it - lo)];
        return k + 1;
    };
    auto d_m = [&](std::size_t a, std::size_t b) {
        auto la = nn.list(a);
        std::size_t upto = std::min(rank_of(a, b), k);
        std::size_t miss = 0;
        for (std::size_t i = 0; i < upto; ++i)
            if (rank_of(b, la[i]) > k) ++miss;
        return static_cast<double>(miss);
    };

    std::vector<std::vector<RankOrderPair>> per_row(n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t a = lo; a < hi; ++a) {
            auto la = nn.list(a);
            for (std::size_t p = 1; p < la.size(); ++p) {
                std::size_t b = la[p];
                // Emit each unordered pair once: from the smaller index when
                // the lists contain each other, else from the covering side.
                if (b > a || rank_of(b, a) > k) {
                    double denom =
                        static_cast<double>(std::min(rank_of(a, b), rank_of(b, a)));
                    double dist = (d_m(a, b) + d_m(b, a)) / denom;
                    per_row[a].push_back({static_cast<std::uint32_t>(std::min(a, b)),
                                          static_cast<std::uint32_t>(std::max(a, b)), dist});
                }
            }
        }
    });

    std::vector<RankOrderPair> pairs;
    for (auto& row : per_row)
        pairs.insert(pairs.end(), row.begin(), row.end());
    std::sort(pairs.begin(), pairs.end(), [](const RankOrderPair& x, const RankOrderPair& y) {
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return pairs;
}

Clustering components_from_links(std::size_t n, const std::vector<RankOrderPair>& pairs,
                                 double threshold) {
    UnionFind uf(n);
    for (const auto& p : pairs)
        if (p.dist < threshold) uf.unite(p.a, p.b);
    std::vector<std::int32_t> roots(n);
    for (std::size_t i = 0; i < n; ++i) roots[i] = uf.find(static_cast<std::int32_t>(i));
    return canonicalize_clustering(roots);
}

Clustering rank_order_cluster(const EmbeddingSet& set, const RankOrderConfig& cfg,
                              int threads) {
    auto pairs = rank_order_scores(set, cfg.k_list, threads);
    return components_from_links(set.rows, pairs, cfg.threshold);
}

}  // namespace pahc
