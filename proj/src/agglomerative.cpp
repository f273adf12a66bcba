#include "pahc/agglomerative.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "pahc/error.hpp"

#include "double_fmt.hpp"

namespace pahc {

namespace {

// Candidate partner for one active slot's row of the working matrix.
struct Candidate {
    double dist = std::numeric_limits<double>::infinity();
    std::uint32_t other = 0;
};

// Union-find over leaf indices.
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

class GreedyLinkage {
public:
    explicit GreedyLinkage(const DistanceMatrix& D)
        : n_(D.n), dist_(D.values), active_(D.n, true), cid_(D.n), size_(D.n, 1),
          cand_(D.n) {
        std::iota(cid_.begin(), cid_.end(), 0);
        for (std::size_t i = 0; i < n_; ++i)
            if (active_[i]) rescan(i);
    }

    Dendrogram run() {
        Dendrogram dend;
        dend.n_leaves = n_;
        if (n_ < 2) return dend;
        dend.merges.reserve(n_ - 1);
        double last_height = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t + 1 < n_; ++t) {
            auto [sa, sb] = best_pair();
            double h = d(sa, sb);
            if (h < last_height)
                throw NumericError("average-linkage inversion: merge height decreased from " +
                                   std::to_string(last_height) + " to " + std::to_string(h));
            last_height = h;

            std::int32_t ia = cid_[sa], ib = cid_[sb];
            Merge m;
            m.a = std::min(ia, ib);
            m.b = std::max(ia, ib);
            m.height = h;
            m.new_size = size_[sa] + size_[sb];
            dend.merges.push_back(m);

            merge_slots(sa, sb, static_cast<std::int32_t>(n_ + t));
        }
        return dend;
    }

private:
    std::size_t n_;
    std::vector<double> dist_;  // working condensed matrix, indexed by slot
    std::vector<bool> active_;
    std::vector<std::int32_t> cid_;   // cluster id currently held by each slot
    std::vector<std::int32_t> size_;
    std::vector<Candidate> cand_;

    double d(std::size_t i, std::size_t j) const {
        return dist_[DistanceMatrix::condensed_index(n_, i, j)];
    }
    double& d(std::size_t i, std::size_t j) {
        return dist_[DistanceMatrix::condensed_index(n_, i, j)];
    }

    // Tie order on (distance, min cluster id, max cluster id).
    bool pair_less(double da, std::int32_t a1, std::int32_t a2, double db, std::int32_t b1,
                   std::int32_t b2) const {
        if (da != db) return da < db;
        std::int32_t amin = std::min(a1, a2), amax = std::max(a1, a2);
        std::int32_t bmin = std::min(b1, b2), bmax = std::max(b1, b2);
        if (amin != bmin) return amin < bmin;
        return amax < bmax;
    }

    bool cand_less(std::size_t slot_a, const Candidate& ca, std::size_t slot_b,
                   const Candidate& cb) const {
        return pair_less(ca.dist, cid_[slot_a], cid_[ca.other], cb.dist, cid_[slot_b],
                         cid_[cb.other]);
    }

    void rescan(std::size_t i) {
        Candidate best;
        bool found = false;
        for (std::size_t j = 0; j < n_; ++j) {
            if (j == i || !active_[j]) continue;
            double dj = d(i, j);
            if (!found ||
                pair_less(dj, cid_[i], cid_[j], best.dist, cid_[i], cid_[best.other])) {
                best.dist = dj;
                best.other = static_cast<std::uint32_t>(j);
                found = true;
            }
        }
        cand_[i] = best;
    }

    std::pair<std::size_t, std::size_t> best_pair() const {
        std::size_t best_slot = n_;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!active_[i]) continue;
            if (best_slot == n_ || cand_less(i, cand_[i], best_slot, cand_[best_slot]))
                best_slot = i;
        }
        return {best_slot, cand_[best_slot].other};
    }

    void merge_slots(std::size_t sa, std::size_t sb, std::int32_t new_id) {
        std::size_t keep = std::min(sa, sb);
        std::size_t drop = std::max(sa, sb);
        double wa = static_cast<double>(size_[sa]);
        double wb = static_cast<double>(size_[sb]);
        double inv = 1.0 / (wa + wb);
        // Lance-Williams average update against every other active cluster.
        // The merged distance is a convex combination, so it can never fall
        // below either input; caches pointing elsewhere stay valid and only
        // need comparing against the one refreshed entry.
        if (keep != sa) std::swap(wa, wb);
        for (std::size_t k = 0; k < n_; ++k) {
            if (!active_[k] || k == keep || k == drop) continue;
            d(k, keep) = (wa * d(k, keep) + wb * d(k, drop)) * inv;
        }
        size_[keep] += size_[drop];
        cid_[keep] = new_id;
        active_[drop] = false;

        rescan(keep);
        for (std::size_t k = 0; k < n_; ++k) {
            if (!active_[k] || k == keep) continue;
            if (cand_[k].other == keep || cand_[k].other == drop) {
                rescan(k);
            } else {
                Candidate fresh{d(k, keep), static_cast<std::uint32_t>(keep)};
                if (pair_less(fresh.dist, cid_[k], cid_[keep], cand_[k].dist, cid_[k],
                              cid_[cand_[k].other]))
                    cand_[k] = fresh;
            }
        }
    }
};

}  // namespace

Dendrogram build_dendrogram(const DistanceMatrix& D) {
    if (D.n == 0) throw ConfigError("build_dendrogram: empty distance matrix");
    if (D.values.size() != D.num_pairs())
        throw ConfigError("build_dendrogram: condensed size mismatch");
    for (double v : D.values)
        if (!std::isfinite(v)) throw NumericError("build_dendrogram: non-finite distance");
    GreedyLinkage algo(D);
    return algo.run();
}

Clustering cut_dendrogram(const Dendrogram& dend, double eta) {
    const std::size_t n = dend.n_leaves;
    UnionFind uf(n);
    // rep[id] = one leaf inside cluster `id`; merged ids appear in order.
    std::vector<std::int32_t> rep(n + dend.merges.size());
    std::iota(rep.begin(), rep.begin() + n, 0);
    for (std::size_t t = 0; t < dend.merges.size(); ++t) {
        const Merge& m = dend.merges[t];
        rep[n + t] = rep[m.a];
        if (m.height < eta) uf.unite(rep[m.a], rep[m.b]);
    }
    std::vector<std::int32_t> roots(n);
    for (std::size_t i = 0; i < n; ++i) roots[i] = uf.find(static_cast<std::int32_t>(i));
    return canonicalize_clustering(roots);
}

Clustering hierarchical(const DistanceMatrix& D, double eta) {
    return cut_dendrogram(build_dendrogram(D), eta);
}

void save_dendrogram_csv(const Dendrogram& dend, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t t = 0; t < dend.merges.size(); ++t) {
        const Merge& m = dend.merges[t];
        out << t << "," << m.a << "," << m.b << "," << format_double(m.height) << ","
            << m.new_size << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

Clustering canonicalize_clustering(const std::vector<std::int32_t>& raw_ids) {
    Clustering c;
    c.assignment.resize(raw_ids.size());
    std::unordered_map<std::int32_t, std::int32_t> remap;
    remap.reserve(raw_ids.size());
    for (std::size_t i = 0; i < raw_ids.size(); ++i) {
        auto [it, inserted] = remap.try_emplace(raw_ids[i], c.num_clusters);
        if (inserted) ++c.num_clusters;
        c.assignment[i] = it->second;
    }
    return c;
}

}  // namespace pahc
