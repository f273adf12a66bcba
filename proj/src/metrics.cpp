#include "pahc/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "pahc/error.hpp"

#include "double_fmt.hpp"

namespace pahc {

namespace {

double pairs_of(std::int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

// Incremental union-find over the merge sequence; merges are applied in
// order, so each sweep point extends the previous partition.
class UnionState {
public:
    UnionState(std::size_t n, const Dendrogram& dend)
        : dend_(dend), parent_(n), rep_(n + dend.merges.size()) {
        std::iota(parent_.begin(), parent_.end(), 0);
        std::iota(rep_.begin(), rep_.begin() + n, 0);
    }

    void apply(std::size_t t) {
        const Merge& m = dend_.merges[t];
        std::int32_t ra = find(rep_[m.a]);
        std::int32_t rb = find(rep_[m.b]);
        parent_[ra] = rb;
        rep_[dend_.n_leaves + t] = rb;
    }

    Clustering partition() {
        std::vector<std::int32_t> roots(parent_.size());
        for (std::size_t i = 0; i < parent_.size(); ++i)
            roots[i] = find(static_cast<std::int32_t>(i));
        return canonicalize_clustering(roots);
    }

private:
    std::int32_t find(std::int32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    const Dendrogram& dend_;
    std::vector<std::int32_t> parent_;
    std::vector<std::int32_t> rep_;
};

struct PairCounts {
    double same_cluster = 0;       // pairs sharing a cluster
    double same_class = 0;         // pairs sharing a label
    double same_cluster_class = 0; // pairs sharing both
};

// Cross-tabulation pair counting; equivalent to O(n^2) pair enumeration.
PairCounts count_pairs(std::span<const std::int32_t> assignment,
                       std::span<const std::int64_t> labels) {
    std::unordered_map<std::int32_t, std::int64_t> cluster_sizes;
    std::unordered_map<std::int64_t, std::int64_t> class_sizes;
    std::map<std::pair<std::int32_t, std::int64_t>, std::int64_t> cell_sizes;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        ++cluster_sizes[assignment[i]];
        ++class_sizes[labels[i]];
        ++cell_sizes[{assignment[i], labels[i]}];
    }
    PairCounts pc;
    for (auto& [c, sz] : cluster_sizes) pc.same_cluster += pairs_of(sz);
    for (auto& [l, sz] : class_sizes) pc.same_class += pairs_of(sz);
    for (auto& [cell, sz] : cell_sizes) pc.same_cluster_class += pairs_of(sz);
    return pc;
}

}  // namespace

PairPR pairwise_precision_recall(const Clustering& c, std::span<const std::int64_t> labels) {
    if (c.assignment.size() != labels.size())
        throw ConfigError("pairwise_precision_recall: " + std::to_string(c.assignment.size()) +
                          " assignments vs " + std::to_string(labels.size()) + " labels");
    PairCounts pc = count_pairs(c.assignment, labels);
    PairPR pr;
    pr.precision = pc.same_cluster > 0 ? pc.same_cluster_class / pc.same_cluster : 1.0;
    pr.recall = pc.same_class > 0 ? pc.same_cluster_class / pc.same_class : 1.0;
    return pr;
}

double f1_score(double precision, double recall) {
    double s = precision + recall;
    return s > 0 ? 2.0 * precision * recall / s : 0.0;
}

std::vector<PRPoint> pr_sweep(const Dendrogram& dend, std::span<const std::int64_t> labels) {
    const std::size_t n = dend.n_leaves;
    if (labels.size() != n)
        throw ConfigError("pr_sweep: labels length " + std::to_string(labels.size()) +
                          " != n_leaves " + std::to_string(n));

    // Candidate thresholds: each distinct height h (partition = merges < h)
    // and nextafter(h) (partition = merges <= h).
    std::vector<double> thresholds;
    for (std::size_t t = 0; t < dend.merges.size(); ++t) {
        double h = dend.merges[t].height;
        if (t == 0 || h != dend.merges[t - 1].height) thresholds.push_back(h);
        thresholds.push_back(std::nextafter(h, std::numeric_limits<double>::infinity()));
    }
    if (thresholds.empty()) thresholds.push_back(0.0);  // singleton dendrogram

    std::vector<PRPoint> points;
    std::size_t applied = 0;      // merges applied so far
    std::size_t last_emitted = static_cast<std::size_t>(-1);
    UnionState state(n, dend);
    double prev_recall = -1.0;
    for (double thr : thresholds) {
        while (applied < dend.merges.size() && dend.merges[applied].height < thr) {
            state.apply(applied);
            ++applied;
        }
        if (applied == last_emitted) continue;
        last_emitted = applied;

        Clustering c = state.partition();
        PairPR pr = pairwise_precision_recall(c, labels);
        PRPoint p;
        p.threshold = thr;
        p.precision = pr.precision;
        p.recall = pr.recall;
        p.f1 = f1_score(pr.precision, pr.recall);
        p.num_clusters = c.num_clusters;
        if (pr.recall < prev_recall)
            throw NumericError("pr_sweep: recall decreased along the sweep");
        prev_recall = pr.recall;
        points.push_back(p);
    }
    return points;
}

void save_pr_csv(const std::vector<PRPoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "threshold,precision,recall,f1,num_clusters\n";
    for (const auto& p : points)
        out << format_double(p.threshold) << "," << format_double(p.precision) << ","
            << format_double(p.recall) << "," << format_double(p.f1) << "," << p.num_clusters
            << "\n";
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace pahc
