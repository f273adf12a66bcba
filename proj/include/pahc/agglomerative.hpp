#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pahc/similarity.hpp"

namespace pahc {

// Flat partition: one 0-based cluster id per sample, ids contiguous and
// ordered by each cluster's smallest member index.
struct Clustering {
    std::vector<std::int32_t> assignment;
    std::int32_t num_clusters = 0;
};

// One agglomerative merge. Cluster ids follow the usual linkage convention:
// leaves are 0..n-1, the merge at step t creates cluster n+t. a < b always.
struct Merge {
    std::int32_t a = 0;
    std::int32_t b = 0;
    double height = 0.0;
    std::int32_t new_size = 0;
};

struct Dendrogram {
    std::size_t n_leaves = 0;
    std::vector<Merge> merges;  // exactly n_leaves - 1, heights non-decreasing
};

// Average-linkage agglomerative clustering: repeatedly merges the closest
// pair of clusters, with cluster distances maintained by the Lance-Williams
// update d(k, i+j) = (n_i d(k,i) + n_j d(k,j)) / (n_i + n_j). Ties break on
// the lexicographically smallest (min id, max id) cluster pair, which pins
// the dendrogram across platforms and thread counts. Average linkage is
// reducible, so merge heights never decrease; that is asserted on every
// build.
Dendrogram build_dendrogram(const DistanceMatrix& D);

// Applies every merge with height strictly below eta. Boundary-equal heights
// stay unmerged.
Clustering cut_dendrogram(const Dendrogram& dend, double eta);

// Hierarchical(D, eta): cut(build_dendrogram(D), eta).
Clustering hierarchical(const DistanceMatrix& D, double eta);

// CSV rows: merge_index,cluster_a,cluster_b,height,new_size
void save_dendrogram_csv(const Dendrogram& dend, const std::string& path);

// Renumber arbitrary cluster ids to the contiguous smallest-member order.
Clustering canonicalize_clustering(const std::vector<std::int32_t>& raw_ids);

}  // namespace pahc
