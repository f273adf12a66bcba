#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pahc/agglomerative.hpp"

namespace pahc {

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int32_t num_clusters = 0;
};

struct PairPR {
    double precision = 0.0;
    double recall = 0.0;
};

// Pairwise precision: same-class fraction of all same-cluster pairs.
// Pairwise recall: same-cluster fraction of all same-class pairs.
// Conventions making the curve total: precision is 1 with no same-cluster
// pairs, recall is 1 with no same-class pairs.
PairPR pairwise_precision_recall(const Clustering& c, std::span<const std::int64_t> labels);

double f1_score(double precision, double recall);

// Exact PR curve over the dendrogram: the partition only changes at merge
// heights, so evaluating just below and just above each distinct height
// (nextafter gives "just above" without an epsilon) covers every operating
// point. Consecutive duplicates are dropped; points are ordered by threshold.
std::vector<PRPoint> pr_sweep(const Dendrogram& dend, std::span<const std::int64_t> labels);

// CSV (with header): threshold,precision,recall,f1,num_clusters
void save_pr_csv(const std::vector<PRPoint>& points, const std::string& path);

}  // namespace pahc
