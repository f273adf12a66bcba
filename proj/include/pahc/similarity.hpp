#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pahc/embedding.hpp"
#include "pahc/knn.hpp"
#include "pahc/svm.hpp"

namespace pahc {

enum class Transform { arctan, exp };

enum class DistanceKind : std::uint8_t { cosine = 0, pa_arctan = 1, pa_exp = 2 };

// Condensed symmetric pairwise distance store: the upper triangle, row-major,
// n(n-1)/2 entries. The diagonal is implicitly zero and never stored.
struct DistanceMatrix {
    std::size_t n = 0;
    DistanceKind kind = DistanceKind::cosine;
    std::vector<double> values;

    static std::size_t condensed_index(std::size_t n, std::size_t i, std::size_t j) {
        if (i > j) std::swap(i, j);
        return n * i - i * (i + 1) / 2 + (j - i - 1);
    }
    double at(std::size_t i, std::size_t j) const {
        return i == j ? 0.0 : values[condensed_index(n, i, j)];
    }
    std::size_t num_pairs() const { return n * (n - 1) / 2; }
};

double cosine_similarity(const EmbeddingSet& set, std::size_t i, std::size_t j);

// Mean signed evaluation of the plane over a sample set: |S|^-1 sum (w'x + b).
double asymmetric_eval(const Hyperplane& h, std::span<const std::uint32_t> members,
                       const EmbeddingSet& set);

// Proximity-Aware similarity: average of plane i scored on j's neighborhood
// and plane j scored on i's neighborhood.
double pa_similarity(std::size_t i, std::size_t j, const std::vector<Hyperplane>& planes,
                     const NeighborLists& nn, const EmbeddingSet& set);

// Distance transforms of the unbounded similarity: 1 - (2/pi) atan(s), or
// exp(-s). Both strictly decreasing.
double pa_distance(double s, Transform transform);

struct PaParams {
    NeighborWindow window;
    double C = 10.0;
    Transform transform = Transform::arctan;
    // Debug/reference mode: plane i is (w = x_i, b = 0) with no SVM solve.
    // With K = 1 this reduces the similarity to the plain inner product.
    bool fixed_hyperplane = false;
    // When set, SVM negatives come from this pool instead of NNList[N1:N2].
    const EmbeddingSet* negatives_pool = nullptr;
    SvmOptions svm;
};

DistanceMatrix build_cosine_matrix(const EmbeddingSet& set, int threads = 0);

// Trains one hyperplane per sample, then fills all pairwise transformed
// distances. Planes are reused across pairs.
DistanceMatrix build_pa_matrix(const EmbeddingSet& set, const PaParams& params,
                               int threads = 0);

// Per-sample hyperplanes for the given window; exposed for reuse/testing.
std::vector<Hyperplane> train_hyperplanes(const EmbeddingSet& set, const NeighborLists& nn,
                                          const PaParams& params, int threads = 0);

// "DST1" dump: magic, u32 n, u8 kind, then n(n-1)/2 little-endian f64 values
// in row-major condensed order.
void save_distance_matrix(const DistanceMatrix& m, const std::string& path);
DistanceMatrix load_distance_matrix(const std::string& path);

Transform parse_transform(const std::string& name);

}  // namespace pahc
