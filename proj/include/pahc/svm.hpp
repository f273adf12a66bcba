#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pahc/embedding.hpp"

namespace pahc {

// Separating hyperplane w'x + b = 0 from one neighborhood SVM solve.
struct Hyperplane {
    std::vector<double> w;
    double b = 0.0;
};

// One class-weighted L2-regularized squared-hinge primal problem:
//
//   min_u 1/2 u'u + C_p sum_pos max(0, 1 - y_k u'z_k)^2
//                 + C_n sum_neg max(0, 1 - y_k u'z_k)^2
//
// with u = [w; b], z_k = [x_k; 1], y = +1 on positives and -1 on negatives,
// C_p = C (N_p+N_n)/N_p and C_n = C (N_p+N_n)/N_n. The bias is regularized:
// it lives inside u.
struct SvmProblem {
    std::vector<std::uint32_t> positives;
    std::vector<std::uint32_t> negatives;
    double C = 10.0;
};

struct SvmOptions {
    double tol = 1e-6;      // relative gradient-norm stopping tolerance
    int max_newton = 200;
    std::vector<double>* objective_trace = nullptr;  // optional per-iterate record
};

// (C_p, C_n) class balance weights.
std::pair<double, double> class_weights(double C, std::size_t n_pos, std::size_t n_neg);

// Objective value at u (length d+1, bias last).
double svm_objective(std::span<const double> u, const SvmProblem& prob,
                     const EmbeddingSet& set);

// Analytic gradient at u, written into g (length d+1).
void svm_gradient(std::span<const double> u, const SvmProblem& prob,
                  const EmbeddingSet& set, std::span<double> g);

// Newton solve with a conjugate-gradient inner loop on the generalized
// Hessian and a backtracking line search, started from u = 0. Converged when
// ||grad|| <= tol * max(1, ||grad at 0||).
Hyperplane train_hyperplane(const SvmProblem& prob, const EmbeddingSet& set,
                            const SvmOptions& opts = {});

// Same solver on an explicit positive/negative row split. Lets negatives come
// from a different embedding set than the positives.
Hyperplane train_hyperplane_split(const EmbeddingSet& pos_set,
                                  std::span<const std::uint32_t> positives,
                                  const EmbeddingSet& neg_set,
                                  std::span<const std::uint32_t> negatives, double C,
                                  const SvmOptions& opts = {});

}  // namespace pahc
