#include "pahc/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "pahc/error.hpp"

namespace pahc {

namespace {

// Gathered dense problem: rows are z_k = [x_k; 1] with the bias column kept
// implicit. Positives come first.
struct DenseProblem {
    std::size_t d = 0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::vector<double> x;   // (n_pos + n_neg) * d
    std::vector<double> ck;  // per-row weight: C_p or C_n

    std::size_t n() const { return n_pos + n_neg; }
    double y(std::size_t k) const { return k < n_pos ? 1.0 : -1.0; }
    const double* row(std::size_t k) const { return x.data() + k * d; }
};

DenseProblem gather(const EmbeddingSet& pos_set, std::span<const std::uint32_t> positives,
                    const EmbeddingSet& neg_set, std::span<const std::uint32_t> negatives,
                    double C) {
    if (positives.empty()) throw ConfigError("svm: empty positive set");
    if (negatives.empty()) throw ConfigError("svm: empty negative set");
    if (pos_set.cols != neg_set.cols)
        throw ConfigError("svm: positive and negative sets have different dimensions");
    if (C < 0) throw ConfigError("svm: C must be >= 0");

    DenseProblem p;
    p.d = pos_set.cols;
    p.n_pos = positives.size();
    p.n_neg = negatives.size();
    p.x.resize(p.n() * p.d);
    p.ck.resize(p.n());
    auto [cp, cn] = class_weights(C, p.n_pos, p.n_neg);
    std::size_t r = 0;
    for (auto i : positives) {
        if (i >= pos_set.rows) throw ConfigError("svm: positive index out of range");
        std::memcpy(p.x.data() + r * p.d, pos_set.row(i), p.d * sizeof(double));
        p.ck[r++] = cp;
    }
    for (auto i : negatives) {
        if (i >= neg_set.rows) throw ConfigError("svm: negative index out of range");
        std::memcpy(p.x.data() + r * p.d, neg_set.row(i), p.d * sizeof(double));
        p.ck[r++] = cn;
    }
    return p;
}

// u'z_k with the implicit bias column.
double dot_z(const DenseProblem& p, std::span<const double> u, std::size_t k) {
    const double* xk = p.row(k);
    double v = u[p.d];
    for (std::size_t j = 0; j < p.d; ++j) v += u[j] * xk[j];
    return v;
}

double objective(const DenseProblem& p, std::span<const double> u, std::vector<double>& margins) {
    double f = 0;
    for (std::size_t j = 0; j <= p.d; ++j) f += u[j] * u[j];
    f *= 0.5;
    margins.resize(p.n());
    for (std::size_t k = 0; k < p.n(); ++k) {
        margins[k] = p.y(k) * dot_z(p, u, k);
        double slack = 1.0 - margins[k];
        if (slack > 0) f += p.ck[k] * slack * slack;
    }
    return f;
}

// g = u + 2 sum_{k: y u'z < 1} c_k y_k (y_k u'z_k - 1) z_k
void gradient(const DenseProblem& p, std::span<const double> u,
              std::span<const double> margins, std::span<double> g) {
    for (std::size_t j = 0; j <= p.d; ++j) g[j] = u[j];
    for (std::size_t k = 0; k < p.n(); ++k) {
        if (margins[k] >= 1.0) continue;
        double coef = 2.0 * p.ck[k] * p.y(k) * (margins[k] - 1.0);
        const double* xk = p.row(k);
        for (std::size_t j = 0; j < p.d; ++j) g[j] += coef * xk[j];
        g[p.d] += coef;
    }
}

// Hs = s + 2 sum_{k in active} c_k (s'z_k) z_k  (generalized Hessian)
void hessian_vec(const DenseProblem& p, std::span<const std::uint32_t> active,
                 std::span<const double> s, std::span<double> hs) {
    for (std::size_t j = 0; j <= p.d; ++j) hs[j] = s[j];
    for (auto k : active) {
        double v = 2.0 * p.ck[k] * dot_z(p, s, k);
        const double* xk = p.row(k);
        for (std::size_t j = 0; j < p.d; ++j) hs[j] += v * xk[j];
        hs[p.d] += v;
    }
}

double norm2(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// CG on H s = -g. H >= I, so this is safe without preconditioning; the
// problems are a few dozen variables and converge quickly.
void solve_newton_system(const DenseProblem& p, std::span<const std::uint32_t> active,
                         std::span<const double> g, std::span<double> s) {
    const std::size_t m = g.size();
    std::fill(s.begin(), s.end(), 0.0);
    std::vector<double> r(m), dir(m), hd(m);
    for (std::size_t j = 0; j < m; ++j) r[j] = -g[j];
    dir.assign(r.begin(), r.end());
    double rr = 0;
    for (double v : r) rr += v * v;
    double tol2 = std::max(1e-24, 1e-20 * rr);
    for (std::size_t it = 0; it < 2 * m + 10 && rr > tol2; ++it) {
        hessian_vec(p, active, dir, hd);
        double dhd = 0;
        for (std::size_t j = 0; j < m; ++j) dhd += dir[j] * hd[j];
        if (dhd <= 0) break;
        double alpha = rr / dhd;
        double rr_next = 0;
        for (std::size_t j = 0; j < m; ++j) {
            s[j] += alpha * dir[j];
            r[j] -= alpha * hd[j];
            rr_next += r[j] * r[j];
        }
        double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t j = 0; j < m; ++j) dir[j] = r[j] + beta * dir[j];
    }
}

Hyperplane solve(const DenseProblem& p, const SvmOptions& opts) {
    const std::size_t m = p.d + 1;
    std::vector<double> u(m, 0.0), g(m), s(m), u_next(m), margins, margins_next;
    std::vector<std::uint32_t> active;

    double f = objective(p, u, margins);
    if (opts.objective_trace) opts.objective_trace->push_back(f);
    gradient(p, u, margins, g);
    double gnorm0 = norm2(g);
    double stop = opts.tol * std::max(1.0, gnorm0);

    int iter = 0;
    double gnorm = gnorm0;
    while (gnorm > stop) {
        if (iter++ >= opts.max_newton)
            throw NumericError("svm solver did not converge: gradient norm " +
                               std::to_string(gnorm) + " after " +
                               std::to_string(opts.max_newton) + " Newton steps");
        active.clear();
        for (std::size_t k = 0; k < p.n(); ++k)
            if (margins[k] < 1.0) active.push_back(static_cast<std::uint32_t>(k));
        solve_newton_system(p, active, g, s);

        double gs = 0;
        for (std::size_t j = 0; j < m; ++j) gs += g[j] * s[j];
        double step = 1.0;
        double f_next = f;
        for (int bt = 0; bt < 64; ++bt) {
            for (std::size_t j = 0; j < m; ++j) u_next[j] = u[j] + step * s[j];
            f_next = objective(p, u_next, margins_next);
            if (f_next <= f + 0.01 * step * gs) break;
            step *= 0.5;
        }
        if (f_next > f) break;  // no descent left at machine precision
        u.swap(u_next);
        margins.swap(margins_next);
        f = f_next;
        if (opts.objective_trace) opts.objective_trace->push_back(f);
        gradient(p, u, margins, g);
        gnorm = norm2(g);
    }
    if (gnorm > stop)
        throw NumericError("svm solver stalled: gradient norm " + std::to_string(gnorm) +
                           " above tolerance " + std::to_string(stop));

    Hyperplane h;
    h.w.assign(u.begin(), u.begin() + p.d);
    h.b = u[p.d];
    return h;
}

}  // namespace

std::pair<double, double> class_weights(double C, std::size_t n_pos, std::size_t n_neg) {
    if (n_pos < 1 || n_neg < 1) throw ConfigError("class_weights: both classes need samples");
    double total = static_cast<double>(n_pos + n_neg);
    return {C * total / static_cast<double>(n_pos), C * total / static_cast<double>(n_neg)};
}

double svm_objective(std::span<const double> u, const SvmProblem& prob,
                     const EmbeddingSet& set) {
    DenseProblem p = gather(set, prob.positives, set, prob.negatives, prob.C);
    if (u.size() != p.d + 1) throw ConfigError("svm_objective: u must have length d+1");
    std::vector<double> margins;
    return objective(p, u, margins);
}

void svm_gradient(std::span<const double> u, const SvmProblem& prob, const EmbeddingSet& set,
                  std::span<double> g) {
    DenseProblem p = gather(set, prob.positives, set, prob.negatives, prob.C);
    if (u.size() != p.d + 1 || g.size() != p.d + 1)
        throw ConfigError("svm_gradient: u and g must have length d+1");
    std::vector<double> margins;
    objective(p, u, margins);
    gradient(p, u, margins, g);
}

Hyperplane train_hyperplane(const SvmProblem& prob, const EmbeddingSet& set,
                            const SvmOptions& opts) {
    for (auto i : prob.positives)
        for (auto j : prob.negatives)
            if (i == j) throw ConfigError("svm: sample " + std::to_string(i) +
                                          " is both positive and negative");
    return solve(gather(set, prob.positives, set, prob.negatives, prob.C), opts);
}

Hyperplane train_hyperplane_split(const EmbeddingSet& pos_set,
                                  std::span<const std::uint32_t> positives,
                                  const EmbeddingSet& neg_set,
                                  std::span<const std::uint32_t> negatives, double C,
                                  const SvmOptions& opts) {
    return solve(gather(pos_set, positives, neg_set, negatives, C), opts);
}

}  // namespace pahc
