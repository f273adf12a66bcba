#include "pahc/similarity.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "pahc/error.hpp"
#include "pahc/parallel.hpp"

namespace pahc {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'T', '1'};
constexpr double kPi = 3.141592653589793238462643383279502884;

double dot(const double* a, const double* b, std::size_t d) {
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
    return s;
}

// Mean of each sample's positive neighborhood. H_i is linear, so evaluating
// it on a set equals evaluating it on the set's mean; this turns the O(n^2 K)
// pair sweep into O(n^2) dot products.
std::vector<double> neighborhood_means(const EmbeddingSet& set, const NeighborLists& nn,
                                       int threads) {
    std::vector<double> means(set.rows * set.cols, 0.0);
    parallel_for(set.rows, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto l = nn.list(i);
            double* m = means.data() + i * set.cols;
            for (int k = 0; k < nn.K; ++k) {
                const double* x = set.row(l[k]);
                for (std::size_t j = 0; j < set.cols; ++j) m[j] += x[j];
            }
            for (std::size_t j = 0; j < set.cols; ++j) m[j] /= nn.K;
        }
    });
    return means;
}

}  // namespace

double cosine_similarity(const EmbeddingSet& set, std::size_t i, std::size_t j) {
    if (i >= set.rows || j >= set.rows) throw ConfigError("cosine_similarity: index out of range");
    return dot(set.row(i), set.row(j), set.cols);
}

double asymmetric_eval(const Hyperplane& h, std::span<const std::uint32_t> members,
                       const EmbeddingSet& set) {
    if (members.empty()) throw ConfigError("asymmetric_eval: empty evaluation set");
    if (h.w.size() != set.cols) throw ConfigError("asymmetric_eval: dimension mismatch");
    double s = 0;
    for (auto i : members) s += dot(h.w.data(), set.row(i), set.cols) + h.b;
    return s / static_cast<double>(members.size());
}

double pa_similarity(std::size_t i, std::size_t j, const std::vector<Hyperplane>& planes,
                     const NeighborLists& nn, const EmbeddingSet& set) {
    auto ni = positive_set(nn, i);
    auto nj = positive_set(nn, j);
    return 0.5 * (asymmetric_eval(planes[i], nj, set) + asymmetric_eval(planes[j], ni, set));
}

double pa_distance(double s, Transform transform) {
    switch (transform) {
        case Transform::arctan:
            return 1.0 - (2.0 / kPi) * std::atan(s);
        case Transform::exp:
            return std::exp(-s);
    }
    throw ConfigError("unknown transform");
}

DistanceMatrix build_cosine_matrix(const EmbeddingSet& set, int threads) {
    validate(set);
    DistanceMatrix m;
    m.n = set.rows;
    m.kind = DistanceKind::cosine;
    m.values.resize(m.num_pairs());
    parallel_for(set.rows, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* out = m.values.data() + DistanceMatrix::condensed_index(m.n, i, i + 1);
            const double* xi = set.row(i);
            for (std::size_t j = i + 1; j < set.rows; ++j)
                out[j - i - 1] = 1.0 - dot(xi, set.row(j), set.cols);
        }
    });
    return m;
}

std::vector<Hyperplane> train_hyperplanes(const EmbeddingSet& set, const NeighborLists& nn,
                                          const PaParams& params, int threads) {
    std::vector<Hyperplane> planes(set.rows);
    if (params.fixed_hyperplane) {
        for (std::size_t i = 0; i < set.rows; ++i) {
            planes[i].w.assign(set.row(i), set.row(i) + set.cols);
            planes[i].b = 0.0;
        }
        return planes;
    }
    const EmbeddingSet* pool = params.negatives_pool;
    std::vector<std::uint32_t> pool_all;
    if (pool) {
        validate(*pool);
        if (pool->cols != set.cols)
            throw ConfigError("negatives pool dimension " + std::to_string(pool->cols) +
                              " != embedding dimension " + std::to_string(set.cols));
        pool_all.resize(pool->rows);
        for (std::size_t i = 0; i < pool->rows; ++i) pool_all[i] = static_cast<std::uint32_t>(i);
    }
    parallel_for(set.rows, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto pos = positive_set(nn, i);
            if (pool) {
                planes[i] = train_hyperplane_split(set, pos, *pool, pool_all, params.C,
                                                   params.svm);
            } else {
                auto neg = negative_set(nn, i);
                if (neg.empty())
                    throw ConfigError("sample " + std::to_string(i) +
                                      ": negative window [N1:N2] is empty (N1 " +
                                      std::to_string(nn.N1) + " exceeds list length " +
                                      std::to_string(nn.depth) + ")");
                planes[i] = train_hyperplane_split(set, pos, set, neg, params.C, params.svm);
            }
        }
    });
    return planes;
}

DistanceMatrix build_pa_matrix(const EmbeddingSet& set, const PaParams& params, int threads) {
    validate(set);
    NeighborLists nn = build_nn_lists(set, params.window, threads);
    std::vector<Hyperplane> planes = train_hyperplanes(set, nn, params, threads);
    std::vector<double> means = neighborhood_means(set, nn, threads);

    DistanceMatrix m;
    m.n = set.rows;
    m.kind = params.transform == Transform::arctan ? DistanceKind::pa_arctan
                                                   : DistanceKind::pa_exp;
    m.values.resize(m.num_pairs());
    const std::size_t d = set.cols;
    parallel_for(set.rows, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* out = m.values.data() + DistanceMatrix::condensed_index(m.n, i, i + 1);
            const Hyperplane& hi_ = planes[i];
            const double* mi = means.data() + i * d;
            for (std::size_t j = i + 1; j < set.rows; ++j) {
                const Hyperplane& hj = planes[j];
                const double* mj = means.data() + j * d;
                double s = 0.5 * ((dot(hi_.w.data(), mj, d) + hi_.b) +
                                  (dot(hj.w.data(), mi, d) + hj.b));
                out[j - i - 1] = pa_distance(s, params.transform);
            }
        }
    });
    return m;
}

void save_distance_matrix(const DistanceMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kMagic, 4);
    std::uint32_t n = static_cast<std::uint32_t>(m.n);
    unsigned char nb[4] = {static_cast<unsigned char>(n & 0xFF),
                           static_cast<unsigned char>((n >> 8) & 0xFF),
                           static_cast<unsigned char>((n >> 16) & 0xFF),
                           static_cast<unsigned char>((n >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(nb), 4);
    unsigned char kind = static_cast<unsigned char>(m.kind);
    out.write(reinterpret_cast<const char*>(&kind), 1);
    for (double v : m.values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        unsigned char b[8];
        for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xFF);
        out.write(reinterpret_cast<const char*>(b), 8);
    }
    if (!out) throw IoError("write failed for " + path);
}

DistanceMatrix load_distance_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 9) throw IoError(path + ": truncated header");
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw IoError(path + ": bad magic at byte 0 (expected \"DST1\")");
    std::uint32_t n = static_cast<std::uint32_t>(buf[4]) | (static_cast<std::uint32_t>(buf[5]) << 8) |
                      (static_cast<std::uint32_t>(buf[6]) << 16) |
                      (static_cast<std::uint32_t>(buf[7]) << 24);
    if (buf[8] > 2) throw IoError(path + ": unknown distance kind " + std::to_string(buf[8]));
    DistanceMatrix m;
    m.n = n;
    m.kind = static_cast<DistanceKind>(buf[8]);
    std::size_t pairs = m.num_pairs();
    if (buf.size() != 9 + pairs * 8)
        throw IoError(path + ": payload ends at byte " + std::to_string(buf.size()) +
                      ", expected " + std::to_string(9 + pairs * 8));
    m.values.resize(pairs);
    const unsigned char* p = buf.data() + 9;
    for (std::size_t i = 0; i < pairs; ++i, p += 8) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
        std::memcpy(&m.values[i], &bits, sizeof(double));
    }
    return m;
}

Transform parse_transform(const std::string& name) {
    if (name == "arctan") return Transform::arctan;
    if (name == "exp") return Transform::exp;
    throw ConfigError("unknown transform \"" + name + "\" (expected arctan or exp)");
}

}  // namespace pahc
