#include "pahc/synth.hpp"

#include <cmath>
#include <numeric>

#include "pahc/error.hpp"
#include "pahc/rng.hpp"

namespace pahc {

namespace {

// Stream tags; distinct per use so streams never collide.
constexpr std::uint64_t kTagMean = 1;
constexpr std::uint64_t kTagSample = 2;
constexpr std::uint64_t kTagLabelNoise = 3;

void draw_unit_vector(Rng& rng, std::size_t dim, double* out) {
    while (true) {
        double sq = 0;
        for (std::size_t j = 0; j < dim; ++j) {
            out[j] = rng.next_normal();
            sq += out[j] * out[j];
        }
        double norm = std::sqrt(sq);
        if (norm > 1e-12) {
            for (std::size_t j = 0; j < dim; ++j) out[j] /= norm;
            return;
        }
    }
}

}  // namespace

EmbeddingSet generate(const SynthConfig& cfg) {
    if (cfg.num_identities < 1) throw ConfigError("synth: num_identities must be >= 1");
    if (cfg.dim < 1) throw ConfigError("synth: dim must be >= 1");
    if (!(cfg.concentration > 0)) throw ConfigError("synth: concentration must be > 0");
    if (cfg.noise_fraction < 0 || cfg.noise_fraction > 1)
        throw ConfigError("synth: noise_fraction must be in [0, 1]");

    std::vector<std::uint32_t> counts = cfg.per_identity_counts;
    if (counts.empty()) counts.assign(cfg.num_identities, cfg.samples_per_identity);
    if (counts.size() != cfg.num_identities)
        throw ConfigError("synth: per_identity_counts length != num_identities");
    for (auto c : counts)
        if (c < 1) throw ConfigError("synth: every identity needs at least one sample");

    std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    std::size_t d = cfg.dim;

    std::vector<double> means(static_cast<std::size_t>(cfg.num_identities) * d);
    for (std::uint32_t g = 0; g < cfg.num_identities; ++g) {
        Rng rng(cfg.seed, kTagMean, g);
        draw_unit_vector(rng, d, means.data() + static_cast<std::size_t>(g) * d);
    }

    EmbeddingSet set;
    set.rows = n;
    set.cols = d;
    set.data.resize(n * d);
    set.labels.resize(n);

    double sigma = 1.0 / cfg.concentration;
    std::size_t s = 0;
    for (std::uint32_t g = 0; g < cfg.num_identities; ++g) {
        for (std::uint32_t k = 0; k < counts[g]; ++k, ++s) {
            set.labels[s] = g;
            double* row = set.row(s);
            const double* mean = means.data() + static_cast<std::size_t>(g) * d;
            Rng rng(cfg.seed, kTagSample, s);
            while (true) {
                double sq = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    row[j] = mean[j] + sigma * rng.next_normal();
                    sq += row[j] * row[j];
                }
                double norm = std::sqrt(sq);
                if (norm > 1e-12) {
                    for (std::size_t j = 0; j < d; ++j) row[j] /= norm;
                    break;
                }
            }
        }
    }

    std::size_t num_noisy = static_cast<std::size_t>(std::llround(cfg.noise_fraction * n));
    if (num_noisy > 0) {
        if (cfg.num_identities < 2)
            throw ConfigError("synth: label noise needs at least two identities");
        // Fisher-Yates prefix selects the corrupted samples.
        std::vector<std::uint32_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0u);
        Rng rng(cfg.seed, kTagLabelNoise, 0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            std::size_t j = i + rng.next_below(n - i);
            std::swap(perm[i], perm[j]);
        }
        for (std::size_t i = 0; i < num_noisy; ++i) {
            std::uint32_t victim = perm[i];
            std::int64_t old = set.labels[victim];
            std::int64_t shift = 1 + static_cast<std::int64_t>(rng.next_below(cfg.num_identities - 1));
            set.labels[victim] = (old + shift) % cfg.num_identities;
        }
    }

    return set;
}

}  // namespace pahc
