#pragma once

#include <cstdint>
#include <vector>

#include "pahc/embedding.hpp"

namespace pahc {

// Labeled synthetic embeddings on the unit hypersphere. Identity means are
// drawn uniformly on the sphere; samples add isotropic Gaussian noise with
// standard deviation 1/concentration and are renormalized. This is a
// tangent-Gaussian stand-in for von Mises-Fisher sampling: adequate for
// testing and far simpler than a rejection sampler.
struct SynthConfig {
    std::uint32_t num_identities = 10;
    std::uint32_t samples_per_identity = 20;
    std::vector<std::uint32_t> per_identity_counts;  // optional; overrides samples_per_identity
    std::uint32_t dim = 64;
    double concentration = 16.0;
    double noise_fraction = 0.0;  // fraction of samples given a wrong label
    std::uint64_t seed = 0;
};

// Deterministic in (seed, sample index): identical output for any thread
// count. Exactly round(noise_fraction * n_s) samples get a label reassigned
// to a random other identity.
EmbeddingSet generate(const SynthConfig& cfg);

}  // namespace pahc
