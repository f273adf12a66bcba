#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pahc/embedding.hpp"
#include "pahc/similarity.hpp"

namespace pahc {

// Label-noise curation: identities are grouped into consecutive batches (in
// order of first appearance), each batch is clustered with the exp-distance
// pipeline, and clusters whose majority label has too few members are
// discarded wholesale.
struct CurationConfig {
    int batch_size_identities = 50;
    double eta = 2.3;
    int min_majority = 30;
    PaParams pahc;  // pahc.transform defaults to exp for curation
    int threads = 0;

    CurationConfig() { pahc.transform = Transform::exp; }
};

struct ClusterReport {
    std::int32_t batch = 0;
    std::int32_t cluster = 0;  // globally unique across batches
    std::int32_t size = 0;
    std::int64_t majority_label = 0;
    std::int32_t majority_count = 0;
    bool kept = false;
};

struct CurationResult {
    std::vector<std::uint32_t> kept;          // surviving sample indices, ascending
    std::vector<ClusterReport> clusters;
    std::vector<std::int32_t> cluster_of;     // per sample, global cluster id
    std::vector<std::uint8_t> kept_mask;      // per sample
};

CurationResult curate(const EmbeddingSet& set, const CurationConfig& cfg);

// kept.tsv: sample_id <TAB> cluster_id <TAB> majority_label <TAB> kept{0,1}
void save_kept_tsv(const EmbeddingSet& set, const CurationResult& result,
                   const std::string& path);

// JSON lines, one object per cluster.
void save_report_jsonl(const CurationResult& result, const std::string& path);

}  // namespace pahc
