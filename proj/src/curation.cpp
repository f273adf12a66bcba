#include "pahc/curation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "pahc/agglomerative.hpp"
#include "pahc/error.hpp"

namespace pahc {

CurationResult curate(const EmbeddingSet& set, const CurationConfig& cfg) {
    validate(set);
    if (!set.has_labels()) throw ConfigError("curate requires labels");
    if (cfg.batch_size_identities < 1)
        throw ConfigError("curate: batch_size_identities must be >= 1");
    if (cfg.min_majority < 1) throw ConfigError("curate: min_majority must be >= 1");

    // Identities batch in order of first appearance, so the batching is a
    // pure function of the input file.
    std::vector<std::int64_t> identity_order;
    std::unordered_map<std::int64_t, std::size_t> identity_batch;
    for (auto l : set.labels) {
        if (identity_batch.try_emplace(l, 0).second) identity_order.push_back(l);
    }
    for (std::size_t g = 0; g < identity_order.size(); ++g)
        identity_batch[identity_order[g]] = g / static_cast<std::size_t>(cfg.batch_size_identities);
    std::size_t num_batches =
        (identity_order.size() + cfg.batch_size_identities - 1) / cfg.batch_size_identities;

    std::vector<std::vector<std::uint32_t>> batch_samples(num_batches);
    for (std::size_t i = 0; i < set.rows; ++i)
        batch_samples[identity_batch[set.labels[i]]].push_back(static_cast<std::uint32_t>(i));

    CurationResult result;
    result.cluster_of.assign(set.rows, -1);
    result.kept_mask.assign(set.rows, 0);

    std::int32_t next_cluster_id = 0;
    for (std::size_t b = 0; b < num_batches; ++b) {
        const auto& samples = batch_samples[b];
        EmbeddingSet sub;
        sub.rows = samples.size();
        sub.cols = set.cols;
        sub.data.reserve(sub.rows * sub.cols);
        for (auto s : samples)
            sub.data.insert(sub.data.end(), set.row(s), set.row(s) + set.cols);

        Clustering clustering;
        if (sub.rows == 1) {
            clustering.assignment = {0};
            clustering.num_clusters = 1;
        } else {
            DistanceMatrix D = build_pa_matrix(sub, cfg.pahc, cfg.threads);
            clustering = hierarchical(D, cfg.eta);
        }

        // Majority label per cluster; ties go to the lower label id.
        std::vector<std::map<std::int64_t, std::int32_t>> tallies(clustering.num_clusters);
        for (std::size_t r = 0; r < samples.size(); ++r)
            ++tallies[clustering.assignment[r]][set.labels[samples[r]]];

        std::vector<ClusterReport> reports(clustering.num_clusters);
        for (std::int32_t c = 0; c < clustering.num_clusters; ++c) {
            ClusterReport rep;
            rep.batch = static_cast<std::int32_t>(b);
            rep.cluster = next_cluster_id + c;
            for (const auto& [label, count] : tallies[c]) {
                rep.size += count;
                if (count > rep.majority_count) {  // std::map order breaks ties low
                    rep.majority_count = count;
                    rep.majority_label = label;
                }
            }
            rep.kept = rep.majority_count >= cfg.min_majority;
            reports[c] = rep;
        }

        for (std::size_t r = 0; r < samples.size(); ++r) {
            const ClusterReport& rep = reports[clustering.assignment[r]];
            result.cluster_of[samples[r]] = rep.cluster;
            result.kept_mask[samples[r]] = rep.kept ? 1 : 0;
        }
        result.clusters.insert(result.clusters.end(), reports.begin(), reports.end());
        next_cluster_id += clustering.num_clusters;
    }

    for (std::size_t i = 0; i < set.rows; ++i)
        if (result.kept_mask[i]) result.kept.push_back(static_cast<std::uint32_t>(i));
    return result;
}

void save_kept_tsv(const EmbeddingSet& set, const CurationResult& result,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    std::unordered_map<std::int32_t, std::int64_t> majority;
    for (const auto& rep : result.clusters) majority[rep.cluster] = rep.majority_label;
    for (std::size_t i = 0; i < set.rows; ++i)
        out << set.sample_id(i) << "\t" << result.cluster_of[i] << "\t"
            << majority[result.cluster_of[i]] << "\t" << int(result.kept_mask[i]) << "\n";
    if (!out) throw IoError("write failed for " + path);
}

void save_report_jsonl(const CurationResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& rep : result.clusters) {
        nlohmann::json j{{"batch", rep.batch},
                         {"cluster", rep.cluster},
                         {"size", rep.size},
                         {"majority_label", rep.majority_label},
                         {"majority_count", rep.majority_count},
                         {"kept", rep.kept}};
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace pahc
