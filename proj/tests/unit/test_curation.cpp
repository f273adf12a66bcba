#include <doctest.h>

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "pahc/curation.hpp"
#include "pahc/error.hpp"
#include "pahc/synth.hpp"
#include "test_util.hpp"

using namespace pahc;

namespace {

CurationConfig config_for_batch(int n1, int n2) {
    CurationConfig cfg;
    cfg.pahc.window = NeighborWindow{5, n1, n2};
    cfg.pahc.C = 10.0;
    cfg.threads = 1;
    return cfg;
}

double purity(const std::vector<ClusterReport>& clusters, bool kept_only) {
    double majority = 0, size = 0;
    for (const auto& c : clusters) {
        if (kept_only && !c.kept) continue;
        majority += c.majority_count;
        size += c.size;
    }
    return size > 0 ? majority / size : 0.0;
}

}  // namespace

TEST_SUITE("curation") {

TEST_CASE("a clean tight batch is kept losslessly in per-identity clusters") {
    SynthConfig synth;
    synth.num_identities = 2;
    synth.samples_per_identity = 40;
    synth.dim = 16;
    synth.concentration = 1000.0;
    synth.seed = 3;
    EmbeddingSet set = generate(synth);
    CurationResult r = curate(set, config_for_batch(41, 80));
    CHECK(r.kept.size() == set.rows);
    REQUIRE(r.clusters.size() == 2);
    for (const auto& c : r.clusters) {
        CHECK(c.size == 40);
        CHECK(c.majority_count == 40);
        CHECK(c.kept);
    }
}

TEST_CASE("an identity with 10 samples total is discarded entirely") {
    SynthConfig synth;
    synth.num_identities = 2;
    synth.per_identity_counts = {40, 10};
    synth.dim = 16;
    synth.concentration = 1000.0;
    synth.seed = 3;
    EmbeddingSet set = generate(synth);
    CurationResult r = curate(set, config_for_batch(41, 50));
    for (const auto& c : r.clusters) {
        if (c.majority_label == 1) {
            CHECK(c.majority_count <= 10);
            CHECK_FALSE(c.kept);
        }
    }
    for (std::size_t i = 0; i < set.rows; ++i)
        if (set.labels[i] == 1) CHECK(r.kept_mask[i] == 0);
}

TEST_CASE("label noise: the kept subset is purer than the input") {
    SynthConfig synth;
    synth.num_identities = 20;
    synth.samples_per_identity = 60;
    synth.dim = 64;
    synth.concentration = 8.0;
    synth.noise_fraction = 0.2;
    synth.seed = 42;
    EmbeddingSet set = generate(synth);
    CurationConfig cfg = config_for_batch(50, 100);
    cfg.batch_size_identities = 10;
    CurationResult r = curate(set, cfg);
    double input_purity = purity(r.clusters, false);
    double kept_purity = purity(r.clusters, true);
    CHECK(kept_purity > input_purity);
    CHECK(r.kept.size() < set.rows);  // something was discarded
    // Every kept sample's cluster meets the support floor.
    for (const auto& c : r.clusters)
        if (c.kept) CHECK(c.majority_count >= cfg.min_majority);
}

TEST_CASE("raising min_majority never grows the kept set") {
    SynthConfig synth;
    synth.num_identities = 4;
    synth.samples_per_identity = 40;
    synth.dim = 16;
    synth.concentration = 12.0;
    synth.noise_fraction = 0.1;
    synth.seed = 11;
    EmbeddingSet set = generate(synth);
    CurationConfig cfg = config_for_batch(50, 100);
    std::vector<std::uint32_t> prev;
    bool first = true;
    for (int mm : {10, 30, 50, 200}) {
        cfg.min_majority = mm;
        CurationResult r = curate(set, cfg);
        if (!first) {
            for (auto s : r.kept)
                CHECK(std::find(prev.begin(), prev.end(), s) != prev.end());
        }
        prev = r.kept;
        first = false;
    }
}

TEST_CASE("identical runs across thread counts") {
    SynthConfig synth;
    synth.num_identities = 6;
    synth.samples_per_identity = 25;
    synth.dim = 16;
    synth.concentration = 10.0;
    synth.noise_fraction = 0.15;
    synth.seed = 21;
    EmbeddingSet set = generate(synth);
    CurationConfig cfg = config_for_batch(30, 70);
    cfg.batch_size_identities = 3;
    cfg.threads = 1;
    CurationResult a = curate(set, cfg);
    cfg.threads = 4;
    CurationResult b = curate(set, cfg);
    CHECK(a.kept == b.kept);
    CHECK(a.cluster_of == b.cluster_of);
}

TEST_CASE("outputs: kept.tsv rows and one JSON object per cluster") {
    pahc::testing::TempDir tmp;
    SynthConfig synth;
    synth.num_identities = 2;
    synth.samples_per_identity = 35;
    synth.dim = 8;
    synth.concentration = 100.0;
    synth.seed = 9;
    EmbeddingSet set = generate(synth);
    CurationResult r = curate(set, config_for_batch(36, 70));
    save_kept_tsv(set, r, tmp.file("kept.tsv"));
    save_report_jsonl(r, tmp.file("report.jsonl"));

    std::string tsv = pahc::testing::slurp(tmp.file("kept.tsv"));
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 70);
    CHECK(tsv.find("0\t0\t0\t1\n") == 0);

    std::ifstream in(tmp.file("report.jsonl"));
    std::string line;
    std::size_t objects = 0;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        CHECK(j.contains("batch"));
        CHECK(j.contains("cluster"));
        CHECK(j.contains("size"));
        CHECK(j.contains("majority_label"));
        CHECK(j.contains("majority_count"));
        CHECK(j.contains("kept"));
        ++objects;
    }
    CHECK(objects == r.clusters.size());
}

TEST_CASE("labels are required") {
    EmbeddingSet set;
    set.rows = 2;
    set.cols = 2;
    set.data = {1, 0, 0, 1};
    CHECK_THROWS_AS(curate(set, CurationConfig{}), ConfigError);
}

}  // TEST_SUITE
