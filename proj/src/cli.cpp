#include "pahc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "pahc/agglomerative.hpp"
#include "pahc/baselines.hpp"
#include "pahc/curation.hpp"
#include "pahc/embedding.hpp"
#include "pahc/error.hpp"
#include "pahc/knn.hpp"
#include "pahc/metrics.hpp"
#include "pahc/similarity.hpp"
#include "pahc/synth.hpp"

namespace pahc::cli {

namespace {

EmbeddingFormat parse_format(const std::string& name) {
    if (name == "binary") return EmbeddingFormat::binary;
    if (name == "csv") return EmbeddingFormat::csv;
    throw ConfigError("unknown format \"" + name + "\" (expected binary or csv)");
}

void write_assignment_tsv(const EmbeddingSet& set, const Clustering& c,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t i = 0; i < set.rows; ++i)
        out << set.sample_id(i) << "\t" << c.assignment[i] << "\n";
    if (!out) throw IoError("write failed for " + path);
}

struct Assignment {
    std::vector<std::string> ids;
    std::vector<std::int32_t> clusters;
};

Assignment read_assignment_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    Assignment a;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw IoError(path + ": line " + std::to_string(lineno) + ": expected id<TAB>cluster");
        a.ids.push_back(line.substr(0, tab));
        std::int32_t c = 0;
        const char* first = line.data() + tab + 1;
        const char* last = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(first, last, c);
        if (ec != std::errc() || ptr != last)
            throw IoError(path + ": line " + std::to_string(lineno) + ": bad cluster id");
        a.clusters.push_back(c);
    }
    return a;
}

// Labels aligned with an assignment: either one integer per line
// (positional) or id<TAB>label rows joined on the assignment's sample ids.
std::vector<std::int64_t> read_labels_aligned(const std::string& path,
                                              const std::vector<std::string>& ids) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw ConfigError(path + ": empty label file");

    bool keyed = lines[0].find('\t') != std::string::npos;
    auto parse_label = [&](const std::string& s, std::size_t lineno) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw IoError(path + ": line " + std::to_string(lineno + 1) + ": bad label \"" + s +
                          "\"");
        return v;
    };
    if (!keyed) {
        if (lines.size() != ids.size())
            throw ConfigError(path + ": " + std::to_string(lines.size()) + " labels vs " +
                              std::to_string(ids.size()) + " assignment rows");
        std::vector<std::int64_t> labels(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i) labels[i] = parse_label(lines[i], i);
        return labels;
    }
    std::unordered_map<std::string, std::int64_t> by_id;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto tab = lines[i].find('\t');
        by_id[lines[i].substr(0, tab)] = parse_label(lines[i].substr(tab + 1), i);
    }
    std::vector<std::int64_t> labels;
    labels.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw ConfigError(path + ": no label for sample id \"" + id + "\"");
        labels.push_back(it->second);
    }
    return labels;
}

// Shared flags for the pipeline-driving subcommands.
struct PipelineOpts {
    std::string input;
    std::string format = "binary";
    std::string method = "pahc";
    int K = 5;
    int N1 = 50;
    int N2 = 100;
    double svm_c = 10.0;
    double eta = 1.0;
    std::string transform = "arctan";
    bool fixed_hyperplane = false;
    std::string negatives_from;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string matrix_out;
    std::string dendrogram_out;
    std::size_t kmeans_k = 0;
    std::size_t max_iter = 100;
    std::size_t rank_k = 20;
};

void add_input_flags(CLI::App* cmd, PipelineOpts& o) {
    cmd->add_option("--input", o.input, "embedding file")->required();
    cmd->add_option("--format", o.format, "input format: binary or csv");
    cmd->add_option("--threads", o.threads, "worker thread cap; 0 = all cores");
}

void add_pa_flags(CLI::App* cmd, PipelineOpts& o) {
    cmd->add_option("-K,--K", o.K, "positive neighborhood size (NNList[1:K])");
    cmd->add_option("--neg-start", o.N1, "negative window start N1 (1-based)");
    cmd->add_option("--neg-end", o.N2, "negative window end N2 (inclusive)");
    cmd->add_option("--svm-c", o.svm_c, "SVM regularization constant C");
    cmd->add_option("--transform", o.transform,
                    "similarity-to-distance transform: arctan or exp");
    cmd->add_flag("--fixed-hyperplane", o.fixed_hyperplane,
                  "use w_i = x_i, b_i = 0 instead of trained SVM planes");
}

// Flags meaningful only when a method is selectable (cluster, sweep).
void add_method_flags(CLI::App* cmd, PipelineOpts& o) {
    cmd->add_option("--method", o.method, "pahc, cosine, kmeans or rank-order");
    cmd->add_option("--negatives-from", o.negatives_from,
                    "binary embedding file supplying SVM negatives instead of NNList[N1:N2]");
    cmd->add_option("--seed", o.seed, "run seed (kmeans seeding)");
    cmd->add_option("--matrix-out", o.matrix_out, "dump the distance matrix (DST1)");
    cmd->add_option("--dendrogram-out", o.dendrogram_out, "dump the merge sequence as CSV");
    cmd->add_option("--k", o.kmeans_k, "kmeans cluster count");
    cmd->add_option("--max-iter", o.max_iter, "kmeans iteration cap");
    cmd->add_option("--rank-k", o.rank_k, "rank-order neighbor list depth");
}

PaParams pa_params_from(const PipelineOpts& o, const EmbeddingSet* pool) {
    PaParams p;
    p.window = NeighborWindow{o.K, o.N1, o.N2};
    p.C = o.svm_c;
    p.transform = parse_transform(o.transform);
    p.fixed_hyperplane = o.fixed_hyperplane;
    p.negatives_pool = pool;
    return p;
}

// Builds the distance matrix for distance-based methods, honoring the
// optional matrix/dendrogram dumps.
Dendrogram build_dendrogram_for(const PipelineOpts& o, const EmbeddingSet& set,
                                const EmbeddingSet* pool) {
    DistanceMatrix D;
    if (o.method == "cosine") {
        D = build_cosine_matrix(set, o.threads);
    } else {
        D = build_pa_matrix(set, pa_params_from(o, pool), o.threads);
    }
    if (!o.matrix_out.empty()) save_distance_matrix(D, o.matrix_out);
    Dendrogram dend = build_dendrogram(D);
    if (!o.dendrogram_out.empty()) save_dendrogram_csv(dend, o.dendrogram_out);
    return dend;
}

EmbeddingSet load_pool_if_any(const PipelineOpts& o) {
    EmbeddingSet pool;
    if (!o.negatives_from.empty())
        pool = normalize(load_embeddings(o.negatives_from, EmbeddingFormat::binary));
    return pool;
}

int cmd_cluster(const PipelineOpts& o, const std::string& out_path) {
    EmbeddingSet set = normalize(load_embeddings(o.input, parse_format(o.format)));
    EmbeddingSet pool = load_pool_if_any(o);
    const EmbeddingSet* pool_ptr = pool.rows > 0 ? &pool : nullptr;

    Clustering c;
    if (o.method == "pahc" || o.method == "cosine") {
        c = cut_dendrogram(build_dendrogram_for(o, set, pool_ptr), o.eta);
    } else if (o.method == "kmeans") {
        if (o.kmeans_k == 0) throw ConfigError("kmeans needs --k");
        c = kmeans(set, o.kmeans_k, o.seed, o.max_iter, o.threads);
    } else if (o.method == "rank-order") {
        c = rank_order_cluster(set, RankOrderConfig{o.rank_k, o.eta}, o.threads);
    } else {
        throw ConfigError("unknown method \"" + o.method + "\"");
    }
    write_assignment_tsv(set, c, out_path);
    return 0;
}

std::vector<PRPoint> sweep_kmeans(const PipelineOpts& o, const EmbeddingSet& set) {
    std::vector<std::int64_t> distinct = set.labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::size_t k_true = distinct.size();
    std::size_t k_max = std::min(set.rows, 2 * k_true);
    std::vector<PRPoint> points;
    for (std::size_t k = 1; k <= k_max; ++k) {
        Clustering c = kmeans(set, k, o.seed, o.max_iter, o.threads);
        PairPR pr = pairwise_precision_recall(c, set.labels);
        points.push_back({static_cast<double>(k), pr.precision, pr.recall,
                          f1_score(pr.precision, pr.recall), c.num_clusters});
    }
    return points;
}

std::vector<PRPoint> sweep_rank_order(const PipelineOpts& o, const EmbeddingSet& set) {
    auto pairs = rank_order_scores(set, o.rank_k, o.threads);
    std::vector<double> values;
    values.reserve(pairs.size());
    for (const auto& p : pairs) values.push_back(p.dist);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    std::vector<double> thresholds;
    for (double v : values) {
        thresholds.push_back(v);
        thresholds.push_back(std::nextafter(v, std::numeric_limits<double>::infinity()));
    }
    if (thresholds.empty()) thresholds.push_back(0.0);

    std::vector<PRPoint> points;
    std::int32_t last_clusters = -1;
    for (double thr : thresholds) {
        Clustering c = components_from_links(set.rows, pairs, thr);
        if (c.num_clusters == last_clusters) continue;
        last_clusters = c.num_clusters;
        PairPR pr = pairwise_precision_recall(c, set.labels);
        points.push_back({thr, pr.precision, pr.recall, f1_score(pr.precision, pr.recall),
                          c.num_clusters});
    }
    return points;
}

int cmd_sweep(const PipelineOpts& o, const std::string& labels_path,
              const std::string& out_path) {
    EmbeddingSet set = normalize(load_embeddings(o.input, parse_format(o.format)));
    if (!labels_path.empty()) {
        std::vector<std::string> ids(set.rows);
        for (std::size_t i = 0; i < set.rows; ++i) ids[i] = set.sample_id(i);
        set.labels = read_labels_aligned(labels_path, ids);
    }
    if (!set.has_labels())
        throw ConfigError("sweep needs labels (a .labels sidecar or --labels)");
    EmbeddingSet pool = load_pool_if_any(o);
    const EmbeddingSet* pool_ptr = pool.rows > 0 ? &pool : nullptr;

    std::vector<PRPoint> points;
    if (o.method == "pahc" || o.method == "cosine") {
        points = pr_sweep(build_dendrogram_for(o, set, pool_ptr), set.labels);
    } else if (o.method == "kmeans") {
        points = sweep_kmeans(o, set);
    } else if (o.method == "rank-order") {
        points = sweep_rank_order(o, set);
    } else {
        throw ConfigError("unknown method \"" + o.method + "\"");
    }
    save_pr_csv(points, out_path);
    return 0;
}

int cmd_curate(const PipelineOpts& o, int batch_size, int min_majority,
               const std::string& kept_out, const std::string& report_out) {
    EmbeddingSet set = normalize(load_embeddings(o.input, parse_format(o.format)));
    CurationConfig cfg;
    cfg.batch_size_identities = batch_size;
    cfg.eta = o.eta;
    cfg.min_majority = min_majority;
    cfg.pahc = pa_params_from(o, nullptr);
    cfg.threads = o.threads;
    CurationResult result = curate(set, cfg);
    save_kept_tsv(set, result, kept_out);
    save_report_jsonl(result, report_out);
    return 0;
}

int cmd_eval(const std::string& assignment_path, const std::string& labels_path) {
    Assignment a = read_assignment_tsv(assignment_path);
    std::vector<std::int64_t> labels = read_labels_aligned(labels_path, a.ids);
    Clustering c;
    c.assignment = a.clusters;
    std::int32_t max_id = -1;
    for (auto v : a.clusters) max_id = std::max(max_id, v);
    c.num_clusters = max_id + 1;
    PairPR pr = pairwise_precision_recall(c, labels);
    char row[128];
    std::snprintf(row, sizeof(row), "%.12g,%.12g,%.12g,%d", pr.precision, pr.recall,
                  f1_score(pr.precision, pr.recall), c.num_clusters);
    std::cout << row << "\n";
    return 0;
}

std::vector<std::uint32_t> parse_counts(const std::string& samples) {
    std::vector<std::uint32_t> counts;
    std::stringstream ss(samples);
    std::string field;
    while (std::getline(ss, field, ',')) {
        std::uint32_t v = 0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size())
            throw ConfigError("--samples: bad count \"" + field + "\"");
        counts.push_back(v);
    }
    if (counts.empty()) throw ConfigError("--samples: empty");
    return counts;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Proximity-Aware Hierarchical Clustering toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate labeled unit-norm embeddings");
    std::string synth_out, synth_samples = "20";
    SynthConfig synth_cfg;
    synth_cmd->add_option("--out", synth_out, "output embedding file (binary)")->required();
    synth_cmd->add_option("--identities", synth_cfg.num_identities, "number of identities");
    synth_cmd->add_option("--samples", synth_samples,
                          "samples per identity: one count or a comma list");
    synth_cmd->add_option("--dim", synth_cfg.dim, "embedding dimension");
    synth_cmd->add_option("--concentration", synth_cfg.concentration,
                          "cluster tightness (noise sd = 1/concentration)");
    synth_cmd->add_option("--noise", synth_cfg.noise_fraction, "label noise fraction");
    synth_cmd->add_option("--seed", synth_cfg.seed, "generator seed");

    // cluster
    auto* cluster_cmd = app.add_subcommand("cluster", "cluster an embedding file");
    PipelineOpts cluster_opts;
    std::string cluster_out;
    add_input_flags(cluster_cmd, cluster_opts);
    add_pa_flags(cluster_cmd, cluster_opts);
    add_method_flags(cluster_cmd, cluster_opts);
    cluster_cmd->add_option("--eta", cluster_opts.eta,
                            "merge threshold (rank-order: link threshold)");
    cluster_cmd->add_option("--out", cluster_out, "assignment TSV")->required();

    // sweep (no --eta: the sweep covers every threshold)
    auto* sweep_cmd = app.add_subcommand("sweep", "precision-recall sweep");
    PipelineOpts sweep_opts;
    std::string sweep_out, sweep_labels;
    add_input_flags(sweep_cmd, sweep_opts);
    add_pa_flags(sweep_cmd, sweep_opts);
    add_method_flags(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--labels", sweep_labels, "label file (else .labels sidecar)");
    sweep_cmd->add_option("--out", sweep_out, "PR curve CSV")->required();

    // curate
    auto* curate_cmd = app.add_subcommand("curate", "discard low-support clusters");
    PipelineOpts curate_opts;
    curate_opts.eta = 2.3;
    curate_opts.transform = "exp";
    int curate_batch = 50, curate_min_majority = 30;
    std::string kept_out = "kept.tsv", report_out = "report.jsonl";
    add_input_flags(curate_cmd, curate_opts);
    add_pa_flags(curate_cmd, curate_opts);
    curate_cmd->add_option("--eta", curate_opts.eta, "merge threshold");
    curate_cmd->add_option("--batch-size", curate_batch, "identities per batch");
    curate_cmd->add_option("--min-majority", curate_min_majority,
                           "minimum majority-label member count");
    curate_cmd->add_option("--kept-out", kept_out, "per-sample TSV output");
    curate_cmd->add_option("--report-out", report_out, "per-cluster JSON-lines output");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "pairwise precision/recall of an assignment");
    std::string eval_assignment, eval_labels;
    eval_cmd->add_option("--assignment", eval_assignment, "assignment TSV")->required();
    eval_cmd->add_option("--labels", eval_labels, "label file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.get_name() << ": " << e.what() << "\n";
        return 2;
    }

    try {
        if (synth_cmd->parsed()) {
            auto counts = parse_counts(synth_samples);
            if (counts.size() == 1) {
                synth_cfg.samples_per_identity = counts[0];
            } else {
                synth_cfg.per_identity_counts = counts;
            }
            save_embeddings(generate(synth_cfg), synth_out);
            return 0;
        }
        if (cluster_cmd->parsed()) return cmd_cluster(cluster_opts, cluster_out);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, sweep_labels, sweep_out);
        if (curate_cmd->parsed())
            return cmd_curate(curate_opts, curate_batch, curate_min_majority, kept_out,
                              report_out);
        if (eval_cmd->parsed()) return cmd_eval(eval_assignment, eval_labels);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace pahc::cli
