#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pahc/agglomerative.hpp"
#include "pahc/baselines.hpp"
#include "pahc/cli.hpp"
#include "pahc/curation.hpp"
#include "pahc/embedding.hpp"
#include "pahc/error.hpp"
#include "pahc/knn.hpp"
#include "pahc/metrics.hpp"
#include "pahc/similarity.hpp"
#include "pahc/svm.hpp"
#include "pahc/synth.hpp"

namespace py = pybind11;
using namespace pahc;

namespace {

EmbeddingSet set_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> vectors,
                            std::optional<std::vector<std::int64_t>> labels,
                            std::optional<std::vector<std::string>> ids,
                            std::optional<std::vector<std::int64_t>> media_ids) {
    if (vectors.ndim() != 2) throw ConfigError("vectors must be a 2-d array");
    EmbeddingSet set;
    set.rows = static_cast<std::size_t>(vectors.shape(0));
    set.cols = static_cast<std::size_t>(vectors.shape(1));
    set.data.assign(vectors.data(), vectors.data() + set.rows * set.cols);
    if (labels) set.labels = std::move(*labels);
    if (ids) set.ids = std::move(*ids);
    if (media_ids) set.media_ids = std::move(*media_ids);
    validate(set);
    return set;
}

py::array_t<double> vectors_to_numpy(const EmbeddingSet& set) {
    py::array_t<double> out({set.rows, set.cols});
    std::copy(set.data.begin(), set.data.end(), out.mutable_data());
    return out;
}

py::array_t<std::int32_t> assignment_to_numpy(const Clustering& c) {
    py::array_t<std::int32_t> out(c.assignment.size());
    std::copy(c.assignment.begin(), c.assignment.end(), out.mutable_data());
    return out;
}

Clustering clustering_from_numpy(py::array_t<std::int32_t, py::array::c_style | py::array::forcecast> a) {
    std::vector<std::int32_t> raw(a.data(), a.data() + a.size());
    return canonicalize_clustering(raw);
}

std::vector<std::int64_t> labels_from_numpy(
    py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> l) {
    return {l.data(), l.data() + l.size()};
}

PaParams pa_params(int K, int N1, int N2, double C, const std::string& transform,
                   bool fixed_hyperplane) {
    PaParams p;
    p.window = NeighborWindow{K, N1, N2};
    p.C = C;
    p.transform = parse_transform(transform);
    p.fixed_hyperplane = fixed_hyperplane;
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Proximity-Aware Hierarchical Clustering over unit-norm embeddings";

    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<EmbeddingSet>(m, "EmbeddingSet")
        .def(py::init(&set_from_numpy), py::arg("vectors"), py::arg("labels") = py::none(),
             py::arg("ids") = py::none(), py::arg("media_ids") = py::none())
        .def_property_readonly("vectors", &vectors_to_numpy)
        .def_property_readonly("labels",
                               [](const EmbeddingSet& s) {
                                   py::array_t<std::int64_t> out(s.labels.size());
                                   std::copy(s.labels.begin(), s.labels.end(),
                                             out.mutable_data());
                                   return out;
                               })
        .def_property_readonly("ids", [](const EmbeddingSet& s) { return s.ids; })
        .def_property_readonly("media_ids", [](const EmbeddingSet& s) { return s.media_ids; })
        .def("__len__", [](const EmbeddingSet& s) { return s.rows; })
        .def_property_readonly("dim", [](const EmbeddingSet& s) { return s.cols; });

    py::class_<DistanceMatrix>(m, "DistanceMatrix")
        .def_property_readonly("n", [](const DistanceMatrix& d) { return d.n; })
        .def_property_readonly("kind",
                               [](const DistanceMatrix& d) {
                                   switch (d.kind) {
                                       case DistanceKind::cosine: return "cosine";
                                       case DistanceKind::pa_arctan: return "pa_arctan";
                                       default: return "pa_exp";
                                   }
                               })
        .def_property_readonly("condensed",
                               [](const DistanceMatrix& d) {
                                   py::array_t<double> out(d.values.size());
                                   std::copy(d.values.begin(), d.values.end(),
                                             out.mutable_data());
                                   return out;
                               })
        .def("at", &DistanceMatrix::at, py::arg("i"), py::arg("j"));

    py::class_<Dendrogram>(m, "Dendrogram")
        .def_property_readonly("n_leaves", [](const Dendrogram& d) { return d.n_leaves; })
        .def_property_readonly("merges", [](const Dendrogram& d) {
            // scipy-style rows: cluster_a, cluster_b, height, new_size
            py::array_t<double> out({d.merges.size(), std::size_t{4}});
            double* p = out.mutable_data();
            for (const Merge& mg : d.merges) {
                *p++ = mg.a;
                *p++ = mg.b;
                *p++ = mg.height;
                *p++ = mg.new_size;
            }
            return out;
        });

    py::class_<ClusterReport>(m, "ClusterReport")
        .def_readonly("batch", &ClusterReport::batch)
        .def_readonly("cluster", &ClusterReport::cluster)
        .def_readonly("size", &ClusterReport::size)
        .def_readonly("majority_label", &ClusterReport::majority_label)
        .def_readonly("majority_count", &ClusterReport::majority_count)
        .def_readonly("kept", &ClusterReport::kept);

    py::class_<CurationResult>(m, "CurationResult")
        .def_property_readonly("kept",
                               [](const CurationResult& r) {
                                   py::array_t<std::uint32_t> out(r.kept.size());
                                   std::copy(r.kept.begin(), r.kept.end(), out.mutable_data());
                                   return out;
                               })
        .def_property_readonly("cluster_of",
                               [](const CurationResult& r) {
                                   py::array_t<std::int32_t> out(r.cluster_of.size());
                                   std::copy(r.cluster_of.begin(), r.cluster_of.end(),
                                             out.mutable_data());
                                   return out;
                               })
        .def_readonly("clusters", &CurationResult::clusters);

    m.def(
        "synth",
        [](std::uint32_t identities, std::uint32_t samples, std::uint32_t dim,
           double concentration, double noise, std::uint64_t seed,
           std::optional<std::vector<std::uint32_t>> per_identity) {
            SynthConfig cfg;
            cfg.num_identities = identities;
            cfg.samples_per_identity = samples;
            cfg.dim = dim;
            cfg.concentration = concentration;
            cfg.noise_fraction = noise;
            cfg.seed = seed;
            if (per_identity) cfg.per_identity_counts = *per_identity;
            return generate(cfg);
        },
        py::arg("identities"), py::arg("samples"), py::arg("dim") = 64,
        py::arg("concentration") = 16.0, py::arg("noise") = 0.0, py::arg("seed") = 0,
        py::arg("per_identity") = py::none(),
        "Labeled synthetic unit-norm embeddings with controllable spread and label noise");

    m.def(
        "load_embeddings",
        [](const std::string& path, const std::string& format) {
            return load_embeddings(path, format == "csv" ? EmbeddingFormat::csv
                                                         : EmbeddingFormat::binary);
        },
        py::arg("path"), py::arg("format") = "binary");
    m.def("save_embeddings", &save_embeddings, py::arg("set"), py::arg("path"));
    m.def("normalize", &normalize, py::arg("set"));
    m.def(
        "media_pool",
        [](const EmbeddingSet& set, const std::vector<std::vector<std::uint32_t>>& groups) {
            return media_pool(set, groups);
        },
        py::arg("set"), py::arg("template_groups"));

    m.def(
        "nn_lists",
        [](const EmbeddingSet& set, std::size_t depth, int threads) {
            NeighborLists nn = build_nn_lists(set, depth, threads);
            py::array_t<std::uint32_t> out({nn.n, nn.depth});
            std::copy(nn.idx.begin(), nn.idx.end(), out.mutable_data());
            return out;
        },
        py::arg("set"), py::arg("depth"), py::arg("threads") = 0,
        "Exact ordered nearest-neighbor lists (self first)");

    m.def(
        "train_hyperplane",
        [](const EmbeddingSet& set, const std::vector<std::uint32_t>& positives,
           const std::vector<std::uint32_t>& negatives, double C) {
            SvmProblem prob{positives, negatives, C};
            Hyperplane h = train_hyperplane(prob, set);
            py::array_t<double> w(h.w.size());
            std::copy(h.w.begin(), h.w.end(), w.mutable_data());
            return py::make_tuple(w, h.b);
        },
        py::arg("set"), py::arg("positives"), py::arg("negatives"), py::arg("C") = 10.0,
        "Solve the class-weighted squared-hinge SVM; returns (w, b)");

    m.def("class_weights", &class_weights, py::arg("C"), py::arg("n_pos"), py::arg("n_neg"));
    m.def("pa_distance", [](double s, const std::string& transform) {
        return pa_distance(s, parse_transform(transform));
    }, py::arg("s"), py::arg("transform") = "arctan");

    m.def("cosine_matrix", &build_cosine_matrix, py::arg("set"), py::arg("threads") = 0);
    m.def(
        "pa_matrix",
        [](const EmbeddingSet& set, int K, int N1, int N2, double C,
           const std::string& transform, bool fixed_hyperplane, int threads) {
            return build_pa_matrix(set, pa_params(K, N1, N2, C, transform, fixed_hyperplane),
                                   threads);
        },
        py::arg("set"), py::arg("K") = 5, py::arg("N1") = 50, py::arg("N2") = 100,
        py::arg("C") = 10.0, py::arg("transform") = "arctan",
        py::arg("fixed_hyperplane") = false, py::arg("threads") = 0,
        "Proximity-Aware pairwise distances (one SVM per sample)");

    m.def("linkage", &build_dendrogram, py::arg("matrix"),
          "Average-linkage dendrogram of a DistanceMatrix");
    m.def(
        "cut",
        [](const Dendrogram& dend, double eta) {
            return assignment_to_numpy(cut_dendrogram(dend, eta));
        },
        py::arg("dendrogram"), py::arg("eta"));
    m.def(
        "hierarchical",
        [](const DistanceMatrix& D, double eta) {
            return assignment_to_numpy(hierarchical(D, eta));
        },
        py::arg("matrix"), py::arg("eta"), "Hierarchical(D, eta): linkage then threshold cut");

    m.def(
        "kmeans",
        [](const EmbeddingSet& set, std::size_t k, std::uint64_t seed, std::size_t max_iter,
           int threads) { return assignment_to_numpy(kmeans(set, k, seed, max_iter, threads)); },
        py::arg("set"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 100,
        py::arg("threads") = 0);
    m.def(
        "rank_order",
        [](const EmbeddingSet& set, std::size_t k_list, double threshold, int threads) {
            return assignment_to_numpy(
                rank_order_cluster(set, RankOrderConfig{k_list, threshold}, threads));
        },
        py::arg("set"), py::arg("k_list") = 20, py::arg("threshold") = 1.0,
        py::arg("threads") = 0);

    m.def(
        "pairwise_precision_recall",
        [](py::array_t<std::int32_t, py::array::c_style | py::array::forcecast> assignment,
           py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> labels) {
            PairPR pr = pairwise_precision_recall(clustering_from_numpy(assignment),
                                                  labels_from_numpy(labels));
            return py::make_tuple(pr.precision, pr.recall);
        },
        py::arg("assignment"), py::arg("labels"));

    m.def(
        "pr_sweep",
        [](const Dendrogram& dend,
           py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> labels) {
            auto points = pr_sweep(dend, labels_from_numpy(labels));
            py::array_t<double> out({points.size(), std::size_t{5}});
            double* p = out.mutable_data();
            for (const auto& pt : points) {
                *p++ = pt.threshold;
                *p++ = pt.precision;
                *p++ = pt.recall;
                *p++ = pt.f1;
                *p++ = pt.num_clusters;
            }
            return out;
        },
        py::arg("dendrogram"), py::arg("labels"),
        "Exact PR curve rows: threshold, precision, recall, f1, num_clusters");

    m.def(
        "curate",
        [](const EmbeddingSet& set, int batch_size, double eta, int min_majority, int K, int N1,
           int N2, double C, const std::string& transform, int threads) {
            CurationConfig cfg;
            cfg.batch_size_identities = batch_size;
            cfg.eta = eta;
            cfg.min_majority = min_majority;
            cfg.pahc = pa_params(K, N1, N2, C, transform, false);
            cfg.threads = threads;
            return curate(set, cfg);
        },
        py::arg("set"), py::arg("batch_size") = 50, py::arg("eta") = 2.3,
        py::arg("min_majority") = 30, py::arg("K") = 5, py::arg("N1") = 50,
        py::arg("N2") = 100, py::arg("C") = 10.0, py::arg("transform") = "exp",
        py::arg("threads") = 0);

    m.def(
        "cli_run", [](const std::vector<std::string>& args) { return pahc::cli::run(args); },
        py::arg("args"), "Invoke the command-line surface in-process");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
