#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pahc {

// Dense row-major feature matrix plus optional per-sample metadata.
// Vectors are stored as f32 on disk and widened to f64 for all computation.
// Immutable once built; safe to share across threads.
struct EmbeddingSet {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;               // rows * cols, row-major
    std::vector<std::string> ids;           // empty or exactly `rows` entries
    std::vector<std::int64_t> labels;       // empty or exactly `rows` entries
    std::vector<std::int64_t> media_ids;    // empty or exactly `rows` entries

    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    bool has_ids() const { return !ids.empty(); }
    bool has_labels() const { return !labels.empty(); }
    bool has_media_ids() const { return !media_ids.empty(); }

    // Display id for sample i: the stored id, or the index.
    std::string sample_id(std::size_t i) const;
};

enum class EmbeddingFormat { binary, csv };

// Checks shape/metadata consistency and rejects non-finite entries.
void validate(const EmbeddingSet& set);

// Reads a "EMB1" binary file or a CSV with an optional leading id column.
// Sidecars "<path>.ids", "<path>.labels", "<path>.media" are picked up when
// present. The returned set is raw: rows are not yet unit-normalized.
EmbeddingSet load_embeddings(const std::string& path, EmbeddingFormat format);

// Writes the "EMB1" binary format (f32 values) plus any sidecars the set has.
void save_embeddings(const EmbeddingSet& set, const std::string& path);

void save_embeddings_csv(const EmbeddingSet& set, const std::string& path);

// Quantize values through f32, as the binary writer would. save followed by
// load reproduces a quantized set bit-exactly.
EmbeddingSet quantize_f32(const EmbeddingSet& set);

// Scales every row to unit Euclidean norm. Zero-norm rows are an error, never
// a silent drop: dropping would desynchronize ids/labels.
EmbeddingSet normalize(const EmbeddingSet& set);

// Two-level template pooling: mean within each media group, then mean of the
// group means, then renormalize. One output row per template. ids/labels of a
// template are taken from its first member.
EmbeddingSet media_pool(const EmbeddingSet& set,
                        const std::vector<std::vector<std::uint32_t>>& template_groups);

std::vector<std::int64_t> load_label_file(const std::string& path);

}  // namespace pahc
