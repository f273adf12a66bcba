#include "pahc/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "pahc/error.hpp"

namespace pahc {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float read_f32_le(const unsigned char* p) {
    std::uint32_t bits = read_u32_le(p);
    float out;
    std::memcpy(&out, &bits, sizeof(out));
    return out;
}

void write_u32_le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32_le(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    write_u32_le(os, bits);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc()) return false;
    while (ptr != last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
    return ptr == last;
}

std::int64_t parse_int_line(const std::string& s, const std::string& path, std::size_t lineno) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError(path + ": line " + std::to_string(lineno + 1) + ": expected an integer, got \"" + s + "\"");
    return v;
}

void attach_sidecars(EmbeddingSet& set, const std::string& path) {
    namespace fs = std::filesystem;
    const std::string ids_path = path + ".ids";
    const std::string labels_path = path + ".labels";
    const std::string media_path = path + ".media";
    if (set.ids.empty() && fs::exists(ids_path)) {
        set.ids = read_lines(ids_path);
        if (set.ids.size() != set.rows)
            throw IoError(ids_path + ": expected " + std::to_string(set.rows) + " lines, got " +
                          std::to_string(set.ids.size()));
    }
    if (fs::exists(labels_path)) {
        auto lines = read_lines(labels_path);
        if (lines.size() != set.rows)
            throw IoError(labels_path + ": expected " + std::to_string(set.rows) + " lines, got " +
                          std::to_string(lines.size()));
        set.labels.resize(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i)
            set.labels[i] = parse_int_line(lines[i], labels_path, i);
    }
    if (fs::exists(media_path)) {
        auto lines = read_lines(media_path);
        if (lines.size() != set.rows)
            throw IoError(media_path + ": expected " + std::to_string(set.rows) + " lines, got " +
                          std::to_string(lines.size()));
        set.media_ids.resize(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i)
            set.media_ids[i] = parse_int_line(lines[i], media_path, i);
    }
}

EmbeddingSet load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 12)
        throw IoError(path + ": truncated header, file has " + std::to_string(buf.size()) +
                      " bytes (need 12)");
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw IoError(path + ": bad magic at byte 0 (expected \"EMB1\")");
    std::uint32_t n = read_u32_le(buf.data() + 4);
    std::uint32_t d = read_u32_le(buf.data() + 8);
    if (n == 0 || d == 0)
        throw IoError(path + ": malformed header at byte 4: n_s and d must be >= 1");
    std::size_t expected = 12 + static_cast<std::size_t>(n) * d * 4;
    if (buf.size() != expected)
        throw IoError(path + ": payload ends at byte " + std::to_string(buf.size()) +
                      ", expected " + std::to_string(expected));

    EmbeddingSet set;
    set.rows = n;
    set.cols = d;
    set.data.resize(static_cast<std::size_t>(n) * d);
    const unsigned char* p = buf.data() + 12;
    for (std::size_t i = 0; i < set.data.size(); ++i, p += 4) {
        double v = read_f32_le(p);
        if (!std::isfinite(v))
            throw IoError(path + ": non-finite value in row " + std::to_string(i / d));
        set.data[i] = v;
    }
    return set;
}

EmbeddingSet load_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw IoError(path + ": empty file");

    EmbeddingSet set;
    bool has_id_column = false;
    std::size_t fields_per_row = 0;
    for (std::size_t lineno = 0; lineno < lines.size(); ++lineno) {
        std::vector<std::string> fields;
        std::stringstream ss(lines[lineno]);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!lines[lineno].empty() && lines[lineno].back() == ',') fields.push_back("");

        if (lineno == 0) {
            double probe;
            has_id_column = !parse_double(fields[0], probe);
            fields_per_row = fields.size();
            std::size_t dim = fields_per_row - (has_id_column ? 1 : 0);
            if (dim == 0) throw IoError(path + ": line 1: no feature columns");
            set.cols = dim;
        } else if (fields.size() != fields_per_row) {
            throw IoError(path + ": line " + std::to_string(lineno + 1) + ": expected " +
                          std::to_string(fields_per_row) + " fields, got " +
                          std::to_string(fields.size()));
        }

        std::size_t start = 0;
        if (has_id_column) {
            set.ids.push_back(fields[0]);
            start = 1;
        }
        for (std::size_t f = start; f < fields.size(); ++f) {
            double v;
            if (!parse_double(fields[f], v))
                throw IoError(path + ": line " + std::to_string(lineno + 1) + ": field " +
                              std::to_string(f + 1) + " is not a number: \"" + fields[f] + "\"");
            if (!std::isfinite(v))
                throw IoError(path + ": line " + std::to_string(lineno + 1) +
                              ": non-finite value in row " + std::to_string(lineno));
            set.data.push_back(v);
        }
        ++set.rows;
    }
    return set;
}

}  // namespace

std::string EmbeddingSet::sample_id(std::size_t i) const {
    return has_ids() ? ids[i] : std::to_string(i);
}

void validate(const EmbeddingSet& set) {
    if (set.rows == 0 || set.cols == 0)
        throw ConfigError("embedding set must have n_s >= 1 and d >= 1");
    if (set.data.size() != set.rows * set.cols)
        throw ConfigError("embedding data size does not match rows*cols");
    if (!set.ids.empty() && set.ids.size() != set.rows)
        throw ConfigError("ids length " + std::to_string(set.ids.size()) + " != n_s " +
                          std::to_string(set.rows));
    if (!set.labels.empty() && set.labels.size() != set.rows)
        throw ConfigError("labels length " + std::to_string(set.labels.size()) + " != n_s " +
                          std::to_string(set.rows));
    if (!set.media_ids.empty() && set.media_ids.size() != set.rows)
        throw ConfigError("media_ids length " + std::to_string(set.media_ids.size()) +
                          " != n_s " + std::to_string(set.rows));
    for (std::size_t i = 0; i < set.data.size(); ++i)
        if (!std::isfinite(set.data[i]))
            throw NumericError("non-finite value in row " + std::to_string(i / set.cols));
}

EmbeddingSet load_embeddings(const std::string& path, EmbeddingFormat format) {
    EmbeddingSet set = format == EmbeddingFormat::binary ? load_binary(path) : load_csv(path);
    attach_sidecars(set, path);
    validate(set);
    return set;
}

void save_embeddings(const EmbeddingSet& set, const std::string& path) {
    validate(set);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kMagic, 4);
    write_u32_le(out, static_cast<std::uint32_t>(set.rows));
    write_u32_le(out, static_cast<std::uint32_t>(set.cols));
    for (double v : set.data) write_f32_le(out, static_cast<float>(v));
    if (!out) throw IoError("write failed for " + path);
    out.close();

    if (set.has_ids()) {
        std::ofstream ids(path + ".ids");
        for (const auto& id : set.ids) ids << id << "\n";
        if (!ids) throw IoError("write failed for " + path + ".ids");
    }
    if (set.has_labels()) {
        std::ofstream labels(path + ".labels");
        for (auto l : set.labels) labels << l << "\n";
        if (!labels) throw IoError("write failed for " + path + ".labels");
    }
    if (set.has_media_ids()) {
        std::ofstream media(path + ".media");
        for (auto m : set.media_ids) media << m << "\n";
        if (!media) throw IoError("write failed for " + path + ".media");
    }
}

void save_embeddings_csv(const EmbeddingSet& set, const std::string& path) {
    validate(set);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(9);
    for (std::size_t i = 0; i < set.rows; ++i) {
        if (set.has_ids()) out << set.ids[i] << ",";
        for (std::size_t j = 0; j < set.cols; ++j) {
            if (j) out << ",";
            out << static_cast<float>(set.row(i)[j]);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

EmbeddingSet quantize_f32(const EmbeddingSet& set) {
    EmbeddingSet out = set;
    for (double& v : out.data) v = static_cast<double>(static_cast<float>(v));
    return out;
}

EmbeddingSet normalize(const EmbeddingSet& set) {
    validate(set);
    EmbeddingSet out = set;
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* r = out.row(i);
        double sq = 0;
        for (std::size_t j = 0; j < out.cols; ++j) sq += r[j] * r[j];
        double norm = std::sqrt(sq);
        if (norm < 1e-150)
            throw NumericError("zero-norm row " + std::to_string(i) + " cannot be normalized");
        for (std::size_t j = 0; j < out.cols; ++j) r[j] /= norm;
    }
    return out;
}

EmbeddingSet media_pool(const EmbeddingSet& set,
                        const std::vector<std::vector<std::uint32_t>>& template_groups) {
    validate(set);
    if (!set.has_media_ids()) throw ConfigError("media_pool requires media_ids");

    std::unordered_set<std::uint32_t> seen;
    EmbeddingSet out;
    out.cols = set.cols;
    for (std::size_t t = 0; t < template_groups.size(); ++t) {
        const auto& members = template_groups[t];
        if (members.empty())
            throw ConfigError("template " + std::to_string(t) + " is empty");
        for (std::uint32_t s : members) {
            if (s >= set.rows)
                throw ConfigError("template " + std::to_string(t) + ": sample index " +
                                  std::to_string(s) + " out of range");
            if (!seen.insert(s).second)
                throw ConfigError("sample " + std::to_string(s) +
                                  " appears in more than one template");
        }

        // Media groups in first-appearance order keeps pooling deterministic.
        std::vector<std::int64_t> order;
        std::unordered_map<std::int64_t, std::vector<std::uint32_t>> groups;
        for (std::uint32_t s : members) {
            auto [it, inserted] = groups.try_emplace(set.media_ids[s]);
            if (inserted) order.push_back(set.media_ids[s]);
            it->second.push_back(s);
        }

        std::vector<double> pooled(set.cols, 0.0);
        for (std::int64_t m : order) {
            const auto& g = groups[m];
            std::vector<double> mean(set.cols, 0.0);
            for (std::uint32_t s : g)
                for (std::size_t j = 0; j < set.cols; ++j) mean[j] += set.row(s)[j];
            for (std::size_t j = 0; j < set.cols; ++j) pooled[j] += mean[j] / g.size();
        }
        double sq = 0;
        for (std::size_t j = 0; j < set.cols; ++j) {
            pooled[j] /= order.size();
            sq += pooled[j] * pooled[j];
        }
        double norm = std::sqrt(sq);
        if (norm < 1e-150)
            throw NumericError("template " + std::to_string(t) + " pooled to the zero vector");
        for (std::size_t j = 0; j < set.cols; ++j) out.data.push_back(pooled[j] / norm);
        ++out.rows;

        if (set.has_ids()) out.ids.push_back(set.ids[members[0]]);
        if (set.has_labels()) out.labels.push_back(set.labels[members[0]]);
    }
    if (out.rows == 0) throw ConfigError("media_pool: no templates given");
    return out;
}

std::vector<std::int64_t> load_label_file(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<std::int64_t> labels(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i)
        labels[i] = parse_int_line(lines[i], path, i);
    return labels;
}

}  // namespace pahc
