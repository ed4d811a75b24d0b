#pragma once

// Corpus and embedding ingestion.
//
// Corpus file: JSON Lines, one message per line with fields
//   id (string), text (string), group (string), timestamp (int), label (0/1).
// Embedding file: "SBEM" magic, u32 N, u32 d, then N*d float32 row-major
// (little-endian), with a sidecar "<path>.ids" listing one message id per row.

#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbg/common.hpp"

namespace sbg {

struct Message {
    std::string id;
    std::string text;
    std::string group;
    int64_t timestamp = 0;
    int label = 0;  // 1 = conspiratorial
};

struct Corpus {
    std::vector<Message> messages;
    std::unordered_map<std::string, size_t> index;  // id -> ordinal

    size_t size() const { return messages.size(); }

    std::vector<int> labels() const {
        std::vector<int> y(messages.size());
        for (size_t i = 0; i < messages.size(); ++i) y[i] = messages[i].label;
        return y;
    }
};

struct EmbeddingMatrix {
    Mat data;                          // N x d
    std::vector<std::string> row_ids;  // parallel to rows

    size_t rows() const { return size_t(data.rows()); }
    size_t dim() const { return size_t(data.cols()); }
};

namespace detail {

inline Message parse_record(const nlohmann::json& j, size_t lineno) {
    auto ctx = [&](const std::string& m) {
        fail("corpus line " + std::to_string(lineno) + ": " + m);
    };
    if (!j.is_object()) ctx("record is not an object");
    for (const char* key : {"id", "text", "group", "timestamp", "label"})
        if (!j.contains(key)) ctx(std::string("missing field '") + key + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string k = it.key();
        if (k != "id" && k != "text" && k != "group" && k != "timestamp" && k != "label")
            ctx("unknown field '" + k + "'");
    }
    Message m;
    if (!j["id"].is_string()) ctx("'id' must be a string");
    m.id = j["id"].get<std::string>();
    if (m.id.empty()) ctx("'id' must be non-empty");
    if (!j["text"].is_string()) ctx("'text' must be a string");
    m.text = j["text"].get<std::string>();
    if (trim(m.text).empty()) ctx("'text' empty after trimming");
    if (!j["group"].is_string()) ctx("'group' must be a string");
    m.group = j["group"].get<std::string>();
    if (!j["timestamp"].is_number_integer()) ctx("'timestamp' must be an integer");
    m.timestamp = j["timestamp"].get<int64_t>();
    if (!j["label"].is_number_integer()) ctx("'label' must be an integer");
    int lab = j["label"].get<int>();
    if (lab != 0 && lab != 1) ctx("'label' must be 0 or 1, got " + std::to_string(lab));
    m.label = lab;
    return m;
}

}  // namespace detail

inline Corpus make_corpus(std::vector<Message> messages) {
    Corpus c;
    c.messages = std::move(messages);
    for (size_t i = 0; i < c.messages.size(); ++i) {
        auto [it, fresh] = c.index.emplace(c.messages[i].id, i);
        if (!fresh) fail("duplicate message id '" + c.messages[i].id + "'");
    }
    return c;
}

inline Corpus load_corpus(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open corpus file: " + path);
    std::vector<Message> msgs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            fail("corpus line " + std::to_string(lineno) + ": malformed record");
        msgs.push_back(detail::parse_record(j, lineno));
    }
    return make_corpus(std::move(msgs));
}

// Canonical form: sorted keys, one compact JSON object per line. Loading and
// re-saving a canonical file is byte-identical.
inline std::string corpus_to_string(const Corpus& c) {
    std::string out;
    for (const Message& m : c.messages) {
        nlohmann::json j;
        j["id"] = m.id;
        j["text"] = m.text;
        j["group"] = m.group;
        j["timestamp"] = m.timestamp;
        j["label"] = m.label;
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline void save_corpus(const Corpus& c, const std::string& path) {
    write_file(path, corpus_to_string(c));
}

// ---------------------------------------------------------------------------
// Embedding files

inline void save_embeddings(const EmbeddingMatrix& em, const std::string& path) {
    if (em.row_ids.size() != em.rows()) fail("row_ids size does not match matrix rows");
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("cannot write embedding file: " + path);
    f.write("SBEM", 4);
    write_u32(f, uint32_t(em.rows()));
    write_u32(f, uint32_t(em.dim()));
    for (Eigen::Index i = 0; i < em.data.rows(); ++i)
        for (Eigen::Index k = 0; k < em.data.cols(); ++k)
            write_f32(f, float(em.data(i, k)));
    if (!f) fail("write failed: " + path);
    std::string ids;
    for (const auto& id : em.row_ids) {
        ids += id;
        ids += '\n';
    }
    write_file(path + ".ids", ids);
}

// Loads an embedding file without reordering. NaN/Inf rejected.
inline EmbeddingMatrix read_embeddings(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("cannot open embedding file: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "SBEM", 4) != 0)
        fail("bad magic in embedding file: " + path);
    uint32_t n = read_u32(f);
    uint32_t d = read_u32(f);
    EmbeddingMatrix em;
    em.data.resize(n, d);
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t k = 0; k < d; ++k) {
            float v = read_f32(f);
            if (!std::isfinite(v))
                fail("non-finite value at row " + std::to_string(i) + " col " +
                     std::to_string(k) + " in " + path);
            em.data(i, k) = v;
        }
    // Trailing bytes mean the header lied about the shape.
    char extra;
    if (f.read(&extra, 1))
        fail("embedding file larger than header declares (inconsistent row lengths): " + path);

    std::ifstream idf(path + ".ids");
    if (!idf) fail("cannot open id sidecar: " + path + ".ids");
    std::string line;
    while (std::getline(idf, line)) {
        if (line.empty()) continue;
        em.row_ids.push_back(line);
    }
    if (em.row_ids.size() != n)
        fail("id sidecar lists " + std::to_string(em.row_ids.size()) + " ids for " +
             std::to_string(n) + " rows: " + path + ".ids");
    return em;
}

// Loads and reorders rows to the corpus ordinal order.
inline EmbeddingMatrix load_embeddings(const std::string& path, const Corpus& corpus) {
    EmbeddingMatrix raw = read_embeddings(path);
    if (raw.rows() != corpus.size())
        fail("embedding file has " + std::to_string(raw.rows()) + " rows for corpus of " +
             std::to_string(corpus.size()));
    EmbeddingMatrix out;
    out.data.resize(raw.data.rows(), raw.data.cols());
    out.row_ids.resize(raw.rows());
    std::vector<char> seen(corpus.size(), 0);
    for (size_t r = 0; r < raw.rows(); ++r) {
        auto it = corpus.index.find(raw.row_ids[r]);
        if (it == corpus.index.end())
            fail("embedding row id '" + raw.row_ids[r] + "' not present in corpus");
        if (seen[it->second]) fail("duplicate embedding row id '" + raw.row_ids[r] + "'");
        seen[it->second] = 1;
        out.data.row(Eigen::Index(it->second)) = raw.data.row(Eigen::Index(r));
        out.row_ids[it->second] = raw.row_ids[r];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fallback featurizer: character 3-5 gram hashing with TF weights, row
// L2-normalized. Pure function of (text, dim, seed); stands in for
// transformer embeddings on desk-scale runs.

inline void featurize_text(std::string_view text, size_t dim, uint64_t seed, double* row) {
    std::string t = lower_ascii(trim(text));
    std::fill(row, row + dim, 0.0);
    uint64_t base = splitmix64(seed);
    auto bump = [&](std::string_view gram) {
        uint64_t h = fnv1a64(gram, base ^ 14695981039346656037ull);
        row[h % dim] += 1.0;
    };
    bool any = false;
    for (size_t n = 3; n <= 5; ++n) {
        if (t.size() < n) continue;
        any = true;
        for (size_t i = 0; i + n <= t.size(); ++i) bump(std::string_view(t).substr(i, n));
    }
    if (!any && !t.empty()) bump(t);  // very short text: whole string as one gram
    double ss = 0.0;
    for (size_t k = 0; k < dim; ++k) ss += row[k] * row[k];
    if (ss > 0.0) {
        double inv = 1.0 / std::sqrt(ss);
        for (size_t k = 0; k < dim; ++k) row[k] *= inv;
    }
}

inline EmbeddingMatrix fallback_featurize(const Corpus& corpus, size_t dim, uint64_t seed) {
    if (dim < 8) fail("featurizer dim must be >= 8, got " + std::to_string(dim));
    EmbeddingMatrix em;
    em.data.resize(Eigen::Index(corpus.size()), Eigen::Index(dim));
    em.row_ids.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        featurize_text(corpus.messages[i].text, dim, seed, em.data.row(Eigen::Index(i)).data());
        em.row_ids.push_back(corpus.messages[i].id);
    }
    return em;
}

}  // namespace sbg
