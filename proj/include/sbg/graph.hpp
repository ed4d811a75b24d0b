#pragma once

// Signed belief graph G = (V, E, W, S). Nodes are messages; edge weights are
// cosine similarities between discourse-belief embeddings; edge signs encode
// label agreement. Two-tier thresholding: a hard similarity floor
// instantiates candidates, then sign-specific bands around the candidate
// similarity mean keep only confident edges.

#include <string>
#include <thread>
#include <vector>

#include "sbg/common.hpp"
#include "sbg/discourse.hpp"

namespace sbg {

struct SignedEdge {
    uint32_t i = 0;  // i < j, stored once
    uint32_t j = 0;
    double weight = 0.0;
    int sign = 0;  // +1 same label, -1 different
};

struct SimilarityStats {
    double mu = 0.0;     // mean candidate similarity
    double sigma = 0.0;  // population std of candidate similarity
    size_t candidate_count = 0;
    bool band_skipped = false;  // sigma == 0 degenerate case
};

struct SignedBeliefGraph {
    size_t n_nodes = 0;
    std::vector<SignedEdge> edges;
    SimilarityStats stats;
    double floor = 0.5;
    double band = 0.5;

    size_t positive_count() const {
        size_t n = 0;
        for (const auto& e : edges) n += size_t(e.sign > 0);
        return n;
    }
    size_t negative_count() const { return edges.size() - positive_count(); }

    // The paper's construction demands negative edges sit both above the
    // floor and below mu - band*sigma; when that window is empty no negative
    // edge can exist. Reported, never silently adjusted.
    bool negative_band_closed() const {
        return stats.candidate_count > 0 && !stats.band_skipped &&
               stats.mu - band * stats.sigma <= floor;
    }
};

// Plain left-to-right accumulation; structured so independent
// reimplementations of the formula produce bit-identical values.
inline double dot_plain(const double* a, const double* b, size_t n) {
    double s = 0.0;
    for (size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
}

inline double cosine(const double* u, const double* v, size_t n) {
    double nu = std::sqrt(dot_plain(u, u, n));
    double nv = std::sqrt(dot_plain(v, v, n));
    if (nu == 0.0 || nv == 0.0) fail("cosine undefined for zero vector");
    return dot_plain(u, v, n) / (nu * nv);
}

inline double cosine(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) fail("cosine: dimension mismatch");
    return cosine(u.data(), v.data(), size_t(u.size()));
}

inline SignedBeliefGraph build_graph(const EnrichedMatrix& embeddings,
                                     const std::vector<int>& labels, double floor = 0.5,
                                     double band = 0.5, unsigned workers = 1) {
    const size_t n = embeddings.rows();
    if (n < 2) fail("graph construction needs at least 2 nodes");
    if (labels.size() != n) fail("labels not aligned with embedding rows");
    size_t valid = 0;
    for (size_t i = 0; i < n; ++i) valid += size_t(!embeddings.degenerate[i]);
    if (valid == 0) fail("no valid nodes: all rows degenerate");

    const size_t d = embeddings.dim();
    const double* data = embeddings.data.data();  // row-major
    std::vector<double> norms(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        norms[i] = std::sqrt(dot_plain(data + i * d, data + i * d, d));

    // Candidate pass: all pairs with cosine > floor. Row blocks run
    // independently; concatenating in block order keeps (i, j) sorted, so
    // the result does not depend on the worker count.
    auto scan_rows = [&](size_t i_begin, size_t i_end, std::vector<SignedEdge>& out) {
        for (size_t i = i_begin; i < i_end; ++i) {
            if (embeddings.degenerate[i]) continue;
            for (size_t j = i + 1; j < n; ++j) {
                if (embeddings.degenerate[j]) continue;
                double sim = dot_plain(data + i * d, data + j * d, d) / (norms[i] * norms[j]);
                if (sim > floor) {
                    SignedEdge e;
                    e.i = uint32_t(i);
                    e.j = uint32_t(j);
                    e.weight = sim;
                    e.sign = labels[i] == labels[j] ? +1 : -1;
                    out.push_back(e);
                }
            }
        }
    };

    std::vector<SignedEdge> candidates;
    if (workers <= 1) {
        scan_rows(0, n, candidates);
    } else {
        std::vector<std::vector<SignedEdge>> parts(workers);
        std::vector<std::thread> pool;
        size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            size_t b = std::min(n, size_t(w) * chunk), e = std::min(n, b + chunk);
            pool.emplace_back([&, b, e, w] { scan_rows(b, e, parts[w]); });
        }
        for (auto& t : pool) t.join();
        for (auto& p : parts)
            candidates.insert(candidates.end(), p.begin(), p.end());
    }

    SignedBeliefGraph g;
    g.n_nodes = n;
    g.floor = floor;
    g.band = band;
    g.stats.candidate_count = candidates.size();
    if (candidates.empty()) return g;  // stats recorded as empty

    double sum = 0.0;
    for (const auto& e : candidates) sum += e.weight;
    double mu = sum / double(candidates.size());
    double sq = 0.0;
    for (const auto& e : candidates) sq += (e.weight - mu) * (e.weight - mu);
    double sigma = std::sqrt(sq / double(candidates.size()));
    g.stats.mu = mu;
    g.stats.sigma = sigma;

    if (sigma == 0.0) {
        // All candidate similarities equal: the positive band "sim > mu"
        // would empty the graph. Keep every candidate and flag it.
        g.stats.band_skipped = true;
        g.edges = std::move(candidates);
        return g;
    }

    double pos_cut = mu + band * sigma;
    double neg_cut = mu - band * sigma;
    for (const auto& e : candidates) {
        if (e.sign > 0 ? e.weight > pos_cut : e.weight < neg_cut) g.edges.push_back(e);
    }
    return g;
}

// Graph file: header "N mu sigma", then one edge per line "i j weight sign".
inline void save_graph(const SignedBeliefGraph& g, const std::string& path) {
    std::string out = std::to_string(g.n_nodes) + " " + fmt_g17(g.stats.mu) + " " +
                      fmt_g17(g.stats.sigma) + "\n";
    for (const auto& e : g.edges)
        out += std::to_string(e.i) + " " + std::to_string(e.j) + " " + fmt_g17(e.weight) + " " +
               (e.sign > 0 ? "1" : "-1") + "\n";
    write_file(path, out);
}

inline SignedBeliefGraph load_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open graph file: " + path);
    SignedBeliefGraph g;
    std::string line;
    if (!std::getline(f, line)) fail("empty graph file: " + path);
    {
        std::istringstream ss(line);
        if (!(ss >> g.n_nodes >> g.stats.mu >> g.stats.sigma)) fail("bad graph header: " + path);
    }
    size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        SignedEdge e;
        int sign;
        if (!(ss >> e.i >> e.j >> e.weight >> sign) || (sign != 1 && sign != -1))
            fail("graph line " + std::to_string(lineno) + ": malformed edge");
        e.sign = sign;
        if (e.i >= e.j || e.j >= g.n_nodes)
            fail("graph line " + std::to_string(lineno) + ": bad endpoints");
        g.edges.push_back(e);
    }
    g.stats.candidate_count = g.edges.size();  // lower bound; true count not persisted
    return g;
}

}  // namespace sbg
