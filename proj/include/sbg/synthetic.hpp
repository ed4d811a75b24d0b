#pragma once

// Synthetic corpora with planted archetypes: equidistant centroids in
// embedding space, Gaussian noise, archetype-specific vocabularies (with a
// shared common pool) so keyword extraction and coherence behave like they
// do on real text, and per-archetype conspiratorial label fractions.
// Deterministic given the seed; each message draws from its own
// counter-derived stream, so generation order never matters.

#include <string>
#include <vector>

#include "sbg/common.hpp"
#include "sbg/corpus.hpp"
#include "sbg/graph.hpp"

namespace sbg {

struct SynthConfig {
    size_t n_messages = 2000;
    int n_archetypes = 3;
    double archetype_separation = 2.0;  // centroid distance in feature space
    std::vector<double> conspiratorial_fraction = {0.9, 0.5, 0.1};
    double noise_sigma = 0.05;
    int vocab_per_archetype = 40;
    int embedding_dim = 32;
    uint64_t seed = 42;

    void validate() const {
        if (n_archetypes < 1) fail("n_archetypes must be >= 1");
        if (n_messages < size_t(n_archetypes)) fail("n_messages must be >= n_archetypes");
        if (conspiratorial_fraction.size() != size_t(n_archetypes))
            fail("conspiratorial_fraction must list one value per archetype");
        for (double f : conspiratorial_fraction)
            if (f < 0.0 || f > 1.0) fail("conspiratorial_fraction values must be in [0, 1]");
        if (archetype_separation < 0.0) fail("archetype_separation must be >= 0");
        if (noise_sigma < 0.0) fail("noise_sigma must be >= 0");
        if (vocab_per_archetype < 1) fail("vocab_per_archetype must be >= 1");
        if (embedding_dim < 1) fail("embedding_dim must be >= 1");
    }
};

struct GroundTruth {
    std::vector<uint32_t> archetype;
    std::vector<int> label;
};

struct SynthResult {
    Corpus corpus;
    EmbeddingMatrix embeddings;
    GroundTruth truth;
};

namespace detail {

// Mutually equidistant unit directions: QR of a seeded random matrix.
inline Mat equidistant_directions(int k, int dim, uint64_t seed) {
    if (k > dim)
        fail("infeasible geometry: " + std::to_string(k) + " equidistant archetypes need dim >= " +
             std::to_string(k) + ", got " + std::to_string(dim));
    Rng rng(seed);
    Mat rand(dim, k);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < k; ++j) rand(i, j) = rng.normal();
    // Gram-Schmidt, deterministic
    Mat q(dim, k);
    for (int j = 0; j < k; ++j) {
        Vec v = rand.col(j);
        for (int p = 0; p < j; ++p) v -= q.col(p).dot(v) * q.col(p);
        double norm = v.norm();
        if (norm < 1e-9) fail("degenerate random basis (retry with another seed)");
        q.col(j) = v / norm;
    }
    return q;
}

}  // namespace detail

inline SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    const int k = cfg.n_archetypes;
    // orthonormal directions scaled so centroids sit archetype_separation apart
    Mat dirs = detail::equidistant_directions(k, cfg.embedding_dim, cfg.seed);
    double scale = cfg.archetype_separation / std::sqrt(2.0);

    std::vector<std::string> common_vocab;
    for (int w = 0; w < cfg.vocab_per_archetype; ++w)
        common_vocab.push_back("common" + std::to_string(w));

    SynthResult out;
    out.embeddings.data.resize(Eigen::Index(cfg.n_messages), cfg.embedding_dim);
    std::vector<Message> msgs(cfg.n_messages);
    out.truth.archetype.resize(cfg.n_messages);
    out.truth.label.resize(cfg.n_messages);

    for (size_t i = 0; i < cfg.n_messages; ++i) {
        uint32_t arch = uint32_t(i % size_t(k));
        Rng rng(splitmix64(cfg.seed) ^ splitmix64(uint64_t(i) + 0x9e3779b97f4a7c15ull));

        Vec e = scale * dirs.col(int(arch));
        for (int d = 0; d < cfg.embedding_dim; ++d) e(d) += cfg.noise_sigma * rng.normal();
        double nrm = e.norm();
        if (nrm > 0.0) e /= nrm;
        out.embeddings.data.row(Eigen::Index(i)) = e.transpose();

        int label = rng.uniform() < cfg.conspiratorial_fraction[arch] ? 1 : 0;

        // bag of words: 70% archetype vocabulary, 30% shared
        size_t len = 8 + rng.below(9);
        std::string text;
        for (size_t w = 0; w < len; ++w) {
            if (!text.empty()) text += ' ';
            if (rng.uniform() < 0.3) {
                text += common_vocab[rng.below(common_vocab.size())];
            } else {
                text += "arch" + std::to_string(arch) + "word" +
                        std::to_string(rng.below(uint64_t(cfg.vocab_per_archetype)));
            }
        }

        Message m;
        char idbuf[24];
        std::snprintf(idbuf, sizeof idbuf, "m%06zu", i);
        m.id = idbuf;
        m.text = text;
        m.group = "synthetic";
        m.timestamp = 1600000000 + int64_t(i);
        m.label = label;
        msgs[i] = std::move(m);
        out.truth.archetype[i] = arch;
        out.truth.label[i] = label;
    }
    out.corpus = make_corpus(std::move(msgs));
    out.embeddings.row_ids.reserve(cfg.n_messages);
    for (const auto& m : out.corpus.messages) out.embeddings.row_ids.push_back(m.id);
    return out;
}

// Ground-truth file: "id archetype label" per line.
inline void save_ground_truth(const Corpus& corpus, const GroundTruth& gt,
                              const std::string& path) {
    if (gt.archetype.size() != corpus.size() || gt.label.size() != corpus.size())
        fail("ground truth not aligned with corpus");
    std::string out;
    for (size_t i = 0; i < corpus.size(); ++i)
        out += corpus.messages[i].id + " " + std::to_string(gt.archetype[i]) + " " +
               std::to_string(gt.label[i]) + "\n";
    write_file(path, out);
}

inline GroundTruth load_ground_truth(const std::string& path, const Corpus& corpus) {
    std::ifstream f(path);
    if (!f) fail("cannot open ground truth file: " + path);
    GroundTruth gt;
    gt.archetype.assign(corpus.size(), 0);
    gt.label.assign(corpus.size(), 0);
    std::vector<char> seen(corpus.size(), 0);
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string id;
        uint32_t arch;
        int label;
        if (!(ss >> id >> arch >> label))
            fail("ground truth line " + std::to_string(lineno) + ": malformed");
        auto it = corpus.index.find(id);
        if (it == corpus.index.end())
            fail("ground truth id '" + id + "' not in corpus");
        gt.archetype[it->second] = arch;
        gt.label[it->second] = label;
        seen[it->second] = 1;
    }
    for (size_t i = 0; i < corpus.size(); ++i)
        if (!seen[i]) fail("ground truth missing id '" + corpus.messages[i].id + "'");
    return gt;
}

// Small planted two-community signed graph for model sanity tests: dense
// positive edges inside each community, negative edges across.
inline SignedBeliefGraph planted_two_community_graph(size_t per_community, double pos_weight,
                                                     double neg_weight, uint64_t seed,
                                                     double edge_prob = 0.6) {
    SignedBeliefGraph g;
    g.n_nodes = 2 * per_community;
    Rng rng(seed);
    auto community = [&](size_t v) { return v < per_community ? 0 : 1; };
    for (size_t i = 0; i < g.n_nodes; ++i)
        for (size_t j = i + 1; j < g.n_nodes; ++j) {
            bool same = community(i) == community(j);
            if (rng.uniform() > edge_prob) continue;
            SignedEdge e;
            e.i = uint32_t(i);
            e.j = uint32_t(j);
            e.sign = same ? +1 : -1;
            e.weight = same ? pos_weight : neg_weight;
            g.edges.push_back(e);
        }
    g.stats.candidate_count = g.edges.size();
    return g;
}

}  // namespace sbg
