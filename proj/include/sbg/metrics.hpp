#pragma once

// Clustering quality metrics: Davies-Bouldin index, NPMI topic coherence
// over TF-IDF keywords, the composite cDBI = DBI / average coherence, and
// adjusted Rand index against planted ground truth. Plus a plain k-means
// baseline for report context.

#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sbg/clustering.hpp"
#include "sbg/common.hpp"
#include "sbg/corpus.hpp"

namespace sbg {

// ---------------------------------------------------------------------------
// Davies-Bouldin

inline double davies_bouldin(const Mat& y, const std::vector<uint32_t>& labels) {
    if (labels.size() != size_t(y.rows())) fail("dbi: labels/matrix size mismatch");
    uint32_t k = 0;
    for (uint32_t l : labels) k = std::max(k, l + 1);
    if (k < 2) fail("dbi needs at least 2 clusters");
    Mat cent = Mat::Zero(Eigen::Index(k), y.cols());
    std::vector<double> cnt(k, 0.0);
    for (size_t i = 0; i < labels.size(); ++i) {
        cent.row(labels[i]) += y.row(Eigen::Index(i));
        cnt[labels[i]] += 1.0;
    }
    for (uint32_t c = 0; c < k; ++c) {
        if (cnt[c] == 0.0) fail("dbi: empty cluster id " + std::to_string(c));
        cent.row(c) /= cnt[c];
    }
    std::vector<double> scatter(k, 0.0);  // mean member distance to centroid
    for (size_t i = 0; i < labels.size(); ++i)
        scatter[labels[i]] += (y.row(Eigen::Index(i)) - cent.row(labels[i])).norm();
    for (uint32_t c = 0; c < k; ++c) scatter[c] /= cnt[c];

    double acc = 0.0;
    for (uint32_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (uint32_t j = 0; j < k; ++j) {
            if (j == i) continue;
            double sep = (cent.row(i) - cent.row(j)).norm();
            if (sep == 0.0) fail("zero centroid separation between clusters " +
                                 std::to_string(i) + " and " + std::to_string(j));
            worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
        }
        acc += worst;
    }
    return acc / double(k);
}

// ---------------------------------------------------------------------------
// cDBI

inline double cdbi(double dbi, double avg_coherence) {
    if (avg_coherence <= 0.0) fail("cDBI undefined for non-positive coherence");
    return dbi / avg_coherence;
}

// ---------------------------------------------------------------------------
// Topic coherence: mean pairwise NPMI of the top TF-IDF terms per cluster,
// with message-level co-occurrence counts. Probabilities are add-one
// smoothed with denominator D+2 so they stay strictly inside (0, 1).

inline const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> sw = {
        "a",   "an",  "the", "and", "or",  "but",  "if",   "then", "so",   "of",   "to",
        "in",  "on",  "at",  "by",  "for", "with", "is",   "are",  "was",  "were", "be",
        "been", "am", "it",  "its", "this", "that", "these", "those", "i",  "you",  "he",
        "she", "we",  "they", "my", "your", "our",  "not",  "no",   "do",  "does", "did",
        "as",  "from", "have", "has", "had", "will", "would", "can",  "could"};
    return sw;
}

// Tokens for coherence: shared word segmentation, minus one-byte tokens and
// stopwords.
inline std::vector<std::string> coherence_tokens(const std::string& text) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) {
        if (t.size() < 2) continue;
        if (stopwords().count(t)) continue;
        out.push_back(std::move(t));
    }
    return out;
}

struct CoherenceResult {
    double average = 0.0;
    std::vector<double> per_cluster;
    std::vector<std::vector<std::string>> top_terms;
    std::vector<uint32_t> degenerate_clusters;  // fewer than 2 distinct terms
};

inline CoherenceResult coherence(const Corpus& corpus, const std::vector<uint32_t>& labels,
                                 size_t top_t = 10) {
    if (labels.size() != corpus.size()) fail("coherence: labels/corpus size mismatch");
    const size_t n_docs = corpus.size();
    if (n_docs == 0) fail("coherence: empty corpus");
    uint32_t k = 0;
    for (uint32_t l : labels) k = std::max(l + 1, k);

    // postings: term -> sorted distinct message ordinals
    std::map<std::string, std::vector<uint32_t>> postings;
    // per-cluster term frequencies (total occurrences)
    std::vector<std::unordered_map<std::string, double>> tf(k);
    for (size_t i = 0; i < n_docs; ++i) {
        auto toks = coherence_tokens(corpus.messages[i].text);
        std::unordered_set<std::string> seen;
        for (const auto& t : toks) {
            tf[labels[i]][t] += 1.0;
            if (seen.insert(t).second) postings[t].push_back(uint32_t(i));
        }
    }

    auto df = [&](const std::string& t) -> double {
        auto it = postings.find(t);
        return it == postings.end() ? 0.0 : double(it->second.size());
    };
    auto co_df = [&](const std::string& t1, const std::string& t2) -> double {
        const auto &p1 = postings.at(t1), &p2 = postings.at(t2);
        size_t a = 0, b = 0, c = 0;
        while (a < p1.size() && b < p2.size()) {
            if (p1[a] == p2[b]) { ++c; ++a; ++b; }
            else if (p1[a] < p2[b]) ++a;
            else ++b;
        }
        return double(c);
    };
    const double denom = double(n_docs) + 2.0;
    auto npmi = [&](const std::string& t1, const std::string& t2) {
        double p1 = (df(t1) + 1.0) / denom;
        double p2 = (df(t2) + 1.0) / denom;
        double p12 = (co_df(t1, t2) + 1.0) / denom;
        return std::log(p12 / (p1 * p2)) / -std::log(p12);
    };

    CoherenceResult res;
    res.per_cluster.resize(k, 0.0);
    res.top_terms.resize(k);
    for (uint32_t c = 0; c < k; ++c) {
        // top terms by TF-IDF (cluster term frequency vs corpus-wide message
        // frequency); deterministic tie-break on the term itself
        std::vector<std::pair<double, std::string>> scored;
        scored.reserve(tf[c].size());
        for (const auto& [term, f] : tf[c])
            scored.emplace_back(f * std::log(double(n_docs) / df(term)), term);
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        size_t t = std::min(top_t, scored.size());
        for (size_t i = 0; i < t; ++i) res.top_terms[c].push_back(scored[i].second);
        if (t < 2) {
            res.per_cluster[c] = 0.0;
            res.degenerate_clusters.push_back(c);
            continue;
        }
        double acc = 0.0;
        size_t pairs = 0;
        for (size_t i = 0; i < t; ++i)
            for (size_t j = i + 1; j < t; ++j) {
                acc += npmi(res.top_terms[c][i], res.top_terms[c][j]);
                ++pairs;
            }
        res.per_cluster[c] = acc / double(pairs);
    }
    double sum = 0.0;
    for (double v : res.per_cluster) sum += v;
    res.average = k ? sum / double(k) : 0.0;
    return res;
}

// ---------------------------------------------------------------------------
// Adjusted Rand index

inline double adjusted_rand(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.size() != b.size()) fail("ari: length mismatch");
    const size_t n = a.size();
    if (n < 2) fail("ari needs at least 2 items");
    std::map<std::pair<uint32_t, uint32_t>, double> contingency;
    std::map<uint32_t, double> ra, rb;
    for (size_t i = 0; i < n; ++i) {
        contingency[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    auto comb2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, v] : contingency) sum_ij += comb2(v);
    for (const auto& [key, v] : ra) sum_a += comb2(v);
    for (const auto& [key, v] : rb) sum_b += comb2(v);
    double total = comb2(double(n));
    double expected = sum_a * sum_b / total;
    double maximum = 0.5 * (sum_a + sum_b);
    if (maximum == expected) return 1.0;  // both labelings trivial
    return (sum_ij - expected) / (maximum - expected);
}

// ---------------------------------------------------------------------------
// k-means baseline (Lloyd with seeded init), kept for report context only

inline std::vector<uint32_t> kmeans(const Mat& y, int k, uint64_t seed, int max_iters = 100) {
    const int n = int(y.rows());
    if (k < 1 || k > n) fail("kmeans: k out of range");
    Rng rng(seed);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(order[size_t(i)], order[size_t(rng.below(uint64_t(i + 1)))]);
    Mat cent(k, y.cols());
    for (int c = 0; c < k; ++c) cent.row(c) = y.row(order[size_t(c)]);

    std::vector<uint32_t> labels(size_t(n), 0);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            uint32_t arg = 0;
            for (int c = 0; c < k; ++c) {
                double d = (y.row(i) - cent.row(c)).squaredNorm();
                if (d < best) {
                    best = d;
                    arg = uint32_t(c);
                }
            }
            if (labels[size_t(i)] != arg) {
                labels[size_t(i)] = arg;
                changed = true;
            }
        }
        Mat sum = Mat::Zero(k, y.cols());
        std::vector<double> cnt(size_t(k), 0.0);
        for (int i = 0; i < n; ++i) {
            sum.row(labels[size_t(i)]) += y.row(i);
            cnt[labels[size_t(i)]] += 1.0;
        }
        for (int c = 0; c < k; ++c)
            if (cnt[size_t(c)] > 0.0) cent.row(c) = sum.row(c) / cnt[size_t(c)];
        if (!changed) break;
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Combined report for one clustering

struct ClusterSummary {
    size_t size = 0;
    std::vector<std::string> top_terms;
    double mean_intra_distance = 0.0;  // mean member distance to centroid
};

struct MetricsReport {
    double avg_coherence = 0.0;
    double silhouette = 0.0;
    double dbi = 0.0;
    double cdbi_value = 0.0;
    bool cdbi_defined = false;
    bool dbi_defined = false;
    std::vector<ClusterSummary> per_cluster;
};

inline MetricsReport evaluate_clustering(const Corpus& corpus, const Mat& y,
                                         const std::vector<uint32_t>& labels, size_t top_t = 10) {
    MetricsReport rep;
    CoherenceResult coh = coherence(corpus, labels, top_t);
    rep.avg_coherence = coh.average;
    uint32_t k = 0;
    for (uint32_t l : labels) k = std::max(l + 1, k);
    if (k >= 2) {
        rep.silhouette = silhouette(y, labels);
        try {
            rep.dbi = davies_bouldin(y, labels);
            rep.dbi_defined = true;
        } catch (const std::exception&) {
            rep.dbi_defined = false;
        }
    }
    if (rep.dbi_defined && rep.avg_coherence > 0.0) {
        rep.cdbi_value = cdbi(rep.dbi, rep.avg_coherence);
        rep.cdbi_defined = true;
    }
    // per-cluster geometry
    Mat cent = Mat::Zero(Eigen::Index(k), y.cols());
    std::vector<double> cnt(k, 0.0);
    for (size_t i = 0; i < labels.size(); ++i) {
        cent.row(labels[i]) += y.row(Eigen::Index(i));
        cnt[labels[i]] += 1.0;
    }
    rep.per_cluster.resize(k);
    for (uint32_t c = 0; c < k; ++c) {
        if (cnt[c] > 0.0) cent.row(c) /= cnt[c];
        rep.per_cluster[c].size = size_t(cnt[c]);
        rep.per_cluster[c].top_terms = coh.top_terms[c];
    }
    for (size_t i = 0; i < labels.size(); ++i)
        rep.per_cluster[labels[i]].mean_intra_distance +=
            (y.row(Eigen::Index(i)) - cent.row(labels[i])).norm();
    for (uint32_t c = 0; c < k; ++c)
        if (cnt[c] > 0.0) rep.per_cluster[c].mean_intra_distance /= cnt[c];
    return rep;
}

}  // namespace sbg
