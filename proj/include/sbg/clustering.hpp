#pragma once

// Archetype discovery: PCA variance-retention reduction, agglomerative
// clustering with Ward's linkage, silhouette-based selection of k, and
// post-hoc merging of clusters whose centroids are cosine-similar.

#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sbg/common.hpp"

namespace sbg {

// ---------------------------------------------------------------------------
// PCA

struct PcaResult {
    Mat scores;                           // N x m
    std::vector<double> explained_ratio;  // all components, descending
    int retained = 0;
};

// Projects onto the smallest number of leading principal directions whose
// cumulative explained variance reaches pca_var. Component orientation is
// fixed by making each component's largest-magnitude loading positive.
inline PcaResult pca_reduce(const Mat& z, double pca_var) {
    if (z.rows() < 2) fail("pca needs at least 2 rows");
    if (!(pca_var > 0.0 && pca_var <= 1.0)) fail("pca_var must be in (0, 1]");
    if (!z.allFinite()) fail("pca input contains non-finite values");
    Mat centered = z.rowwise() - z.colwise().mean();
    Mat cov = centered.transpose() * centered / double(z.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    if (es.info() != Eigen::Success) fail("pca eigendecomposition failed");
    const Eigen::Index d = cov.rows();
    Vec evals = es.eigenvalues();   // ascending
    Mat evecs = es.eigenvectors();  // columns
    double total = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) total += std::max(0.0, evals(i));
    if (total <= 0.0) fail("degenerate input: zero total variance");

    PcaResult res;
    res.explained_ratio.resize(size_t(d));
    for (Eigen::Index i = 0; i < d; ++i)
        res.explained_ratio[size_t(i)] = std::max(0.0, evals(d - 1 - i)) / total;
    double target = pca_var - 1e-12;
    double cum = 0.0;
    int m = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        cum += res.explained_ratio[size_t(i)];
        ++m;
        if (cum >= target) break;
    }
    // rank cap: drop trailing zero-variance components even if the target
    // was never reached (pca_var = 1 on rank-deficient data)
    while (m > 1 && res.explained_ratio[size_t(m - 1)] <= 0.0) --m;
    Mat basis(d, m);
    for (int c = 0; c < m; ++c) {
        Vec v = evecs.col(d - 1 - c);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;
        basis.col(c) = v;
    }
    res.scores = centered * basis;
    res.retained = m;
    return res;
}

// ---------------------------------------------------------------------------
// Ward agglomeration (Lance-Williams recurrence on squared distances).
// Cluster ids follow creation order: originals 0..N-1, then N+step for the
// cluster created by merge `step`. Ties in merge cost resolve to the
// lexicographically smallest (id_lo, id_hi) pair.

struct WardMerge {
    int a = 0;
    int b = 0;
    double height = 0.0;  // sqrt of the Ward squared distance at merge time
};

struct WardDendrogram {
    int n = 0;
    std::vector<WardMerge> merges;  // n-1 entries
};

inline WardDendrogram ward_dendrogram(const Mat& y) {
    const int n = int(y.rows());
    if (n < 1) fail("ward: empty input");
    WardDendrogram dend;
    dend.n = n;
    if (n == 1) return dend;

    // full symmetric matrix of squared distances, slot-indexed
    std::vector<double> d2(size_t(n) * size_t(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = (y.row(i) - y.row(j)).squaredNorm();
            d2[size_t(i) * n + j] = v;
            d2[size_t(j) * n + i] = v;
        }

    std::vector<int> id(static_cast<size_t>(n));        // creation id held by each slot
    std::vector<double> sz(size_t(n), 1);  // cluster sizes
    std::vector<char> alive(size_t(n), 1);
    std::iota(id.begin(), id.end(), 0);

    struct Best {
        double d2 = std::numeric_limits<double>::infinity();
        int lo = -1, hi = -1;  // creation ids, lo < hi
        int slot = -1;         // partner slot (> own slot)
        bool operator<(const Best& o) const {
            if (d2 != o.d2) return d2 < o.d2;
            if (lo != o.lo) return lo < o.lo;
            return hi < o.hi;
        }
    };
    auto pair_best = [&](int si, int sj) {
        Best b;
        b.d2 = d2[size_t(si) * n + sj];
        b.lo = std::min(id[size_t(si)], id[size_t(sj)]);
        b.hi = std::max(id[size_t(si)], id[size_t(sj)]);
        b.slot = sj;
        return b;
    };
    std::vector<Best> nn(static_cast<size_t>(n));  // nn[i]: best partner among slots > i
    auto recompute_nn = [&](int si) {
        Best b;
        for (int sj = si + 1; sj < n; ++sj) {
            if (!alive[size_t(sj)]) continue;
            Best c = pair_best(si, sj);
            if (c < b) b = c;
        }
        nn[size_t(si)] = b;
    };
    for (int i = 0; i < n; ++i) recompute_nn(i);

    for (int step = 0; step < n - 1; ++step) {
        Best best;
        int best_slot = -1;
        for (int i = 0; i < n; ++i) {
            if (!alive[size_t(i)] || nn[size_t(i)].slot < 0) continue;
            if (nn[size_t(i)] < best) {
                best = nn[size_t(i)];
                best_slot = i;
            }
        }
        int sa = best_slot, sb = best.slot;
        dend.merges.push_back({best.lo, best.hi, std::sqrt(best.d2)});

        // Lance-Williams Ward update of distances to the merged cluster
        double na = sz[size_t(sa)], nb = sz[size_t(sb)], dab = best.d2;
        for (int k = 0; k < n; ++k) {
            if (!alive[size_t(k)] || k == sa || k == sb) continue;
            double nk = sz[size_t(k)];
            double dak = d2[size_t(sa) * n + k], dbk = d2[size_t(sb) * n + k];
            double v = ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk);
            d2[size_t(sa) * n + k] = v;
            d2[size_t(k) * n + sa] = v;
        }
        alive[size_t(sb)] = 0;
        sz[size_t(sa)] = na + nb;
        id[size_t(sa)] = n + step;

        // refresh the nearest-partner cache
        recompute_nn(sa);
        for (int k = 0; k < n; ++k) {
            if (!alive[size_t(k)] || k == sa) continue;
            Best& bk = nn[size_t(k)];
            if (bk.slot == sa || bk.slot == sb) {
                recompute_nn(k);
            } else if (k < sa) {
                Best c = pair_best(k, sa);
                if (c < bk) bk = c;
            }
        }
    }
    return dend;
}

// Labels from cutting the dendrogram at k clusters; cluster ids are compact,
// assigned by order of first appearance over node 0..N-1.
inline std::vector<uint32_t> cut_dendrogram(const WardDendrogram& dend, int k) {
    const int n = dend.n;
    if (k < 1 || k > n) fail("cut: k out of range");
    std::vector<int> parent(size_t(2 * n - 1));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[size_t(x)] != x) {
            parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
            x = parent[size_t(x)];
        }
        return x;
    };
    for (int step = 0; step < n - k; ++step) {
        const WardMerge& m = dend.merges[size_t(step)];
        int root = n + step;
        parent[size_t(find(m.a))] = root;
        parent[size_t(find(m.b))] = root;
    }
    std::vector<uint32_t> labels(static_cast<size_t>(n));
    std::vector<int> compact(size_t(2 * n - 1), -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        int r = find(i);
        if (compact[size_t(r)] < 0) compact[size_t(r)] = next++;
        labels[size_t(i)] = uint32_t(compact[size_t(r)]);
    }
    return labels;
}

inline std::vector<uint32_t> ward_cluster(const Mat& y, int k) {
    return cut_dendrogram(ward_dendrogram(y), k);
}

// ---------------------------------------------------------------------------
// Silhouette (Euclidean)

inline Mat pairwise_distances(const Mat& y) {
    const Eigen::Index n = y.rows();
    Mat d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double v = (y.row(i) - y.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

inline double silhouette_from_distances(const Mat& dist, const std::vector<uint32_t>& labels) {
    const size_t n = labels.size();
    uint32_t k = 0;
    for (uint32_t l : labels) k = std::max(k, l + 1);
    if (k < 2) fail("silhouette needs at least 2 clusters");
    std::vector<double> csize(k, 0.0);
    for (uint32_t l : labels) csize[l] += 1.0;
    double acc = 0.0;
    std::vector<double> sums(k);
    for (size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (size_t j = 0; j < n; ++j)
            if (j != i) sums[labels[j]] += dist(Eigen::Index(i), Eigen::Index(j));
        uint32_t own = labels[i];
        if (csize[own] <= 1.0) continue;  // singleton: s(i) = 0
        double a = sums[own] / (csize[own] - 1.0);
        double b = std::numeric_limits<double>::infinity();
        for (uint32_t c = 0; c < k; ++c) {
            if (c == own || csize[c] == 0.0) continue;
            b = std::min(b, sums[c] / csize[c]);
        }
        double denom = std::max(a, b);
        if (denom > 0.0) acc += (b - a) / denom;
    }
    return acc / double(n);
}

inline double silhouette(const Mat& y, const std::vector<uint32_t>& labels) {
    return silhouette_from_distances(pairwise_distances(y), labels);
}

// ---------------------------------------------------------------------------
// Optimal k: highest mean silhouette over Ward cuts, ties to the smallest k.

struct KSelection {
    int k_star = 0;
    std::vector<std::pair<int, double>> curve;  // (k, mean silhouette)
    WardDendrogram dendrogram;
};

inline KSelection select_k(const Mat& y, int k_min, int k_max) {
    const int n = int(y.rows());
    if (!(2 <= k_min && k_min <= k_max)) fail("need 2 <= k_min <= k_max");
    if (k_max > n - 1) fail("k_max must be <= N-1");
    KSelection sel;
    sel.dendrogram = ward_dendrogram(y);
    Mat dist = pairwise_distances(y);
    double best = -std::numeric_limits<double>::infinity();
    for (int k = k_min; k <= k_max; ++k) {
        auto labels = cut_dendrogram(sel.dendrogram, k);
        double s = silhouette_from_distances(dist, labels);
        sel.curve.emplace_back(k, s);
        if (s > best) {
            best = s;
            sel.k_star = k;
        }
    }
    return sel;
}

// ---------------------------------------------------------------------------
// Post-hoc merging: repeatedly merge the cluster pair with the highest
// centroid cosine similarity while it exceeds tau, recomputing centroids
// after each merge. Zero centroids are excluded (and reported).

struct MergeLogEntry {
    uint32_t into = 0;
    uint32_t from = 0;
    double cosine = 0.0;
};

struct MergeResult {
    std::vector<uint32_t> labels;  // compact ids
    std::vector<MergeLogEntry> log;
    std::vector<uint32_t> excluded_zero_centroid;
    int k_final = 0;
};

inline MergeResult merge_similar(const std::vector<uint32_t>& labels_in, const Mat& y,
                                 double tau) {
    if (labels_in.size() != size_t(y.rows())) fail("merge: labels/matrix size mismatch");
    if (labels_in.empty()) fail("merge: empty labeling");
    MergeResult res;
    res.labels = labels_in;
    uint32_t k = 0;
    for (uint32_t l : res.labels) k = std::max(k, l + 1);

    std::vector<char> active(k, 0);
    for (uint32_t l : res.labels) active[l] = 1;

    while (true) {
        // centroids of active clusters
        Mat cent = Mat::Zero(Eigen::Index(k), y.cols());
        std::vector<double> cnt(k, 0.0);
        for (size_t i = 0; i < res.labels.size(); ++i) {
            cent.row(res.labels[i]) += y.row(Eigen::Index(i));
            cnt[res.labels[i]] += 1.0;
        }
        std::vector<double> norm(k, 0.0);
        for (uint32_t c = 0; c < k; ++c) {
            if (!active[c] || cnt[c] == 0.0) continue;
            cent.row(c) /= cnt[c];
            norm[c] = cent.row(c).norm();
        }
        double best = -std::numeric_limits<double>::infinity();
        uint32_t ba = 0, bb = 0;
        bool found = false;
        for (uint32_t a = 0; a < k; ++a) {
            if (!active[a]) continue;
            if (norm[a] < 1e-12) continue;
            for (uint32_t b = a + 1; b < k; ++b) {
                if (!active[b]) continue;
                if (norm[b] < 1e-12) continue;
                double cos = cent.row(a).dot(cent.row(b)) / (norm[a] * norm[b]);
                if (cos > best) {
                    best = cos;
                    ba = a;
                    bb = b;
                    found = true;
                }
            }
        }
        if (!found || !(best > tau)) break;
        for (uint32_t& l : res.labels)
            if (l == bb) l = ba;
        active[bb] = 0;
        res.log.push_back({ba, bb, best});
    }

    // report clusters that sat out due to vanished centroids
    {
        Mat cent = Mat::Zero(Eigen::Index(k), y.cols());
        std::vector<double> cnt(k, 0.0);
        for (size_t i = 0; i < res.labels.size(); ++i) {
            cent.row(res.labels[i]) += y.row(Eigen::Index(i));
            cnt[res.labels[i]] += 1.0;
        }
        for (uint32_t c = 0; c < k; ++c)
            if (active[c] && cnt[c] > 0.0 && (cent.row(c) / cnt[c]).norm() < 1e-12)
                res.excluded_zero_centroid.push_back(c);
    }

    // compact ids by first appearance
    std::vector<int> remap(k, -1);
    int next = 0;
    for (uint32_t& l : res.labels) {
        if (remap[l] < 0) remap[l] = next++;
        l = uint32_t(remap[l]);
    }
    res.k_final = next;
    return res;
}

// ---------------------------------------------------------------------------
// End-to-end clustering of an embedding matrix

struct ClusteringConfig {
    double pca_var = 0.6;
    double merge_th = 0.8;
    int k_min = 2;
    int k_max = 20;
    uint64_t seed = 42;

    void validate() const {
        if (!(pca_var > 0.0 && pca_var <= 1.0)) fail("pca_var must be in (0, 1]");
        if (!(merge_th > 0.0 && merge_th < 1.0)) fail("merge_th must be in (0, 1)");
        if (!(2 <= k_min && k_min <= k_max)) fail("need 2 <= k_min <= k_max");
    }
};

struct ClusterAssignment {
    std::vector<uint32_t> labels;
    int k_selected = 0;
    int k_final = 0;
    std::vector<std::pair<int, double>> silhouette_curve;
    std::vector<WardMerge> dendrogram;
    std::vector<MergeLogEntry> merge_log;
    std::vector<uint32_t> excluded_zero_centroid;
    Mat reduced;  // PCA space used for clustering and metric evaluation
    int pca_components = 0;
};

inline ClusterAssignment cluster_embeddings(const Mat& z, const ClusteringConfig& cfg) {
    cfg.validate();
    const int n = int(z.rows());
    if (n < 3) fail("clustering needs at least 3 rows");
    PcaResult pca = pca_reduce(z, cfg.pca_var);
    int k_max = std::min(cfg.k_max, n - 1);
    if (cfg.k_min > k_max) fail("k_min exceeds usable cluster range for this corpus");
    KSelection sel = select_k(pca.scores, cfg.k_min, k_max);
    auto labels = cut_dendrogram(sel.dendrogram, sel.k_star);
    MergeResult merged = merge_similar(labels, pca.scores, cfg.merge_th);

    ClusterAssignment out;
    out.labels = std::move(merged.labels);
    out.k_selected = sel.k_star;
    out.k_final = merged.k_final;
    out.silhouette_curve = std::move(sel.curve);
    out.dendrogram = std::move(sel.dendrogram.merges);
    out.merge_log = std::move(merged.log);
    out.excluded_zero_centroid = std::move(merged.excluded_zero_centroid);
    out.reduced = std::move(pca.scores);
    out.pca_components = pca.retained;
    return out;
}

// Assignment file: '#' metadata block, then one "id cluster" line per message.
inline void save_assignment(const ClusterAssignment& a, const std::vector<std::string>& ids,
                            const std::string& path) {
    if (ids.size() != a.labels.size()) fail("assignment/id size mismatch");
    std::string out;
    out += "# k_selected " + std::to_string(a.k_selected) + "\n";
    out += "# k_final " + std::to_string(a.k_final) + "\n";
    out += "# pca_components " + std::to_string(a.pca_components) + "\n";
    for (const auto& [k, s] : a.silhouette_curve)
        out += "# silhouette " + std::to_string(k) + " " + fmt_g17(s) + "\n";
    for (const auto& m : a.merge_log)
        out += "# merge " + std::to_string(m.into) + " " + std::to_string(m.from) + " " +
               fmt_g17(m.cosine) + "\n";
    for (size_t i = 0; i < ids.size(); ++i)
        out += ids[i] + " " + std::to_string(a.labels[i]) + "\n";
    write_file(path, out);
}

}  // namespace sbg
