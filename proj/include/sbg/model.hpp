#pragma once

// Sign-disentangling graph network. Learnable node embeddings pass through
// two sign-specific graph convolutions (positive / negative edge channels),
// a fusion layer, and two projection heads: a belief head z_b trained
// against the binary labels and a persona head z_p regularized to respect
// signed structure while staying decorrelated from z_b.
//
// Training minimizes
//   L = lr*L_recon + ls*L_sign + lb*L_belief + lo*L_orth
// with analytic gradients (validated against central finite differences)
// and full-batch Adam.

#include <limits>
#include <string>
#include <vector>

#include "sbg/common.hpp"
#include "sbg/graph.hpp"

namespace sbg {

struct ModelDims {
    int d_in = 64;
    int d_h = 64;
    int d_b = 32;
    int d_p = 32;
};

struct LossConfig {
    double lambda_recon = 1.0;
    double lambda_sign = 1.0;
    double lambda_belief = 1.0;
    double lambda_orth = 1.0;
    double margin = 1.0;
};

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 1e-2;
    double weight_decay = 1e-5;
    uint64_t seed = 42;
    ModelDims dims;
};

struct ModelParams {
    Mat X;       // N x d_in, learnable node embeddings
    Mat W_pos;   // d_in x d_h, positive-channel convolution
    Mat W_neg;   // d_in x d_h, negative-channel convolution
    Mat W_fuse;  // 2*d_h x d_h
    Mat W_b;     // d_h x d_b, belief head
    Mat W_p;     // d_h x d_p, persona head
    Vec head_w;  // d_b, belief classifier
    double head_b = 0.0;

    template <class F>
    void for_each_tensor(F&& f) {
        f("X", X);
        f("W_pos", W_pos);
        f("W_neg", W_neg);
        f("W_fuse", W_fuse);
        f("W_b", W_b);
        f("W_p", W_p);
    }

    bool all_finite() const {
        auto ok = [](const Mat& m) { return m.allFinite(); };
        return ok(X) && ok(W_pos) && ok(W_neg) && ok(W_fuse) && ok(W_b) && ok(W_p) &&
               head_w.allFinite() && std::isfinite(head_b);
    }
};

// Fan-in scaled uniform init. Only X's scheme is architectural; the weight
// matrices follow the same convention.
inline ModelParams init_params(size_t n_nodes, const ModelDims& dims, uint64_t seed) {
    if (dims.d_in < 1 || dims.d_h < 1 || dims.d_b < 1 || dims.d_p < 1)
        fail("model dims must be >= 1");
    Rng rng(seed);
    auto uniform_mat = [&](Eigen::Index r, Eigen::Index c, double bound) {
        Mat m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rng.uniform(-bound, bound);
        return m;
    };
    ModelParams p;
    p.X = uniform_mat(Eigen::Index(n_nodes), dims.d_in, 1.0 / std::sqrt(double(dims.d_in)));
    p.W_pos = uniform_mat(dims.d_in, dims.d_h, 1.0 / std::sqrt(double(dims.d_in)));
    p.W_neg = uniform_mat(dims.d_in, dims.d_h, 1.0 / std::sqrt(double(dims.d_in)));
    p.W_fuse = uniform_mat(2 * dims.d_h, dims.d_h, 1.0 / std::sqrt(double(2 * dims.d_h)));
    p.W_b = uniform_mat(dims.d_h, dims.d_b, 1.0 / std::sqrt(double(dims.d_h)));
    p.W_p = uniform_mat(dims.d_h, dims.d_p, 1.0 / std::sqrt(double(dims.d_h)));
    Mat hw = uniform_mat(dims.d_b, 1, 1.0 / std::sqrt(double(dims.d_b)));
    p.head_w = hw.col(0);
    p.head_b = 0.0;
    return p;
}

// ---------------------------------------------------------------------------
// Symmetric normalized adjacency A_hat = D^-1/2 (A + I) D^-1/2 with
// A_ij = |w_ij| over one sign's edge subset. Sign-awareness lives in the
// channel split, not in signed adjacency entries.

class NormalizedAdjacency {
public:
    NormalizedAdjacency() = default;

    NormalizedAdjacency(size_t n, const std::vector<SignedEdge>& edges, int sign) : n_(n) {
        std::vector<double> degree(n, 1.0);  // self loop
        for (const auto& e : edges) {
            if (e.sign != sign) continue;
            double w = std::abs(e.weight);
            degree[e.i] += w;
            degree[e.j] += w;
        }
        std::vector<double> dinv(n);
        for (size_t i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(degree[i]);
        self_.resize(n);
        for (size_t i = 0; i < n; ++i) self_[i] = dinv[i] * dinv[i];
        for (const auto& e : edges) {
            if (e.sign != sign) continue;
            entries_.push_back({e.i, e.j, std::abs(e.weight) * dinv[e.i] * dinv[e.j]});
        }
    }

    size_t nodes() const { return n_; }
    size_t edge_count() const { return entries_.size(); }

    // Y = A_hat * X (symmetric, fixed accumulation order)
    Mat apply(const Mat& x) const {
        Mat y(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) y.row(i) = self_[size_t(i)] * x.row(i);
        for (const auto& s : entries_) {
            y.row(s.i) += s.val * x.row(s.j);
            y.row(s.j) += s.val * x.row(s.i);
        }
        return y;
    }

private:
    struct Entry {
        uint32_t i, j;
        double val;
    };
    size_t n_ = 0;
    std::vector<double> self_;
    std::vector<Entry> entries_;
};

// One convolution: A_hat X W (activation applied by the caller).
inline Mat gcn_layer(const Mat& x, const NormalizedAdjacency& adj, const Mat& w) {
    if (size_t(x.rows()) != adj.nodes()) fail("gcn_layer: node count mismatch");
    if (x.cols() != w.rows()) fail("gcn_layer: weight shape mismatch");
    return adj.apply(x) * w;
}

// ---------------------------------------------------------------------------
// Forward pass

struct DisentangledEmbeddings {
    Mat z_b;  // N x d_b, rows unit norm (or flagged)
    Mat z_p;  // N x d_p
    std::vector<char> degenerate;  // rows whose pre-norm vector vanished

    bool any_degenerate() const {
        for (char c : degenerate)
            if (c) return true;
        return false;
    }
};

struct ForwardCache {
    Mat s_pos, u_pos, h_pos;
    Mat s_neg, u_neg, h_neg;
    Mat concat, u_fuse, h;
    Mat b_raw, p_raw;          // pre-normalization head outputs
    Vec b_norm, p_norm;        // row norms of b_raw / p_raw
    Vec logits_raw, logits;    // belief logits before/after clamping
    DisentangledEmbeddings z;
};

constexpr double kNormEps = 1e-12;
constexpr double kLogitClamp = 30.0;

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

namespace detail {

inline void rownorm(const Mat& raw, Mat& out, Vec& norms, std::vector<char>& degenerate) {
    out.resize(raw.rows(), raw.cols());
    norms.resize(raw.rows());
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        double r = raw.row(i).norm();
        norms(i) = r;
        out.row(i) = raw.row(i) / std::max(r, kNormEps);
        if (r <= kNormEps) degenerate[size_t(i)] = 1;
    }
}

}  // namespace detail

inline ForwardCache forward(const ModelParams& params, const NormalizedAdjacency& adj_pos,
                            const NormalizedAdjacency& adj_neg) {
    const size_t n = adj_pos.nodes();
    if (size_t(params.X.rows()) != n) fail("forward: X rows do not match graph nodes");
    ForwardCache f;
    f.s_pos = adj_pos.apply(params.X);
    f.u_pos = f.s_pos * params.W_pos;
    f.h_pos = f.u_pos.cwiseMax(0.0);
    f.s_neg = adj_neg.apply(params.X);
    f.u_neg = f.s_neg * params.W_neg;
    f.h_neg = f.u_neg.cwiseMax(0.0);
    f.concat.resize(Eigen::Index(n), f.h_pos.cols() + f.h_neg.cols());
    f.concat.leftCols(f.h_pos.cols()) = f.h_pos;
    f.concat.rightCols(f.h_neg.cols()) = f.h_neg;
    f.u_fuse = f.concat * params.W_fuse;
    f.h = f.u_fuse.cwiseMax(0.0);
    f.b_raw = f.h * params.W_b;
    f.p_raw = f.h * params.W_p;
    f.z.degenerate.assign(n, 0);
    detail::rownorm(f.b_raw, f.z.z_b, f.b_norm, f.z.degenerate);
    detail::rownorm(f.p_raw, f.z.z_p, f.p_norm, f.z.degenerate);
    f.logits_raw = f.z.z_b * params.head_w + Vec::Constant(Eigen::Index(n), params.head_b);
    f.logits = f.logits_raw.cwiseMax(-kLogitClamp).cwiseMin(kLogitClamp);
    return f;
}

inline ForwardCache forward(const ModelParams& params, const SignedBeliefGraph& graph) {
    if (size_t(params.X.rows()) != graph.n_nodes) fail("forward: X rows do not match graph nodes");
    NormalizedAdjacency ap(graph.n_nodes, graph.edges, +1);
    NormalizedAdjacency an(graph.n_nodes, graph.edges, -1);
    return forward(params, ap, an);
}

// ---------------------------------------------------------------------------
// Loss terms. Each is exposed on its own for direct inspection; training
// uses total_loss / backward below.

// Mean squared error between sigmoid(z_i . z_j) and the 0/1 edge target over
// observed edges (unobserved pairs map to target 0.5 and are masked out).
inline double loss_recon(const DisentangledEmbeddings& z, const SignedBeliefGraph& graph) {
    if (graph.edges.empty()) fail("reconstruction undefined on edgeless graph");
    double acc = 0.0;
    for (const auto& e : graph.edges) {
        double dot = z.z_b.row(e.i).dot(z.z_b.row(e.j)) + z.z_p.row(e.i).dot(z.z_p.row(e.j));
        double t = e.sign > 0 ? 1.0 : 0.0;
        double d = sigmoid(dot) - t;
        acc += d * d;
    }
    return acc / double(graph.edges.size());
}

// Positive edges: squared persona distance. Negative edges: squared hinge
// below margin. Either term vanishes when its edge set is empty.
inline double loss_sign(const Mat& z_p, const SignedBeliefGraph& graph, double margin) {
    double pos = 0.0, neg = 0.0;
    size_t npos = 0, nneg = 0;
    for (const auto& e : graph.edges) {
        double dist2 = (z_p.row(e.i) - z_p.row(e.j)).squaredNorm();
        if (e.sign > 0) {
            pos += dist2;
            ++npos;
        } else {
            double gap = margin - std::sqrt(dist2);
            if (gap > 0.0) neg += gap * gap;
            ++nneg;
        }
    }
    double out = 0.0;
    if (npos) out += pos / double(npos);
    if (nneg) out += neg / double(nneg);
    return out;
}

// Mean binary cross-entropy of the belief classifier, from (clamped) logits.
inline double loss_belief(const Vec& logits, const std::vector<int>& labels) {
    if (size_t(logits.size()) != labels.size()) fail("loss_belief: label count mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        double s = logits(i);
        double y = double(labels[size_t(i)]);
        acc += std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s)));
    }
    return acc / double(logits.size());
}

inline double loss_belief_from(const Mat& z_b, const Vec& head_w, double head_b,
                               const std::vector<int>& labels) {
    Vec logits = z_b * head_w + Vec::Constant(z_b.rows(), head_b);
    logits = logits.cwiseMax(-kLogitClamp).cwiseMin(kLogitClamp);
    return loss_belief(logits, labels);
}

// Squared Frobenius norm of the cross-covariance between the two heads.
inline double loss_orth(const Mat& z_b, const Mat& z_p) {
    if (z_b.rows() != z_p.rows()) fail("loss_orth: row mismatch");
    if (z_b.rows() < 2) fail("loss_orth needs at least 2 rows");
    Mat bc = z_b.rowwise() - z_b.colwise().mean();
    Mat pc = z_p.rowwise() - z_p.colwise().mean();
    Mat cov = bc.transpose() * pc / double(z_b.rows() - 1);
    return cov.squaredNorm();
}

struct LossBreakdown {
    double recon = 0.0;
    double sign = 0.0;
    double belief = 0.0;
    double orth = 0.0;
    double total = 0.0;
};

inline LossBreakdown total_loss(const ForwardCache& f, const SignedBeliefGraph& graph,
                                const std::vector<int>& labels, const LossConfig& cfg) {
    LossBreakdown lb;
    lb.recon = loss_recon(f.z, graph);
    lb.sign = loss_sign(f.z.z_p, graph, cfg.margin);
    lb.belief = loss_belief(f.logits, labels);
    lb.orth = loss_orth(f.z.z_b, f.z.z_p);
    lb.total = cfg.lambda_recon * lb.recon + cfg.lambda_sign * lb.sign +
               cfg.lambda_belief * lb.belief + cfg.lambda_orth * lb.orth;
    return lb;
}

// ---------------------------------------------------------------------------
// Backward pass (gradients of the weighted total loss)

struct ParamGrads {
    Mat X, W_pos, W_neg, W_fuse, W_b, W_p;
    Vec head_w;
    double head_b = 0.0;

    template <class F>
    void for_each_tensor(F&& f) {
        f("X", X);
        f("W_pos", W_pos);
        f("W_neg", W_neg);
        f("W_fuse", W_fuse);
        f("W_b", W_b);
        f("W_p", W_p);
    }
};

inline ParamGrads backward(const ModelParams& params, const ForwardCache& f,
                           const NormalizedAdjacency& adj_pos, const NormalizedAdjacency& adj_neg,
                           const SignedBeliefGraph& graph, const std::vector<int>& labels,
                           const LossConfig& cfg) {
    const Eigen::Index n = params.X.rows();
    Mat d_zb = Mat::Zero(n, f.z.z_b.cols());
    Mat d_zp = Mat::Zero(n, f.z.z_p.cols());
    ParamGrads g;
    g.head_w = Vec::Zero(params.head_w.size());
    g.head_b = 0.0;

    // recon
    if (cfg.lambda_recon != 0.0 && !graph.edges.empty()) {
        double scale = cfg.lambda_recon * 2.0 / double(graph.edges.size());
        for (const auto& e : graph.edges) {
            double dot =
                f.z.z_b.row(e.i).dot(f.z.z_b.row(e.j)) + f.z.z_p.row(e.i).dot(f.z.z_p.row(e.j));
            double s = sigmoid(dot);
            double t = e.sign > 0 ? 1.0 : 0.0;
            double coef = scale * (s - t) * s * (1.0 - s);
            d_zb.row(e.i) += coef * f.z.z_b.row(e.j);
            d_zb.row(e.j) += coef * f.z.z_b.row(e.i);
            d_zp.row(e.i) += coef * f.z.z_p.row(e.j);
            d_zp.row(e.j) += coef * f.z.z_p.row(e.i);
        }
    }

    // sign
    if (cfg.lambda_sign != 0.0) {
        size_t npos = graph.positive_count(), nneg = graph.negative_count();
        for (const auto& e : graph.edges) {
            Eigen::RowVectorXd delta = f.z.z_p.row(e.i) - f.z.z_p.row(e.j);
            if (e.sign > 0) {
                if (!npos) continue;
                double coef = cfg.lambda_sign * 2.0 / double(npos);
                d_zp.row(e.i) += coef * delta;
                d_zp.row(e.j) -= coef * delta;
            } else {
                if (!nneg) continue;
                double r = delta.norm();
                double gap = cfg.margin - r;
                if (gap > 0.0 && r > 1e-12) {
                    double coef = -cfg.lambda_sign * 2.0 * gap / (r * double(nneg));
                    d_zp.row(e.i) += coef * delta;
                    d_zp.row(e.j) -= coef * delta;
                }
            }
        }
    }

    // belief
    if (cfg.lambda_belief != 0.0) {
        double scale = cfg.lambda_belief / double(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double raw = f.logits_raw(i);
            if (raw <= -kLogitClamp || raw >= kLogitClamp) continue;  // clamped: zero slope
            double gi = scale * (sigmoid(f.logits(i)) - double(labels[size_t(i)]));
            g.head_w += gi * f.z.z_b.row(i).transpose();
            g.head_b += gi;
            d_zb.row(i) += gi * params.head_w.transpose();
        }
    }

    // orth
    if (cfg.lambda_orth != 0.0 && n >= 2) {
        Mat bc = f.z.z_b.rowwise() - f.z.z_b.colwise().mean();
        Mat pc = f.z.z_p.rowwise() - f.z.z_p.colwise().mean();
        Mat cov = bc.transpose() * pc / double(n - 1);
        double coef = cfg.lambda_orth * 2.0 / double(n - 1);
        Mat db = coef * (pc * cov.transpose());
        Mat dp = coef * (bc * cov);
        // centering backward: remove the column means of the gradients
        d_zb += db.rowwise() - db.colwise().mean();
        d_zp += dp.rowwise() - dp.colwise().mean();
    }

    // row normalization backward: z = b / max(|b|, eps)
    auto rownorm_back = [](const Mat& d_z, const Mat& z, const Vec& norms) {
        Mat d_raw(d_z.rows(), d_z.cols());
        for (Eigen::Index i = 0; i < d_z.rows(); ++i) {
            double r = norms(i);
            if (r > kNormEps) {
                double proj = d_z.row(i).dot(z.row(i));
                d_raw.row(i) = (d_z.row(i) - proj * z.row(i)) / r;
            } else {
                d_raw.row(i) = d_z.row(i) / kNormEps;
            }
        }
        return d_raw;
    };
    Mat d_braw = rownorm_back(d_zb, f.z.z_b, f.b_norm);
    Mat d_praw = rownorm_back(d_zp, f.z.z_p, f.p_norm);

    g.W_b = f.h.transpose() * d_braw;
    g.W_p = f.h.transpose() * d_praw;
    Mat d_h = d_braw * params.W_b.transpose() + d_praw * params.W_p.transpose();
    Mat d_ufuse = (f.u_fuse.array() > 0.0).cast<double>() * d_h.array();
    g.W_fuse = f.concat.transpose() * d_ufuse;
    Mat d_concat = d_ufuse * params.W_fuse.transpose();
    Mat d_hpos = d_concat.leftCols(f.h_pos.cols());
    Mat d_hneg = d_concat.rightCols(f.h_neg.cols());
    Mat d_upos = (f.u_pos.array() > 0.0).cast<double>() * d_hpos.array();
    Mat d_uneg = (f.u_neg.array() > 0.0).cast<double>() * d_hneg.array();
    g.W_pos = f.s_pos.transpose() * d_upos;
    g.W_neg = f.s_neg.transpose() * d_uneg;
    Mat d_spos = d_upos * params.W_pos.transpose();
    Mat d_sneg = d_uneg * params.W_neg.transpose();
    g.X = adj_pos.apply(d_spos) + adj_neg.apply(d_sneg);
    return g;
}

// ---------------------------------------------------------------------------
// Adam (with coupled weight decay added to the gradient, bias correction on)

class Adam {
public:
    Adam(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {}

    void step(ModelParams& p, const ParamGrads& g) {
        ++t_;
        update(p.X, g.X, 0);
        update(p.W_pos, g.W_pos, 1);
        update(p.W_neg, g.W_neg, 2);
        update(p.W_fuse, g.W_fuse, 3);
        update(p.W_b, g.W_b, 4);
        update(p.W_p, g.W_p, 5);
        Mat hw = p.head_w, ghw = g.head_w;
        update(hw, ghw, 6);
        p.head_w = hw.col(0);
        Mat hb(1, 1), ghb(1, 1);
        hb(0, 0) = p.head_b;
        ghb(0, 0) = g.head_b;
        update(hb, ghb, 7);
        p.head_b = hb(0, 0);
    }

private:
    void update(Mat& param, const Mat& grad, int slot) {
        auto& st = state_[slot];
        if (st.m.size() == 0) {
            st.m = Mat::Zero(param.rows(), param.cols());
            st.v = Mat::Zero(param.rows(), param.cols());
        }
        Mat g = grad + wd_ * param;
        st.m = b1_ * st.m + (1.0 - b1_) * g;
        st.v = b2_ * st.v + (1.0 - b2_) * g.cwiseProduct(g);
        double c1 = 1.0 - std::pow(b1_, double(t_));
        double c2 = 1.0 - std::pow(b2_, double(t_));
        Mat mhat = st.m / c1;
        Mat vhat = st.v / c2;
        param -= lr_ * (mhat.array() / (vhat.array().sqrt() + eps_)).matrix();
    }

    struct State {
        Mat m, v;
    };
    double lr_, wd_, b1_, b2_, eps_;
    int t_ = 0;
    State state_[8];
};

// ---------------------------------------------------------------------------
// Training

struct TrainResult {
    ModelParams params;              // checkpoint with the lowest total loss
    DisentangledEmbeddings z;        // embeddings from that checkpoint
    std::vector<LossBreakdown> history;
    int best_epoch = -1;
};

inline TrainResult train(const SignedBeliefGraph& graph, const std::vector<int>& labels,
                         const TrainConfig& tcfg, const LossConfig& lcfg) {
    if (graph.edges.empty()) fail("training requires a non-empty graph");
    if (labels.size() != graph.n_nodes) fail("labels not aligned with graph nodes");
    if (tcfg.epochs < 1) fail("epochs must be >= 1");
    if (tcfg.learning_rate <= 0.0) fail("learning rate must be positive");
    if (lcfg.lambda_recon == 0.0 && lcfg.lambda_sign == 0.0 && lcfg.lambda_belief == 0.0 &&
        lcfg.lambda_orth == 0.0)
        fail("at least one loss weight must be positive");
    if (lcfg.margin <= 0.0) fail("margin must be positive");

    NormalizedAdjacency adj_pos(graph.n_nodes, graph.edges, +1);
    NormalizedAdjacency adj_neg(graph.n_nodes, graph.edges, -1);
    ModelParams params = init_params(graph.n_nodes, tcfg.dims, tcfg.seed);
    Adam opt(tcfg.learning_rate, tcfg.weight_decay);

    TrainResult res;
    double best = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        ForwardCache f = forward(params, adj_pos, adj_neg);
        LossBreakdown lb = total_loss(f, graph, labels, lcfg);
        if (!std::isfinite(lb.recon)) fail("non-finite recon loss at epoch " + std::to_string(epoch));
        if (!std::isfinite(lb.sign)) fail("non-finite sign loss at epoch " + std::to_string(epoch));
        if (!std::isfinite(lb.belief))
            fail("non-finite belief loss at epoch " + std::to_string(epoch));
        if (!std::isfinite(lb.orth)) fail("non-finite orth loss at epoch " + std::to_string(epoch));
        res.history.push_back(lb);
        if (lb.total < best) {
            best = lb.total;
            res.best_epoch = epoch;
            res.params = params;
            res.z = f.z;
        }
        ParamGrads g = backward(params, f, adj_pos, adj_neg, graph, labels, lcfg);
        opt.step(params, g);
        if (!params.all_finite())
            fail("non-finite parameters after update at epoch " + std::to_string(epoch));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Gradient check: analytic vs central finite differences on every tensor.
// Relative error uses max(|ga|, |gf|, 1e-7) as denominator so near-zero
// entries compare absolutely.

inline double grad_check(ModelParams& params, const SignedBeliefGraph& graph,
                         const std::vector<int>& labels, const LossConfig& cfg, double epsilon) {
    NormalizedAdjacency adj_pos(graph.n_nodes, graph.edges, +1);
    NormalizedAdjacency adj_neg(graph.n_nodes, graph.edges, -1);
    auto eval = [&]() {
        ForwardCache f = forward(params, adj_pos, adj_neg);
        return total_loss(f, graph, labels, cfg).total;
    };
    ForwardCache f = forward(params, adj_pos, adj_neg);
    ParamGrads g = backward(params, f, adj_pos, adj_neg, graph, labels, cfg);

    double worst = 0.0;
    auto relerr = [&](double ga, double gf) {
        double denom = std::max({std::abs(ga), std::abs(gf), 1e-7});
        return std::abs(ga - gf) / denom;
    };
    auto check_tensor = [&](Mat& p, const Mat& ga) {
        for (Eigen::Index i = 0; i < p.rows(); ++i)
            for (Eigen::Index k = 0; k < p.cols(); ++k) {
                double orig = p(i, k);
                p(i, k) = orig + epsilon;
                double up = eval();
                p(i, k) = orig - epsilon;
                double dn = eval();
                p(i, k) = orig;
                worst = std::max(worst, relerr(ga(i, k), (up - dn) / (2.0 * epsilon)));
            }
    };
    check_tensor(params.X, g.X);
    check_tensor(params.W_pos, g.W_pos);
    check_tensor(params.W_neg, g.W_neg);
    check_tensor(params.W_fuse, g.W_fuse);
    check_tensor(params.W_b, g.W_b);
    check_tensor(params.W_p, g.W_p);
    for (Eigen::Index i = 0; i < params.head_w.size(); ++i) {
        double orig = params.head_w(i);
        params.head_w(i) = orig + epsilon;
        double up = eval();
        params.head_w(i) = orig - epsilon;
        double dn = eval();
        params.head_w(i) = orig;
        worst = std::max(worst, relerr(g.head_w(i), (up - dn) / (2.0 * epsilon)));
    }
    {
        double orig = params.head_b;
        params.head_b = orig + epsilon;
        double up = eval();
        params.head_b = orig - epsilon;
        double dn = eval();
        params.head_b = orig;
        worst = std::max(worst, relerr(g.head_b, (up - dn) / (2.0 * epsilon)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Checkpoint file: "SBCK" magic, format version, configs, then tensors as
// f64 row-major with explicit shapes.

inline void save_checkpoint(const ModelParams& p, const TrainConfig& tcfg, const LossConfig& lcfg,
                            const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("cannot write checkpoint: " + path);
    f.write("SBCK", 4);
    write_u32(f, 1);  // version
    write_u32(f, uint32_t(tcfg.epochs));
    write_f64(f, tcfg.learning_rate);
    write_f64(f, tcfg.weight_decay);
    write_u32(f, uint32_t(tcfg.seed >> 32));
    write_u32(f, uint32_t(tcfg.seed & 0xffffffffu));
    write_u32(f, uint32_t(tcfg.dims.d_in));
    write_u32(f, uint32_t(tcfg.dims.d_h));
    write_u32(f, uint32_t(tcfg.dims.d_b));
    write_u32(f, uint32_t(tcfg.dims.d_p));
    write_f64(f, lcfg.lambda_recon);
    write_f64(f, lcfg.lambda_sign);
    write_f64(f, lcfg.lambda_belief);
    write_f64(f, lcfg.lambda_orth);
    write_f64(f, lcfg.margin);
    auto write_mat = [&](const Mat& m) {
        write_u32(f, uint32_t(m.rows()));
        write_u32(f, uint32_t(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index k = 0; k < m.cols(); ++k) write_f64(f, m(i, k));
    };
    write_mat(p.X);
    write_mat(p.W_pos);
    write_mat(p.W_neg);
    write_mat(p.W_fuse);
    write_mat(p.W_b);
    write_mat(p.W_p);
    write_u32(f, uint32_t(p.head_w.size()));
    for (Eigen::Index i = 0; i < p.head_w.size(); ++i) write_f64(f, p.head_w(i));
    write_f64(f, p.head_b);
    if (!f) fail("checkpoint write failed: " + path);
}

struct Checkpoint {
    ModelParams params;
    TrainConfig train_cfg;
    LossConfig loss_cfg;
};

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("cannot open checkpoint: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "SBCK", 4) != 0) fail("bad checkpoint magic: " + path);
    uint32_t version = read_u32(f);
    if (version != 1) fail("unsupported checkpoint version " + std::to_string(version));
    Checkpoint c;
    c.train_cfg.epochs = int(read_u32(f));
    c.train_cfg.learning_rate = read_f64(f);
    c.train_cfg.weight_decay = read_f64(f);
    uint64_t hi = read_u32(f), lo = read_u32(f);
    c.train_cfg.seed = (hi << 32) | lo;
    c.train_cfg.dims.d_in = int(read_u32(f));
    c.train_cfg.dims.d_h = int(read_u32(f));
    c.train_cfg.dims.d_b = int(read_u32(f));
    c.train_cfg.dims.d_p = int(read_u32(f));
    c.loss_cfg.lambda_recon = read_f64(f);
    c.loss_cfg.lambda_sign = read_f64(f);
    c.loss_cfg.lambda_belief = read_f64(f);
    c.loss_cfg.lambda_orth = read_f64(f);
    c.loss_cfg.margin = read_f64(f);
    auto read_mat = [&]() {
        uint32_t r = read_u32(f), cc = read_u32(f);
        Mat m(r, cc);
        for (uint32_t i = 0; i < r; ++i)
            for (uint32_t k = 0; k < cc; ++k) m(i, k) = read_f64(f);
        return m;
    };
    c.params.X = read_mat();
    c.params.W_pos = read_mat();
    c.params.W_neg = read_mat();
    c.params.W_fuse = read_mat();
    c.params.W_b = read_mat();
    c.params.W_p = read_mat();
    uint32_t hn = read_u32(f);
    c.params.head_w.resize(hn);
    for (uint32_t i = 0; i < hn; ++i) c.params.head_w(i) = read_f64(f);
    c.params.head_b = read_f64(f);
    return c;
}

// Loss history: one line per epoch with total and the four terms.
inline void save_loss_history(const std::vector<LossBreakdown>& hist, const std::string& path) {
    std::string out = "# epoch total recon sign belief orth\n";
    for (size_t e = 0; e < hist.size(); ++e) {
        out += std::to_string(e) + " " + fmt_g17(hist[e].total) + " " + fmt_g17(hist[e].recon) +
               " " + fmt_g17(hist[e].sign) + " " + fmt_g17(hist[e].belief) + " " +
               fmt_g17(hist[e].orth) + "\n";
    }
    write_file(path, out);
}

}  // namespace sbg
