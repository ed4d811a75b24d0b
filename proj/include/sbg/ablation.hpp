#pragma once

// Loss-ablation harness: retrains the model with individual loss terms
// disabled and reports clustering quality per variant, plus a no-GNN
// baseline that clusters the enriched embeddings directly.

#include <string>
#include <vector>

#include "sbg/clustering.hpp"
#include "sbg/common.hpp"
#include "sbg/corpus.hpp"
#include "sbg/metrics.hpp"
#include "sbg/model.hpp"

namespace sbg {

struct AblationRow {
    std::string name;
    LossConfig loss;
    bool uses_gnn = true;
    int k_final = 0;
    MetricsReport metrics;
    double delta_cdbi = 0.0;  // percent change vs the full model
    bool delta_defined = false;
};

// The seven variants, in fixed order. Per-variant seeds derive from the
// master seed as seed + variant index so rows are independent but
// reproducible.
inline std::vector<AblationRow> run_ablation(const SignedBeliefGraph& graph,
                                             const std::vector<int>& labels, const Corpus& corpus,
                                             const Mat& enriched, const TrainConfig& tcfg,
                                             const LossConfig& lcfg, const ClusteringConfig& ccfg,
                                             size_t top_t = 10) {
    struct Variant {
        const char* name;
        bool orth, sign, belief, gnn;
    };
    const Variant variants[7] = {
        {"full", true, true, true, true},
        {"w/o orth", false, true, true, true},
        {"w/o sign", true, false, true, true},
        {"w/o belief", true, true, false, true},
        {"w/o orth & sign", false, false, true, true},
        {"recon only", false, false, false, true},
        {"no-gnn baseline", false, false, false, false},
    };

    std::vector<AblationRow> rows;
    for (size_t v = 0; v < 7; ++v) {
        const Variant& var = variants[v];
        AblationRow row;
        row.name = var.name;
        row.uses_gnn = var.gnn;
        row.loss = lcfg;
        if (!var.orth) row.loss.lambda_orth = 0.0;
        if (!var.sign) row.loss.lambda_sign = 0.0;
        if (!var.belief) row.loss.lambda_belief = 0.0;

        Mat z;
        if (var.gnn) {
            TrainConfig tv = tcfg;
            tv.seed = tcfg.seed + v;
            TrainResult tr = train(graph, labels, tv, row.loss);
            z = tr.z.z_p;
        } else {
            z = enriched;
        }
        ClusterAssignment ca = cluster_embeddings(z, ccfg);
        row.k_final = ca.k_final;
        row.metrics = evaluate_clustering(corpus, ca.reduced, ca.labels, top_t);
        rows.push_back(std::move(row));
    }

    const AblationRow& full = rows[0];
    for (auto& row : rows) {
        if (full.metrics.cdbi_defined && row.metrics.cdbi_defined) {
            row.delta_cdbi =
                100.0 * (row.metrics.cdbi_value - full.metrics.cdbi_value) / full.metrics.cdbi_value;
            row.delta_defined = true;
        }
    }
    return rows;
}

}  // namespace sbg
