// sbg: signed belief graph pipeline CLI.
//
// Subcommands mirror the pipeline stages so any stage can be re-run in
// isolation against an existing run directory:
//   synth      generate a synthetic corpus with planted archetypes
//   featurize  discourse features + enriched embeddings
//   graph      signed belief graph construction
//   train      sign-disentangling GNN training
//   cluster    PCA + Ward + silhouette + merge
//   evaluate   metrics report (coherence, DBI, cDBI, ARI)
//   ablate     loss-ablation table
//   pipeline   featurize..evaluate end to end, with manifest

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sbg/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    int64_t seed_override = -1;
    int workers_override = -1;
};

sbg::RunConfig load_with_overrides(const CommonOpts& opts) {
    sbg::RunConfig cfg = sbg::load_config(opts.config_path);
    if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
    if (opts.seed_override >= 0) {
        cfg.seed = uint64_t(opts.seed_override);
        cfg.train.seed = cfg.seed;
        cfg.cluster.seed = cfg.seed;
        cfg.synth.seed = cfg.seed;
    }
    if (opts.workers_override >= 1) cfg.workers = unsigned(opts.workers_override);
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "config file (JSON)")->required();
    cmd->add_option("--out", opts.out_override, "output directory (overrides paths.out)");
    cmd->add_option("--seed", opts.seed_override, "master seed (overrides config)");
    cmd->add_option("--workers", opts.workers_override, "worker threads (overrides config)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"signed belief graph narrative archetype pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    const char* stages[] = {"synth",   "featurize", "graph",  "train",
                            "cluster", "evaluate",  "ablate", "pipeline"};
    for (const char* name : stages) {
        CLI::App* cmd = app.add_subcommand(name, "");
        add_common(cmd, opts);
    }

    CLI11_PARSE(app, argc, argv);
    std::string stage = app.get_subcommands().front()->get_name();

    try {
        sbg::RunConfig cfg = load_with_overrides(opts);
        if (stage == "synth") sbg::stage_synth(cfg);
        else if (stage == "featurize") sbg::stage_featurize(cfg);
        else if (stage == "graph") sbg::stage_graph(cfg);
        else if (stage == "train") sbg::stage_train(cfg);
        else if (stage == "cluster") sbg::stage_cluster(cfg);
        else if (stage == "evaluate") sbg::stage_evaluate(cfg);
        else if (stage == "ablate") sbg::stage_ablate(cfg);
        else if (stage == "pipeline") sbg::run_pipeline(cfg);
        std::cerr << stage << ": ok\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
