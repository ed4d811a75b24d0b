#pragma once

// Run orchestration: strict config parsing, the staged pipeline
// (featurize -> graph -> train -> cluster -> evaluate), the ablation run,
// and the run-directory artifacts (reports + manifest). Stages communicate
// through files so each is independently re-runnable.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbg/ablation.hpp"
#include "sbg/clustering.hpp"
#include "sbg/common.hpp"
#include "sbg/corpus.hpp"
#include "sbg/discourse.hpp"
#include "sbg/graph.hpp"
#include "sbg/metrics.hpp"
#include "sbg/model.hpp"
#include "sbg/synthetic.hpp"

namespace sbg {

using json = nlohmann::json;

struct RunConfig {
    // paths
    std::string corpus_path;
    std::string embeddings_path;  // empty: use the fallback featurizer
    std::string lexicon_path;     // empty: built-in lexicon
    std::string affect_path;      // empty: built-in lexicon scorer
    std::string out_dir = "run";
    std::string ground_truth_path;  // optional, enables ARI reporting

    bool use_fallback = true;
    int fallback_dim = 256;

    double graph_floor = 0.5;
    double graph_band = 0.5;

    TrainConfig train;
    LossConfig loss;
    ClusteringConfig cluster;
    size_t top_terms = 10;

    SynthConfig synth;

    uint64_t seed = 42;
    unsigned workers = 1;

    json raw;  // config as parsed, for the manifest
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& section) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) fail("config: unknown key '" + it.key() + "' in " + section);
    }
}

template <class T>
T get_or(const json& j, const char* key, T def) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        fail(std::string("config: bad value for key '") + key + "'");
    }
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    using detail::check_keys;
    using detail::get_or;
    if (!j.is_object()) fail("config: top level must be an object");
    check_keys(j, {"paths", "featurize", "graph", "train", "loss", "cluster", "report", "synth",
                   "seed", "workers"},
               "top level");
    RunConfig cfg;
    cfg.raw = j;
    cfg.seed = get_or<uint64_t>(j, "seed", 42);
    cfg.workers = get_or<unsigned>(j, "workers", 1);
    if (cfg.workers < 1) fail("config: 'workers' must be >= 1");

    if (j.contains("paths")) {
        const json& p = j.at("paths");
        check_keys(p, {"corpus", "embeddings", "lexicon", "affect", "out", "ground_truth"},
                   "paths");
        cfg.corpus_path = get_or<std::string>(p, "corpus", "");
        cfg.embeddings_path = get_or<std::string>(p, "embeddings", "");
        cfg.lexicon_path = get_or<std::string>(p, "lexicon", "");
        cfg.affect_path = get_or<std::string>(p, "affect", "");
        cfg.out_dir = get_or<std::string>(p, "out", "run");
        cfg.ground_truth_path = get_or<std::string>(p, "ground_truth", "");
    }
    if (j.contains("featurize")) {
        const json& p = j.at("featurize");
        check_keys(p, {"use_fallback", "dim"}, "featurize");
        cfg.use_fallback = get_or<bool>(p, "use_fallback", true);
        cfg.fallback_dim = get_or<int>(p, "dim", 256);
        if (cfg.fallback_dim < 8) fail("config: 'featurize.dim' must be >= 8");
    }
    if (j.contains("graph")) {
        const json& p = j.at("graph");
        check_keys(p, {"floor", "band"}, "graph");
        cfg.graph_floor = get_or<double>(p, "floor", 0.5);
        cfg.graph_band = get_or<double>(p, "band", 0.5);
        if (cfg.graph_floor < -1.0 || cfg.graph_floor >= 1.0)
            fail("config: 'graph.floor' must be in [-1, 1)");
        if (cfg.graph_band < 0.0) fail("config: 'graph.band' must be >= 0");
    }
    if (j.contains("train")) {
        const json& p = j.at("train");
        check_keys(p, {"epochs", "learning_rate", "weight_decay", "d_in", "d_h", "d_b", "d_p"},
                   "train");
        cfg.train.epochs = get_or<int>(p, "epochs", cfg.train.epochs);
        cfg.train.learning_rate = get_or<double>(p, "learning_rate", cfg.train.learning_rate);
        cfg.train.weight_decay = get_or<double>(p, "weight_decay", cfg.train.weight_decay);
        cfg.train.dims.d_in = get_or<int>(p, "d_in", cfg.train.dims.d_in);
        cfg.train.dims.d_h = get_or<int>(p, "d_h", cfg.train.dims.d_h);
        cfg.train.dims.d_b = get_or<int>(p, "d_b", cfg.train.dims.d_b);
        cfg.train.dims.d_p = get_or<int>(p, "d_p", cfg.train.dims.d_p);
        if (cfg.train.epochs < 1) fail("config: 'train.epochs' must be >= 1");
        if (cfg.train.learning_rate <= 0) fail("config: 'train.learning_rate' must be > 0");
        if (cfg.train.weight_decay < 0) fail("config: 'train.weight_decay' must be >= 0");
        if (cfg.train.dims.d_in < 1 || cfg.train.dims.d_h < 1 || cfg.train.dims.d_b < 1 ||
            cfg.train.dims.d_p < 1)
            fail("config: 'train' dims must be >= 1");
    }
    if (j.contains("loss")) {
        const json& p = j.at("loss");
        check_keys(p, {"lambda_recon", "lambda_sign", "lambda_belief", "lambda_orth", "margin"},
                   "loss");
        cfg.loss.lambda_recon = get_or<double>(p, "lambda_recon", cfg.loss.lambda_recon);
        cfg.loss.lambda_sign = get_or<double>(p, "lambda_sign", cfg.loss.lambda_sign);
        cfg.loss.lambda_belief = get_or<double>(p, "lambda_belief", cfg.loss.lambda_belief);
        cfg.loss.lambda_orth = get_or<double>(p, "lambda_orth", cfg.loss.lambda_orth);
        cfg.loss.margin = get_or<double>(p, "margin", cfg.loss.margin);
        for (double l : {cfg.loss.lambda_recon, cfg.loss.lambda_sign, cfg.loss.lambda_belief,
                         cfg.loss.lambda_orth})
            if (l < 0.0) fail("config: 'loss' weights must be >= 0");
        if (cfg.loss.lambda_recon == 0 && cfg.loss.lambda_sign == 0 &&
            cfg.loss.lambda_belief == 0 && cfg.loss.lambda_orth == 0)
            fail("config: at least one 'loss' weight must be positive");
        if (cfg.loss.margin <= 0.0) fail("config: 'loss.margin' must be > 0");
    }
    if (j.contains("cluster")) {
        const json& p = j.at("cluster");
        check_keys(p, {"pca_var", "merge_th", "k_min", "k_max"}, "cluster");
        cfg.cluster.pca_var = get_or<double>(p, "pca_var", cfg.cluster.pca_var);
        cfg.cluster.merge_th = get_or<double>(p, "merge_th", cfg.cluster.merge_th);
        cfg.cluster.k_min = get_or<int>(p, "k_min", cfg.cluster.k_min);
        cfg.cluster.k_max = get_or<int>(p, "k_max", cfg.cluster.k_max);
        if (!(cfg.cluster.pca_var > 0.0 && cfg.cluster.pca_var <= 1.0))
            fail("config: 'cluster.pca_var' must be in (0, 1]");
        if (!(cfg.cluster.merge_th > 0.0 && cfg.cluster.merge_th < 1.0))
            fail("config: 'cluster.merge_th' must be in (0, 1)");
        if (!(2 <= cfg.cluster.k_min && cfg.cluster.k_min <= cfg.cluster.k_max))
            fail("config: need 2 <= 'cluster.k_min' <= 'cluster.k_max'");
    }
    if (j.contains("report")) {
        const json& p = j.at("report");
        check_keys(p, {"top_terms"}, "report");
        int tt = get_or<int>(p, "top_terms", 10);
        if (tt < 2) fail("config: 'report.top_terms' must be >= 2");
        cfg.top_terms = size_t(tt);
    }
    if (j.contains("synth")) {
        const json& p = j.at("synth");
        check_keys(p,
                   {"n_messages", "n_archetypes", "archetype_separation",
                    "conspiratorial_fraction", "noise_sigma", "vocab_per_archetype",
                    "embedding_dim"},
                   "synth");
        cfg.synth.n_messages = get_or<size_t>(p, "n_messages", cfg.synth.n_messages);
        cfg.synth.n_archetypes = get_or<int>(p, "n_archetypes", cfg.synth.n_archetypes);
        cfg.synth.archetype_separation =
            get_or<double>(p, "archetype_separation", cfg.synth.archetype_separation);
        if (p.contains("conspiratorial_fraction"))
            cfg.synth.conspiratorial_fraction =
                p.at("conspiratorial_fraction").get<std::vector<double>>();
        cfg.synth.noise_sigma = get_or<double>(p, "noise_sigma", cfg.synth.noise_sigma);
        cfg.synth.vocab_per_archetype =
            get_or<int>(p, "vocab_per_archetype", cfg.synth.vocab_per_archetype);
        cfg.synth.embedding_dim = get_or<int>(p, "embedding_dim", cfg.synth.embedding_dim);
        if (cfg.synth.conspiratorial_fraction.size() != size_t(cfg.synth.n_archetypes))
            fail("config: 'synth.conspiratorial_fraction' must list one value per archetype");
        for (double f : cfg.synth.conspiratorial_fraction)
            if (f < 0.0 || f > 1.0)
                fail("config: 'synth.conspiratorial_fraction' values must be in [0, 1]");
        cfg.synth.validate();
    }

    // the master seed drives every stage
    cfg.train.seed = cfg.seed;
    cfg.cluster.seed = cfg.seed;
    cfg.synth.seed = cfg.seed;
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) fail("config file is not valid JSON: " + path);
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// Run directory layout

struct RunDir {
    std::string root;
    explicit RunDir(const std::string& r) : root(r) {
        std::filesystem::create_directories(r);
    }
    std::string path(const std::string& name) const { return root + "/" + name; }

    std::string corpus() const { return path("corpus.jsonl"); }
    std::string base_embeddings() const { return path("base.sbem"); }
    std::string ground_truth() const { return path("groundtruth.txt"); }
    std::string enriched() const { return path("enriched.sbem"); }
    std::string graph() const { return path("graph.txt"); }
    std::string checkpoint() const { return path("checkpoint.bin"); }
    std::string loss_history() const { return path("loss_history.txt"); }
    std::string belief() const { return path("belief.sbem"); }
    std::string persona() const { return path("persona.sbem"); }
    std::string assignment() const { return path("assignment.txt"); }
    std::string report_json() const { return path("report.json"); }
    std::string report_txt() const { return path("report.txt"); }
    std::string ablation_json() const { return path("ablation.json"); }
    std::string ablation_txt() const { return path("ablation.txt"); }
    std::string manifest() const { return path("manifest.json"); }
};

// Enriched matrices reload with degeneracy recovered from the all-zero rows.
inline EnrichedMatrix load_enriched(const std::string& path) {
    EmbeddingMatrix em = read_embeddings(path);
    EnrichedMatrix out;
    out.data = em.data;
    out.ids = em.row_ids;
    out.degenerate.assign(out.rows(), 0);
    for (Eigen::Index i = 0; i < out.data.rows(); ++i)
        if (out.data.row(i).norm() < 1e-9) out.degenerate[size_t(i)] = 1;
    return out;
}

inline std::unique_ptr<AffectScorer> make_scorer(const RunConfig& cfg) {
    if (!cfg.affect_path.empty())
        return std::make_unique<PrecomputedAffectScorer>(cfg.affect_path);
    return std::make_unique<LexiconAffectScorer>();
}

inline Lexicon make_lexicon(const RunConfig& cfg) {
    if (!cfg.lexicon_path.empty()) return load_lexicon(cfg.lexicon_path);
    return default_lexicon();
}

// ---------------------------------------------------------------------------
// Stages. Each reads its inputs from files and writes its outputs, so the
// CLI subcommands and the end-to-end pipeline share one code path.

inline void stage_synth(const RunConfig& cfg) {
    RunDir rd(cfg.out_dir);
    SynthResult sr = generate(cfg.synth);
    save_corpus(sr.corpus, rd.corpus());
    save_embeddings(sr.embeddings, rd.base_embeddings());
    save_ground_truth(sr.corpus, sr.truth, rd.ground_truth());
}

inline std::string resolve_corpus_path(const RunConfig& cfg) {
    if (!cfg.corpus_path.empty()) return cfg.corpus_path;
    RunDir rd(cfg.out_dir);
    if (std::filesystem::exists(rd.corpus())) return rd.corpus();
    fail("no corpus: set paths.corpus or run the synth stage first");
}

inline std::string resolve_embeddings_path(const RunConfig& cfg) {
    if (!cfg.embeddings_path.empty()) return cfg.embeddings_path;
    RunDir rd(cfg.out_dir);
    if (std::filesystem::exists(rd.base_embeddings())) return rd.base_embeddings();
    return "";  // fallback featurizer
}

inline void stage_featurize(const RunConfig& cfg) {
    RunDir rd(cfg.out_dir);
    Corpus corpus = load_corpus(resolve_corpus_path(cfg));
    std::string emb_path = resolve_embeddings_path(cfg);
    EmbeddingMatrix base;
    if (!emb_path.empty()) {
        base = load_embeddings(emb_path, corpus);
    } else {
        if (!cfg.use_fallback)
            fail("no base embeddings and the fallback featurizer is disabled");
        base = fallback_featurize(corpus, size_t(cfg.fallback_dim), cfg.seed);
    }
    Lexicon lex = make_lexicon(cfg);
    auto scorer = make_scorer(cfg);
    auto discourse = discourse_features(corpus, lex, *scorer);
    EnrichedMatrix enriched = enrich(base, discourse);
    EmbeddingMatrix out;
    out.data = enriched.data;
    out.row_ids = enriched.ids;
    save_embeddings(out, rd.enriched());
}

inline void stage_graph(const RunConfig& cfg) {
    RunDir rd(cfg.out_dir);
    Corpus corpus = load_corpus(resolve_corpus_path(cfg));
    EnrichedMatrix enriched = load_enriched(rd.enriched());
    if (enriched.rows() != corpus.size()) fail("enriched matrix does not match corpus size");
    SignedBeliefGraph g =
        build_graph(enriched, corpus.labels(), cfg.graph_floor, cfg.graph_band, cfg.workers);
    save_graph(g, rd.graph());
}

inline void stage_train(const RunConfig& cfg) {
    RunDir rd(cfg.out_dir);
    Corpus corpus = load_corpus(resolve_corpus_path(cfg));
    SignedBeliefGraph g = load_graph(rd.graph());
    g.floor = cfg.graph_floor;
    g.band = cfg.graph_band;
    TrainResult tr = train(g, corpus.labels(), cfg.train, cfg.loss);
    save_checkpoint(tr.params, cfg.train, cfg.loss, rd.checkpoint());
    save_loss_history(tr.history, rd.loss_history());
    EmbeddingMatrix zb, zp;
    zb.data = tr.z.z_b;
    zp.data = tr.z.z_p;
    std::vector<std::string> ids;
    for (const auto& m : corpus.messages) ids.push_back(m.id);
    zb.row_ids = ids;
    zp.row_ids = ids;
    save_embeddings(zb, rd.belief());
    save_embeddings(zp, rd.persona());
}

inline void stage_cluster(const RunConfig& cfg) {
    RunDir rd(cfg.out_dir);
    EmbeddingMatrix zp = read_embeddings(rd.persona());
    ClusterAssignment ca = cluster_embeddings(zp.data, cfg.cluster);
    save_assignment(ca, zp.row_ids, rd.assignment());
}

// ---------------------------------------------------------------------------
// Evaluation and reports

namespace detail {

inline json metrics_to_json(const MetricsReport& m) {
    json per = json::array();
    for (const auto& c : m.per_cluster) {
        json jc;
        jc["size"] = c.size;
        jc["top_terms"] = c.top_terms;
        jc["mean_intra_distance"] = c.mean_intra_distance;
        per.push_back(jc);
    }
    json out;
    out["avg_coherence"] = m.avg_coherence;
    out["silhouette"] = m.silhouette;
    if (m.dbi_defined) out["dbi"] = m.dbi;
    else out["dbi"] = nullptr;
    if (m.cdbi_defined) out["cdbi"] = m.cdbi_value;
    else out["cdbi"] = nullptr;
    out["per_cluster"] = per;
    return out;
}

}  // namespace detail

inline void stage_evaluate(const RunConfig& cfg) {
    RunDir rd(cfg.out_dir);
    Corpus corpus = load_corpus(resolve_corpus_path(cfg));
    EmbeddingMatrix zp = read_embeddings(rd.persona());

    // reconstruct the clustering deterministically in the reduced space
    ClusterAssignment ca = cluster_embeddings(zp.data, cfg.cluster);
    MetricsReport metrics = evaluate_clustering(corpus, ca.reduced, ca.labels, cfg.top_terms);

    SignedBeliefGraph g = load_graph(rd.graph());
    g.floor = cfg.graph_floor;
    g.band = cfg.graph_band;

    json rep;
    {
        json jg;
        jg["nodes"] = g.n_nodes;
        jg["edges"] = g.edges.size();
        jg["positive_edges"] = g.positive_count();
        jg["negative_edges"] = g.negative_count();
        jg["mu"] = g.stats.mu;
        jg["sigma"] = g.stats.sigma;
        rep["graph"] = jg;
    }
    {
        json jc;
        jc["k_selected"] = ca.k_selected;
        jc["k_final"] = ca.k_final;
        jc["pca_components"] = ca.pca_components;
        json curve = json::array();
        for (const auto& [k, s] : ca.silhouette_curve) curve.push_back({k, s});
        jc["silhouette_curve"] = curve;
        json merges = json::array();
        for (const auto& m : ca.merge_log) merges.push_back({m.into, m.from, m.cosine});
        jc["merges"] = merges;
        rep["clustering"] = jc;
    }
    rep["metrics"] = detail::metrics_to_json(metrics);

    std::vector<std::string> flags;
    if (g.negative_count() == 0) flags.push_back("no negative edges");
    if (g.negative_band_closed()) flags.push_back("negative band below floor");
    size_t degenerate = 0;
    {
        EnrichedMatrix enriched = load_enriched(rd.enriched());
        degenerate = enriched.degenerate_count();
        if (degenerate > 0) flags.push_back("degenerate embedding rows");
    }
    rep["degenerate_rows"] = degenerate;
    rep["flags"] = flags;

    // context row: plain k-means at k_final on the same reduced space
    if (ca.k_final >= 2) {
        auto km = kmeans(ca.reduced, ca.k_final, cfg.seed);
        MetricsReport kmr = evaluate_clustering(corpus, ca.reduced, km, cfg.top_terms);
        json jb;
        jb["avg_coherence"] = kmr.avg_coherence;
        jb["silhouette"] = kmr.silhouette;
        jb["cdbi"] = kmr.cdbi_defined ? json(kmr.cdbi_value) : json(nullptr);
        rep["kmeans_baseline"] = jb;
    }

    // ARI against planted archetypes when ground truth is available
    std::string gt_path = cfg.ground_truth_path;
    if (gt_path.empty() && std::filesystem::exists(rd.ground_truth())) gt_path = rd.ground_truth();
    if (!gt_path.empty()) {
        GroundTruth gt = load_ground_truth(gt_path, corpus);
        rep["ground_truth"] = {{"ari_archetype", adjusted_rand(ca.labels, gt.archetype)}};
    }

    write_file(rd.report_json(), rep.dump(2) + "\n");

    // plain-text summary
    std::string txt;
    txt += "run summary\n===========\n";
    txt += "nodes " + std::to_string(g.n_nodes) + ", edges " + std::to_string(g.edges.size()) +
           " (+" + std::to_string(g.positive_count()) + " / -" +
           std::to_string(g.negative_count()) + ")\n";
    txt += "k_selected " + std::to_string(ca.k_selected) + ", k_final " +
           std::to_string(ca.k_final) + ", pca_components " +
           std::to_string(ca.pca_components) + "\n";
    txt += "avg_coherence " + fmt_f(metrics.avg_coherence, 4) + "\n";
    txt += "silhouette    " + fmt_f(metrics.silhouette, 4) + "\n";
    txt += "dbi           " + (metrics.dbi_defined ? fmt_f(metrics.dbi, 4) : "undefined") + "\n";
    txt += "cdbi          " +
           (metrics.cdbi_defined ? fmt_f(metrics.cdbi_value, 4) : "undefined") + "\n";
    for (const auto& f : flags) txt += "flag: " + f + "\n";
    txt += "\ncluster  size  top terms\n";
    for (size_t c = 0; c < metrics.per_cluster.size(); ++c) {
        const auto& pc = metrics.per_cluster[c];
        std::string terms;
        for (size_t t = 0; t < pc.top_terms.size(); ++t) {
            if (t) terms += " ";
            terms += pc.top_terms[t];
        }
        txt += std::to_string(c) + "  " + std::to_string(pc.size) + "  " + terms + "\n";
    }
    write_file(rd.report_txt(), txt);

    // cluster assignment with the final labels travels with the report
    {
        std::vector<std::string> ids;
        for (const auto& m : corpus.messages) ids.push_back(m.id);
        save_assignment(ca, ids, rd.assignment());
    }
}

inline void stage_ablate(const RunConfig& cfg) {
    RunDir rd(cfg.out_dir);
    Corpus corpus = load_corpus(resolve_corpus_path(cfg));
    EnrichedMatrix enriched = load_enriched(rd.enriched());
    SignedBeliefGraph g = load_graph(rd.graph());
    g.floor = cfg.graph_floor;
    g.band = cfg.graph_band;
    auto rows = run_ablation(g, corpus.labels(), corpus, enriched.data, cfg.train, cfg.loss,
                             cfg.cluster, cfg.top_terms);
    json out = json::array();
    for (const auto& r : rows) {
        json jr;
        jr["variant"] = r.name;
        jr["k_final"] = r.k_final;
        jr["avg_coherence"] = r.metrics.avg_coherence;
        jr["silhouette"] = r.metrics.silhouette;
        jr["dbi"] = r.metrics.dbi_defined ? json(r.metrics.dbi) : json(nullptr);
        jr["cdbi"] = r.metrics.cdbi_defined ? json(r.metrics.cdbi_value) : json(nullptr);
        jr["delta_cdbi_pct"] = r.delta_defined ? json(r.delta_cdbi) : json(nullptr);
        out.push_back(jr);
    }
    write_file(rd.ablation_json(), out.dump(2) + "\n");

    std::string txt = "variant            coherence  silhouette  dbi      cdbi     delta%\n";
    for (const auto& r : rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%-18s %9.4f  %10.4f  %7.4f  %7.3f  %s\n", r.name.c_str(),
                      r.metrics.avg_coherence, r.metrics.silhouette,
                      r.metrics.dbi_defined ? r.metrics.dbi : 0.0,
                      r.metrics.cdbi_defined ? r.metrics.cdbi_value : 0.0,
                      r.delta_defined ? fmt_f(r.delta_cdbi, 1).c_str() : "n/a");
        txt += line;
    }
    write_file(rd.ablation_txt(), txt);
}

// ---------------------------------------------------------------------------
// Manifest: config, seed, input hashes, artifact checksums.

inline void write_manifest(const RunConfig& cfg, const std::vector<std::string>& artifacts) {
    RunDir rd(cfg.out_dir);
    json m;
    m["config"] = cfg.raw;
    m["seed"] = cfg.seed;
    m["workers"] = cfg.workers;
    json inputs = json::object();
    if (!cfg.corpus_path.empty() && std::filesystem::exists(cfg.corpus_path))
        inputs["corpus"] = hex64(hash_file(cfg.corpus_path));
    if (!cfg.embeddings_path.empty() && std::filesystem::exists(cfg.embeddings_path))
        inputs["embeddings"] = hex64(hash_file(cfg.embeddings_path));
    if (!cfg.lexicon_path.empty() && std::filesystem::exists(cfg.lexicon_path))
        inputs["lexicon"] = hex64(hash_file(cfg.lexicon_path));
    m["inputs"] = inputs;
    json arts = json::object();
    for (const auto& name : artifacts) {
        std::string p = rd.path(name);
        if (std::filesystem::exists(p)) arts[name] = hex64(hash_file(p));
    }
    m["artifacts"] = arts;
    write_file(rd.manifest(), m.dump(2) + "\n");
}

inline const std::vector<std::string>& pipeline_artifacts() {
    static const std::vector<std::string> names = {
        "corpus.jsonl",  "base.sbem",       "base.sbem.ids", "groundtruth.txt",
        "enriched.sbem", "enriched.sbem.ids", "graph.txt",   "checkpoint.bin",
        "loss_history.txt", "belief.sbem",  "belief.sbem.ids", "persona.sbem",
        "persona.sbem.ids", "assignment.txt", "report.json", "report.txt",
        "ablation.json", "ablation.txt"};
    return names;
}

// featurize -> graph -> train -> cluster -> evaluate, with the failing stage
// named on error and partial artifacts left in place.
inline void run_pipeline(const RunConfig& cfg) {
    auto guard = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            fail(std::string("stage '") + name + "' failed: " + e.what());
        }
    };
    guard("featurize", [&] { stage_featurize(cfg); });
    guard("graph", [&] { stage_graph(cfg); });
    guard("train", [&] { stage_train(cfg); });
    guard("cluster", [&] { stage_cluster(cfg); });
    guard("evaluate", [&] { stage_evaluate(cfg); });
    write_manifest(cfg, pipeline_artifacts());
}

}  // namespace sbg
