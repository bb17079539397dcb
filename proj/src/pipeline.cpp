#include "roadsage/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <unordered_map>

#include "roadsage/errors.hpp"
#include "roadsage/util.hpp"

namespace roadsage {

using nlohmann::json;

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::orn: return "ORN";
        case Variant::srn: return "SRN";
        case Variant::srn_vis: return "SRN+Vis";
    }
    return "?";
}

std::string variant_slug(Variant v) {
    switch (v) {
        case Variant::orn: return "orn";
        case Variant::srn: return "srn";
        case Variant::srn_vis: return "srn_vis";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    std::string k;
    for (const char c : s) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (k == "orn") return Variant::orn;
    if (k == "srn") return Variant::srn;
    if (k == "srn+vis" || k == "srn_vis" || k == "srnvis") return Variant::srn_vis;
    throw ConfigError("unknown variant: " + s);
}

std::string mode_name(TrainMode m) {
    return m == TrainMode::supervised ? "supervised" : "unsupervised";
}

TrainMode mode_from_string(const std::string& s) {
    if (s == "supervised") return TrainMode::supervised;
    if (s == "unsupervised") return TrainMode::unsupervised;
    throw ConfigError("unknown training mode: " + s);
}

std::vector<TrainMode> TrainingConfig::modes() const {
    if (mode == "both") return {TrainMode::supervised, TrainMode::unsupervised};
    return {mode_from_string(mode)};
}

// ---------------------------------------------------------------------------
// Config (de)serialization
// ---------------------------------------------------------------------------

namespace {

json synth_to_json(const SynthConfig& s) {
    return json{{"grid_rows", s.grid_rows},       {"grid_cols", s.grid_cols},
                {"block_m", s.block_m},           {"arterial_every", s.arterial_every},
                {"noise_sigma", s.noise_sigma},   {"label_noise", s.label_noise},
                {"cellsize", s.cellsize},         {"stripe_width_m", s.stripe_width_m},
                {"run_blocks", s.run_blocks},     {"seed", s.seed}};
}

SynthConfig synth_from_json(const json& j) {
    SynthConfig s;
    s.grid_rows = j.value("grid_rows", s.grid_rows);
    s.grid_cols = j.value("grid_cols", s.grid_cols);
    s.block_m = j.value("block_m", s.block_m);
    s.arterial_every = j.value("arterial_every", s.arterial_every);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.label_noise = j.value("label_noise", s.label_noise);
    s.cellsize = j.value("cellsize", s.cellsize);
    s.stripe_width_m = j.value("stripe_width_m", s.stripe_width_m);
    s.run_blocks = j.value("run_blocks", s.run_blocks);
    s.seed = j.value("seed", s.seed);
    return s;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
    c.out_dir = j.value("out_dir", std::string("out"));
    if (j.contains("graph") && j["graph"].is_string()) c.graph_path = j["graph"].get<std::string>();
    if (j.contains("raster_manifest") && j["raster_manifest"].is_string())
        c.raster_manifest = j["raster_manifest"].get<std::string>();
    if (j.contains("synth") && j["synth"].is_object()) c.synth = synth_from_json(j["synth"]);

    if (j.contains("segmentation")) {
        const json& s = j["segmentation"];
        c.segmentation.target_traveltime_s =
            s.value("target_traveltime_s", c.segmentation.target_traveltime_s);
        c.segmentation.target_length_m = s.value("target_length_m", c.segmentation.target_length_m);
    }
    if (j.contains("features")) {
        const json& f = j["features"];
        c.features.geometry_points = f.value("geometry_points", c.features.geometry_points);
        c.features.histogram_bins = f.value("histogram_bins", c.features.histogram_bins);
        c.features.gps_presence_flags =
            f.value("gps_presence_flags", c.features.gps_presence_flags);
        c.features.zscore_binary = f.value("zscore_binary", c.features.zscore_binary);
        c.features.zscore_histograms = f.value("zscore_histograms", c.features.zscore_histograms);
    }
    if (j.contains("sage")) {
        const json& s = j["sage"];
        c.sage.layers = s.value("layers", c.sage.layers);
        if (s.contains("hidden_units")) c.sage.hidden_units = s["hidden_units"].get<std::vector<int>>();
        c.sage.embedding_dim = s.value("embedding_dim", c.sage.embedding_dim);
        if (s.contains("aggregator"))
            c.sage.aggregator = aggregator_from_string(s["aggregator"].get<std::string>());
        if (s.contains("fanouts")) c.sage.fanouts = s["fanouts"].get<std::vector<int>>();
        c.sage.dropout_rate = s.value("dropout_rate", c.sage.dropout_rate);
        c.sage.self_concat = s.value("self_concat", c.sage.self_concat);
    }
    if (j.contains("training")) {
        const json& t = j["training"];
        c.training.mode = t.value("mode", c.training.mode);
        c.training.supervised_epochs = t.value("supervised_epochs", c.training.supervised_epochs);
        c.training.supervised_batch = t.value("supervised_batch", c.training.supervised_batch);
        c.training.unsupervised_epochs =
            t.value("unsupervised_epochs", c.training.unsupervised_epochs);
        c.training.unsupervised_batch =
            t.value("unsupervised_batch", c.training.unsupervised_batch);
        c.training.learning_rate = t.value("learning_rate", c.training.learning_rate);
        c.training.weight_decay = t.value("weight_decay", c.training.weight_decay);
        c.training.negatives = t.value("negatives", c.training.negatives);
        c.training.walk_length = t.value("walk_length", c.training.walk_length);
        c.training.walk_window = t.value("walk_window", c.training.walk_window);
        c.training.eval_runs = t.value("eval_runs", c.training.eval_runs);
    }
    if (j.contains("seeds")) {
        const json& s = j["seeds"];
        c.seeds.data = s.value("data", c.seeds.data);
        c.seeds.split = s.value("split", c.seeds.split);
        c.seeds.model = s.value("model", c.seeds.model);
    }
    c.search_budget = j.value("search_budget", c.search_budget);
    c.validate();
    return c;
}

json PipelineConfig::to_json() const {
    json j;
    j["out_dir"] = out_dir;
    j["graph"] = graph_path ? json(*graph_path) : json(nullptr);
    j["raster_manifest"] = raster_manifest ? json(*raster_manifest) : json(nullptr);
    j["synth"] = synth ? synth_to_json(*synth) : json(nullptr);
    j["segmentation"] = json{{"target_traveltime_s", segmentation.target_traveltime_s},
                             {"target_length_m", segmentation.target_length_m}};
    j["features"] = json{{"geometry_points", features.geometry_points},
                         {"histogram_bins", features.histogram_bins},
                         {"gps_presence_flags", features.gps_presence_flags},
                         {"zscore_binary", features.zscore_binary},
                         {"zscore_histograms", features.zscore_histograms}};
    j["sage"] = json{{"layers", sage.layers},
                     {"hidden_units", sage.hidden_units},
                     {"embedding_dim", sage.embedding_dim},
                     {"aggregator", aggregator_to_string(sage.aggregator)},
                     {"fanouts", sage.fanouts},
                     {"dropout_rate", sage.dropout_rate},
                     {"self_concat", sage.self_concat}};
    j["training"] = json{{"mode", training.mode},
                         {"supervised_epochs", training.supervised_epochs},
                         {"supervised_batch", training.supervised_batch},
                         {"unsupervised_epochs", training.unsupervised_epochs},
                         {"unsupervised_batch", training.unsupervised_batch},
                         {"learning_rate", training.learning_rate},
                         {"weight_decay", training.weight_decay},
                         {"negatives", training.negatives},
                         {"walk_length", training.walk_length},
                         {"walk_window", training.walk_window},
                         {"eval_runs", training.eval_runs}};
    j["seeds"] = json{{"data", seeds.data}, {"split", seeds.split}, {"model", seeds.model}};
    j["search_budget"] = search_budget;
    return j;
}

std::string PipelineConfig::config_hash() const { return hash_hex(to_json().dump()); }

void PipelineConfig::validate() const {
    if (out_dir.empty()) throw ConfigError("out_dir must be set");
    if (!graph_path && !synth)
        throw ConfigError("config needs either a graph path or a synth block");
    if (training.mode != "supervised" && training.mode != "unsupervised" &&
        training.mode != "both")
        throw ConfigError("training.mode must be supervised, unsupervised or both");
    if (training.eval_runs < 1) throw ConfigError("eval_runs must be >= 1");
    if (training.supervised_epochs < 0 || training.unsupervised_epochs < 0)
        throw ConfigError("epoch counts must be >= 0");
    if (training.supervised_batch < 1 || training.unsupervised_batch < 1)
        throw ConfigError("batch sizes must be >= 1");
    if (!(training.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (training.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
    if (training.negatives < 1) throw ConfigError("negatives must be >= 1");
    if (training.walk_length < 1) throw ConfigError("walk_length must be >= 1");
    if (training.walk_window < 1) throw ConfigError("walk_window must be >= 1");
    if (search_budget < 1) throw ConfigError("search_budget must be >= 1");
    if (synth) synth->validate();
    sage.validate();
}

PipelineConfig load_pipeline_config(const std::string& path) {
    json j;
    try {
        j = load_json_file(path);
    } catch (const DataError& e) {
        throw ConfigError(std::string("cannot load config: ") + e.what());
    }
    return PipelineConfig::from_json(j);
}

PipelinePaths pipeline_paths(const PipelineConfig& cfg) {
    PipelinePaths p;
    p.data_dir = path_join(cfg.out_dir, "data");
    p.orn_graph = cfg.graph_path ? *cfg.graph_path : path_join(p.data_dir, "graph.jsonl");
    p.raster_manifest = cfg.raster_manifest
                            ? *cfg.raster_manifest
                            : (cfg.synth ? path_join(p.data_dir, "manifest.json") : std::string());
    p.labels = path_join(p.data_dir, "labels.json");
    p.srn_graph = path_join(cfg.out_dir, "srn.jsonl");
    p.dual_orn = path_join(cfg.out_dir, "dual_orn.json");
    p.dual_srn = path_join(cfg.out_dir, "dual_srn.json");
    p.features_orn = path_join(cfg.out_dir, "features_orn.jsonl");
    p.features_srn = path_join(cfg.out_dir, "features_srn.jsonl");
    p.features_srn_vis = path_join(cfg.out_dir, "features_srn_vis.jsonl");
    p.results = path_join(cfg.out_dir, "results.json");
    p.run_meta = path_join(cfg.out_dir, "run_meta.json");
    p.models_dir = path_join(cfg.out_dir, "models");
    p.records_dir = path_join(cfg.out_dir, "records");
    return p;
}

std::string PipelinePaths::model(Variant v, TrainMode m, int run) const {
    return path_join(models_dir, "model_" + variant_slug(v) + "_" + mode_name(m) + "_run" +
                                     std::to_string(run) + ".json");
}

std::string PipelinePaths::train_record(Variant v, TrainMode m, int run) const {
    return path_join(records_dir, "train_" + variant_slug(v) + "_" + mode_name(m) + "_run" +
                                      std::to_string(run) + ".json");
}

std::string PipelinePaths::embeddings(Variant v, int run) const {
    return path_join(models_dir,
                     "embeddings_" + variant_slug(v) + "_run" + std::to_string(run) + ".jsonl");
}

std::string PipelinePaths::trials(Variant v, TrainMode m) const {
    return path_join(records_dir, "trials_" + variant_slug(v) + "_" + mode_name(m) + ".json");
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

SynthPaths stage_data(const PipelineConfig& cfg) {
    const PipelinePaths paths = pipeline_paths(cfg);
    SynthPaths out;
    out.graph = paths.orn_graph;
    out.manifest = paths.raster_manifest;
    out.labels = paths.labels;
    if (cfg.graph_path) return out;  // externally provided data

    SynthConfig synth_cfg = *cfg.synth;
    synth_cfg.seed = synth_cfg.seed ^ cfg.seeds.data;
    const SynthOutput synth = generate_synthetic(synth_cfg);
    ensure_directory(paths.data_dir);
    return write_synthetic(synth, paths.data_dir);
}

std::string stage_segment(const PipelineConfig& cfg) {
    const PipelinePaths paths = pipeline_paths(cfg);
    const RoadGraph orn = load_graph(paths.orn_graph);
    const RoadGraph srn = segment_pipeline(orn, cfg.segmentation);
    ensure_directory(cfg.out_dir);
    save_graph(srn, paths.srn_graph);
    return paths.srn_graph;
}

json dual_to_json(const DualGraph& dual) {
    json edges = json::array();
    for (const auto& [from, to] : dual.edges()) edges.push_back(json::array({from, to}));
    return json{{"node_ids", dual.node_ids()}, {"edges", std::move(edges)}};
}

void write_dual(const std::string& graph_path, const std::string& out_path) {
    const RoadGraph g = load_graph(graph_path);
    save_json_file(out_path, dual_to_json(to_dual(g)));
}

void stage_dualize(const PipelineConfig& cfg) {
    const PipelinePaths paths = pipeline_paths(cfg);
    write_dual(paths.orn_graph, paths.dual_orn);
    write_dual(paths.srn_graph, paths.dual_srn);
}

namespace {

// Per-edge channel histograms; empty patches yield the zero histogram and a
// warning instead of aborting the run.
std::vector<std::vector<Histogram>> edge_histograms(const RoadGraph& g, const RasterStack& stack,
                                                    int bins, int resample_points) {
    std::vector<std::vector<Histogram>> out(g.edges().size());
    long empty_patches = 0;
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const RoadEdge& e = g.edges()[i];
        const FootprintRect rect = footprint_rectangle(e, 120.0, 120.0, resample_points);
        out[i].reserve(stack.channels.size());
        for (const RasterChannel& ch : stack.channels) {
            const std::vector<double> pixels = sample_patch(ch.grid, rect);
            if (pixels.empty()) {
                ++empty_patches;
                if (empty_patches <= 5)
                    std::cerr << "warning: empty patch for edge " << e.id << " on channel "
                              << ch.name << "\n";
            }
            out[i].push_back(
                intensity_histogram(pixels, bins, ch.histogram_lo(), ch.histogram_hi()));
        }
    }
    if (empty_patches > 5)
        std::cerr << "warning: " << empty_patches << " empty patches in total\n";
    return out;
}

}  // namespace

std::string stage_features(const PipelineConfig& cfg, Variant v) {
    const PipelinePaths paths = pipeline_paths(cfg);
    const std::string graph_path = v == Variant::orn ? paths.orn_graph : paths.srn_graph;
    const RoadGraph g = load_graph(graph_path);

    FeatureSpec spec = cfg.features;
    spec.include_vision = v == Variant::srn_vis;
    spec.channels.clear();

    std::vector<std::vector<Histogram>> hists;
    if (spec.include_vision) {
        if (paths.raster_manifest.empty())
            throw ConfigError("the SRN+Vis variant needs a raster manifest");
        const RasterStack stack = load_raster_manifest(paths.raster_manifest);
        for (const RasterChannel& ch : stack.channels) spec.channels.push_back(ch.name);
        hists = edge_histograms(g, stack, spec.histogram_bins, spec.geometry_points);
    }
    spec = spec_for_graph(spec, g);

    std::vector<FeatureVector> vectors;
    vectors.reserve(g.edges().size());
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const RoadEdge& e = g.edges()[i];
        vectors.push_back(
            assemble_features(e, spec, spec.include_vision ? &hists[i] : nullptr));
    }

    const std::string out_path = v == Variant::orn
                                     ? paths.features_orn
                                     : (v == Variant::srn ? paths.features_srn
                                                          : paths.features_srn_vis);
    ensure_directory(cfg.out_dir);
    save_features(out_path, spec, vectors, cfg.config_hash(), cfg.seeds.data);
    return out_path;
}

NodeDataset build_dataset(const PipelineConfig& cfg, Variant v, std::uint64_t split_seed) {
    const PipelinePaths paths = pipeline_paths(cfg);
    const RoadGraph orn = load_graph(paths.orn_graph);
    const RoadGraph srn = load_graph(paths.srn_graph);
    const SplitAssignment split = split_and_propagate(orn, srn, split_seed);

    const RoadGraph& g = v == Variant::orn ? orn : srn;
    const auto& split_map = v == Variant::orn ? split.orn : split.srn;
    const std::string feature_path = v == Variant::orn
                                         ? paths.features_orn
                                         : (v == Variant::srn ? paths.features_srn
                                                              : paths.features_srn_vis);
    auto [spec, vectors] = load_features(feature_path);

    std::unordered_map<std::string, const FeatureVector*> by_id;
    for (const FeatureVector& fv : vectors) by_id.emplace(fv.edge_id, &fv);

    NodeDataset data;
    data.variant = variant_name(v);
    data.dual = to_dual(g);
    data.node_ids = data.dual.node_ids();
    data.spec = spec;

    const int n = data.dual.size();
    const int dim = spec.dimension();
    data.parent_of.resize(static_cast<std::size_t>(n));
    data.labels.assign(static_cast<std::size_t>(n), -1);
    data.split.assign(static_cast<std::size_t>(n), Split::train);
    std::vector<FeatureVector> aligned(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::string& id = data.node_ids[static_cast<std::size_t>(i)];
        const RoadEdge& e = g.edge(id);
        data.parent_of[static_cast<std::size_t>(i)] = e.parent_id;
        if (e.highway) data.labels[static_cast<std::size_t>(i)] = ClassTaxonomy::index_of(*e.highway);
        const auto sit = split_map.find(id);
        if (sit == split_map.end()) throw DataError("no split assignment for edge " + id);
        data.split[static_cast<std::size_t>(i)] = sit->second;
        const auto fit = by_id.find(id);
        if (fit == by_id.end()) throw DataError("no feature vector for edge " + id);
        aligned[static_cast<std::size_t>(i)] = *fit->second;
    }

    // Z-score with training-row statistics only.
    std::vector<const FeatureVector*> train_vecs;
    for (int i = 0; i < n; ++i)
        if (data.split[static_cast<std::size_t>(i)] == Split::train)
            train_vecs.push_back(&aligned[static_cast<std::size_t>(i)]);
    if (train_vecs.empty()) throw DataError("empty training split");
    const Normalizer norm = Normalizer::fit(train_vecs, spec);
    data.features = Mat(n, dim);
    for (int i = 0; i < n; ++i) {
        FeatureVector fv = aligned[static_cast<std::size_t>(i)];
        norm.apply(fv);
        std::copy(fv.values.begin(), fv.values.end(), data.features.row(i));
    }

    for (const RoadEdge& e : orn.edges()) {
        if (e.highway) {
            const int idx = ClassTaxonomy::index_of(*e.highway);
            if (idx >= 0) data.orn_labels.emplace(e.id, idx);
        }
    }
    return data;
}

RunOutcome stage_train(const PipelineConfig& cfg, Variant v, TrainMode m, int run) {
    const PipelinePaths paths = pipeline_paths(cfg);
    RunOutcome outcome;
    outcome.variant = v;
    outcome.mode = m;
    outcome.run = run;
    outcome.split_seed = cfg.seeds.split + static_cast<std::uint64_t>(run);
    outcome.model_seed = cfg.seeds.model + static_cast<std::uint64_t>(run);

    const NodeDataset data = build_dataset(cfg, v, outcome.split_seed);

    TrainConfig tc;
    tc.adam.learning_rate = cfg.training.learning_rate;
    tc.adam.weight_decay = cfg.training.weight_decay;
    tc.seed = outcome.model_seed;
    tc.negatives = cfg.training.negatives;
    tc.walk_length = cfg.training.walk_length;
    tc.walk_window = cfg.training.walk_window;

    ensure_directory(paths.models_dir);
    ensure_directory(paths.records_dir);
    outcome.model_path = paths.model(v, m, run);

    json record;
    if (m == TrainMode::supervised) {
        tc.epochs = cfg.training.supervised_epochs;
        tc.batch_size = cfg.training.supervised_batch;
        const SupervisedResult res = train_supervised(data, cfg.sage, tc);
        outcome.best_epoch = res.best_epoch;
        outcome.val_f1 = res.best_val_f1;
        outcome.batches_checked = res.batches_checked;
        outcome.leak_violations = res.leak_violations;
        outcome.test = evaluate_at_orn_level(
            data, predict_nodes(res.best_model, data, data.nodes_in(Split::test)));
        save_model(res.best_model, outcome.model_path, cfg.config_hash(), outcome.model_seed);

        json history = json::array();
        for (const EpochRecord& r : res.history)
            history.push_back(
                json{{"epoch", r.epoch}, {"mean_loss", r.mean_loss}, {"val_f1", r.val_f1}});
        record["history"] = std::move(history);
    } else {
        tc.epochs = cfg.training.unsupervised_epochs;
        tc.batch_size = cfg.training.unsupervised_batch;
        const UnsupervisedResult res = train_unsupervised(data, cfg.sage, tc);

        // Downstream logistic classifier on the frozen embeddings.
        const std::vector<int> train_rows = data.nodes_in(Split::train);
        const LogisticModel clf = fit_downstream_classifier(res.embeddings, data.labels,
                                                            train_rows, ClassTaxonomy::num_classes);
        const auto eval_rows = [&](Split s) {
            const std::vector<int> rows = data.nodes_in(s);
            Mat x(static_cast<int>(rows.size()), res.embeddings.cols);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double* src = res.embeddings.row(rows[i]);
                std::copy(src, src + res.embeddings.cols, x.row(static_cast<int>(i)));
            }
            Predictions preds;
            preds.rows = rows;
            preds.probs = clf.predict_proba(x);
            preds.pred = clf.predict(x);
            return preds;
        };
        outcome.test = evaluate_at_orn_level(data, eval_rows(Split::test));
        outcome.val_f1 = evaluate_at_orn_level(data, eval_rows(Split::val)).f1_8class;
        outcome.best_epoch = tc.epochs;
        save_model(res.model, outcome.model_path, cfg.config_hash(), outcome.model_seed);

        json history = json::array();
        for (const EpochRecord& r : res.history)
            history.push_back(json{{"epoch", r.epoch}, {"mean_loss", r.mean_loss}});
        record["history"] = std::move(history);
    }

    record["variant"] = variant_name(v);
    record["mode"] = mode_name(m);
    record["run"] = run;
    record["split_seed"] = outcome.split_seed;
    record["model_seed"] = outcome.model_seed;
    record["best_epoch"] = outcome.best_epoch;
    record["val_f1"] = outcome.val_f1;
    record["test_f1_8class"] = outcome.test.f1_8class;
    record["test_f1_binary"] = outcome.test.f1_binary;
    record["test_orn_edges"] = outcome.test.orn_edges;
    record["batches_checked"] = outcome.batches_checked;
    record["leak_violations"] = outcome.leak_violations;
    record["config_hash"] = cfg.config_hash();
    save_json_file(paths.train_record(v, m, run), record);
    return outcome;
}

EvalMetrics stage_evaluate(const PipelineConfig& cfg, const std::string& model_path, Variant v,
                           std::uint64_t split_seed) {
    const SageModel model = load_model(model_path);
    const NodeDataset data = build_dataset(cfg, v, split_seed);
    if (model.input_dim != data.features.cols)
        throw DataError("model input dimension does not match the variant's features");
    if (model.config.num_classes > 0) {
        return evaluate_at_orn_level(data,
                                     predict_nodes(model, data, data.nodes_in(Split::test)));
    }
    // Headless checkpoint: embeddings plus the downstream classifier.
    std::vector<int> all(static_cast<std::size_t>(data.dual.size()));
    for (int i = 0; i < data.dual.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    const BatchPlan plan = full_neighborhood(data.dual, all, model.config.layers);
    const Mat emb = sage_forward(model, data.features, plan, false, nullptr, nullptr);
    const LogisticModel clf = fit_downstream_classifier(emb, data.labels,
                                                        data.nodes_in(Split::train),
                                                        ClassTaxonomy::num_classes);
    const std::vector<int> rows = data.nodes_in(Split::test);
    Mat x(static_cast<int>(rows.size()), emb.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = emb.row(rows[i]);
        std::copy(src, src + emb.cols, x.row(static_cast<int>(i)));
    }
    Predictions preds;
    preds.rows = rows;
    preds.probs = clf.predict_proba(x);
    preds.pred = clf.predict(x);
    return evaluate_at_orn_level(data, preds);
}

std::string stage_embed(const PipelineConfig& cfg, Variant v, int run,
                        const std::optional<std::string>& model_path) {
    const PipelinePaths paths = pipeline_paths(cfg);
    const std::uint64_t split_seed = cfg.seeds.split + static_cast<std::uint64_t>(run);
    const NodeDataset data = build_dataset(cfg, v, split_seed);

    Mat emb;
    if (model_path) {
        const SageModel model = load_model(*model_path);
        std::vector<int> all(static_cast<std::size_t>(data.dual.size()));
        for (int i = 0; i < data.dual.size(); ++i) all[static_cast<std::size_t>(i)] = i;
        const BatchPlan plan = full_neighborhood(data.dual, all, model.config.layers);
        emb = sage_forward(model, data.features, plan, false, nullptr, nullptr);
    } else {
        TrainConfig tc;
        tc.epochs = cfg.training.unsupervised_epochs;
        tc.batch_size = cfg.training.unsupervised_batch;
        tc.adam.learning_rate = cfg.training.learning_rate;
        tc.adam.weight_decay = cfg.training.weight_decay;
        tc.seed = cfg.seeds.model + static_cast<std::uint64_t>(run);
        tc.negatives = cfg.training.negatives;
        tc.walk_length = cfg.training.walk_length;
        tc.walk_window = cfg.training.walk_window;
        emb = train_unsupervised(data, cfg.sage, tc).embeddings;
    }

    ensure_directory(paths.models_dir);
    const std::string out_path = paths.embeddings(v, run);
    std::string body;
    {
        json header{{"variant", variant_name(v)},
                    {"dimension", emb.cols},
                    {"config_hash", cfg.config_hash()},
                    {"seed", cfg.seeds.model + static_cast<std::uint64_t>(run)}};
        body += header.dump() + "\n";
        for (int i = 0; i < emb.rows; ++i) {
            std::vector<double> values(emb.row(i), emb.row(i) + emb.cols);
            json j{{"node_id", data.node_ids[static_cast<std::size_t>(i)]}, {"values", values}};
            body += j.dump() + "\n";
        }
    }
    write_text_file(out_path, body);
    return out_path;
}

SearchResult stage_search(const PipelineConfig& cfg, Variant v, TrainMode m, int budget) {
    const PipelinePaths paths = pipeline_paths(cfg);
    if (m != TrainMode::supervised)
        throw ConfigError("hyperparameter search is defined for supervised training");
    const NodeDataset data = build_dataset(cfg, v, cfg.seeds.split);

    TrainConfig tc;
    tc.epochs = cfg.training.supervised_epochs;
    tc.batch_size = cfg.training.supervised_batch;
    tc.adam.learning_rate = cfg.training.learning_rate;
    tc.adam.weight_decay = cfg.training.weight_decay;
    tc.negatives = cfg.training.negatives;

    const HyperparameterSpace space;
    const SearchResult result =
        hyperparameter_search(data, cfg.sage, tc, space, budget, cfg.seeds.model);

    json trials = json::array();
    for (const Trial& t : result.trials) {
        trials.push_back(json{{"index", t.index},
                              {"hidden_units", t.hidden_units},
                              {"embedding_dim", t.embedding_dim},
                              {"learning_rate", t.learning_rate},
                              {"weight_decay", t.weight_decay},
                              {"dropout_rate", t.dropout_rate},
                              {"val_f1", t.val_f1},
                              {"best_epoch", t.best_epoch}});
    }
    ensure_directory(paths.records_dir);
    save_json_file(paths.trials(v, m),
                   json{{"variant", variant_name(v)},
                        {"mode", mode_name(m)},
                        {"budget", budget},
                        {"seed", cfg.seeds.model},
                        {"config_hash", cfg.config_hash()},
                        {"best_index", result.best.index},
                        {"trials", std::move(trials)}});
    return result;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

json run_pipeline(const PipelineConfig& cfg) {
    const PipelinePaths paths = pipeline_paths(cfg);
    ensure_directory(cfg.out_dir);

    stage_data(cfg);
    stage_segment(cfg);
    stage_dualize(cfg);
    stage_features(cfg, Variant::orn);
    stage_features(cfg, Variant::srn);
    stage_features(cfg, Variant::srn_vis);

    json results;
    results["config_hash"] = cfg.config_hash();
    results["seeds"] =
        json{{"data", cfg.seeds.data}, {"split", cfg.seeds.split}, {"model", cfg.seeds.model}};
    results["eval_runs"] = cfg.training.eval_runs;
    results["mode"] = cfg.training.mode;

    for (const TrainMode m : cfg.training.modes()) {
        json mode_block;
        for (const Variant v : {Variant::orn, Variant::srn, Variant::srn_vis}) {
            json per_run = json::array();
            double sum8 = 0.0, sum2 = 0.0;
            long leaks = 0, checked = 0;
            for (int run = 0; run < cfg.training.eval_runs; ++run) {
                const RunOutcome o = stage_train(cfg, v, m, run);
                sum8 += o.test.f1_8class;
                sum2 += o.test.f1_binary;
                leaks += o.leak_violations;
                checked += o.batches_checked;
                per_run.push_back(json{{"run", o.run},
                                       {"split_seed", o.split_seed},
                                       {"model_seed", o.model_seed},
                                       {"f1_8class", o.test.f1_8class},
                                       {"f1_binary", o.test.f1_binary},
                                       {"val_f1", o.val_f1},
                                       {"best_epoch", o.best_epoch}});
            }
            const double n = static_cast<double>(cfg.training.eval_runs);
            mode_block[variant_name(v)] = json{{"f1_8class_mean", sum8 / n},
                                               {"f1_binary_mean", sum2 / n},
                                               {"per_run", std::move(per_run)},
                                               {"leak_violations", leaks},
                                               {"batches_checked", checked}};
        }
        results[mode_name(m)] = std::move(mode_block);
    }

    save_json_file(paths.results, results);

    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json meta{{"config_hash", cfg.config_hash()},
              {"config", cfg.to_json()},
              {"timestamp_unix_ms",
               std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
              {"artifacts",
               json::array({paths.orn_graph, paths.srn_graph, paths.dual_orn, paths.dual_srn,
                            paths.features_orn, paths.features_srn, paths.features_srn_vis,
                            paths.results})}};
    save_json_file(paths.run_meta, meta);
    return results;
}

}  // namespace roadsage
