// roadsage command line: road-network segmentation, visual feature fusion
// and GraphSAGE training on the dual graph.
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "roadsage/errors.hpp"
#include "roadsage/pipeline.hpp"
#include "roadsage/util.hpp"

namespace {

using namespace roadsage;

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

PipelineConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    PipelineConfig cfg = load_pipeline_config(path);
    if (seed_override) {
        cfg.seeds.data = *seed_override;
        cfg.seeds.split = *seed_override + 1;
        cfg.seeds.model = *seed_override + 2;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"road network learning pipeline"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, graph_path, manifest_path, model_path;
    std::string variant_str = "srn+vis", mode_str = "supervised";
    std::optional<std::uint64_t> seed_override;
    double target_tt = 15.0, target_len = 120.0;
    int geometry_points = 5, histogram_bins = 32, budget = 0, run = 0;
    bool with_vision = false;

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("--config", config_path, "synth config JSON")->required();
    synth_cmd->add_option("--out", out_path, "output directory")->required();

    auto* segment_cmd = app.add_subcommand("segment", "split edges to target travel time/length");
    segment_cmd->add_option("--in", in_path, "input graph JSON-lines")->required();
    segment_cmd->add_option("--out", out_path, "output graph JSON-lines")->required();
    segment_cmd->add_option("--target-traveltime", target_tt, "target travel time, seconds");
    segment_cmd->add_option("--target-length", target_len, "target length, meters");

    auto* dualize_cmd = app.add_subcommand("dualize", "convert a graph to its dual representation");
    dualize_cmd->add_option("--in", in_path, "input graph JSON-lines")->required();
    dualize_cmd->add_option("--out", out_path, "output dual JSON")->required();

    auto* features_cmd = app.add_subcommand("features", "assemble per-edge feature vectors");
    features_cmd->add_option("--graph", graph_path, "graph JSON-lines")->required();
    features_cmd->add_option("--out", out_path, "output feature JSON-lines")->required();
    features_cmd->add_option("--manifest", manifest_path, "raster manifest for vision features");
    features_cmd->add_flag("--vision", with_vision, "include per-channel intensity histograms");
    features_cmd->add_option("--geometry-points", geometry_points, "resampled points per geometry");
    features_cmd->add_option("--bins", histogram_bins, "histogram bins per channel");

    auto* train_cmd = app.add_subcommand("train", "train one variant/mode");
    train_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    train_cmd->add_option("--variant", variant_str, "orn | srn | srn+vis");
    train_cmd->add_option("--mode", mode_str, "supervised | unsupervised");
    train_cmd->add_option("--run", run, "run index (seed offset)");
    train_cmd->add_option("--seed", seed_override, "override config seeds");

    auto* embed_cmd = app.add_subcommand("embed", "emit node embeddings");
    embed_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    embed_cmd->add_option("--variant", variant_str, "orn | srn | srn+vis");
    embed_cmd->add_option("--run", run, "run index (seed offset)");
    embed_cmd->add_option("--model", model_path, "existing checkpoint (otherwise trains)");
    embed_cmd->add_option("--seed", seed_override, "override config seeds");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a checkpoint on the test split");
    evaluate_cmd->add_option("--model", model_path, "model checkpoint JSON")->required();
    evaluate_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    evaluate_cmd->add_option("--variant", variant_str, "orn | srn | srn+vis");
    evaluate_cmd->add_option("--run", run, "run index (split seed offset)");
    evaluate_cmd->add_option("--seed", seed_override, "override config seeds");

    auto* search_cmd = app.add_subcommand("search", "seeded random hyperparameter search");
    search_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    search_cmd->add_option("--variant", variant_str, "orn | srn | srn+vis");
    search_cmd->add_option("--budget", budget, "number of trials (default from config)");
    search_cmd->add_option("--seed", seed_override, "override config seeds");

    auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage end to end");
    pipeline_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    pipeline_cmd->add_option("--seed", seed_override, "override config seeds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (synth_cmd->parsed()) {
            SynthConfig cfg = synth_config_from_json_file(config_path);
            const SynthPaths paths = write_synthetic(generate_synthetic(cfg), out_path);
            std::cout << "graph: " << paths.graph << "\nmanifest: " << paths.manifest
                      << "\nlabels: " << paths.labels << "\n";
        } else if (segment_cmd->parsed()) {
            SegmentationConfig cfg;
            cfg.target_traveltime_s = target_tt;
            cfg.target_length_m = target_len;
            const RoadGraph srn = segment_pipeline(load_graph(in_path), cfg);
            save_graph(srn, out_path);
            std::cout << "edges: " << srn.edges().size() << " nodes: " << srn.nodes().size()
                      << "\n";
        } else if (dualize_cmd->parsed()) {
            write_dual(in_path, out_path);
            std::cout << "dual written to " << out_path << "\n";
        } else if (features_cmd->parsed()) {
            const RoadGraph g = load_graph(graph_path);
            FeatureSpec spec;
            spec.geometry_points = geometry_points;
            spec.histogram_bins = histogram_bins;
            spec.include_vision = with_vision;

            std::vector<std::vector<Histogram>> hists(g.edges().size());
            if (with_vision) {
                if (manifest_path.empty())
                    throw ConfigError("--vision requires --manifest");
                const RasterStack stack = load_raster_manifest(manifest_path);
                for (const RasterChannel& ch : stack.channels) spec.channels.push_back(ch.name);
                for (std::size_t i = 0; i < g.edges().size(); ++i) {
                    const FootprintRect rect =
                        footprint_rectangle(g.edges()[i], 120.0, 120.0, geometry_points);
                    for (const RasterChannel& ch : stack.channels)
                        hists[i].push_back(intensity_histogram(sample_patch(ch.grid, rect),
                                                               histogram_bins, ch.histogram_lo(),
                                                               ch.histogram_hi()));
                }
            }
            spec = spec_for_graph(spec, g);
            std::vector<FeatureVector> vectors;
            for (std::size_t i = 0; i < g.edges().size(); ++i)
                vectors.push_back(assemble_features(g.edges()[i], spec,
                                                    with_vision ? &hists[i] : nullptr));
            save_features(out_path, spec, vectors, hash_hex(graph_path), 0);
            std::cout << "features: " << vectors.size() << " x " << spec.dimension() << "\n";
        } else if (train_cmd->parsed()) {
            const PipelineConfig cfg = load_config(config_path, seed_override);
            const RunOutcome o = stage_train(cfg, variant_from_string(variant_str),
                                             mode_from_string(mode_str), run);
            std::cout << "variant " << variant_name(o.variant) << " mode " << mode_name(o.mode)
                      << " test f1_8class " << o.test.f1_8class << " f1_binary "
                      << o.test.f1_binary << " (model " << o.model_path << ")\n";
        } else if (embed_cmd->parsed()) {
            const PipelineConfig cfg = load_config(config_path, seed_override);
            const std::string path =
                stage_embed(cfg, variant_from_string(variant_str), run,
                            model_path.empty() ? std::nullopt
                                               : std::optional<std::string>(model_path));
            std::cout << "embeddings written to " << path << "\n";
        } else if (evaluate_cmd->parsed()) {
            const PipelineConfig cfg = load_config(config_path, seed_override);
            const EvalMetrics m = stage_evaluate(
                cfg, model_path, variant_from_string(variant_str),
                cfg.seeds.split + static_cast<std::uint64_t>(run));
            nlohmann::json j{{"f1_8class", m.f1_8class},
                             {"f1_binary", m.f1_binary},
                             {"orn_edges", m.orn_edges}};
            std::cout << j.dump(2) << "\n";
        } else if (search_cmd->parsed()) {
            const PipelineConfig cfg = load_config(config_path, seed_override);
            const int b = budget > 0 ? budget : cfg.search_budget;
            const SearchResult r = stage_search(cfg, variant_from_string(variant_str),
                                                TrainMode::supervised, b);
            std::cout << "best trial " << r.best.index << ": val_f1 " << r.best.val_f1
                      << " hidden " << r.best.hidden_units << " embed " << r.best.embedding_dim
                      << " lr " << r.best.learning_rate << "\n";
        } else if (pipeline_cmd->parsed()) {
            const PipelineConfig cfg = load_config(config_path, seed_override);
            const nlohmann::json results = run_pipeline(cfg);
            std::cout << results.dump(2) << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
