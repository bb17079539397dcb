#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roadsage/experiment.hpp"
#include "roadsage/features.hpp"
#include "roadsage/sage.hpp"
#include "roadsage/segmentation.hpp"
#include "roadsage/synth.hpp"

namespace roadsage {

enum class Variant { orn, srn, srn_vis };

std::string variant_name(Variant v);       // "ORN" / "SRN" / "SRN+Vis"
std::string variant_slug(Variant v);       // "orn" / "srn" / "srn_vis"
Variant variant_from_string(const std::string& s);

enum class TrainMode { supervised, unsupervised };

std::string mode_name(TrainMode m);
TrainMode mode_from_string(const std::string& s);

struct TrainingConfig {
    std::string mode = "supervised";  // "supervised" | "unsupervised" | "both"
    int supervised_epochs = 100;
    int supervised_batch = 512;
    int unsupervised_epochs = 20;
    int unsupervised_batch = 1024;
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    int negatives = 5;
    int walk_length = 3;
    int walk_window = 2;
    int eval_runs = 5;  // seed-averaged repetitions per variant

    std::vector<TrainMode> modes() const;
};

struct SeedConfig {
    std::uint64_t data = 1;
    std::uint64_t split = 2;
    std::uint64_t model = 3;
};

// One JSON document wiring all stages together.
struct PipelineConfig {
    std::string out_dir;
    std::optional<std::string> graph_path;       // existing graph, else synth
    std::optional<std::string> raster_manifest;  // existing rasters, else synth
    std::optional<SynthConfig> synth;
    SegmentationConfig segmentation;
    FeatureSpec features;  // centroid origin filled per graph at build time
    SageConfig sage;
    TrainingConfig training;
    SeedConfig seeds;
    int search_budget = 20;

    static PipelineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    std::string config_hash() const;
    void validate() const;
};

PipelineConfig load_pipeline_config(const std::string& path);

// Canonical paths of the intermediates inside out_dir.
struct PipelinePaths {
    std::string data_dir;
    std::string orn_graph;
    std::string raster_manifest;  // empty when no rasters are configured
    std::string labels;
    std::string srn_graph;
    std::string dual_orn;
    std::string dual_srn;
    std::string features_orn;
    std::string features_srn;
    std::string features_srn_vis;
    std::string results;
    std::string run_meta;

    std::string model(Variant v, TrainMode m, int run) const;
    std::string train_record(Variant v, TrainMode m, int run) const;
    std::string embeddings(Variant v, int run) const;
    std::string trials(Variant v, TrainMode m) const;

    std::string models_dir;
    std::string records_dir;
};

PipelinePaths pipeline_paths(const PipelineConfig& cfg);

// Stages. Each stage reads the previous stages' files and writes its own,
// so `pipeline` equals running the subcommands in sequence.
SynthPaths stage_data(const PipelineConfig& cfg);        // synth or pass-through
std::string stage_segment(const PipelineConfig& cfg);    // -> srn_graph
void stage_dualize(const PipelineConfig& cfg);           // -> dual_orn / dual_srn
std::string stage_features(const PipelineConfig& cfg, Variant v);

// Dual JSON document for a graph file ({"node_ids":[...],"edges":[[i,j],...]}).
nlohmann::json dual_to_json(const DualGraph& dual);
void write_dual(const std::string& graph_path, const std::string& out_path);

// Assembles the learning problem for a variant from the staged files.
NodeDataset build_dataset(const PipelineConfig& cfg, Variant v, std::uint64_t split_seed);

struct RunOutcome {
    Variant variant = Variant::orn;
    TrainMode mode = TrainMode::supervised;
    int run = 0;
    std::uint64_t split_seed = 0;
    std::uint64_t model_seed = 0;
    EvalMetrics test;
    double val_f1 = 0.0;
    int best_epoch = -1;
    long batches_checked = 0;
    long leak_violations = 0;
    std::string model_path;
};

// Trains one (variant, mode, run) cell; writes the model checkpoint and a
// JSON train record, returns the outcome.
RunOutcome stage_train(const PipelineConfig& cfg, Variant v, TrainMode m, int run);

// Evaluation-mode metrics of a saved model on the variant's test split.
EvalMetrics stage_evaluate(const PipelineConfig& cfg, const std::string& model_path, Variant v,
                           std::uint64_t split_seed);

// Writes eval-mode embeddings for every node to a JSON-lines file.
std::string stage_embed(const PipelineConfig& cfg, Variant v, int run,
                        const std::optional<std::string>& model_path);

SearchResult stage_search(const PipelineConfig& cfg, Variant v, TrainMode m, int budget);

// Everything: data -> segment -> dualize -> features -> train -> evaluate.
// Returns the results document (also written to paths.results).
nlohmann::json run_pipeline(const PipelineConfig& cfg);

}  // namespace roadsage
