#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadsage/features.hpp"
#include "roadsage/graph.hpp"
#include "roadsage/matrix.hpp"
#include "roadsage/sage.hpp"

namespace roadsage {

enum class Split { train, val, test };

std::string split_to_string(Split s);

// Train/val/test assignment over original-network edge ids, propagated to
// segmented edges through parent_id.
struct SplitAssignment {
    std::map<std::string, Split> orn;
    std::map<std::string, Split> srn;
};

// Uniform random 60/20/20 split of the ORN edges; every SRN edge inherits
// its parent's bucket. Throws DataError on a parent_id that is not an ORN
// edge id.
SplitAssignment split_and_propagate(const RoadGraph& orn, const RoadGraph& srn,
                                    std::uint64_t seed);

// The 8 road-type labels, ordered; the binary task groups the first four
// against the last four.
struct ClassTaxonomy {
    static constexpr int num_classes = 8;
    static const std::array<std::string, 8>& labels();
    static int index_of(const std::string& label);  // -1 when unknown
    static const std::string& label(int index);
};

// 8-class prediction -> binary class (0: motorway..secondary, 1: the rest).
int aggregate_binary(int pred8);

// Micro-averaged F1: true/false positives and negatives pooled over classes.
double micro_f1(const std::vector<int>& predictions, const std::vector<int>& labels);

// Per-parent modal class over the children's predictions; ties break by the
// class's summed predicted probability, then by the lowest class index.
// probs may be null when no probabilities are available.
std::map<std::string, int> majority_vote(const std::vector<std::string>& parent_of,
                                         const std::vector<int>& predictions, const Mat* probs,
                                         const std::vector<int>& rows);

// One learning problem (dual graph + aligned features/labels/split) for a
// dataset variant.
struct NodeDataset {
    std::string variant;  // "ORN", "SRN" or "SRN+Vis"
    DualGraph dual;
    std::vector<std::string> node_ids;   // == dual.node_ids()
    std::vector<std::string> parent_of;  // ORN parent edge id per node
    Mat features;                        // normalized, row per node
    std::vector<int> labels;             // -1 when unlabeled
    std::vector<Split> split;
    std::map<std::string, int> orn_labels;  // ground truth at ORN level
    FeatureSpec spec;

    std::vector<int> nodes_in(Split s) const;
};

struct TrainConfig {
    int epochs = 100;
    int batch_size = 512;
    AdamConfig adam;
    std::uint64_t seed = 0;
    // Unsupervised objective.
    int negatives = 5;
    int walk_length = 3;
    int walk_window = 2;
};

struct EpochRecord {
    int epoch = 0;
    double mean_loss = 0.0;
    double val_f1 = 0.0;
};

struct SupervisedResult {
    SageModel best_model;
    int best_epoch = 0;
    double best_val_f1 = 0.0;
    std::vector<EpochRecord> history;
    long batches_checked = 0;   // split-hygiene bookkeeping
    long leak_violations = 0;
};

// Minibatch training on train nodes only; snapshots the parameters with the
// best validation micro-F1 (majority-voted to ORN level). Throws
// NumericError on a non-finite loss.
SupervisedResult train_supervised(const NodeDataset& data, const SageConfig& sage_cfg,
                                  const TrainConfig& train_cfg);

struct UnsupervisedResult {
    SageModel model;
    Mat embeddings;  // row per dual node, evaluation mode
    std::vector<EpochRecord> history;
};

// Random-walk co-occurrence positives with uniform negatives over all nodes;
// labels are never touched.
UnsupervisedResult train_unsupervised(const NodeDataset& data, const SageConfig& sage_cfg,
                                      const TrainConfig& train_cfg);

// Deterministic evaluation-mode predictions (full neighborhoods).
struct Predictions {
    std::vector<int> rows;  // dataset node indices, ascending
    std::vector<int> pred;  // per row
    Mat probs;              // rows x num_classes
};

Predictions predict_nodes(const SageModel& model, const NodeDataset& data,
                          const std::vector<int>& rows);

struct EvalMetrics {
    double f1_8class = 0.0;
    double f1_binary = 0.0;
    int orn_edges = 0;
};

// Votes the rows' predictions up to their ORN parents and scores both tasks
// against the ORN ground truth; binarization happens after the vote.
EvalMetrics evaluate_at_orn_level(const NodeDataset& data, const Predictions& preds);

// Multinomial logistic regression on embeddings; the downstream classifier
// of the unsupervised path. Deterministic: zero init, full-batch Adam.
struct LogisticConfig {
    int epochs = 400;
    double learning_rate = 0.05;
    double weight_decay = 0.0;
};

struct LogisticModel {
    Mat w;  // num_classes x dim
    Mat b;  // 1 x num_classes
    std::vector<double> mean;  // input standardization, fit on train rows
    std::vector<double> stddev;

    Mat predict_proba(const Mat& x) const;
    std::vector<int> predict(const Mat& x) const;
};

// Classes absent from the training rows are warned about (never predicted).
LogisticModel fit_downstream_classifier(const Mat& embeddings, const std::vector<int>& labels,
                                        const std::vector<int>& train_rows, int num_classes,
                                        const LogisticConfig& cfg = {});

struct HyperparameterSpace {
    std::vector<int> hidden_units = {512, 1024};
    std::vector<int> embedding_dims = {8, 16, 32, 64, 128};
    double learning_rate_lo = 1e-8;  // log-uniform
    double learning_rate_hi = 1e-1;
    double weight_decay_lo = 0.0;
    double weight_decay_hi = 0.1;
    double dropout_lo = 0.0;
    double dropout_hi = 0.4;
};

struct Trial {
    int index = 0;
    int hidden_units = 0;
    int embedding_dim = 0;
    double learning_rate = 0.0;
    double weight_decay = 0.0;
    double dropout_rate = 0.0;
    double val_f1 = -1.0;
    int best_epoch = -1;
};

// The seeded random draw of trial configurations, separated from execution
// so the sampling itself is testable.
std::vector<Trial> sample_trials(const HyperparameterSpace& space, int budget,
                                 std::uint64_t seed);

struct SearchResult {
    Trial best;
    std::vector<Trial> trials;
};

// Seeded random search: each trial trains on the dataset and records its
// validation micro-F1; returns the argmax trial.
SearchResult hyperparameter_search(const NodeDataset& data, const SageConfig& base_cfg,
                                   const TrainConfig& base_train, const HyperparameterSpace& space,
                                   int budget, std::uint64_t seed);

}  // namespace roadsage
