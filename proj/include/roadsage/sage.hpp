#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roadsage/graph.hpp"
#include "roadsage/matrix.hpp"
#include "roadsage/rng.hpp"

namespace roadsage {

enum class Aggregator { mean, mean_pooling };

Aggregator aggregator_from_string(const std::string& s);
std::string aggregator_to_string(Aggregator a);

struct SageConfig {
    int layers = 2;                        // K
    std::vector<int> hidden_units = {64};  // widths of layers 1..K-1
    int embedding_dim = 32;                // output width z_v
    Aggregator aggregator = Aggregator::mean_pooling;
    std::vector<int> fanouts = {25, 10};  // outer (first hop) to inner
    double dropout_rate = 0.0;
    // Concatenate the node's own representation with the aggregate before the
    // weight matrix. Off = aggregation-only layers.
    bool self_concat = true;
    int num_classes = 0;  // > 0 adds a linear classification head

    // d_0 .. d_K given the input feature dimension.
    std::vector<int> layer_dims(int input_dim) const;
    void validate() const;
};

struct SageLayer {
    Mat w;       // d_k x (2*d_{k-1} with self-concat, else d_{k-1})
    Mat b;       // 1 x d_k
    Mat pool_w;  // d_{k-1} x d_{k-1}, mean-pooling only
    Mat pool_b;  // 1 x d_{k-1}
};

struct SageModel {
    SageConfig config;
    int input_dim = 0;
    std::vector<SageLayer> layers;
    Mat head_w;  // num_classes x embedding_dim, present when num_classes > 0
    Mat head_b;  // 1 x num_classes

    // Glorot-uniform weights, zero biases.
    static SageModel init(const SageConfig& cfg, int input_dim, Rng& rng);

    std::vector<Mat*> parameters();
    std::vector<const Mat*> parameters() const;
};

// Gradients shaped like the model parameters, in the same fixed order.
struct SageGrads {
    std::vector<Mat> tensors;

    static SageGrads zeros_like(const SageModel& model);
    void zero();
    std::vector<const Mat*> pointers() const;
};

// Layered minibatch computation plan. nodes[K] is the batch; nodes[k-1]
// contains every node whose layer-(k-1) representation layer k consumes.
// self_pos[k][p] and neigh[k][p] index into nodes[k-1].
struct BatchPlan {
    std::vector<std::vector<int>> nodes;
    std::vector<std::vector<int>> self_pos;
    std::vector<std::vector<std::vector<int>>> neigh;

    int depth() const { return static_cast<int>(nodes.size()) - 1; }
};

// Uniform sampling without replacement of min(fanout, degree) neighbors per
// layer; deterministic given the rng state. Neighborhoods combine dual in-
// and out-neighbors. Isolated nodes get empty lists.
BatchPlan sample_neighborhood(const DualGraph& dual, const std::vector<int>& batch,
                              const std::vector<int>& fanouts, Rng& rng);

// Plan over the complete neighbor lists (evaluation path).
BatchPlan full_neighborhood(const DualGraph& dual, const std::vector<int>& batch, int depth);

// Elementwise average of the given rows; mean-pooling applies
// relu(pool_w * h + pool_b) per neighbor before averaging. Empty set yields
// the zero vector.
std::vector<double> aggregate(const std::vector<std::vector<double>>& neighbor_vecs,
                              Aggregator aggregator, const SageLayer* layer_params);

struct ForwardCache {
    struct Layer {
        Mat input;                       // nodes[k-1] x d_{k-1}, after dropout
        std::vector<std::uint8_t> keep;  // dropout mask, empty when unused
        Mat pool_pre;                    // pooling pre-activation
        Mat pool_out;
        Mat agg;     // nodes[k] x d_{k-1}
        Mat concat;  // nodes[k] x (d or 2d)
        Mat pre;     // nodes[k] x d_k
        Mat out;
    };
    std::vector<Layer> layers;
    Mat embeddings;  // nodes[K] x d_K
};

// Eq-style layer stack: H^0 = input features; H^k = sigma(W^k . [self || agg])
// with ReLU for hidden layers and identity at the output. Dropout is applied
// to each layer's input in training mode only. Returns the embeddings for
// plan.nodes[depth]; fills `cache` when given (required for backward).
Mat sage_forward(const SageModel& model, const Mat& features, const BatchPlan& plan,
                 bool training, Rng* dropout_rng, ForwardCache* cache);

// Classification head on top of the embeddings.
Mat head_logits(const SageModel& model, const Mat& embeddings);

// Exact reverse-mode gradients of everything sage_forward computed.
// d_embeddings is the loss gradient wrt the returned embeddings.
void sage_backward(const SageModel& model, const BatchPlan& plan, const ForwardCache& cache,
                   const Mat& d_embeddings, SageGrads& grads);

// Head gradients; accumulates into grads and writes the gradient wrt the
// embeddings into d_embeddings.
void head_backward(const SageModel& model, const Mat& embeddings, const Mat& d_logits,
                   SageGrads& grads, Mat& d_embeddings);

struct LossGrad {
    double loss = 0.0;
    Mat grad;
};

// Mean softmax cross-entropy over the batch; grad = (softmax - onehot) / n.
LossGrad supervised_loss(const Mat& logits, const std::vector<int>& labels);

// Negative-sampling pair loss:
//   -log sigmoid(z_u . z_pos) - (Q / |negs|) * sum_k log sigmoid(-z_u . z_neg_k).
// Accumulates gradients wrt the involved embedding rows into d_emb.
double unsupervised_loss(const Mat& emb, int u_row, int pos_row, const std::vector<int>& neg_rows,
                         int num_negatives, Mat* d_emb);

struct AdamConfig {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction; decoupled weight decay is applied as a
// multiplicative shrink before the moment update.
struct AdamState {
    AdamConfig config;
    long step = 0;
    std::vector<Mat> m;
    std::vector<Mat> v;

    static AdamState init(const std::vector<const Mat*>& params, const AdamConfig& cfg);
    void apply(std::vector<Mat*> params, const std::vector<const Mat*>& grads);
};

// JSON checkpoint with weights serialized as hexadecimal IEEE-754 bit
// patterns; round-trips bit-exactly.
void save_model(const SageModel& model, const std::string& path, const std::string& config_hash,
                std::uint64_t seed);
SageModel load_model(const std::string& path);

}  // namespace roadsage
