#include "roadsage/sage.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "roadsage/errors.hpp"
#include "roadsage/util.hpp"

namespace roadsage {

using nlohmann::json;

Aggregator aggregator_from_string(const std::string& s) {
    if (s == "mean") return Aggregator::mean;
    if (s == "mean-pooling" || s == "mean_pooling") return Aggregator::mean_pooling;
    throw ConfigError("unknown aggregator: " + s);
}

std::string aggregator_to_string(Aggregator a) {
    return a == Aggregator::mean ? "mean" : "mean-pooling";
}

std::vector<int> SageConfig::layer_dims(int input_dim) const {
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int k = 1; k < layers; ++k) dims.push_back(hidden_units[static_cast<std::size_t>(k - 1)]);
    dims.push_back(embedding_dim);
    return dims;
}

void SageConfig::validate() const {
    if (layers < 1) throw ConfigError("layer depth must be >= 1");
    if (static_cast<int>(hidden_units.size()) < layers - 1)
        throw ConfigError("hidden_units must list a width per hidden layer");
    for (int h : hidden_units)
        if (h <= 0) throw ConfigError("hidden unit widths must be positive");
    if (embedding_dim <= 0) throw ConfigError("embedding_dim must be positive");
    if (static_cast<int>(fanouts.size()) < layers)
        throw ConfigError("fanouts must list one value per layer");
    for (int f : fanouts)
        if (f <= 0) throw ConfigError("fanouts must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("dropout_rate must lie in [0, 1)");
    if (num_classes < 0) throw ConfigError("num_classes must be >= 0");
}

namespace {

void glorot_fill(Mat& m, Rng& rng) {
    const double limit = std::sqrt(6.0 / (m.rows + m.cols));
    for (double& x : m.v) x = rng.uniform(-limit, limit);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

SageModel SageModel::init(const SageConfig& cfg, int input_dim, Rng& rng) {
    cfg.validate();
    if (input_dim <= 0) throw ConfigError("input dimension must be positive");

    SageModel model;
    model.config = cfg;
    model.input_dim = input_dim;
    const std::vector<int> dims = cfg.layer_dims(input_dim);
    for (int k = 1; k <= cfg.layers; ++k) {
        SageLayer layer;
        const int d_in = dims[static_cast<std::size_t>(k - 1)];
        const int d_out = dims[static_cast<std::size_t>(k)];
        const int concat = cfg.self_concat ? 2 * d_in : d_in;
        layer.w = Mat(d_out, concat);
        glorot_fill(layer.w, rng);
        layer.b = Mat(1, d_out);
        if (cfg.aggregator == Aggregator::mean_pooling) {
            layer.pool_w = Mat(d_in, d_in);
            glorot_fill(layer.pool_w, rng);
            layer.pool_b = Mat(1, d_in);
        }
        model.layers.push_back(std::move(layer));
    }
    if (cfg.num_classes > 0) {
        model.head_w = Mat(cfg.num_classes, cfg.embedding_dim);
        glorot_fill(model.head_w, rng);
        model.head_b = Mat(1, cfg.num_classes);
    }
    return model;
}

std::vector<Mat*> SageModel::parameters() {
    std::vector<Mat*> out;
    for (SageLayer& l : layers) {
        out.push_back(&l.w);
        out.push_back(&l.b);
        if (config.aggregator == Aggregator::mean_pooling) {
            out.push_back(&l.pool_w);
            out.push_back(&l.pool_b);
        }
    }
    if (config.num_classes > 0) {
        out.push_back(&head_w);
        out.push_back(&head_b);
    }
    return out;
}

std::vector<const Mat*> SageModel::parameters() const {
    std::vector<const Mat*> out;
    for (const Mat* m : const_cast<SageModel*>(this)->parameters()) out.push_back(m);
    return out;
}

SageGrads SageGrads::zeros_like(const SageModel& model) {
    SageGrads g;
    for (const Mat* p : model.parameters()) g.tensors.emplace_back(p->rows, p->cols);
    return g;
}

void SageGrads::zero() {
    for (Mat& t : tensors) t.zero();
}

std::vector<const Mat*> SageGrads::pointers() const {
    std::vector<const Mat*> out;
    for (const Mat& t : tensors) out.push_back(&t);
    return out;
}

namespace {

BatchPlan build_plan(const DualGraph& dual, const std::vector<int>& batch, int depth,
                     const std::vector<int>* fanouts, Rng* rng) {
    BatchPlan plan;
    plan.nodes.assign(static_cast<std::size_t>(depth) + 1, {});
    plan.self_pos.assign(static_cast<std::size_t>(depth) + 1, {});
    plan.neigh.assign(static_cast<std::size_t>(depth) + 1, {});
    plan.nodes[static_cast<std::size_t>(depth)] = batch;

    for (int k = depth; k >= 1; --k) {
        const std::vector<int>& cur = plan.nodes[static_cast<std::size_t>(k)];
        std::vector<int>& prev = plan.nodes[static_cast<std::size_t>(k - 1)];
        std::unordered_map<int, int> pos;  // dual index -> position in prev
        prev.reserve(cur.size() * 2);
        const auto position_of = [&](int node) {
            const auto it = pos.find(node);
            if (it != pos.end()) return it->second;
            const int p = static_cast<int>(prev.size());
            prev.push_back(node);
            pos.emplace(node, p);
            return p;
        };

        auto& selfs = plan.self_pos[static_cast<std::size_t>(k)];
        auto& neighs = plan.neigh[static_cast<std::size_t>(k)];
        selfs.reserve(cur.size());
        neighs.reserve(cur.size());
        // Hop 1 away from the batch uses fanouts[0], the next hop fanouts[1], ...
        const int fanout =
            fanouts ? (*fanouts)[static_cast<std::size_t>(depth - k)] : 0;
        for (const int v : cur) {
            selfs.push_back(position_of(v));
            const std::vector<int>& all = dual.neighbors()[static_cast<std::size_t>(v)];
            std::vector<int> chosen;
            if (fanouts == nullptr || static_cast<int>(all.size()) <= fanout) {
                chosen = all;
            } else {
                const std::vector<int> picks =
                    rng->sample_without_replacement(static_cast<int>(all.size()), fanout);
                chosen.reserve(picks.size());
                for (const int p : picks) chosen.push_back(all[static_cast<std::size_t>(p)]);
            }
            std::vector<int> positions;
            positions.reserve(chosen.size());
            for (const int n : chosen) positions.push_back(position_of(n));
            neighs.push_back(std::move(positions));
        }
    }
    return plan;
}

}  // namespace

BatchPlan sample_neighborhood(const DualGraph& dual, const std::vector<int>& batch,
                              const std::vector<int>& fanouts, Rng& rng) {
    for (const int f : fanouts)
        if (f <= 0) throw ConfigError("fanouts must be positive");
    return build_plan(dual, batch, static_cast<int>(fanouts.size()), &fanouts, &rng);
}

BatchPlan full_neighborhood(const DualGraph& dual, const std::vector<int>& batch, int depth) {
    return build_plan(dual, batch, depth, nullptr, nullptr);
}

std::vector<double> aggregate(const std::vector<std::vector<double>>& neighbor_vecs,
                              Aggregator aggregator, const SageLayer* layer_params) {
    if (neighbor_vecs.empty()) {
        if (aggregator == Aggregator::mean_pooling && layer_params != nullptr)
            return std::vector<double>(static_cast<std::size_t>(layer_params->pool_w.rows), 0.0);
        return {};
    }
    const std::size_t dim = neighbor_vecs.front().size();
    for (const auto& v : neighbor_vecs)
        if (v.size() != dim) throw DataError("aggregate: neighbor dimension mismatch");

    std::vector<double> out(dim, 0.0);
    if (aggregator == Aggregator::mean) {
        for (const auto& v : neighbor_vecs)
            for (std::size_t i = 0; i < dim; ++i) out[i] += v[i];
    } else {
        if (layer_params == nullptr) throw ConfigError("mean-pooling requires layer parameters");
        const Mat& w = layer_params->pool_w;
        const Mat& b = layer_params->pool_b;
        if (w.cols != static_cast<int>(dim)) throw DataError("aggregate: pooling shape mismatch");
        for (const auto& v : neighbor_vecs) {
            for (int r = 0; r < w.rows; ++r) {
                double s = b.v[static_cast<std::size_t>(r)];
                const double* wr = w.row(r);
                for (std::size_t i = 0; i < dim; ++i) s += wr[i] * v[i];
                out[static_cast<std::size_t>(r)] += relu(s);
            }
        }
    }
    for (double& x : out) x /= static_cast<double>(neighbor_vecs.size());
    return out;
}

Mat sage_forward(const SageModel& model, const Mat& features, const BatchPlan& plan,
                 bool training, Rng* dropout_rng, ForwardCache* cache) {
    const SageConfig& cfg = model.config;
    const int depth = plan.depth();
    if (depth != cfg.layers) throw ConfigError("plan depth does not match layer count");
    if (features.cols != model.input_dim) throw DataError("feature dimension mismatch");

    const bool pooling = cfg.aggregator == Aggregator::mean_pooling;
    const bool use_dropout = training && cfg.dropout_rate > 0.0;
    if (use_dropout && dropout_rng == nullptr)
        throw ConfigError("training-mode dropout needs an rng");

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc.layers.assign(static_cast<std::size_t>(depth), {});

    // H^0: input features of the outermost node set.
    Mat h(static_cast<int>(plan.nodes[0].size()), model.input_dim);
    for (std::size_t p = 0; p < plan.nodes[0].size(); ++p) {
        const double* src = features.row(plan.nodes[0][p]);
        std::copy(src, src + features.cols, h.row(static_cast<int>(p)));
    }

    for (int k = 1; k <= depth; ++k) {
        const SageLayer& layer = model.layers[static_cast<std::size_t>(k - 1)];
        ForwardCache::Layer& lc = cc.layers[static_cast<std::size_t>(k - 1)];
        const int n_out = static_cast<int>(plan.nodes[static_cast<std::size_t>(k)].size());
        const int d_in = h.cols;
        const int d_out = layer.w.rows;

        // Inverted dropout on the layer input; one mask entry per element.
        lc.input = std::move(h);
        if (use_dropout) {
            const double keep = 1.0 - cfg.dropout_rate;
            lc.keep.resize(lc.input.size());
            for (std::size_t i = 0; i < lc.input.size(); ++i) {
                const bool on = dropout_rng->next_double() < keep;
                lc.keep[i] = on ? 1 : 0;
                lc.input.v[i] = on ? lc.input.v[i] / keep : 0.0;
            }
        }

        if (pooling) {
            gemm_nt(lc.input, layer.pool_w, lc.pool_pre);
            for (int r = 0; r < lc.pool_pre.rows; ++r) {
                double* row = lc.pool_pre.row(r);
                for (int c = 0; c < d_in; ++c) row[c] += layer.pool_b.v[static_cast<std::size_t>(c)];
            }
            lc.pool_out = lc.pool_pre;
            for (double& x : lc.pool_out.v) x = relu(x);
        }

        const Mat& agg_src = pooling ? lc.pool_out : lc.input;
        lc.agg = Mat(n_out, d_in);
        const auto& neighs = plan.neigh[static_cast<std::size_t>(k)];
        for (int p = 0; p < n_out; ++p) {
            const std::vector<int>& nb = neighs[static_cast<std::size_t>(p)];
            if (nb.empty()) continue;  // zero vector for isolated nodes
            double* dst = lc.agg.row(p);
            for (const int q : nb) {
                const double* src = agg_src.row(q);
                for (int c = 0; c < d_in; ++c) dst[c] += src[c];
            }
            const double inv = 1.0 / static_cast<double>(nb.size());
            for (int c = 0; c < d_in; ++c) dst[c] *= inv;
        }

        if (cfg.self_concat) {
            lc.concat = Mat(n_out, 2 * d_in);
            const auto& selfs = plan.self_pos[static_cast<std::size_t>(k)];
            for (int p = 0; p < n_out; ++p) {
                const double* self_row = lc.input.row(selfs[static_cast<std::size_t>(p)]);
                double* dst = lc.concat.row(p);
                std::copy(self_row, self_row + d_in, dst);
                std::copy(lc.agg.row(p), lc.agg.row(p) + d_in, dst + d_in);
            }
        } else {
            lc.concat = lc.agg;
        }

        gemm_nt(lc.concat, layer.w, lc.pre);
        for (int r = 0; r < n_out; ++r) {
            double* row = lc.pre.row(r);
            for (int c = 0; c < d_out; ++c) row[c] += layer.b.v[static_cast<std::size_t>(c)];
        }
        lc.out = lc.pre;
        if (k < depth) {  // ReLU on hidden layers, identity at the output
            for (double& x : lc.out.v) x = relu(x);
        }
        h = lc.out;
    }

    cc.embeddings = h;
    return h;
}

Mat head_logits(const SageModel& model, const Mat& embeddings) {
    if (model.config.num_classes <= 0) throw ConfigError("model has no classification head");
    Mat logits;
    gemm_nt(embeddings, model.head_w, logits);
    for (int r = 0; r < logits.rows; ++r) {
        double* row = logits.row(r);
        for (int c = 0; c < logits.cols; ++c) row[c] += model.head_b.v[static_cast<std::size_t>(c)];
    }
    return logits;
}

namespace {

// Gradient tensor offsets inside SageGrads for layer k.
struct GradIndex {
    int per_layer;
    explicit GradIndex(const SageConfig& cfg)
        : per_layer(cfg.aggregator == Aggregator::mean_pooling ? 4 : 2) {}
    int w(int k) const { return k * per_layer; }
    int b(int k) const { return k * per_layer + 1; }
    int pool_w(int k) const { return k * per_layer + 2; }
    int pool_b(int k) const { return k * per_layer + 3; }
};

}  // namespace

void head_backward(const SageModel& model, const Mat& embeddings, const Mat& d_logits,
                   SageGrads& grads, Mat& d_embeddings) {
    const GradIndex gi(model.config);
    const int head_w_idx = model.config.layers * gi.per_layer;
    gemm_tn(d_logits, embeddings, grads.tensors[static_cast<std::size_t>(head_w_idx)], true);
    Mat& db = grads.tensors[static_cast<std::size_t>(head_w_idx + 1)];
    for (int r = 0; r < d_logits.rows; ++r) {
        const double* row = d_logits.row(r);
        for (int c = 0; c < d_logits.cols; ++c) db.v[static_cast<std::size_t>(c)] += row[c];
    }
    gemm_nn(d_logits, model.head_w, d_embeddings);
}

void sage_backward(const SageModel& model, const BatchPlan& plan, const ForwardCache& cache,
                   const Mat& d_embeddings, SageGrads& grads) {
    const SageConfig& cfg = model.config;
    const int depth = plan.depth();
    if (static_cast<int>(cache.layers.size()) != depth)
        throw DataError("forward cache does not match the plan");
    const bool pooling = cfg.aggregator == Aggregator::mean_pooling;
    const GradIndex gi(cfg);

    Mat d_out = d_embeddings;
    for (int k = depth; k >= 1; --k) {
        const SageLayer& layer = model.layers[static_cast<std::size_t>(k - 1)];
        const ForwardCache::Layer& lc = cache.layers[static_cast<std::size_t>(k - 1)];
        const int n_out = static_cast<int>(plan.nodes[static_cast<std::size_t>(k)].size());
        const int d_in = lc.input.cols;
        if (d_out.rows != n_out || lc.pre.rows != n_out)
            throw DataError("stale forward cache: shape mismatch");

        Mat d_pre = d_out;
        if (k < depth) {
            for (std::size_t i = 0; i < d_pre.v.size(); ++i)
                if (lc.pre.v[i] <= 0.0) d_pre.v[i] = 0.0;
        }

        gemm_tn(d_pre, lc.concat, grads.tensors[static_cast<std::size_t>(gi.w(k - 1))], true);
        Mat& db = grads.tensors[static_cast<std::size_t>(gi.b(k - 1))];
        for (int r = 0; r < n_out; ++r) {
            const double* row = d_pre.row(r);
            for (int c = 0; c < d_pre.cols; ++c) db.v[static_cast<std::size_t>(c)] += row[c];
        }

        Mat d_concat;
        gemm_nn(d_pre, layer.w, d_concat);

        Mat d_input(lc.input.rows, d_in);
        Mat d_agg_src;  // gradient wrt the aggregation source (pool_out or input)
        if (pooling) d_agg_src = Mat(lc.input.rows, d_in);

        const auto& selfs = plan.self_pos[static_cast<std::size_t>(k)];
        const auto& neighs = plan.neigh[static_cast<std::size_t>(k)];
        for (int p = 0; p < n_out; ++p) {
            const double* dc = d_concat.row(p);
            const double* d_agg = cfg.self_concat ? dc + d_in : dc;
            if (cfg.self_concat) {
                double* dst = d_input.row(selfs[static_cast<std::size_t>(p)]);
                for (int c = 0; c < d_in; ++c) dst[c] += dc[c];
            }
            const std::vector<int>& nb = neighs[static_cast<std::size_t>(p)];
            if (nb.empty()) continue;
            const double inv = 1.0 / static_cast<double>(nb.size());
            Mat& sink = pooling ? d_agg_src : d_input;
            for (const int q : nb) {
                double* dst = sink.row(q);
                for (int c = 0; c < d_in; ++c) dst[c] += d_agg[c] * inv;
            }
        }

        if (pooling) {
            // Through relu(input . pool_w^T + pool_b).
            for (std::size_t i = 0; i < d_agg_src.v.size(); ++i)
                if (lc.pool_pre.v[i] <= 0.0) d_agg_src.v[i] = 0.0;
            gemm_tn(d_agg_src, lc.input, grads.tensors[static_cast<std::size_t>(gi.pool_w(k - 1))],
                    true);
            Mat& dpb = grads.tensors[static_cast<std::size_t>(gi.pool_b(k - 1))];
            for (int r = 0; r < d_agg_src.rows; ++r) {
                const double* row = d_agg_src.row(r);
                for (int c = 0; c < d_in; ++c) dpb.v[static_cast<std::size_t>(c)] += row[c];
            }
            gemm_nn(d_agg_src, layer.pool_w, d_input, true);
        }

        if (!lc.keep.empty()) {
            const double keep = 1.0 - cfg.dropout_rate;
            for (std::size_t i = 0; i < d_input.v.size(); ++i)
                d_input.v[i] = lc.keep[i] ? d_input.v[i] / keep : 0.0;
        }
        d_out = std::move(d_input);
    }
}

LossGrad supervised_loss(const Mat& logits, const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != logits.rows)
        throw DataError("label count does not match logit rows");
    LossGrad out;
    out.grad = Mat(logits.rows, logits.cols);
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    for (int r = 0; r < logits.rows; ++r) {
        const int label = labels[static_cast<std::size_t>(r)];
        if (label < 0 || label >= logits.cols)
            throw DataError("label out of range: " + std::to_string(label));
        const double* row = logits.row(r);
        double mx = row[0];
        for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < logits.cols; ++c) sum += std::exp(row[c] - mx);
        const double log_z = mx + std::log(sum);
        out.loss += (log_z - row[label]) * inv_n;
        double* g = out.grad.row(r);
        for (int c = 0; c < logits.cols; ++c)
            g[c] = (std::exp(row[c] - log_z) - (c == label ? 1.0 : 0.0)) * inv_n;
    }
    return out;
}

namespace {

inline double log_sigmoid(double x) {
    // log(1/(1+e^-x)) computed without overflow.
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

double unsupervised_loss(const Mat& emb, int u_row, int pos_row, const std::vector<int>& neg_rows,
                         int num_negatives, Mat* d_emb) {
    if (neg_rows.empty() || num_negatives < 1)
        throw ConfigError("unsupervised loss needs at least one negative");
    if (d_emb && (d_emb->rows != emb.rows || d_emb->cols != emb.cols))
        throw DataError("gradient matrix shape mismatch");
    const int dim = emb.cols;
    const double* zu = emb.row(u_row);
    const double* zp = emb.row(pos_row);

    double dot_pos = 0.0;
    for (int c = 0; c < dim; ++c) dot_pos += zu[c] * zp[c];
    double loss = -log_sigmoid(dot_pos);
    const double w_neg = static_cast<double>(num_negatives) / static_cast<double>(neg_rows.size());

    if (d_emb) {
        const double coef = sigmoid(dot_pos) - 1.0;  // d(-log sigma(s))/ds
        double* du = d_emb->row(u_row);
        double* dp = d_emb->row(pos_row);
        for (int c = 0; c < dim; ++c) {
            du[c] += coef * zp[c];
            dp[c] += coef * zu[c];
        }
    }
    for (const int n : neg_rows) {
        const double* zn = emb.row(n);
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += zu[c] * zn[c];
        loss += -w_neg * log_sigmoid(-dot);
        if (d_emb) {
            const double coef = w_neg * sigmoid(dot);
            double* du = d_emb->row(u_row);
            double* dn = d_emb->row(n);
            for (int c = 0; c < dim; ++c) {
                du[c] += coef * zn[c];
                dn[c] += coef * zu[c];
            }
        }
    }
    return loss;
}

AdamState AdamState::init(const std::vector<const Mat*>& params, const AdamConfig& cfg) {
    AdamState s;
    s.config = cfg;
    for (const Mat* p : params) {
        s.m.emplace_back(p->rows, p->cols);
        s.v.emplace_back(p->rows, p->cols);
    }
    return s;
}

void AdamState::apply(std::vector<Mat*> params, const std::vector<const Mat*>& grads) {
    if (params.size() != m.size() || grads.size() != m.size())
        throw DataError("optimizer state does not match parameter list");
    ++step;
    const AdamConfig& c = config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
    const double shrink = 1.0 - c.learning_rate * c.weight_decay;
    for (std::size_t t = 0; t < params.size(); ++t) {
        Mat& p = *params[t];
        const Mat& g = *grads[t];
        if (p.rows != g.rows || p.cols != g.cols) throw DataError("gradient shape mismatch");
        for (std::size_t i = 0; i < p.v.size(); ++i) {
            if (shrink != 1.0) p.v[i] *= shrink;
            const double gi = g.v[i];
            m[t].v[i] = c.beta1 * m[t].v[i] + (1.0 - c.beta1) * gi;
            v[t].v[i] = c.beta2 * v[t].v[i] + (1.0 - c.beta2) * gi * gi;
            const double mhat = m[t].v[i] / bc1;
            const double vhat = v[t].v[i] / bc2;
            p.v[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
        }
    }
}

namespace {

json mat_to_json(const Mat& m) {
    json data = json::array();
    for (const double x : m.v) data.push_back(double_to_hex(x));
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", std::move(data)}};
}

Mat mat_from_json(const json& j) {
    Mat m(j.at("rows").get<int>(), j.at("cols").get<int>());
    const auto& data = j.at("data");
    if (data.size() != m.v.size()) throw DataError("checkpoint tensor size mismatch");
    for (std::size_t i = 0; i < m.v.size(); ++i)
        m.v[i] = hex_to_double(data[i].get<std::string>());
    return m;
}

json config_to_json(const SageConfig& cfg) {
    return json{{"layers", cfg.layers},
                {"hidden_units", cfg.hidden_units},
                {"embedding_dim", cfg.embedding_dim},
                {"aggregator", aggregator_to_string(cfg.aggregator)},
                {"fanouts", cfg.fanouts},
                {"dropout_rate", cfg.dropout_rate},
                {"self_concat", cfg.self_concat},
                {"num_classes", cfg.num_classes}};
}

SageConfig config_from_json(const json& j) {
    SageConfig cfg;
    cfg.layers = j.at("layers").get<int>();
    cfg.hidden_units = j.at("hidden_units").get<std::vector<int>>();
    cfg.embedding_dim = j.at("embedding_dim").get<int>();
    cfg.aggregator = aggregator_from_string(j.at("aggregator").get<std::string>());
    cfg.fanouts = j.at("fanouts").get<std::vector<int>>();
    cfg.dropout_rate = j.at("dropout_rate").get<double>();
    cfg.self_concat = j.at("self_concat").get<bool>();
    cfg.num_classes = j.at("num_classes").get<int>();
    return cfg;
}

}  // namespace

void save_model(const SageModel& model, const std::string& path, const std::string& config_hash,
                std::uint64_t seed) {
    json layers = json::array();
    for (const SageLayer& l : model.layers) {
        json lj{{"w", mat_to_json(l.w)}, {"b", mat_to_json(l.b)}};
        if (model.config.aggregator == Aggregator::mean_pooling) {
            lj["pool_w"] = mat_to_json(l.pool_w);
            lj["pool_b"] = mat_to_json(l.pool_b);
        }
        layers.push_back(std::move(lj));
    }
    json j{{"format", "roadsage-model/v1"},
           {"config", config_to_json(model.config)},
           {"input_dim", model.input_dim},
           {"layers", std::move(layers)},
           {"config_hash", config_hash},
           {"seed", seed}};
    if (model.config.num_classes > 0)
        j["head"] = json{{"w", mat_to_json(model.head_w)}, {"b", mat_to_json(model.head_b)}};
    else
        j["head"] = nullptr;
    save_json_file(path, j);
}

SageModel load_model(const std::string& path) {
    const json j = load_json_file(path);
    if (!j.is_object() || j.value("format", "") != "roadsage-model/v1")
        throw DataError(path + ": not a model checkpoint");
    SageModel model;
    model.config = config_from_json(j.at("config"));
    model.input_dim = j.at("input_dim").get<int>();
    for (const auto& lj : j.at("layers")) {
        SageLayer layer;
        layer.w = mat_from_json(lj.at("w"));
        layer.b = mat_from_json(lj.at("b"));
        if (model.config.aggregator == Aggregator::mean_pooling) {
            layer.pool_w = mat_from_json(lj.at("pool_w"));
            layer.pool_b = mat_from_json(lj.at("pool_b"));
        }
        model.layers.push_back(std::move(layer));
    }
    if (static_cast<int>(model.layers.size()) != model.config.layers)
        throw DataError(path + ": layer count mismatch");
    if (model.config.num_classes > 0) {
        model.head_w = mat_from_json(j.at("head").at("w"));
        model.head_b = mat_from_json(j.at("head").at("b"));
    }
    return model;
}

}  // namespace roadsage
