#include "roadsage/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "roadsage/errors.hpp"

namespace roadsage {

std::string split_to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

SplitAssignment split_and_propagate(const RoadGraph& orn, const RoadGraph& srn,
                                    std::uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(orn.edges().size());
    for (const RoadEdge& e : orn.edges()) ids.push_back(e.id);
    std::sort(ids.begin(), ids.end());

    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(ids);

    const std::size_t n = ids.size();
    const std::size_t n_val = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
    const std::size_t n_test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));

    SplitAssignment out;
    for (std::size_t i = 0; i < n; ++i) {
        const Split s = i < n_val ? Split::val : (i < n_val + n_test ? Split::test : Split::train);
        out.orn.emplace(ids[i], s);
    }
    for (const RoadEdge& e : srn.edges()) {
        const auto it = out.orn.find(e.parent_id);
        if (it == out.orn.end())
            throw DataError("edge " + e.id + ": parent_id '" + e.parent_id +
                            "' is not an ORN edge");
        out.srn.emplace(e.id, it->second);
    }
    return out;
}

const std::array<std::string, 8>& ClassTaxonomy::labels() {
    static const std::array<std::string, 8> kLabels = {
        "motorway", "trunk",        "primary",     "secondary",
        "tertiary", "unclassified", "residential", "living_street"};
    return kLabels;
}

int ClassTaxonomy::index_of(const std::string& label) {
    const auto& l = labels();
    for (std::size_t i = 0; i < l.size(); ++i)
        if (l[i] == label) return static_cast<int>(i);
    return -1;
}

const std::string& ClassTaxonomy::label(int index) {
    if (index < 0 || index >= num_classes) throw DataError("class index out of range");
    return labels()[static_cast<std::size_t>(index)];
}

int aggregate_binary(int pred8) {
    if (pred8 < 0 || pred8 >= ClassTaxonomy::num_classes)
        throw DataError("unknown class index: " + std::to_string(pred8));
    return pred8 < 4 ? 0 : 1;
}

double micro_f1(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw DataError("prediction/label length mismatch");
    if (predictions.empty()) throw DataError("micro_f1 needs at least one sample");
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) {
            ++tp;
        } else {
            ++fp;  // predicted class gains a false positive
            ++fn;  // true class gains a false negative
        }
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

std::map<std::string, int> majority_vote(const std::vector<std::string>& parent_of,
                                         const std::vector<int>& predictions, const Mat* probs,
                                         const std::vector<int>& rows) {
    std::map<std::string, std::vector<std::size_t>> groups;  // parent -> positions in rows
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int row = rows[i];
        if (row < 0 || row >= static_cast<int>(parent_of.size()))
            throw DataError("vote row out of range");
        groups[parent_of[static_cast<std::size_t>(row)]].push_back(i);
    }
    if (groups.empty()) throw DataError("majority vote over an empty group set");

    std::map<std::string, int> out;
    for (const auto& [parent, members] : groups) {
        std::map<int, int> counts;
        for (const std::size_t i : members) counts[predictions[i]] += 1;
        int best_count = 0;
        for (const auto& [cls, cnt] : counts) {
            (void)cls;
            best_count = std::max(best_count, cnt);
        }
        std::vector<int> tied;
        for (const auto& [cls, cnt] : counts)
            if (cnt == best_count) tied.push_back(cls);
        int winner = tied.front();
        if (tied.size() > 1 && probs != nullptr) {
            double best_sum = -1.0;
            for (const int cls : tied) {  // ascending class index; strict > keeps the lowest on ties
                double sum = 0.0;
                for (const std::size_t i : members)
                    sum += probs->at(static_cast<int>(i), cls);
                if (sum > best_sum) {
                    best_sum = sum;
                    winner = cls;
                }
            }
        }
        out.emplace(parent, winner);
    }
    return out;
}

std::vector<int> NodeDataset::nodes_in(Split s) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s && labels[i] >= 0) out.push_back(static_cast<int>(i));
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation-mode prediction and ORN-level scoring
// ---------------------------------------------------------------------------

Predictions predict_nodes(const SageModel& model, const NodeDataset& data,
                          const std::vector<int>& rows) {
    Predictions out;
    out.rows = rows;
    if (rows.empty()) return out;
    const BatchPlan plan = full_neighborhood(data.dual, rows, model.config.layers);
    const Mat emb = sage_forward(model, data.features, plan, false, nullptr, nullptr);
    const Mat logits = head_logits(model, emb);
    out.probs = Mat(logits.rows, logits.cols);
    out.pred.resize(static_cast<std::size_t>(logits.rows));
    for (int r = 0; r < logits.rows; ++r) {
        const double* row = logits.row(r);
        double mx = row[0];
        for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < logits.cols; ++c) sum += std::exp(row[c] - mx);
        int arg = 0;
        for (int c = 0; c < logits.cols; ++c) {
            out.probs.at(r, c) = std::exp(row[c] - mx) / sum;
            if (row[c] > row[arg]) arg = c;
        }
        out.pred[static_cast<std::size_t>(r)] = arg;
    }
    return out;
}

EvalMetrics evaluate_at_orn_level(const NodeDataset& data, const Predictions& preds) {
    const std::map<std::string, int> voted =
        majority_vote(data.parent_of, preds.pred, preds.probs.rows > 0 ? &preds.probs : nullptr,
                      preds.rows);
    std::vector<int> y8, p8, y2, p2;
    for (const auto& [parent, pred] : voted) {
        const auto it = data.orn_labels.find(parent);
        if (it == data.orn_labels.end()) continue;  // unlabeled parent
        y8.push_back(it->second);
        p8.push_back(pred);
        y2.push_back(aggregate_binary(it->second));
        p2.push_back(aggregate_binary(pred));  // binarize after the vote
    }
    if (y8.empty()) throw DataError("no labeled parents to evaluate");
    EvalMetrics m;
    m.f1_8class = micro_f1(p8, y8);
    m.f1_binary = micro_f1(p2, y2);
    m.orn_edges = static_cast<int>(y8.size());
    return m;
}

// ---------------------------------------------------------------------------
// Supervised training
// ---------------------------------------------------------------------------

namespace {

double validation_f1(const SageModel& model, const NodeDataset& data) {
    const std::vector<int> val_rows = data.nodes_in(Split::val);
    if (val_rows.empty()) return 0.0;
    return evaluate_at_orn_level(data, predict_nodes(model, data, val_rows)).f1_8class;
}

}  // namespace

SupervisedResult train_supervised(const NodeDataset& data, const SageConfig& sage_cfg,
                                  const TrainConfig& train_cfg) {
    SageConfig cfg = sage_cfg;
    cfg.num_classes = ClassTaxonomy::num_classes;
    cfg.validate();

    const std::vector<int> train_rows = data.nodes_in(Split::train);
    if (train_rows.empty()) throw DataError("no labeled training nodes");
    std::unordered_set<int> train_set(train_rows.begin(), train_rows.end());

    Rng init_rng(derive_seed(train_cfg.seed, "init"));
    Rng train_rng(derive_seed(train_cfg.seed, "train"));

    SupervisedResult result;
    SageModel model = SageModel::init(cfg, data.features.cols, init_rng);
    AdamState adam = AdamState::init(std::as_const(model).parameters(), train_cfg.adam);
    SageGrads grads = SageGrads::zeros_like(model);

    result.best_model = model;
    result.best_epoch = 0;
    result.best_val_f1 = -1.0;

    std::vector<int> order = train_rows;
    for (int epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
        train_rng.shuffle(order);
        double loss_sum = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(train_cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(train_cfg.batch_size));
            const std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
            // Split hygiene: a val/test node in a training batch is a hard bug.
            ++result.batches_checked;
            for (const int row : batch) {
                if (train_set.find(row) == train_set.end() ||
                    data.split[static_cast<std::size_t>(row)] != Split::train)
                    ++result.leak_violations;
            }
            if (result.leak_violations > 0)
                throw DataError("validation/test node leaked into a training batch");

            const BatchPlan plan = sample_neighborhood(data.dual, batch, cfg.fanouts, train_rng);
            ForwardCache cache;
            const Mat emb = sage_forward(model, data.features, plan, true, &train_rng, &cache);
            const Mat logits = head_logits(model, emb);
            std::vector<int> labels;
            labels.reserve(batch.size());
            for (const int row : batch) labels.push_back(data.labels[static_cast<std::size_t>(row)]);
            const LossGrad lg = supervised_loss(logits, labels);
            if (!std::isfinite(lg.loss))
                throw NumericError("non-finite supervised loss at epoch " + std::to_string(epoch));
            loss_sum += lg.loss;
            ++batches;

            grads.zero();
            Mat d_emb(emb.rows, emb.cols);
            head_backward(model, emb, lg.grad, grads, d_emb);
            sage_backward(model, plan, cache, d_emb, grads);
            adam.apply(model.parameters(), grads.pointers());
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_loss = batches > 0 ? loss_sum / batches : 0.0;
        rec.val_f1 = validation_f1(model, data);
        result.history.push_back(rec);
        if (rec.val_f1 > result.best_val_f1) {
            result.best_val_f1 = rec.val_f1;
            result.best_epoch = epoch;
            result.best_model = model;
        }
    }
    if (result.best_val_f1 < 0.0) {  // zero epochs: keep the initial weights
        result.best_val_f1 = validation_f1(model, data);
        result.best_model = model;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Unsupervised training
// ---------------------------------------------------------------------------

UnsupervisedResult train_unsupervised(const NodeDataset& data, const SageConfig& sage_cfg,
                                      const TrainConfig& train_cfg) {
    SageConfig cfg = sage_cfg;
    cfg.num_classes = 0;  // no head; the objective works on the embeddings
    cfg.validate();
    const int n = data.dual.size();
    if (n == 0) throw DataError("empty graph");

    Rng init_rng(derive_seed(train_cfg.seed, "init"));
    Rng train_rng(derive_seed(train_cfg.seed, "unsup"));

    UnsupervisedResult result;
    result.model = SageModel::init(cfg, data.features.cols, init_rng);
    AdamState adam = AdamState::init(std::as_const(result.model).parameters(), train_cfg.adam);
    SageGrads grads = SageGrads::zeros_like(result.model);

    const auto& neighbors = data.dual.neighbors();
    for (int epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
        // Positive pairs: co-occurrences within the window on one uniform
        // random walk per start node.
        std::vector<std::pair<int, int>> pairs;
        for (int start = 0; start < n; ++start) {
            std::vector<int> walk;
            walk.push_back(start);
            int cur = start;
            for (int s = 0; s < train_cfg.walk_length; ++s) {
                const auto& nb = neighbors[static_cast<std::size_t>(cur)];
                if (nb.empty()) break;
                cur = nb[train_rng.next_below(nb.size())];
                walk.push_back(cur);
            }
            for (std::size_t i = 0; i < walk.size(); ++i)
                for (std::size_t j = i + 1;
                     j < walk.size() && j <= i + static_cast<std::size_t>(train_cfg.walk_window);
                     ++j)
                    pairs.emplace_back(walk[i], walk[j]);
        }
        if (pairs.empty()) throw DataError("random walks produced no positive pairs");
        train_rng.shuffle(pairs);

        double loss_sum = 0.0;
        long pair_count = 0;
        for (std::size_t start = 0; start < pairs.size();
             start += static_cast<std::size_t>(train_cfg.batch_size)) {
            const std::size_t end =
                std::min(pairs.size(), start + static_cast<std::size_t>(train_cfg.batch_size));

            // One forward pass over the unique nodes the batch touches.
            std::vector<int> batch_nodes;
            std::unordered_map<int, int> row_of;
            const auto row_for = [&](int node) {
                const auto it = row_of.find(node);
                if (it != row_of.end()) return it->second;
                const int r = static_cast<int>(batch_nodes.size());
                batch_nodes.push_back(node);
                row_of.emplace(node, r);
                return r;
            };
            struct PairRows {
                int u, pos;
                std::vector<int> negs;
            };
            std::vector<PairRows> prs;
            for (std::size_t i = start; i < end; ++i) {
                PairRows pr;
                pr.u = row_for(pairs[i].first);
                pr.pos = row_for(pairs[i].second);
                for (int q = 0; q < train_cfg.negatives; ++q)
                    pr.negs.push_back(row_for(static_cast<int>(train_rng.next_below(
                        static_cast<std::uint64_t>(n)))));
                prs.push_back(std::move(pr));
            }

            const BatchPlan plan = sample_neighborhood(data.dual, batch_nodes, cfg.fanouts,
                                                       train_rng);
            ForwardCache cache;
            const Mat emb = sage_forward(result.model, data.features, plan, true, &train_rng,
                                         &cache);
            Mat d_emb(emb.rows, emb.cols);
            double batch_loss = 0.0;
            for (const PairRows& pr : prs)
                batch_loss += unsupervised_loss(emb, pr.u, pr.pos, pr.negs, train_cfg.negatives,
                                                &d_emb);
            const double inv = 1.0 / static_cast<double>(prs.size());
            for (double& x : d_emb.v) x *= inv;
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw NumericError("non-finite unsupervised loss at epoch " +
                                   std::to_string(epoch));
            loss_sum += batch_loss * static_cast<double>(prs.size());
            pair_count += static_cast<long>(prs.size());

            grads.zero();
            sage_backward(result.model, plan, cache, d_emb, grads);
            adam.apply(result.model.parameters(), grads.pointers());
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_loss = loss_sum / static_cast<double>(pair_count);
        result.history.push_back(rec);
    }

    // Deterministic evaluation-mode embeddings for every node.
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    const BatchPlan plan = full_neighborhood(data.dual, all, cfg.layers);
    result.embeddings = sage_forward(result.model, data.features, plan, false, nullptr, nullptr);
    return result;
}

// ---------------------------------------------------------------------------
// Downstream logistic classifier
// ---------------------------------------------------------------------------

Mat LogisticModel::predict_proba(const Mat& x) const {
    Mat xs = x;
    for (int r = 0; r < xs.rows; ++r) {
        double* row = xs.row(r);
        for (int c = 0; c < xs.cols; ++c) {
            const double s = stddev[static_cast<std::size_t>(c)];
            row[c] = s > 0.0 ? (row[c] - mean[static_cast<std::size_t>(c)]) / s
                             : row[c] - mean[static_cast<std::size_t>(c)];
        }
    }
    Mat logits;
    gemm_nt(xs, w, logits);
    for (int r = 0; r < logits.rows; ++r) {
        double* row = logits.row(r);
        for (int c = 0; c < logits.cols; ++c) row[c] += b.v[static_cast<std::size_t>(c)];
        double mx = row[0];
        for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < logits.cols; ++c) sum += std::exp(row[c] - mx);
        for (int c = 0; c < logits.cols; ++c) row[c] = std::exp(row[c] - mx) / sum;
    }
    return logits;
}

std::vector<int> LogisticModel::predict(const Mat& x) const {
    const Mat p = predict_proba(x);
    std::vector<int> out(static_cast<std::size_t>(p.rows));
    for (int r = 0; r < p.rows; ++r) {
        const double* row = p.row(r);
        int arg = 0;
        for (int c = 1; c < p.cols; ++c)
            if (row[c] > row[arg]) arg = c;
        out[static_cast<std::size_t>(r)] = arg;
    }
    return out;
}

LogisticModel fit_downstream_classifier(const Mat& embeddings, const std::vector<int>& labels,
                                        const std::vector<int>& train_rows, int num_classes,
                                        const LogisticConfig& cfg) {
    if (train_rows.empty()) throw DataError("downstream classifier needs training rows");
    const int dim = embeddings.cols;

    LogisticModel model;
    model.mean.assign(static_cast<std::size_t>(dim), 0.0);
    model.stddev.assign(static_cast<std::size_t>(dim), 0.0);
    for (const int r : train_rows)
        for (int c = 0; c < dim; ++c)
            model.mean[static_cast<std::size_t>(c)] += embeddings.at(r, c);
    for (double& m : model.mean) m /= static_cast<double>(train_rows.size());
    for (const int r : train_rows)
        for (int c = 0; c < dim; ++c) {
            const double d = embeddings.at(r, c) - model.mean[static_cast<std::size_t>(c)];
            model.stddev[static_cast<std::size_t>(c)] += d * d;
        }
    for (double& s : model.stddev) s = std::sqrt(s / static_cast<double>(train_rows.size()));

    Mat x(static_cast<int>(train_rows.size()), dim);
    std::vector<int> y;
    y.reserve(train_rows.size());
    std::set<int> seen;
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
        const int r = train_rows[i];
        const int label = labels[static_cast<std::size_t>(r)];
        if (label < 0 || label >= num_classes)
            throw DataError("downstream classifier: label out of range");
        y.push_back(label);
        seen.insert(label);
        for (int c = 0; c < dim; ++c) {
            const double s = model.stddev[static_cast<std::size_t>(c)];
            const double v = embeddings.at(r, c) - model.mean[static_cast<std::size_t>(c)];
            x.at(static_cast<int>(i), c) = s > 0.0 ? v / s : v;
        }
    }
    if (static_cast<int>(seen.size()) < num_classes) {
        std::cerr << "warning: " << (num_classes - static_cast<int>(seen.size()))
                  << " class(es) absent from training rows; they will never be predicted\n";
    }

    model.w = Mat(num_classes, dim);  // zero init keeps the fit deterministic
    model.b = Mat(1, num_classes);
    AdamConfig adam_cfg;
    adam_cfg.learning_rate = cfg.learning_rate;
    adam_cfg.weight_decay = cfg.weight_decay;
    std::vector<Mat*> params{&model.w, &model.b};
    std::vector<const Mat*> cparams{&model.w, &model.b};
    AdamState adam = AdamState::init(cparams, adam_cfg);

    Mat logits, dw, db;
    for (int it = 0; it < cfg.epochs; ++it) {
        gemm_nt(x, model.w, logits);
        for (int r = 0; r < logits.rows; ++r) {
            double* row = logits.row(r);
            for (int c = 0; c < num_classes; ++c) row[c] += model.b.v[static_cast<std::size_t>(c)];
        }
        const LossGrad lg = supervised_loss(logits, y);
        if (!std::isfinite(lg.loss)) throw NumericError("non-finite downstream loss");
        gemm_tn(lg.grad, x, dw);
        db = Mat(1, num_classes);
        for (int r = 0; r < lg.grad.rows; ++r) {
            const double* row = lg.grad.row(r);
            for (int c = 0; c < num_classes; ++c) db.v[static_cast<std::size_t>(c)] += row[c];
        }
        adam.apply(params, {&dw, &db});
    }
    return model;
}

// ---------------------------------------------------------------------------
// Hyperparameter search
// ---------------------------------------------------------------------------

std::vector<Trial> sample_trials(const HyperparameterSpace& space, int budget,
                                 std::uint64_t seed) {
    if (budget < 1) throw ConfigError("search budget must be >= 1");
    Rng rng(derive_seed(seed, "search"));
    std::vector<Trial> trials;
    trials.reserve(static_cast<std::size_t>(budget));
    for (int i = 0; i < budget; ++i) {
        Trial t;
        t.index = i;
        t.hidden_units = space.hidden_units[rng.next_below(space.hidden_units.size())];
        t.embedding_dim = space.embedding_dims[rng.next_below(space.embedding_dims.size())];
        const double lo = std::log(space.learning_rate_lo);
        const double hi = std::log(space.learning_rate_hi);
        t.learning_rate = std::exp(rng.uniform(lo, hi));
        t.weight_decay = rng.uniform(space.weight_decay_lo, space.weight_decay_hi);
        t.dropout_rate = rng.uniform(space.dropout_lo, space.dropout_hi);
        trials.push_back(t);
    }
    return trials;
}

SearchResult hyperparameter_search(const NodeDataset& data, const SageConfig& base_cfg,
                                   const TrainConfig& base_train, const HyperparameterSpace& space,
                                   int budget, std::uint64_t seed) {
    SearchResult result;
    result.trials = sample_trials(space, budget, seed);
    std::size_t best = 0;
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
        Trial& t = result.trials[i];
        SageConfig cfg = base_cfg;
        cfg.hidden_units.assign(static_cast<std::size_t>(std::max(0, cfg.layers - 1)),
                                t.hidden_units);
        cfg.embedding_dim = t.embedding_dim;
        cfg.dropout_rate = t.dropout_rate;
        TrainConfig tc = base_train;
        tc.adam.learning_rate = t.learning_rate;
        tc.adam.weight_decay = t.weight_decay;
        tc.seed = derive_seed(seed, "trial" + std::to_string(t.index));
        const SupervisedResult r = train_supervised(data, cfg, tc);
        t.val_f1 = r.best_val_f1;
        t.best_epoch = r.best_epoch;
        if (t.val_f1 > result.trials[best].val_f1) best = i;
    }
    result.best = result.trials[best];
    return result;
}

}  // namespace roadsage
