#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "logicx/graph.hpp"

namespace logicx {

using Mat = std::vector<std::vector<double>>; // row major

namespace detail {

inline Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, std::vector<double>(cols, 0.0)); }

// x * W for a single row vector
inline std::vector<double> row_times(const std::vector<double>& x, const Mat& w) {
    std::vector<double> out(w.empty() ? 0 : w[0].size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[i] * w[i][j];
    }
    return out;
}

// deterministic uniform in [0, 1): same bits on every platform
inline double unit_uniform(std::uint64_t& state) {
    state = mix_seed(state);
    return static_cast<double>(state >> 11) * (1.0 / 9007199254740992.0);
}

} // namespace detail

/// Symmetric-normalized adjacency with self-loops for one graph:
/// entry (u, v) weight 1/sqrt((deg_u + 1)(deg_v + 1)), kept sparse.
struct NormalizedAdjacency {
    std::vector<std::vector<std::pair<NodeId, double>>> rows;

    static NormalizedAdjacency build(const Graph& g) {
        NormalizedAdjacency a;
        auto deg = g.degrees();
        a.rows.resize(g.num_nodes);
        auto coeff = [&](NodeId u, NodeId v) {
            return 1.0 / std::sqrt(static_cast<double>((deg[u] + 1)) * static_cast<double>(deg[v] + 1));
        };
        for (NodeId v = 0; v < g.num_nodes; ++v) a.rows[v].push_back({v, coeff(v, v)});
        for (const auto& [u, v] : g.edges) {
            a.rows[u].push_back({v, coeff(u, v)});
            a.rows[v].push_back({u, coeff(v, u)});
        }
        return a;
    }

    // out = A_hat * h (h is n x d)
    Mat multiply(const Mat& h) const {
        Mat out = detail::zeros(h.size(), h.empty() ? 0 : h[0].size());
        for (std::size_t v = 0; v < rows.size(); ++v)
            for (auto [u, c] : rows[v])
                for (std::size_t k = 0; k < out[v].size(); ++k) out[v][k] += c * h[u][k];
        return out;
    }
};

struct GcnModel {
    std::vector<Mat> layer_weights;  // W^l, each d_l x d_{l+1}
    Mat readout_w;                   // d_L x C
    std::vector<double> readout_b;   // C

    std::size_t layers() const { return layer_weights.size(); }
    std::size_t input_dim() const { return layer_weights.empty() ? 0 : layer_weights[0].size(); }
    std::size_t embed_dim() const {
        return layer_weights.empty() ? 0 : layer_weights.back().empty() ? 0 : layer_weights.back()[0].size();
    }
    std::size_t num_classes() const { return readout_b.size(); }

    void validate() const {
        if (layer_weights.empty()) fail(ErrorKind::Contract, "model needs at least one layer");
        for (std::size_t l = 0; l + 1 < layer_weights.size(); ++l) {
            std::size_t out_dim = layer_weights[l].empty() ? 0 : layer_weights[l][0].size();
            if (layer_weights[l + 1].size() != out_dim)
                fail(ErrorKind::Contract, "layer dimension chain broken at layer " + std::to_string(l + 1));
        }
        if (readout_w.size() != embed_dim())
            fail(ErrorKind::Contract, "readout input dimension mismatch");
    }

    nlohmann::json to_json() const {
        return nlohmann::json{{"layer_weights", layer_weights},
                              {"readout_w", readout_w},
                              {"readout_b", readout_b}};
    }

    static GcnModel from_json(const nlohmann::json& j) {
        GcnModel m;
        m.layer_weights = j.at("layer_weights").get<std::vector<Mat>>();
        m.readout_w = j.at("readout_w").get<Mat>();
        m.readout_b = j.at("readout_b").get<std::vector<double>>();
        m.validate();
        return m;
    }
};

struct GcnForward {
    Mat node_embeddings;                // n x d_L after the final ReLU
    std::vector<double> graph_embedding; // mean of node embeddings
    std::vector<double> logits;
    int predicted = 0;
};

inline GcnForward gcn_forward(const GcnModel& model, const Graph& graph) {
    if (graph.feature_dim() != model.input_dim())
        fail(ErrorKind::Contract, "graph '" + graph.id + "': feature dim " +
                                      std::to_string(graph.feature_dim()) + " != model input dim " +
                                      std::to_string(model.input_dim()));
    auto a_hat = NormalizedAdjacency::build(graph);
    Mat h = graph.node_features;
    for (const auto& w : model.layer_weights) {
        Mat agg = a_hat.multiply(h);
        Mat next = detail::zeros(h.size(), w.empty() ? 0 : w[0].size());
        for (std::size_t v = 0; v < next.size(); ++v) {
            next[v] = detail::row_times(agg[v], w);
            for (auto& x : next[v]) x = std::max(0.0, x);
        }
        h = std::move(next);
    }
    GcnForward out;
    out.graph_embedding.assign(model.embed_dim(), 0.0);
    for (const auto& row : h)
        for (std::size_t k = 0; k < row.size(); ++k) out.graph_embedding[k] += row[k];
    if (!h.empty())
        for (auto& x : out.graph_embedding) x /= static_cast<double>(h.size());
    out.node_embeddings = std::move(h);
    out.logits = detail::row_times(out.graph_embedding, model.readout_w);
    for (std::size_t c = 0; c < out.logits.size(); ++c) out.logits[c] += model.readout_b[c];
    out.predicted = 0;
    for (std::size_t c = 1; c < out.logits.size(); ++c)
        if (out.logits[c] > out.logits[out.predicted]) out.predicted = static_cast<int>(c);
    return out;
}

struct GcnTrainConfig {
    std::size_t layers = 2;
    std::size_t hidden = 16;
    double learning_rate = 0.05;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
};

inline GcnModel gcn_init(std::size_t input_dim, std::size_t hidden, std::size_t layers,
                         std::size_t num_classes, std::uint64_t seed) {
    GcnModel model;
    std::uint64_t state = mix_seed(seed ^ 0x6cc0ULL);
    auto init_mat = [&](std::size_t rows, std::size_t cols) {
        double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Mat m = detail::zeros(rows, cols);
        for (auto& row : m)
            for (auto& x : row) x = (2.0 * detail::unit_uniform(state) - 1.0) * s;
        return m;
    };
    std::size_t d = input_dim;
    for (std::size_t l = 0; l < layers; ++l) {
        model.layer_weights.push_back(init_mat(d, hidden));
        d = hidden;
    }
    model.readout_w = init_mat(d, num_classes);
    model.readout_b.assign(num_classes, 0.0);
    return model;
}

/// Mean softmax cross-entropy over the given graphs plus analytic gradients,
/// derived by hand through readout, mean pooling, ReLU and A_hat H W chains.
struct GcnGradients {
    double loss = 0.0;
    std::vector<Mat> d_layer_weights;
    Mat d_readout_w;
    std::vector<double> d_readout_b;
};

inline GcnGradients gcn_loss_and_gradients(const GcnModel& model, const LabeledDataset& dataset,
                                           const std::vector<GraphIndex>& indices) {
    GcnGradients grads;
    grads.d_layer_weights.reserve(model.layers());
    for (const auto& w : model.layer_weights)
        grads.d_layer_weights.push_back(detail::zeros(w.size(), w[0].size()));
    grads.d_readout_w = detail::zeros(model.readout_w.size(), model.num_classes());
    grads.d_readout_b.assign(model.num_classes(), 0.0);

    double inv_n = indices.empty() ? 0.0 : 1.0 / static_cast<double>(indices.size());
    for (GraphIndex g : indices) {
        const Graph& graph = dataset.graphs[g];
        if (graph.num_nodes == 0) continue;
        auto a_hat = NormalizedAdjacency::build(graph);

        // forward with cached intermediates
        std::vector<Mat> hs{graph.node_features}; // h^0 .. h^L
        std::vector<Mat> aggs;                     // A_hat h^l
        for (const auto& w : model.layer_weights) {
            Mat agg = a_hat.multiply(hs.back());
            Mat next = detail::zeros(agg.size(), w[0].size());
            for (std::size_t v = 0; v < agg.size(); ++v) {
                next[v] = detail::row_times(agg[v], w);
                for (auto& xv : next[v]) xv = std::max(0.0, xv);
            }
            aggs.push_back(std::move(agg));
            hs.push_back(std::move(next));
        }
        std::size_t n = graph.num_nodes;
        std::vector<double> pooled(model.embed_dim(), 0.0);
        for (const auto& row : hs.back())
            for (std::size_t k = 0; k < row.size(); ++k) pooled[k] += row[k];
        for (auto& xv : pooled) xv /= static_cast<double>(n);
        auto logits = detail::row_times(pooled, model.readout_w);
        for (std::size_t c = 0; c < logits.size(); ++c) logits[c] += model.readout_b[c];

        double max_logit = logits[0];
        for (double v : logits) max_logit = std::max(max_logit, v);
        double z = 0.0;
        std::vector<double> probs(logits.size());
        for (std::size_t c = 0; c < logits.size(); ++c) {
            probs[c] = std::exp(logits[c] - max_logit);
            z += probs[c];
        }
        for (auto& p : probs) p /= z;
        int label = dataset.class_labels[g];
        grads.loss += -std::log(std::max(probs[label], 1e-300)) * inv_n;

        // d loss / d logits = (p - onehot) / N
        std::vector<double> dlogits(probs);
        dlogits[label] -= 1.0;
        for (auto& v : dlogits) v *= inv_n;

        for (std::size_t k = 0; k < pooled.size(); ++k)
            for (std::size_t c = 0; c < dlogits.size(); ++c)
                grads.d_readout_w[k][c] += pooled[k] * dlogits[c];
        for (std::size_t c = 0; c < dlogits.size(); ++c) grads.d_readout_b[c] += dlogits[c];

        std::vector<double> d_pooled(pooled.size(), 0.0);
        for (std::size_t k = 0; k < pooled.size(); ++k)
            for (std::size_t c = 0; c < dlogits.size(); ++c)
                d_pooled[k] += model.readout_w[k][c] * dlogits[c];

        // mean pooling spreads the gradient uniformly
        Mat dh(n, std::vector<double>(pooled.size(), 0.0));
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t k = 0; k < pooled.size(); ++k)
                dh[v][k] = d_pooled[k] / static_cast<double>(n);

        for (std::size_t l = model.layers(); l-- > 0;) {
            const Mat& w = model.layer_weights[l];
            const Mat& agg = aggs[l];
            const Mat& act = hs[l + 1];
            // through ReLU: dZ = dh * [act > 0]
            Mat dz = dh;
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t k = 0; k < dz[v].size(); ++k)
                    if (act[v][k] <= 0.0) dz[v][k] = 0.0;
            // dW += agg^T dz
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t i = 0; i < w.size(); ++i) {
                    if (agg[v][i] == 0.0) continue;
                    for (std::size_t j = 0; j < w[0].size(); ++j)
                        grads.d_layer_weights[l][i][j] += agg[v][i] * dz[v][j];
                }
            if (l == 0) break;
            // d(agg) = dz W^T, then dh^{l} = A_hat^T d(agg) = A_hat d(agg)
            Mat dagg(n, std::vector<double>(w.size(), 0.0));
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t i = 0; i < w.size(); ++i)
                    for (std::size_t j = 0; j < w[0].size(); ++j)
                        dagg[v][i] += dz[v][j] * w[i][j];
            dh = a_hat.multiply(dagg); // A_hat is symmetric
        }
    }
    return grads;
}

struct GcnTrainResult {
    GcnModel model;
    double train_accuracy = 0.0;
    double final_loss = 0.0;
};

inline GcnTrainResult gcn_train(const LabeledDataset& dataset, const GcnTrainConfig& config) {
    auto train_idx = dataset.split_indices(Split::Train);
    if (train_idx.empty()) fail(ErrorKind::Contract, "gcn_train: empty train split");
    {
        std::set<int> classes;
        for (GraphIndex g : train_idx) classes.insert(dataset.class_labels[g]);
        if (classes.size() < 2) fail(ErrorKind::Contract, "gcn_train: train split needs >= 2 classes");
    }
    GcnTrainResult result;
    result.model = gcn_init(dataset.feature_dim(), config.hidden, config.layers,
                            static_cast<std::size_t>(dataset.num_classes), config.seed);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        auto grads = gcn_loss_and_gradients(result.model, dataset, train_idx);
        if (!std::isfinite(grads.loss))
            fail(ErrorKind::Divergence,
                 "training loss is not finite at epoch " + std::to_string(epoch) +
                     "; try a smaller learning rate");
        for (std::size_t l = 0; l < result.model.layers(); ++l)
            for (std::size_t i = 0; i < result.model.layer_weights[l].size(); ++i)
                for (std::size_t j = 0; j < result.model.layer_weights[l][i].size(); ++j)
                    result.model.layer_weights[l][i][j] -= config.learning_rate * grads.d_layer_weights[l][i][j];
        for (std::size_t i = 0; i < result.model.readout_w.size(); ++i)
            for (std::size_t j = 0; j < result.model.readout_w[i].size(); ++j)
                result.model.readout_w[i][j] -= config.learning_rate * grads.d_readout_w[i][j];
        for (std::size_t c = 0; c < result.model.readout_b.size(); ++c)
            result.model.readout_b[c] -= config.learning_rate * grads.d_readout_b[c];
        result.final_loss = grads.loss;
    }
    std::size_t hits = 0;
    for (GraphIndex g : train_idx)
        if (gcn_forward(result.model, dataset.graphs[g]).predicted == dataset.class_labels[g]) ++hits;
    result.train_accuracy = static_cast<double>(hits) / static_cast<double>(train_idx.size());
    log_info("gcn_train: final loss " + std::to_string(result.final_loss) + ", train accuracy " +
             std::to_string(result.train_accuracy));
    return result;
}

/// Runs the model over every graph and assembles the embedding table that
/// the rest of the pipeline consumes. Forward passes are independent, so
/// they may run in parallel.
inline EmbeddingTable make_embedding_table(const GcnModel& model, const LabeledDataset& dataset,
                                           unsigned jobs = 1) {
    EmbeddingTable table;
    table.dim = model.embed_dim();
    table.layers = model.layers();
    table.node_embeddings.resize(dataset.size());
    table.predictions.assign(dataset.size(), 0);
    parallel_for(dataset.size(), jobs, [&](std::size_t g) {
        auto fwd = gcn_forward(model, dataset.graphs[g]);
        table.node_embeddings[g] = std::move(fwd.node_embeddings);
        table.predictions[g] = fwd.predicted;
    });
    return table;
}

} // namespace logicx
