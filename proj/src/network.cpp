#include "ammi/network.hpp"

#include <cmath>
#include <stdexcept>

#include "ammi/serialize.hpp"

namespace ammi::nn {

Tensor& ParamStore::create(const std::string& name, int rows, int cols) {
    auto [it, inserted] = params_.emplace(name, Tensor(rows, cols));
    if (!inserted) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
    return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return it->second;
}

const Tensor* ParamStore::ptr(const std::string& name) const { return &at(name); }

std::vector<std::string> ParamStore::names(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : params_)
        if (k.compare(0, prefix.size(), prefix) == 0) out.push_back(k);
    return out;
}

size_t ParamStore::count_values(const std::string& prefix) const {
    size_t n = 0;
    for (const auto& [k, v] : params_)
        if (k.compare(0, prefix.size(), prefix) == 0) n += v.size();
    return n;
}

void ParamStore::save(std::ostream& os) const {
    io::write_u32(os, static_cast<uint32_t>(params_.size()));
    for (const auto& [k, v] : params_) {
        io::write_string(os, k);
        io::write_tensor(os, v);
    }
}

ParamStore ParamStore::load(std::istream& is) {
    ParamStore store;
    uint32_t n = io::read_u32(is);
    for (uint32_t i = 0; i < n; ++i) {
        std::string name = io::read_string(is);
        store.params_.emplace(name, io::read_tensor(is));
    }
    return store;
}

void init_uniform(Tensor& t, double alpha, Rng& rng) {
    if (alpha < 0.0) throw std::invalid_argument("init_uniform: alpha must be >= 0");
    for (double& x : t.v) x = uniform_in(rng, -alpha, alpha);
}

void init_uniform(ParamStore& store, const std::string& prefix, double alpha, Rng& rng) {
    for (const auto& name : store.names(prefix)) init_uniform(store.at(name), alpha, rng);
}

// ---------------------------------------------------------------------------
// FeedForward
// ---------------------------------------------------------------------------

FeedForward FeedForward::topology(const std::string& prefix, int in_dim, int hidden,
                                  int hidden_layers, int out_dim) {
    if (in_dim <= 0 || out_dim <= 0 || hidden_layers < 0 || (hidden_layers > 0 && hidden <= 0))
        throw std::invalid_argument("FeedForward: bad dimensions");
    FeedForward ff;
    ff.in_dim = in_dim;
    ff.out_dim = out_dim;
    int cur = in_dim;
    for (int l = 0; l <= hidden_layers; ++l) {
        bool last = l == hidden_layers;
        int next = last ? out_dim : hidden;
        DenseLayer layer;
        layer.w = prefix + std::to_string(l) + ".w";
        layer.b = prefix + std::to_string(l) + ".b";
        layer.act = last ? Activation::Identity : Activation::Relu;
        layer.in = cur;
        layer.out = next;
        ff.layers.push_back(std::move(layer));
        cur = next;
    }
    return ff;
}

void FeedForward::create_params(ParamStore& store) const {
    for (const auto& layer : layers) {
        store.create(layer.w, layer.in, layer.out);
        store.create(layer.b, 1, layer.out);
    }
}

FeedForward FeedForward::make(ParamStore& store, const std::string& prefix, int in_dim,
                              int hidden, int hidden_layers, int out_dim) {
    FeedForward ff = topology(prefix, in_dim, hidden, hidden_layers, out_dim);
    ff.create_params(store);
    return ff;
}

Var FeedForward::build(Graph& g, const ParamStore& store, Var input) const {
    Var h = input;
    for (const auto& layer : layers) {
        h = g.add(g.matmul(h, g.param(store.ptr(layer.w))), g.param(store.ptr(layer.b)));
        if (layer.act == Activation::Relu) h = g.relu(h);
    }
    return h;
}

Var FeedForward::build(Graph& g, const ParamStore& store, SparseRows input) const {
    if (input.cols != in_dim) throw std::invalid_argument("FeedForward: input width mismatch");
    Var h{};
    for (size_t i = 0; i < layers.size(); ++i) {
        const auto& layer = layers[i];
        Var wx = i == 0 ? g.sparse_matmul(std::move(input), g.param(store.ptr(layer.w)))
                        : g.matmul(h, g.param(store.ptr(layer.w)));
        h = g.add(wx, g.param(store.ptr(layer.b)));
        if (layer.act == Activation::Relu) h = g.relu(h);
    }
    return h;
}

Tensor FeedForward::eval(const ParamStore& store, const SparseRows& input) const {
    if (input.cols != in_dim) throw std::invalid_argument("FeedForward: input width mismatch");
    Tensor h;
    for (size_t i = 0; i < layers.size(); ++i) {
        const Tensor& w = store.at(layers[i].w);
        const Tensor& b = store.at(layers[i].b);
        Tensor out(i == 0 ? input.rows : h.rows, w.cols);
        if (i == 0) {
            for (int r = 0; r < input.rows; ++r)
                for (auto [col, xv] : input.items[r])
                    for (int c = 0; c < w.cols; ++c) out.at(r, c) += xv * w.at(col, c);
        } else {
            for (int r = 0; r < h.rows; ++r)
                for (int k = 0; k < h.cols; ++k) {
                    double hv = h.at(r, k);
                    if (hv == 0.0) continue;
                    for (int c = 0; c < w.cols; ++c) out.at(r, c) += hv * w.at(k, c);
                }
        }
        for (int r = 0; r < out.rows; ++r)
            for (int c = 0; c < out.cols; ++c) {
                out.at(r, c) += b.at(0, c);
                if (layers[i].act == Activation::Relu && out.at(r, c) < 0.0) out.at(r, c) = 0.0;
            }
        h = std::move(out);
    }
    return h;
}

size_t FeedForward::param_count(const ParamStore& store) const {
    size_t n = 0;
    for (const auto& layer : layers) n += store.at(layer.w).size() + store.at(layer.b).size();
    return n;
}

// ---------------------------------------------------------------------------
// Encoder / prior models
// ---------------------------------------------------------------------------

EncoderModel EncoderModel::topology(const std::string& prefix, int input_dim, int hidden,
                                    int hidden_layers, int m, int order) {
    EncoderModel enc;
    enc.m = m;
    enc.order = order;
    enc.ff = FeedForward::topology(prefix, input_dim, hidden, hidden_layers, m << order);
    return enc;
}

EncoderModel EncoderModel::make(ParamStore& store, const std::string& prefix, int input_dim,
                                int hidden, int hidden_layers, int m, int order) {
    EncoderModel enc = topology(prefix, input_dim, hidden, hidden_layers, m, order);
    enc.ff.create_params(store);
    return enc;
}

markov::TableBatch EncoderModel::build(Graph& g, const ParamStore& store,
                                       SparseRows batch) const {
    Var logits = ff.build(g, store, std::move(batch));
    return markov::table_batch_from_logits(g, logits, m, order);
}

Tensor EncoderModel::eval_probs(const ParamStore& store, const SparseRows& batch) const {
    Tensor logits = ff.eval(store, batch);
    for (double& x : logits.v) x = clamp_prob(1.0 / (1.0 + std::exp(-x)));
    return logits;
}

PriorModel PriorModel::topology(const std::string& prefix, int embed_dim, int hidden,
                                int hidden_layers, int m, int order) {
    PriorModel prior;
    prior.m = m;
    prior.order = order;
    prior.embed = prefix + "embed";
    prior.embed_dim = embed_dim;
    prior.ff = FeedForward::topology(prefix, embed_dim, hidden, hidden_layers, m << order);
    return prior;
}

void PriorModel::create_params(ParamStore& store) const {
    store.create(embed, m, embed_dim);
    ff.create_params(store);
}

PriorModel PriorModel::make(ParamStore& store, const std::string& prefix, int embed_dim,
                            int hidden, int hidden_layers, int m, int order) {
    PriorModel prior = topology(prefix, embed_dim, hidden, hidden_layers, m, order);
    prior.create_params(store);
    return prior;
}

markov::TableBatch PriorModel::build(Graph& g, const ParamStore& store) const {
    Var pooled = g.mean_rows(g.param(store.ptr(embed)));
    Var logits = ff.build(g, store, pooled);
    return markov::table_batch_from_logits(g, logits, m, order);
}

}  // namespace ammi::nn
