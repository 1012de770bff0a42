#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ammi/graph.hpp"
#include "ammi/markov_graph.hpp"
#include "ammi/tensor.hpp"
#include "ammi/util.hpp"

namespace ammi::nn {

// Named parameter tensors. Collections are distinguished by a dotted name
// prefix ("psi.", "phi.", "theta."), which is what the adversarial losses
// and the optimizers key on.
class ParamStore {
public:
    Tensor& create(const std::string& name, int rows, int cols);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    const Tensor* ptr(const std::string& name) const;
    bool has(const std::string& name) const { return params_.count(name) != 0; }

    // Names in lexicographic order, optionally restricted to a prefix.
    std::vector<std::string> names(const std::string& prefix = "") const;
    size_t count_values(const std::string& prefix = "") const;

    bool operator==(const ParamStore& o) const { return params_ == o.params_; }

    void save(std::ostream& os) const;
    static ParamStore load(std::istream& is);

private:
    std::map<std::string, Tensor> params_;
};

inline bool operator==(const Tensor& a, const Tensor& b) {
    return a.rows == b.rows && a.cols == b.cols && a.v == b.v;
}

// Entries iid uniform on [-alpha, alpha], deterministic given the generator
// state; tensors are visited in name order.
void init_uniform(Tensor& t, double alpha, Rng& rng);
void init_uniform(ParamStore& store, const std::string& prefix, double alpha, Rng& rng);

enum class Activation { Identity, Relu };

struct DenseLayer {
    std::string w;  // (in, out)
    std::string b;  // (1, out)
    Activation act = Activation::Identity;
    int in = 0;
    int out = 0;
};

// Affine->activation chain. The final layer is always Identity here; any
// sigmoid is applied by the table constructors downstream so logits stay
// available for stable log-probabilities.
struct FeedForward {
    std::vector<DenseLayer> layers;
    int in_dim = 0;
    int out_dim = 0;

    // input -> hidden ReLU layers -> out_dim, parameters named under
    // `prefix` ("psi.0.w", "psi.0.b", ...). topology() only names the
    // layers; create_params() registers the tensors; make() does both.
    static FeedForward topology(const std::string& prefix, int in_dim, int hidden,
                                int hidden_layers, int out_dim);
    static FeedForward make(ParamStore& store, const std::string& prefix, int in_dim,
                            int hidden, int hidden_layers, int out_dim);
    void create_params(ParamStore& store) const;

    Var build(Graph& g, const ParamStore& store, Var input) const;
    Var build(Graph& g, const ParamStore& store, SparseRows input) const;

    // Plain forward pass without a graph, for bulk encoding.
    Tensor eval(const ParamStore& store, const SparseRows& input) const;

    size_t param_count(const ParamStore& store) const;
};

// Document encoder p(Z|Y): sigmoid(FF(tfidf)) reshaped into per-position
// conditional tables of an order-`order` Markov distribution over {0,1}^m.
struct EncoderModel {
    FeedForward ff;
    int m = 0;
    int order = 0;

    static EncoderModel topology(const std::string& prefix, int input_dim, int hidden,
                                 int hidden_layers, int m, int order);
    static EncoderModel make(ParamStore& store, const std::string& prefix, int input_dim,
                             int hidden, int hidden_layers, int m, int order);

    markov::TableBatch build(Graph& g, const ParamStore& store, SparseRows batch) const;

    // Clamped table probabilities for a batch, no graph.
    Tensor eval_probs(const ParamStore& store, const SparseRows& batch) const;
};

// Shared code prior q(Z): sigmoid(FF(mean of embedding rows)), one table for
// the whole batch. The embedding dictionary is an (m, embed_dim) tensor of
// learnable values.
struct PriorModel {
    FeedForward ff;
    std::string embed;  // parameter name of the dictionary
    int embed_dim = 0;
    int m = 0;
    int order = 0;

    static PriorModel topology(const std::string& prefix, int embed_dim, int hidden,
                               int hidden_layers, int m, int order);
    static PriorModel make(ParamStore& store, const std::string& prefix, int embed_dim,
                           int hidden, int hidden_layers, int m, int order);
    void create_params(ParamStore& store) const;

    markov::TableBatch build(Graph& g, const ParamStore& store) const;
};

}  // namespace ammi::nn
