#pragma once

#include <cstdint>
#include <vector>

#include "ammi/tensor.hpp"

namespace ammi::nn {

// Handle into a Graph's node list.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Dynamic reverse-mode tape over dense tensor operations. A graph is built
// forward (creation order is topological order), evaluated eagerly, and
// differentiated by one reverse sweep. Graphs are single-threaded and
// usually rebuilt per optimization step; parameters live outside the graph
// and are bound by pointer.
class Graph {
public:
    // Leaves. `param` keeps a pointer to external storage and receives a
    // gradient; binding the same tensor twice returns the same node, so
    // gradients accumulate in one place. `input` and `constant` do not
    // propagate gradients.
    Var param(const Tensor* external);
    Var input(Tensor t);
    Var constant(Tensor t) { return input(std::move(t)); }

    // The node a tensor was bound to, or an invalid Var.
    Var param_var(const Tensor* external) const;

    // Elementwise; b may have 1 row broadcast against a's rows.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var neg(Var a);
    Var scale(Var a, double s);
    Var add_scalar(Var a, double s);
    Var one_minus(Var a);

    Var matmul(Var a, Var b);
    Var sparse_matmul(SparseRows x, Var w);  // (x.rows, w.cols)

    Var relu(Var a);
    // Sigmoid with outputs clamped into [kProbEps, 1 - kProbEps].
    Var sigmoid(Var a);
    // log(sigmoid(x)) computed stably as -softplus(-x).
    Var log_sigmoid(Var a);
    // Natural log; inputs are expected to already be clamped away from 0.
    Var log(Var a);

    // out[r][j] = a[r][idx[j]].
    Var gather_cols(Var a, std::vector<int> idx);
    // out[r][j] = (sel[j] ? a1 : a0)[r][idx[j]]; a0 and a1 share a shape.
    Var gather_select(Var a0, Var a1, std::vector<int> idx, std::vector<uint8_t> sel);
    // out[r][j] = a[r][j] * mul[j] + add[j] (per-column constants).
    Var affine_cols(Var a, std::vector<double> mul, std::vector<double> add);

    Var row_sum(Var a);    // (N,M) -> (N,1)
    Var mean_rows(Var a);  // (N,M) -> (1,M)
    Var mean_all(Var a);   // -> (1,1)
    Var sum_all(Var a);    // -> (1,1)

    // Identity on values; gradients stop here.
    Var detach(Var a);

    // Entropy of the uniform mixture of the batch's code distributions,
    // computed by explicit enumeration of {0,1}^m with a hand-derived
    // backward pass. `probs` is (N, m*2^order) of clamped table entries;
    // guarded to m <= 16.
    Var mixture_code_entropy(Var probs, int m, int order);

    const Tensor& value(Var v) const;
    const Tensor& grad(Var v) const;
    Tensor& grad_mut(Var v);  // for in-place gradient clipping

    // Reverse sweep from a 1x1 loss node; accumulates into every reachable
    // param leaf's gradient buffer (zeroed first).
    void backward(Var loss);

    size_t node_count() const { return nodes_.size(); }

private:
    enum class Op {
        Param, Input, Add, Sub, Mul, Neg, Scale, AddScalar, OneMinus,
        MatMul, SparseMatMul, Relu, Sigmoid, LogSigmoid, Log,
        GatherCols, GatherSelect, AffineCols, RowSum, MeanRows, MeanAll,
        SumAll, Detach, MixtureEntropy,
    };

    struct Node {
        Op op;
        int a = -1, b = -1;
        Tensor val;
        const Tensor* ext = nullptr;  // param leaves
        Tensor grad;
        bool needs_grad = false;
        double s = 0.0;
        std::vector<int> idx;
        std::vector<uint8_t> sel;
        std::vector<double> cmul, cadd;
        std::vector<double> aux;  // op-specific forward state kept for backward
        SparseRows sparse;
        int m = 0, order = 0;
    };

    const Tensor& val_of(int id) const {
        const Node& n = nodes_[id];
        return n.ext ? *n.ext : n.val;
    }
    Var push(Node n);
    void backward_node(int id);

    std::vector<Node> nodes_;
    std::vector<std::pair<const Tensor*, int>> param_ids_;
};

}  // namespace ammi::nn
