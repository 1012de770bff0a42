#include "ammi/graph.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "ammi/util.hpp"

namespace ammi::nn {

namespace {

double stable_log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid_neg(double x) {  // sigmoid(-x), stable
    if (x >= 0.0) {
        double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

// Context integer at 0-based position i of a prefix integer (bit k = bit k
// of the code), most recent bit in context bit 0.
int context_at(uint32_t code, int i, int order) {
    int c = 0;
    for (int j = 1; j <= order; ++j) {
        int pos = i - j;
        if (pos < 0) break;
        c |= static_cast<int>((code >> pos) & 1u) << (j - 1);
    }
    return c;
}

[[noreturn]] void shape_error(const char* op) {
    throw std::invalid_argument(std::string("Graph::") + op + ": shape mismatch");
}

}  // namespace

Var Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Graph::value(Var v) const { return val_of(v.id); }

const Tensor& Graph::grad(Var v) const {
    static const Tensor kEmpty;
    const Node& n = nodes_[v.id];
    return n.grad.size() ? n.grad : kEmpty;
}

Tensor& Graph::grad_mut(Var v) { return nodes_[v.id].grad; }

Var Graph::param(const Tensor* external) {
    if (Var existing = param_var(external); existing.valid()) return existing;
    Node n;
    n.op = Op::Param;
    n.ext = external;
    n.needs_grad = true;
    Var v = push(std::move(n));
    param_ids_.emplace_back(external, v.id);
    return v;
}

Var Graph::param_var(const Tensor* external) const {
    for (const auto& [ptr, id] : param_ids_)
        if (ptr == external) return Var{id};
    return Var{};
}

Var Graph::input(Tensor t) {
    Node n;
    n.op = Op::Input;
    n.val = std::move(t);
    return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
    const Tensor& ta = val_of(a.id);
    const Tensor& tb = val_of(b.id);
    if (tb.cols != ta.cols || (tb.rows != ta.rows && tb.rows != 1)) shape_error("add");
    Node n;
    n.op = Op::Add;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = Tensor(ta.rows, ta.cols);
    for (int r = 0; r < ta.rows; ++r) {
        int rb = tb.rows == 1 ? 0 : r;
        for (int c = 0; c < ta.cols; ++c) n.val.at(r, c) = ta.at(r, c) + tb.at(rb, c);
    }
    return push(std::move(n));
}

Var Graph::sub(Var a, Var b) {
    const Tensor& ta = val_of(a.id);
    const Tensor& tb = val_of(b.id);
    if (tb.cols != ta.cols || (tb.rows != ta.rows && tb.rows != 1)) shape_error("sub");
    Node n;
    n.op = Op::Sub;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = Tensor(ta.rows, ta.cols);
    for (int r = 0; r < ta.rows; ++r) {
        int rb = tb.rows == 1 ? 0 : r;
        for (int c = 0; c < ta.cols; ++c) n.val.at(r, c) = ta.at(r, c) - tb.at(rb, c);
    }
    return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
    const Tensor& ta = val_of(a.id);
    const Tensor& tb = val_of(b.id);
    if (tb.cols != ta.cols || (tb.rows != ta.rows && tb.rows != 1)) shape_error("mul");
    Node n;
    n.op = Op::Mul;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = Tensor(ta.rows, ta.cols);
    for (int r = 0; r < ta.rows; ++r) {
        int rb = tb.rows == 1 ? 0 : r;
        for (int c = 0; c < ta.cols; ++c) n.val.at(r, c) = ta.at(r, c) * tb.at(rb, c);
    }
    return push(std::move(n));
}

Var Graph::neg(Var a) { return scale(a, -1.0); }

Var Graph::scale(Var a, double s) {
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::Scale;
    n.a = a.id;
    n.s = s;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = ta;
    for (double& x : n.val.v) x *= s;
    return push(std::move(n));
}

Var Graph::add_scalar(Var a, double s) {
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::AddScalar;
    n.a = a.id;
    n.s = s;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = ta;
    for (double& x : n.val.v) x += s;
    return push(std::move(n));
}

Var Graph::one_minus(Var a) {
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::OneMinus;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = ta;
    for (double& x : n.val.v) x = 1.0 - x;
    return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
    const Tensor& ta = val_of(a.id);
    const Tensor& tb = val_of(b.id);
    if (ta.cols != tb.rows) shape_error("matmul");
    Node n;
    n.op = Op::MatMul;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = Tensor(ta.rows, tb.cols);
    for (int r = 0; r < ta.rows; ++r)
        for (int k = 0; k < ta.cols; ++k) {
            double av = ta.at(r, k);
            if (av == 0.0) continue;
            for (int c = 0; c < tb.cols; ++c) n.val.at(r, c) += av * tb.at(k, c);
        }
    return push(std::move(n));
}

Var Graph::sparse_matmul(SparseRows x, Var w) {
    const Tensor& tw = val_of(w.id);
    if (x.cols != tw.rows) shape_error("sparse_matmul");
    Node n;
    n.op = Op::SparseMatMul;
    n.b = w.id;
    n.needs_grad = nodes_[w.id].needs_grad;
    n.val = Tensor(x.rows, tw.cols);
    for (int r = 0; r < x.rows; ++r)
        for (auto [col, xv] : x.items[r])
            for (int c = 0; c < tw.cols; ++c) n.val.at(r, c) += xv * tw.at(col, c);
    n.sparse = std::move(x);
    return push(std::move(n));
}

Var Graph::relu(Var a) {
    Node n;
    n.op = Op::Relu;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = val_of(a.id);
    for (double& x : n.val.v) x = x > 0.0 ? x : 0.0;
    return push(std::move(n));
}

Var Graph::sigmoid(Var a) {
    Node n;
    n.op = Op::Sigmoid;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = val_of(a.id);
    for (double& x : n.val.v) x = clamp_prob(1.0 / (1.0 + std::exp(-x)));
    return push(std::move(n));
}

Var Graph::log_sigmoid(Var a) {
    Node n;
    n.op = Op::LogSigmoid;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = val_of(a.id);
    for (double& x : n.val.v) x = stable_log_sigmoid(x);
    return push(std::move(n));
}

Var Graph::log(Var a) {
    Node n;
    n.op = Op::Log;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = val_of(a.id);
    for (double& x : n.val.v) x = std::log(x);
    return push(std::move(n));
}

Var Graph::gather_cols(Var a, std::vector<int> idx) {
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::GatherCols;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = Tensor(ta.rows, static_cast<int>(idx.size()));
    for (int r = 0; r < ta.rows; ++r)
        for (size_t j = 0; j < idx.size(); ++j) n.val.at(r, static_cast<int>(j)) = ta.at(r, idx[j]);
    n.idx = std::move(idx);
    return push(std::move(n));
}

Var Graph::gather_select(Var a0, Var a1, std::vector<int> idx, std::vector<uint8_t> sel) {
    const Tensor& t0 = val_of(a0.id);
    const Tensor& t1 = val_of(a1.id);
    if (!t0.same_shape(t1) || idx.size() != sel.size()) shape_error("gather_select");
    Node n;
    n.op = Op::GatherSelect;
    n.a = a0.id;
    n.b = a1.id;
    n.needs_grad = nodes_[a0.id].needs_grad || nodes_[a1.id].needs_grad;
    n.val = Tensor(t0.rows, static_cast<int>(idx.size()));
    for (int r = 0; r < t0.rows; ++r)
        for (size_t j = 0; j < idx.size(); ++j)
            n.val.at(r, static_cast<int>(j)) = (sel[j] ? t1 : t0).at(r, idx[j]);
    n.idx = std::move(idx);
    n.sel = std::move(sel);
    return push(std::move(n));
}

Var Graph::affine_cols(Var a, std::vector<double> mul, std::vector<double> add) {
    const Tensor& ta = val_of(a.id);
    if (static_cast<int>(mul.size()) != ta.cols || mul.size() != add.size())
        shape_error("affine_cols");
    Node n;
    n.op = Op::AffineCols;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = Tensor(ta.rows, ta.cols);
    for (int r = 0; r < ta.rows; ++r)
        for (int c = 0; c < ta.cols; ++c) n.val.at(r, c) = ta.at(r, c) * mul[c] + add[c];
    n.cmul = std::move(mul);
    n.cadd = std::move(add);
    return push(std::move(n));
}

Var Graph::row_sum(Var a) {
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::RowSum;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = Tensor(ta.rows, 1);
    for (int r = 0; r < ta.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < ta.cols; ++c) s += ta.at(r, c);
        n.val.at(r, 0) = s;
    }
    return push(std::move(n));
}

Var Graph::mean_rows(Var a) {
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::MeanRows;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = Tensor(1, ta.cols);
    for (int r = 0; r < ta.rows; ++r)
        for (int c = 0; c < ta.cols; ++c) n.val.at(0, c) += ta.at(r, c);
    for (double& x : n.val.v) x /= ta.rows;
    return push(std::move(n));
}

Var Graph::mean_all(Var a) {
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::MeanAll;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    double s = 0.0;
    for (double x : ta.v) s += x;
    n.val = Tensor::scalar(s / static_cast<double>(ta.size()));
    return push(std::move(n));
}

Var Graph::sum_all(Var a) {
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::SumAll;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    double s = 0.0;
    for (double x : ta.v) s += x;
    n.val = Tensor::scalar(s);
    return push(std::move(n));
}

Var Graph::detach(Var a) {
    Node n;
    n.op = Op::Detach;
    n.a = a.id;
    n.needs_grad = false;
    n.val = val_of(a.id);
    return push(std::move(n));
}

Var Graph::mixture_code_entropy(Var probs, int m, int order) {
    if (m > 16) throw std::invalid_argument("mixture_code_entropy: m exceeds 16-bit guard");
    const Tensor& tp = val_of(probs.id);
    if (tp.cols != (m << order)) shape_error("mixture_code_entropy");
    Node n;
    n.op = Op::MixtureEntropy;
    n.a = probs.id;
    n.needs_grad = nodes_[probs.id].needs_grad;
    n.m = m;
    n.order = order;

    const size_t codes = size_t{1} << m;
    const int N = tp.rows;
    std::vector<double> s(codes, 0.0);
    std::vector<double> level{1.0}, nxt;
    for (int l = 0; l < N; ++l) {
        const double* row = &tp.v[static_cast<size_t>(l) * tp.cols];
        level.assign(1, 1.0);
        for (int i = 0; i < m; ++i) {
            nxt.assign(level.size() * 2, 0.0);
            for (uint32_t q = 0; q < level.size(); ++q) {
                double p1 = row[(i << order) + context_at(q, i, order)];
                nxt[q] = level[q] * (1.0 - p1);
                nxt[q | (uint32_t{1} << i)] = level[q] * p1;
            }
            level.swap(nxt);
        }
        for (size_t z = 0; z < codes; ++z) s[z] += level[z];
    }
    double h = 0.0;
    const double dn = static_cast<double>(N);
    for (double sz : s)
        if (sz > 0.0) h += (sz / dn) * std::log(dn / sz);
    n.val = Tensor::scalar(h);
    n.aux = std::move(s);  // kept for the backward pass
    return push(std::move(n));
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

void Graph::backward(Var loss) {
    Node& top = nodes_[loss.id];
    const Tensor& tv = val_of(loss.id);
    if (tv.rows != 1 || tv.cols != 1)
        throw std::invalid_argument("Graph::backward: loss must be 1x1");
    for (Node& n : nodes_) n.grad = Tensor();
    if (!top.needs_grad) return;
    top.grad = Tensor::scalar(1.0);
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.needs_grad || n.grad.size() == 0) continue;
        backward_node(id);
    }
}

namespace {
void ensure_grad(Tensor& g, const Tensor& like) {
    if (g.size() == 0) g = Tensor(like.rows, like.cols);
}
}  // namespace

void Graph::backward_node(int id) {
    Node& n = nodes_[id];
    const Tensor& g = n.grad;

    auto want = [&](int in) {
        return in >= 0 && nodes_[in].needs_grad;
    };
    auto gbuf = [&](int in) -> Tensor& {
        Node& m = nodes_[in];
        ensure_grad(m.grad, val_of(in));
        return m.grad;
    };

    switch (n.op) {
    case Op::Param:
    case Op::Input:
    case Op::Detach:
        return;
    case Op::Add: {
        if (want(n.a)) {
            Tensor& da = gbuf(n.a);
            for (size_t i = 0; i < g.size(); ++i) da.v[i] += g.v[i];
        }
        if (want(n.b)) {
            Tensor& db = gbuf(n.b);
            if (db.rows == g.rows) {
                for (size_t i = 0; i < g.size(); ++i) db.v[i] += g.v[i];
            } else {
                for (int r = 0; r < g.rows; ++r)
                    for (int c = 0; c < g.cols; ++c) db.at(0, c) += g.at(r, c);
            }
        }
        return;
    }
    case Op::Sub: {
        if (want(n.a)) {
            Tensor& da = gbuf(n.a);
            for (size_t i = 0; i < g.size(); ++i) da.v[i] += g.v[i];
        }
        if (want(n.b)) {
            Tensor& db = gbuf(n.b);
            if (db.rows == g.rows) {
                for (size_t i = 0; i < g.size(); ++i) db.v[i] -= g.v[i];
            } else {
                for (int r = 0; r < g.rows; ++r)
                    for (int c = 0; c < g.cols; ++c) db.at(0, c) -= g.at(r, c);
            }
        }
        return;
    }
    case Op::Mul: {
        const Tensor& ta = val_of(n.a);
        const Tensor& tb = val_of(n.b);
        if (want(n.a)) {
            Tensor& da = gbuf(n.a);
            for (int r = 0; r < g.rows; ++r) {
                int rb = tb.rows == 1 ? 0 : r;
                for (int c = 0; c < g.cols; ++c) da.at(r, c) += g.at(r, c) * tb.at(rb, c);
            }
        }
        if (want(n.b)) {
            Tensor& db = gbuf(n.b);
            if (db.rows == g.rows) {
                for (int r = 0; r < g.rows; ++r)
                    for (int c = 0; c < g.cols; ++c) db.at(r, c) += g.at(r, c) * ta.at(r, c);
            } else {
                for (int r = 0; r < g.rows; ++r)
                    for (int c = 0; c < g.cols; ++c) db.at(0, c) += g.at(r, c) * ta.at(r, c);
            }
        }
        return;
    }
    case Op::Scale: {
        if (!want(n.a)) return;
        Tensor& da = gbuf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da.v[i] += g.v[i] * n.s;
        return;
    }
    case Op::AddScalar: {
        if (!want(n.a)) return;
        Tensor& da = gbuf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da.v[i] += g.v[i];
        return;
    }
    case Op::Neg:
    case Op::OneMinus: {
        if (!want(n.a)) return;
        Tensor& da = gbuf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da.v[i] -= g.v[i];
        return;
    }
    case Op::MatMul: {
        const Tensor& ta = val_of(n.a);
        const Tensor& tb = val_of(n.b);
        if (want(n.a)) {
            Tensor& da = gbuf(n.a);
            for (int r = 0; r < ta.rows; ++r)
                for (int k = 0; k < ta.cols; ++k) {
                    double s = 0.0;
                    for (int c = 0; c < tb.cols; ++c) s += g.at(r, c) * tb.at(k, c);
                    da.at(r, k) += s;
                }
        }
        if (want(n.b)) {
            Tensor& db = gbuf(n.b);
            for (int r = 0; r < ta.rows; ++r)
                for (int k = 0; k < ta.cols; ++k) {
                    double av = ta.at(r, k);
                    if (av == 0.0) continue;
                    for (int c = 0; c < tb.cols; ++c) db.at(k, c) += av * g.at(r, c);
                }
        }
        return;
    }
    case Op::SparseMatMul: {
        if (!want(n.b)) return;
        Tensor& dw = gbuf(n.b);
        for (int r = 0; r < n.sparse.rows; ++r)
            for (auto [col, xv] : n.sparse.items[r])
                for (int c = 0; c < g.cols; ++c) dw.at(col, c) += xv * g.at(r, c);
        return;
    }
    case Op::Relu: {
        if (!want(n.a)) return;
        const Tensor& ta = val_of(n.a);
        Tensor& da = gbuf(n.a);
        for (size_t i = 0; i < g.size(); ++i)
            if (ta.v[i] > 0.0) da.v[i] += g.v[i];
        return;
    }
    case Op::Sigmoid: {
        if (!want(n.a)) return;
        Tensor& da = gbuf(n.a);
        for (size_t i = 0; i < g.size(); ++i) {
            double v = n.val.v[i];
            da.v[i] += g.v[i] * v * (1.0 - v);
        }
        return;
    }
    case Op::LogSigmoid: {
        if (!want(n.a)) return;
        const Tensor& ta = val_of(n.a);
        Tensor& da = gbuf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da.v[i] += g.v[i] * sigmoid_neg(ta.v[i]);
        return;
    }
    case Op::Log: {
        if (!want(n.a)) return;
        const Tensor& ta = val_of(n.a);
        Tensor& da = gbuf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da.v[i] += g.v[i] / ta.v[i];
        return;
    }
    case Op::GatherCols: {
        if (!want(n.a)) return;
        Tensor& da = gbuf(n.a);
        for (int r = 0; r < g.rows; ++r)
            for (size_t j = 0; j < n.idx.size(); ++j)
                da.at(r, n.idx[j]) += g.at(r, static_cast<int>(j));
        return;
    }
    case Op::GatherSelect: {
        bool wa = want(n.a), wb = want(n.b);
        if (!wa && !wb) return;
        for (int r = 0; r < g.rows; ++r)
            for (size_t j = 0; j < n.idx.size(); ++j) {
                int in = n.sel[j] ? n.b : n.a;
                if (!want(in)) continue;
                gbuf(in).at(r, n.idx[j]) += g.at(r, static_cast<int>(j));
            }
        return;
    }
    case Op::AffineCols: {
        if (!want(n.a)) return;
        Tensor& da = gbuf(n.a);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) da.at(r, c) += g.at(r, c) * n.cmul[c];
        return;
    }
    case Op::RowSum: {
        if (!want(n.a)) return;
        const Tensor& ta = val_of(n.a);
        Tensor& da = gbuf(n.a);
        for (int r = 0; r < ta.rows; ++r)
            for (int c = 0; c < ta.cols; ++c) da.at(r, c) += g.at(r, 0);
        return;
    }
    case Op::MeanRows: {
        if (!want(n.a)) return;
        const Tensor& ta = val_of(n.a);
        Tensor& da = gbuf(n.a);
        double inv = 1.0 / ta.rows;
        for (int r = 0; r < ta.rows; ++r)
            for (int c = 0; c < ta.cols; ++c) da.at(r, c) += g.at(0, c) * inv;
        return;
    }
    case Op::MeanAll: {
        if (!want(n.a)) return;
        const Tensor& ta = val_of(n.a);
        Tensor& da = gbuf(n.a);
        double gv = g.v[0] / static_cast<double>(ta.size());
        for (double& x : da.v) x += gv;
        return;
    }
    case Op::SumAll: {
        if (!want(n.a)) return;
        Tensor& da = gbuf(n.a);
        double gv = g.v[0];
        for (double& x : da.v) x += gv;
        return;
    }
    case Op::MixtureEntropy: {
        if (!want(n.a)) return;
        const Tensor& tp = val_of(n.a);
        Tensor& da = gbuf(n.a);
        const double gv = g.v[0];
        const int m = n.m, order = n.order;
        const int N = tp.rows;
        const double dn = static_cast<double>(N);
        const std::vector<double>& s = n.aux;

        // dH/ds_z for the mixture entropy H = sum_z (s_z/N) log(N/s_z).
        std::vector<double> ds(s.size());
        for (size_t z = 0; z < s.size(); ++z)
            ds[z] = (std::log(dn / std::max(s[z], 1e-300)) - 1.0) / dn;

        // Per sample: rebuild the prefix-probability levels, then sweep a
        // suffix-weight array back down, accumulating table gradients.
        std::vector<std::vector<double>> levels(m + 1);
        std::vector<double> beta, nbeta;
        for (int l = 0; l < N; ++l) {
            const double* row = &tp.v[static_cast<size_t>(l) * tp.cols];
            double* drow = &da.v[static_cast<size_t>(l) * tp.cols];
            levels[0] = {1.0};
            for (int i = 0; i < m; ++i) {
                const auto& cur = levels[i];
                auto& nx = levels[i + 1];
                nx.assign(cur.size() * 2, 0.0);
                for (uint32_t q = 0; q < cur.size(); ++q) {
                    double p1 = row[(i << order) + context_at(q, i, order)];
                    nx[q] = cur[q] * (1.0 - p1);
                    nx[q | (uint32_t{1} << i)] = cur[q] * p1;
                }
            }
            beta = ds;
            for (int i = m - 1; i >= 0; --i) {
                const auto& cur = levels[i];
                nbeta.assign(cur.size(), 0.0);
                for (uint32_t q = 0; q < cur.size(); ++q) {
                    int col = (i << order) + context_at(q, i, order);
                    double p1 = row[col];
                    double b0 = beta[q];
                    double b1 = beta[q | (uint32_t{1} << i)];
                    drow[col] += gv * cur[q] * (b1 - b0);
                    nbeta[q] = (1.0 - p1) * b0 + p1 * b1;
                }
                beta.swap(nbeta);
            }
        }
        return;
    }
    }
}

}  // namespace ammi::nn
