#include "ammi/markov_graph.hpp"

#include <stdexcept>

namespace ammi::markov {

using nn::Graph;
using nn::Tensor;
using nn::Var;

TableBatch table_batch(Graph& g, std::span<const MarkovParams> tables) {
    if (tables.empty()) throw std::invalid_argument("table_batch: empty batch");
    const int m = tables[0].m;
    const int order = tables[0].order;
    Tensor t(static_cast<int>(tables.size()), m << order);
    for (size_t l = 0; l < tables.size(); ++l) {
        if (tables[l].m != m || tables[l].order != order)
            throw std::invalid_argument("table_batch: inconsistent shapes");
        std::copy(tables[l].table.begin(), tables[l].table.end(),
                  t.v.begin() + static_cast<size_t>(l) * t.cols);
    }
    return TableBatch{g.input(std::move(t)), Var{}, m, order, static_cast<int>(tables.size())};
}

TableBatch table_batch(Graph& g, const MarkovParams& table) {
    return table_batch(g, std::span<const MarkovParams>(&table, 1));
}

TableBatch table_batch_values(Graph& g, Tensor probs, int m, int order) {
    if (probs.cols != (m << order))
        throw std::invalid_argument("table_batch_values: width must be m*2^order");
    int rows = probs.rows;
    return TableBatch{g.input(std::move(probs)), Var{}, m, order, rows};
}

TableBatch table_batch_param(Graph& g, const Tensor* probs, int m, int order) {
    if (probs->cols != (m << order))
        throw std::invalid_argument("table_batch_param: tensor width must be m*2^order");
    return TableBatch{g.param(probs), Var{}, m, order, probs->rows};
}

TableBatch table_batch_from_logits(Graph& g, Var logits, int m, int order) {
    const Tensor& t = g.value(logits);
    if (t.cols != (m << order))
        throw std::invalid_argument("table_batch_from_logits: width must be m*2^order");
    return TableBatch{g.sigmoid(logits), logits, m, order, t.rows};
}

TableBatch detach(Graph& g, const TableBatch& t) {
    TableBatch d = t;
    d.probs = g.detach(t.probs);
    if (t.logits.valid()) d.logits = g.detach(t.logits);
    return d;
}

namespace {

// log q(bit=1) and log q(bit=0) per table column, shape (rows, m*2^order).
struct LogTables {
    Var log1, log0;
};

LogTables log_tables(Graph& g, const TableBatch& t) {
    if (t.logits.valid())
        return {g.log_sigmoid(t.logits), g.log_sigmoid(g.neg(t.logits))};
    return {g.log(t.probs), g.log(g.one_minus(t.probs))};
}

// Gathers the Bernoulli factor for each window: column j of the output is
// table column idx[j] if outcome[j] is 1, else one minus it.
Var gather_factor(Graph& g, Var probs, const std::vector<int>& idx,
                  const std::vector<uint8_t>& outcome) {
    Var got = g.gather_cols(probs, idx);
    std::vector<double> mul(idx.size()), add(idx.size());
    for (size_t j = 0; j < idx.size(); ++j) {
        mul[j] = outcome[j] ? 1.0 : -1.0;
        add[j] = outcome[j] ? 0.0 : 1.0;
    }
    return g.affine_cols(got, std::move(mul), std::move(add));
}

}  // namespace

std::vector<Var> forward_tables(Graph& g, const TableBatch& p) {
    if (p.order < 1)
        throw std::invalid_argument("forward_tables: order must be >= 1");
    const int K = 1 << p.order;

    std::vector<Var> pi(p.m);
    Tensor base(p.rows, K);
    for (int r = 0; r < p.rows; ++r) base.at(r, 0) = 1.0;
    pi[0] = g.constant(std::move(base));

    for (int i = 1; i < p.m; ++i) {
        Var acc{};
        for (int b = 0; b <= 1; ++b) {
            std::vector<int> prev_idx(K), col_idx(K);
            std::vector<uint8_t> outcome(K);
            for (int c = 0; c < K; ++c) {
                int pc = (c >> 1) | (b << (p.order - 1));
                prev_idx[c] = pc;
                col_idx[c] = ((i - 1) << p.order) + pc;
                outcome[c] = static_cast<uint8_t>(c & 1);
            }
            Var f = gather_factor(g, p.probs, col_idx, outcome);
            Var term = g.mul(g.gather_cols(pi[i - 1], std::move(prev_idx)), f);
            acc = b == 0 ? term : g.add(acc, term);
        }
        pi[i] = acc;
    }
    return pi;
}

std::vector<Var> marginal_tables(Graph& g, const TableBatch& p, int target_order) {
    if (target_order < p.order)
        throw std::invalid_argument("marginal_tables: target order must be >= p.order");
    const int o = p.order;
    const int op = target_order;
    const int W = 2 << op;
    const int omask = (1 << o) - 1;

    std::vector<Var> pi;
    if (o > 0) pi = forward_tables(g, p);

    std::vector<Var> mu(p.m);
    for (int i = 0; i < p.m; ++i) {
        const int t = i - op + o;

        std::vector<double> feas(W, 1.0);
        for (int w = 0; w < W; ++w)
            for (int k = i + 1; k <= op; ++k)
                if ((w >> k) & 1) { feas[w] = 0.0; break; }

        Var acc{};
        if (o > 0) {
            std::vector<int> ctx(W);
            for (int w = 0; w < W; ++w) ctx[w] = (w >> (op - o + 1)) & omask;
            acc = g.gather_cols(pi[std::max(t, 0)], std::move(ctx));
        }
        for (int j = std::max(t, 0); j <= i; ++j) {
            std::vector<int> col(W);
            std::vector<uint8_t> outcome(W);
            for (int w = 0; w < W; ++w) {
                col[w] = (j << o) + ((w >> (i - j + 1)) & omask);
                outcome[w] = static_cast<uint8_t>((w >> (i - j)) & 1);
            }
            Var f = gather_factor(g, p.probs, std::move(col), std::move(outcome));
            acc = acc.valid() ? g.mul(acc, f) : f;
        }
        // Zero out windows that would place a 1 before the first position.
        mu[i] = g.affine_cols(acc, std::move(feas), std::vector<double>(W, 0.0));
    }
    return mu;
}

Var cross_entropy_rows(Graph& g, const TableBatch& p, const TableBatch& q) {
    if (q.m != p.m) throw std::invalid_argument("cross_entropy_rows: code lengths differ");
    if (q.order < p.order)
        throw std::invalid_argument("cross_entropy_rows: q.order must be >= p.order");
    if (q.rows != p.rows && q.rows != 1)
        throw std::invalid_argument("cross_entropy_rows: batch sizes incompatible");

    const int op = q.order;
    const int W = 2 << op;
    std::vector<Var> mu = marginal_tables(g, p, op);
    LogTables lt = log_tables(g, q);

    Var acc{};
    for (int i = 0; i < p.m; ++i) {
        std::vector<int> col(W);
        std::vector<uint8_t> sel(W);
        for (int w = 0; w < W; ++w) {
            col[w] = (i << op) + (w >> 1);
            sel[w] = static_cast<uint8_t>(w & 1);
        }
        Var logq = g.gather_select(lt.log0, lt.log1, std::move(col), std::move(sel));
        Var term = g.row_sum(g.mul(mu[i], logq));
        acc = acc.valid() ? g.add(acc, term) : term;
    }
    return g.neg(acc);
}

Var entropy_rows(Graph& g, const TableBatch& p) { return cross_entropy_rows(g, p, p); }

MarkovParams params_from_batch(const nn::Graph& g, const TableBatch& t, int row) {
    const Tensor& v = g.value(t.probs);
    std::vector<double> probs(v.v.begin() + static_cast<size_t>(row) * v.cols,
                              v.v.begin() + static_cast<size_t>(row + 1) * v.cols);
    return MarkovParams::from_probs(t.m, t.order, std::move(probs));
}

}  // namespace ammi::markov
