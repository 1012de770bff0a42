#pragma once

#include <span>
#include <vector>

#include "ammi/graph.hpp"
#include "ammi/markov.hpp"

namespace ammi::markov {

// A batch of per-sample conditional probability tables living inside a
// graph. Row l of `probs` is sample l's table, flattened position-major:
// column i*2^order + c holds P(z_{i+1}=1 | context c). When the tables come
// from network logits, `logits` carries them so log-factors can use the
// stable log-sigmoid form; otherwise logits is invalid and logs are taken
// on the (already clamped) probabilities.
struct TableBatch {
    nn::Var probs;
    nn::Var logits;
    int m = 0;
    int order = 0;
    int rows = 0;
};

// Wraps plain MarkovParams as a constant (non-differentiable) batch.
TableBatch table_batch(nn::Graph& g, std::span<const MarkovParams> tables);
TableBatch table_batch(nn::Graph& g, const MarkovParams& table);

// Wraps an already-stacked probability tensor as a constant batch.
TableBatch table_batch_values(nn::Graph& g, nn::Tensor probs, int m, int order);

// Binds an external probability tensor as a parameter leaf, for gradient
// tests directly on table entries.
TableBatch table_batch_param(nn::Graph& g, const nn::Tensor* probs, int m, int order);

// Builds a batch from a logits tensor already in the graph.
TableBatch table_batch_from_logits(nn::Graph& g, nn::Var logits, int m, int order);

// Value-identical batch through which no gradient flows.
TableBatch detach(nn::Graph& g, const TableBatch& t);

// Per-position context posteriors, each (rows, 2^order); entry i is the
// distribution over the order bits preceding position i+1. Only defined for
// order >= 1 (order 0 has a single trivial context).
std::vector<nn::Var> forward_tables(nn::Graph& g, const TableBatch& p);

// Per-position window marginals at target_order >= p.order, each
// (rows, 2^{target_order+1}).
std::vector<nn::Var> marginal_tables(nn::Graph& g, const TableBatch& p, int target_order);

// Per-sample cross-entropies H(p_l, q_l) as a (rows, 1) column, in nats.
// q.rows must equal p.rows or 1 (a shared table broadcast over the batch).
nn::Var cross_entropy_rows(nn::Graph& g, const TableBatch& p, const TableBatch& q);

// Per-sample entropies H(p_l) = H(p_l, p_l); gradients flow through both
// occurrences.
nn::Var entropy_rows(nn::Graph& g, const TableBatch& p);

// Extracts sample l's table as plain MarkovParams (values only).
MarkovParams params_from_batch(const nn::Graph& g, const TableBatch& t, int row);

}  // namespace ammi::markov
