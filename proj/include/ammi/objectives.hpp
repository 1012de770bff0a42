#pragma once

#include <span>
#include <string>
#include <vector>

#include "ammi/markov.hpp"
#include "ammi/markov_graph.hpp"

namespace ammi::objectives {

// A batch-mean estimator value with its per-sample contributions, in nats.
struct BatchEstimate {
    double value = 0.0;
    std::vector<double> per_sample;
    std::string tag;
    int batch_size = 0;
};

// -- Plain (value-only) estimators over explicit per-sample tables. --------

// Mean of H(p_l, q_l): the conditional cross-entropy estimate. The q order
// must be at least the p order.
BatchEstimate cond_cross_entropy_batch(std::span<const markov::MarkovParams> encoder,
                                       std::span<const markov::MarkovParams> variational);

// Mean of H(p_l, prior) with one shared prior table.
BatchEstimate prior_cross_entropy_batch(std::span<const markov::MarkovParams> encoder,
                                        const markov::MarkovParams& prior);

// Mean of H(p_l): the conditional entropy estimate.
BatchEstimate cond_entropy_batch(std::span<const markov::MarkovParams> encoder);

// Entropy of the uniform mixture of the batch's code distributions by
// explicit enumeration (guarded to small m).
double brute_entropy_batch(std::span<const markov::MarkovParams> encoder);

// -- Differentiable losses built inside a graph. ----------------------------

// The two losses of the adversarial game, with explicit stop-gradients:
//   prior_loss   treats the encoder tables as constants,
//   encoder_loss treats the prior table as a constant.
struct AdversarialLosses {
    nn::Var prior_loss;    // mean H(stopgrad(p_l), prior)
    nn::Var encoder_loss;  // conditional term - beta * mean H(p_l, stopgrad(prior))
    nn::Var cond_rows;     // per-sample conditional term, (N, 1)
    nn::Var prior_rows;    // per-sample prior cross-entropies (live encoder side), (N, 1)
};

// General two-variable form: the conditional term is mean H(p_l, q_l) with a
// separate per-sample variational batch.
AdversarialLosses ammi_losses(nn::Graph& g, const markov::TableBatch& encoder,
                              const markov::TableBatch& variational,
                              const markov::TableBatch& prior, double beta);

// Single-variable form: the conditional term is the mean entropy of the
// encoder tables themselves.
AdversarialLosses ammi_single_losses(nn::Graph& g, const markov::TableBatch& encoder,
                                     const markov::TableBatch& prior, double beta);

// Exact-entropy objective: loss = mean H(p_l) - H(mixture), to be minimized.
struct BruteForceLoss {
    nn::Var loss;
    nn::Var mixture_entropy;  // scalar
    nn::Var cond_rows;        // per-sample entropies, (N, 1)
};

BruteForceLoss bmmi_loss(nn::Graph& g, const markov::TableBatch& encoder);

}  // namespace ammi::objectives
