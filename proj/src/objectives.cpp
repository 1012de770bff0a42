#include "ammi/objectives.hpp"

#include <cstdio>
#include <stdexcept>

namespace ammi::objectives {

using markov::MarkovParams;
using markov::TableBatch;
using nn::Graph;
using nn::Var;

namespace {

BatchEstimate make_estimate(std::vector<double> per_sample, std::string tag) {
    BatchEstimate est;
    est.batch_size = static_cast<int>(per_sample.size());
    est.per_sample = std::move(per_sample);
    est.tag = std::move(tag);
    double sum = 0.0;
    for (double v : est.per_sample) sum += v;  // fixed index order
    est.value = sum / est.batch_size;
    return est;
}

void warn_beta(double beta) {
    static bool warned = false;
    if (beta < 1.0 && !warned) {
        std::fprintf(stderr, "warning: entropy weight beta=%g is below 1\n", beta);
        warned = true;
    }
}

}  // namespace

BatchEstimate cond_cross_entropy_batch(std::span<const MarkovParams> encoder,
                                       std::span<const MarkovParams> variational) {
    if (encoder.empty() || encoder.size() != variational.size())
        throw std::invalid_argument("cond_cross_entropy_batch: batch size mismatch");
    std::vector<double> per(encoder.size());
    for (size_t l = 0; l < encoder.size(); ++l)
        per[l] = markov::cross_entropy(encoder[l], variational[l]);
    return make_estimate(std::move(per), "cond_cross_entropy");
}

BatchEstimate prior_cross_entropy_batch(std::span<const MarkovParams> encoder,
                                        const MarkovParams& prior) {
    if (encoder.empty()) throw std::invalid_argument("prior_cross_entropy_batch: empty batch");
    std::vector<double> per(encoder.size());
    for (size_t l = 0; l < encoder.size(); ++l)
        per[l] = markov::cross_entropy(encoder[l], prior);
    return make_estimate(std::move(per), "prior_cross_entropy");
}

BatchEstimate cond_entropy_batch(std::span<const MarkovParams> encoder) {
    if (encoder.empty()) throw std::invalid_argument("cond_entropy_batch: empty batch");
    std::vector<double> per(encoder.size());
    for (size_t l = 0; l < encoder.size(); ++l) per[l] = markov::entropy(encoder[l]);
    return make_estimate(std::move(per), "cond_entropy");
}

double brute_entropy_batch(std::span<const MarkovParams> encoder) {
    return markov::brute::mixture_entropy(
        std::vector<MarkovParams>(encoder.begin(), encoder.end()));
}

AdversarialLosses ammi_losses(Graph& g, const TableBatch& encoder,
                              const TableBatch& variational, const TableBatch& prior,
                              double beta) {
    warn_beta(beta);
    if (variational.rows != encoder.rows)
        throw std::invalid_argument("ammi_losses: variational batch size mismatch");
    AdversarialLosses out;
    out.prior_loss = g.mean_all(cross_entropy_rows(g, markov::detach(g, encoder), prior));
    out.cond_rows = cross_entropy_rows(g, encoder, variational);
    out.prior_rows = cross_entropy_rows(g, encoder, markov::detach(g, prior));
    out.encoder_loss =
        g.sub(g.mean_all(out.cond_rows), g.scale(g.mean_all(out.prior_rows), beta));
    return out;
}

AdversarialLosses ammi_single_losses(Graph& g, const TableBatch& encoder,
                                     const TableBatch& prior, double beta) {
    warn_beta(beta);
    AdversarialLosses out;
    out.prior_loss = g.mean_all(cross_entropy_rows(g, markov::detach(g, encoder), prior));
    out.cond_rows = entropy_rows(g, encoder);
    out.prior_rows = cross_entropy_rows(g, encoder, markov::detach(g, prior));
    out.encoder_loss =
        g.sub(g.mean_all(out.cond_rows), g.scale(g.mean_all(out.prior_rows), beta));
    return out;
}

BruteForceLoss bmmi_loss(Graph& g, const TableBatch& encoder) {
    if (encoder.m > 16)
        throw std::invalid_argument("bmmi_loss: m exceeds the 16-bit enumeration guard");
    BruteForceLoss out;
    out.mixture_entropy = g.mixture_code_entropy(encoder.probs, encoder.m, encoder.order);
    out.cond_rows = entropy_rows(g, encoder);
    out.loss = g.sub(g.mean_all(out.cond_rows), out.mixture_entropy);
    return out;
}

}  // namespace ammi::objectives
