#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ammi/adam.hpp"
#include "ammi/config.hpp"
#include "ammi/corpus.hpp"
#include "ammi/network.hpp"
#include "ammi/retrieval.hpp"

namespace ammi::training {

enum class Mode { AmmiSingle, AmmiPairs, Bmmi };

Mode mode_from_string(const std::string& s);
std::string mode_to_string(Mode mode);

struct Hyperparams {
    double alpha = 0.1;      // init range
    int batch_size = 64;     // N
    int inner_steps = 2;     // G
    double adv_lr = 0.003;   // eta'
    double lr = 0.001;       // eta
    double beta = 2.0;       // entropy weight
    int order_o = 0;
    int order_h = 0;
    int order_r = 3;
    int bits = 16;           // m
    int hidden = 512;
    int encoder_layers = 1;
    int prior_hidden = 512;
    int prior_layers = 2;
    int prior_embed = 64;    // embedding dictionary width H
    int patience = 10;
    int max_epochs = 100;
    double clip_norm = 0.0;  // 0 disables clipping
    int eval_k = 100;
    uint64_t seed = 1;

    // Throws on structural violations (order constraints, empty batch);
    // warns on stderr for beta < 1 and zero learning rates.
    void validate() const;

    static Hyperparams from_config(const Config& cfg);
    void to_config(Config& cfg) const;
};

struct EpochMetrics {
    int epoch = 0;
    double encoder_loss = 0.0;
    double prior_loss = 0.0;
    double surrogate_nats = 0.0;  // prior term minus conditional term
    double surrogate_bits = 0.0;
    double val_score = 0.0;
};

struct TrainState {
    Hyperparams hyper;
    Mode mode = Mode::AmmiSingle;
    uint64_t config_hash = 0;
    int input_dim = 0;

    nn::ParamStore params;
    nn::AdamOpt opt_model;  // psi (and phi in the paired mode)
    nn::AdamOpt opt_prior;  // theta

    int epoch = 0;
    int batch_cursor = 0;
    int init_count = 0;  // times parameters were drawn from Unif(-alpha, alpha)
    int epochs_since_best = 0;
    double best_val = -1e300;
    int best_epoch = -1;
    nn::ParamStore best_params;

    std::vector<EpochMetrics> trace;
    std::vector<double> batch_prior_loss;    // per optimizer batch
    std::vector<double> batch_encoder_loss;
    std::vector<double> batch_surrogate;     // prior term minus conditional term
};

using ValidationTask = std::function<double(const TrainState&, const hashing::Corpus&)>;

// Encodes the validation split, retrieves k nearest training documents by
// Hamming distance and scores label overlap; falls back to pair-matching
// precision when index labels are missing and pairs exist. k is capped at
// the candidate count.
double validation_task_precision(const TrainState& st, const hashing::Corpus& corpus, int k);

// The alternating adversarial loop: per batch, `inner_steps` optimizer
// steps on theta minimizing the prior cross-entropy, then one step on
// psi (and phi) minimizing the conditional term minus beta times the
// entropy term. Deterministic given the seed.
class Trainer {
public:
    Trainer(const hashing::Corpus& corpus, const Hyperparams& hyper, Mode mode);
    Trainer(const hashing::Corpus& corpus, TrainState state);  // resume

    void init_params();

    // One optimizer batch; returns false once the current epoch is done.
    bool step_batch();
    // Validation, early-stop bookkeeping, metrics row; advances the epoch.
    void finish_epoch();
    bool stop_requested() const;

    // Full loop until patience or max_epochs; restores the best parameters
    // into state().params before returning.
    void run();
    void run_epochs(int n);  // exactly n epochs, no early stop

    double validate_now() const;

    TrainState& state() { return st_; }
    const TrainState& state() const { return st_; }

    void set_validation(ValidationTask task) { validation_ = std::move(task); }

private:
    void build_models();
    void ensure_perm();
    std::vector<const hashing::Document*> batch_docs(int cursor) const;
    int batches_per_epoch() const;
    void step_batch_adversarial(const std::vector<const hashing::Document*>& docs);
    void step_batch_brute(const std::vector<const hashing::Document*>& docs);
    nn::GradList collect_grads(nn::Graph& g, const std::string& prefix);
    void clip_collected(nn::Graph& g, const nn::GradList& grads);

    const hashing::Corpus* corpus_ = nullptr;
    TrainState st_;
    nn::EncoderModel enc_;    // psi
    nn::EncoderModel cond_;   // phi, paired mode only
    nn::PriorModel prior_;    // theta
    std::vector<int> perm_;   // indices into the sampling pool for st_.epoch
    int perm_epoch_ = -1;
    std::vector<const hashing::Document*> pool_;  // y-side training documents
    ValidationTask validation_;
};

TrainState train_ammi(const hashing::Corpus& corpus, const Hyperparams& hyper, Mode mode,
                      ValidationTask validation = nullptr);
TrainState train_bmmi(const hashing::Corpus& corpus, const Hyperparams& hyper,
                      ValidationTask validation = nullptr);

// Bit-exact round trip with integrity checksum; load rejects corrupted
// files and version mismatches, and (when expected_config_hash is nonzero)
// config mismatches.
void checkpoint_save(const TrainState& st, const std::string& path);
TrainState checkpoint_load(const std::string& path, uint64_t expected_config_hash = 0);

// metrics.csv / metrics.json rows (no timestamps; reruns are byte-identical).
void write_metrics_csv(const TrainState& st, const std::string& path);
void write_metrics_json(const TrainState& st, const std::string& path);

// Prior-capacity study: partially train an exact-entropy encoder (a fifth
// of max_epochs), freeze it, and fit a fresh prior of each order on one
// fixed batch, recording the converged cross-entropy next to the enumerated
// mixture entropy.
struct OrderSweepRow {
    int order_r = 0;
    double converged_prior_ce = 0.0;
    double brute_entropy = 0.0;
    int order_o = 0;
};

struct OrderSweepResult {
    std::vector<OrderSweepRow> rows;
    int partial_epochs = 0;
    int batch_size = 0;
};

OrderSweepResult prior_order_sweep(const hashing::Corpus& corpus, const Hyperparams& base,
                                   const std::vector<int>& r_list, int max_prior_steps = 4000);

// Declared-grid sweep with independent seeds; random mode samples `samples`
// assignments uniformly from the grid.
struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

struct SweepRun {
    std::map<std::string, std::string> overrides;
    uint64_t seed = 0;
    double best_val = 0.0;
    int best_epoch = -1;
};

std::vector<SweepRun> run_sweep(const hashing::Corpus& corpus, const Config& base,
                                const std::vector<SweepAxis>& axes, bool random_mode,
                                int samples, uint64_t seed);

}  // namespace ammi::training
