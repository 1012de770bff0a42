#include "ammi/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ammi/markov_graph.hpp"
#include "ammi/objectives.hpp"
#include "ammi/serialize.hpp"

namespace ammi::training {

using hashing::Corpus;
using hashing::Document;
using markov::TableBatch;
using nn::Graph;
using nn::Tensor;
using nn::Var;

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

Mode mode_from_string(const std::string& s) {
    if (s == "ammi") return Mode::AmmiSingle;
    if (s == "ammi_pairs") return Mode::AmmiPairs;
    if (s == "bmmi") return Mode::Bmmi;
    throw std::invalid_argument("unknown mode: " + s + " (want ammi|ammi_pairs|bmmi)");
}

std::string mode_to_string(Mode mode) {
    switch (mode) {
    case Mode::AmmiSingle: return "ammi";
    case Mode::AmmiPairs: return "ammi_pairs";
    case Mode::Bmmi: return "bmmi";
    }
    return "ammi";
}

void Hyperparams::validate() const {
    if (bits < 1) throw std::invalid_argument("hyper: bits must be >= 1");
    if (order_o < 0 || order_o > bits) throw std::invalid_argument("hyper: order_o out of range");
    if (order_h < order_o) throw std::invalid_argument("hyper: order_h must be >= order_o");
    if (order_r < order_o) throw std::invalid_argument("hyper: order_r must be >= order_o");
    if (batch_size < 1) throw std::invalid_argument("hyper: batch_size must be >= 1");
    if (inner_steps < 1) throw std::invalid_argument("hyper: inner_steps must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("hyper: alpha must be >= 0");
    if (lr < 0.0 || adv_lr < 0.0) throw std::invalid_argument("hyper: learning rates must be >= 0");
    if (patience < 1) throw std::invalid_argument("hyper: patience must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("hyper: max_epochs must be >= 1");
    if (eval_k < 1) throw std::invalid_argument("hyper: eval_k must be >= 1");
    if (beta < 1.0)
        std::fprintf(stderr, "warning: entropy weight beta=%g is below 1\n", beta);
    if (lr == 0.0 || adv_lr == 0.0)
        std::fprintf(stderr, "warning: zero learning rate, the affected parameters stay fixed\n");
}

Hyperparams Hyperparams::from_config(const Config& cfg) {
    // Single-letter aliases mirror the usual notation: m (bits), o/h/r
    // (Markov orders), g (inner steps), n (batch size).
    auto aliased = [&](const char* key, const char* alias, int def) {
        return cfg.has(key) ? cfg.get_int(key, def) : cfg.get_int(alias, def);
    };
    Hyperparams h;
    h.alpha = cfg.get_double("alpha", h.alpha);
    h.batch_size = aliased("batch_size", "n", h.batch_size);
    h.inner_steps = aliased("inner_steps", "g", h.inner_steps);
    h.adv_lr = cfg.get_double("adv_lr", h.adv_lr);
    h.lr = cfg.get_double("lr", h.lr);
    h.beta = cfg.get_double("beta", h.beta);
    h.order_o = aliased("order_o", "o", h.order_o);
    h.order_h = aliased("order_h", "h", std::max(h.order_h, h.order_o));
    h.order_r = aliased("order_r", "r", h.order_r);
    h.bits = aliased("bits", "m", h.bits);
    h.hidden = cfg.get_int("hidden", h.hidden);
    h.encoder_layers = cfg.get_int("encoder_layers", h.encoder_layers);
    h.prior_hidden = cfg.get_int("prior_hidden", h.prior_hidden);
    h.prior_layers = cfg.get_int("prior_layers", h.prior_layers);
    h.prior_embed = cfg.get_int("prior_embed", h.prior_embed);
    h.patience = cfg.get_int("patience", h.patience);
    h.max_epochs = cfg.get_int("max_epochs", h.max_epochs);
    h.clip_norm = cfg.get_double("clip_norm", h.clip_norm);
    h.eval_k = cfg.get_int("k", h.eval_k);
    h.seed = cfg.get_u64("seed", h.seed);
    if (h.order_h < h.order_o) h.order_h = h.order_o;
    return h;
}

void Hyperparams::to_config(Config& cfg) const {
    cfg.set("alpha", fmt_g17(alpha));
    cfg.set("batch_size", std::to_string(batch_size));
    cfg.set("inner_steps", std::to_string(inner_steps));
    cfg.set("adv_lr", fmt_g17(adv_lr));
    cfg.set("lr", fmt_g17(lr));
    cfg.set("beta", fmt_g17(beta));
    cfg.set("order_o", std::to_string(order_o));
    cfg.set("order_h", std::to_string(order_h));
    cfg.set("order_r", std::to_string(order_r));
    cfg.set("bits", std::to_string(bits));
    cfg.set("hidden", std::to_string(hidden));
    cfg.set("encoder_layers", std::to_string(encoder_layers));
    cfg.set("prior_hidden", std::to_string(prior_hidden));
    cfg.set("prior_layers", std::to_string(prior_layers));
    cfg.set("prior_embed", std::to_string(prior_embed));
    cfg.set("patience", std::to_string(patience));
    cfg.set("max_epochs", std::to_string(max_epochs));
    cfg.set("clip_norm", fmt_g17(clip_norm));
    cfg.set("k", std::to_string(eval_k));
    cfg.set("seed", std::to_string(seed));
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

double validation_task_precision(const TrainState& st, const Corpus& corpus, int k) {
    if (corpus.valid.empty()) throw std::runtime_error("validation: empty validation split");
    nn::EncoderModel enc = nn::EncoderModel::topology(
        "psi.", st.input_dim, st.hyper.hidden, st.hyper.encoder_layers, st.hyper.bits,
        st.hyper.order_o);

    bool labeled = !corpus.train.empty();
    for (const auto& d : corpus.train)
        if (d.labels.empty()) { labeled = false; break; }

    if (labeled) {
        hashing::CodeIndex index = hashing::encode_all(enc, st.params, corpus, corpus.train);
        hashing::CodeIndex queries = hashing::encode_all(enc, st.params, corpus, corpus.valid);
        int kk = std::min<int>(k, static_cast<int>(index.size()));
        return hashing::top_k_precision(queries.codes, queries.labels, queries.ids, index, kk);
    }

    // Pair fallback: queries are validation documents carrying pair ids;
    // candidates are the pair-target side of train+validation.
    std::vector<const Document*> queries, candidates;
    for (const auto& d : corpus.valid)
        if (!d.pair_id.empty()) queries.push_back(&d);
    for (const auto* split : {&corpus.train, &corpus.valid})
        for (const auto& d : *split)
            if (d.pair_id.empty()) candidates.push_back(&d);
    if (queries.empty())
        throw std::runtime_error("validation: no labels and no pairs to score against");

    hashing::CodeIndex index = hashing::encode_all(enc, st.params, corpus, candidates);
    hashing::CodeIndex qidx = hashing::encode_all(enc, st.params, corpus, queries);
    std::vector<std::string> pair_ids;
    pair_ids.reserve(queries.size());
    for (const auto* d : queries) pair_ids.push_back(d->pair_id);
    int kk = std::min<int>(k, static_cast<int>(index.size()));
    return hashing::pair_matching_precision(qidx.codes, pair_ids, qidx.ids, index, kk);
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

Trainer::Trainer(const Corpus& corpus, const Hyperparams& hyper, Mode mode)
    : corpus_(&corpus) {
    hyper.validate();
    if (mode == Mode::Bmmi && hyper.bits > 16)
        throw std::invalid_argument("bmmi: bits exceeds the 16-bit enumeration guard");
    st_.hyper = hyper;
    st_.mode = mode;
    st_.input_dim = static_cast<int>(corpus.vocab.size());
    build_models();
    enc_.ff.create_params(st_.params);
    if (mode == Mode::AmmiPairs) cond_.ff.create_params(st_.params);
    if (mode != Mode::Bmmi) prior_.create_params(st_.params);
    validation_ = [](const TrainState& s, const Corpus& c) {
        return validation_task_precision(s, c, s.hyper.eval_k);
    };
}

Trainer::Trainer(const Corpus& corpus, TrainState state)
    : corpus_(&corpus), st_(std::move(state)) {
    if (st_.input_dim != static_cast<int>(corpus.vocab.size()))
        throw std::invalid_argument("resume: corpus vocabulary size changed");
    build_models();
    validation_ = [](const TrainState& s, const Corpus& c) {
        return validation_task_precision(s, c, s.hyper.eval_k);
    };
}

void Trainer::build_models() {
    const Hyperparams& h = st_.hyper;
    enc_ = nn::EncoderModel::topology("psi.", st_.input_dim, h.hidden, h.encoder_layers,
                                      h.bits, h.order_o);
    cond_ = nn::EncoderModel::topology("phi.", st_.input_dim, h.hidden, h.encoder_layers,
                                       h.bits, h.order_h);
    prior_ = nn::PriorModel::topology("theta.", h.prior_embed, h.prior_hidden, h.prior_layers,
                                      h.bits, h.order_r);

    pool_.clear();
    for (const auto& d : corpus_->train) {
        if (st_.mode == Mode::AmmiPairs) {
            if (!d.pair_id.empty()) pool_.push_back(&d);
        } else {
            pool_.push_back(&d);
        }
    }
    if (pool_.empty()) throw std::invalid_argument("train: empty training pool");

    if (st_.mode != Mode::Bmmi) {
        size_t prior_params = st_.params.has(prior_.embed)
                                  ? prior_.ff.param_count(st_.params)
                                  : 0;
        size_t want = static_cast<size_t>(10) * (static_cast<size_t>(h.bits) << h.order_r);
        if (prior_params > 0 && prior_params < want)
            std::fprintf(stderr,
                         "warning: prior network has %zu parameters, less than 10x its %zu "
                         "table entries\n",
                         prior_params, want / 10);
    }
}

void Trainer::init_params() {
    Rng rng(st_.hyper.seed);
    nn::init_uniform(st_.params, "", st_.hyper.alpha, rng);
    ++st_.init_count;
}

int Trainer::batches_per_epoch() const {
    return static_cast<int>((pool_.size() + st_.hyper.batch_size - 1) / st_.hyper.batch_size);
}

void Trainer::ensure_perm() {
    if (perm_epoch_ == st_.epoch) return;
    perm_.resize(pool_.size());
    for (size_t i = 0; i < perm_.size(); ++i) perm_[i] = static_cast<int>(i);
    Rng rng(st_.hyper.seed ^ fnv1a64("epoch/" + std::to_string(st_.epoch)));
    std::shuffle(perm_.begin(), perm_.end(), rng);
    perm_epoch_ = st_.epoch;
}

std::vector<const Document*> Trainer::batch_docs(int cursor) const {
    size_t begin = static_cast<size_t>(cursor) * st_.hyper.batch_size;
    size_t end = std::min(begin + st_.hyper.batch_size, perm_.size());
    std::vector<const Document*> docs;
    docs.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) docs.push_back(pool_[perm_[i]]);
    return docs;
}

nn::GradList Trainer::collect_grads(Graph& g, const std::string& prefix) {
    nn::GradList out;
    for (const auto& name : st_.params.names(prefix)) {
        Var v = g.param_var(st_.params.ptr(name));
        if (!v.valid()) continue;
        const Tensor& gr = g.grad(v);
        if (gr.size() == 0) continue;
        out.emplace_back(name, &gr);
    }
    return out;
}

// Joint max-norm clip over everything one optimizer step updates.
void Trainer::clip_collected(Graph& g, const nn::GradList& grads) {
    if (st_.hyper.clip_norm <= 0.0) return;
    std::vector<Tensor*> bufs;
    for (const auto& [name, gr] : grads)
        bufs.push_back(&g.grad_mut(g.param_var(st_.params.ptr(name))));
    nn::clip_grad_norm(bufs, st_.hyper.clip_norm);
}

namespace {
void check_finite(double v, const char* what, int epoch, int batch, double a, double b) {
    if (!std::isfinite(v))
        throw std::runtime_error("train: non-finite " + std::string(what) + " at epoch " +
                                 std::to_string(epoch) + " batch " + std::to_string(batch) +
                                 " (terms " + fmt_g17(a) + ", " + fmt_g17(b) + ")");
}
}  // namespace

void Trainer::step_batch_adversarial(const std::vector<const Document*>& docs) {
    const Hyperparams& h = st_.hyper;
    nn::SparseRows rows_y = corpus_->tfidf_rows(docs);

    // Inner loop: the encoder tables are constants while theta moves.
    Tensor enc_probs = enc_.eval_probs(st_.params, rows_y);
    for (int gstep = 0; gstep < h.inner_steps; ++gstep) {
        Graph g;
        TableBatch encb = markov::table_batch_values(g, enc_probs, h.bits, h.order_o);
        TableBatch priorb = prior_.build(g, st_.params);
        Var loss = g.mean_all(markov::cross_entropy_rows(g, encb, priorb));
        double lv = g.value(loss).v[0];
        check_finite(lv, "prior loss", st_.epoch, st_.batch_cursor, lv, 0.0);
        g.backward(loss);
        nn::GradList grads = collect_grads(g, "theta.");
        clip_collected(g, grads);
        st_.opt_prior.step(st_.params, grads, h.adv_lr);
    }

    // Outer step on psi (and phi), with theta frozen inside the loss.
    Graph g;
    TableBatch encb = enc_.build(g, st_.params, rows_y);
    TableBatch priorb = prior_.build(g, st_.params);
    objectives::AdversarialLosses losses;
    if (st_.mode == Mode::AmmiPairs) {
        std::vector<const Document*> docs_x;
        docs_x.reserve(docs.size());
        for (const auto* d : docs) docs_x.push_back(&corpus_->by_id(d->pair_id));
        TableBatch condb = cond_.build(g, st_.params, corpus_->tfidf_rows(docs_x));
        losses = objectives::ammi_losses(g, encb, condb, priorb, h.beta);
    } else {
        losses = objectives::ammi_single_losses(g, encb, priorb, h.beta);
    }
    double cond_term = 0.0, prior_term = 0.0;
    {
        const Tensor& c = g.value(losses.cond_rows);
        const Tensor& p = g.value(losses.prior_rows);
        for (double v : c.v) cond_term += v;
        for (double v : p.v) prior_term += v;
        cond_term /= static_cast<double>(c.size());
        prior_term /= static_cast<double>(p.size());
    }
    double ev = g.value(losses.encoder_loss).v[0];
    check_finite(ev, "encoder loss", st_.epoch, st_.batch_cursor, cond_term, prior_term);
    g.backward(losses.encoder_loss);
    nn::GradList grads = collect_grads(g, "psi.");
    if (st_.mode == Mode::AmmiPairs) {
        nn::GradList phi = collect_grads(g, "phi.");
        grads.insert(grads.end(), phi.begin(), phi.end());
    }
    clip_collected(g, grads);
    st_.opt_model.step(st_.params, grads, h.lr);

    st_.batch_encoder_loss.push_back(ev);
    st_.batch_prior_loss.push_back(prior_term);
    st_.batch_surrogate.push_back(prior_term - cond_term);
}

void Trainer::step_batch_brute(const std::vector<const Document*>& docs) {
    const Hyperparams& h = st_.hyper;
    Graph g;
    TableBatch encb = enc_.build(g, st_.params, corpus_->tfidf_rows(docs));
    objectives::BruteForceLoss bl = objectives::bmmi_loss(g, encb);
    double lv = g.value(bl.loss).v[0];
    double hz = g.value(bl.mixture_entropy).v[0];
    check_finite(lv, "objective", st_.epoch, st_.batch_cursor, hz, lv);
    g.backward(bl.loss);
    nn::GradList grads = collect_grads(g, "psi.");
    clip_collected(g, grads);
    st_.opt_model.step(st_.params, grads, h.lr);

    st_.batch_encoder_loss.push_back(lv);
    st_.batch_prior_loss.push_back(hz);
    st_.batch_surrogate.push_back(-lv);
}

bool Trainer::step_batch() {
    ensure_perm();
    if (st_.batch_cursor >= batches_per_epoch()) return false;
    std::vector<const Document*> docs = batch_docs(st_.batch_cursor);
    if (st_.mode == Mode::Bmmi)
        step_batch_brute(docs);
    else
        step_batch_adversarial(docs);
    ++st_.batch_cursor;
    return st_.batch_cursor < batches_per_epoch();
}

void Trainer::finish_epoch() {
    size_t epoch_start = st_.batch_encoder_loss.size() - st_.batch_cursor;
    EpochMetrics row;
    row.epoch = st_.epoch;
    int n = std::max(1, st_.batch_cursor);
    for (size_t i = epoch_start; i < st_.batch_encoder_loss.size(); ++i) {
        row.encoder_loss += st_.batch_encoder_loss[i];
        row.prior_loss += st_.batch_prior_loss[i];
        row.surrogate_nats += st_.batch_surrogate[i];
    }
    row.encoder_loss /= n;
    row.prior_loss /= n;
    row.surrogate_nats /= n;
    row.surrogate_bits = row.surrogate_nats / kLn2;
    row.val_score = validate_now();
    st_.trace.push_back(row);

    if (row.val_score > st_.best_val) {
        st_.best_val = row.val_score;
        st_.best_epoch = st_.epoch;
        st_.best_params = st_.params;
        st_.epochs_since_best = 0;
    } else {
        ++st_.epochs_since_best;
    }
    ++st_.epoch;
    st_.batch_cursor = 0;
}

bool Trainer::stop_requested() const {
    return st_.epochs_since_best >= st_.hyper.patience || st_.epoch >= st_.hyper.max_epochs;
}

double Trainer::validate_now() const { return validation_(st_, *corpus_); }

void Trainer::run() {
    if (st_.init_count == 0) init_params();
    while (!stop_requested()) {
        while (step_batch()) {}
        finish_epoch();
    }
    if (st_.best_epoch >= 0) st_.params = st_.best_params;
}

void Trainer::run_epochs(int epochs) {
    if (st_.init_count == 0) init_params();
    for (int e = 0; e < epochs; ++e) {
        while (step_batch()) {}
        finish_epoch();
    }
}

TrainState train_ammi(const Corpus& corpus, const Hyperparams& hyper, Mode mode,
                      ValidationTask validation) {
    if (mode == Mode::Bmmi) throw std::invalid_argument("train_ammi: use train_bmmi");
    Trainer t(corpus, hyper, mode);
    if (validation) t.set_validation(std::move(validation));
    t.run();
    return std::move(t.state());
}

TrainState train_bmmi(const Corpus& corpus, const Hyperparams& hyper,
                      ValidationTask validation) {
    Trainer t(corpus, hyper, Mode::Bmmi);
    if (validation) t.set_validation(std::move(validation));
    t.run();
    return std::move(t.state());
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr uint32_t kCheckpointVersion = 1;
const std::string kCheckpointMagic = "ammi-checkpoint";

void write_hyper(std::ostream& os, const Hyperparams& h) {
    io::write_f64(os, h.alpha);
    io::write_u32(os, static_cast<uint32_t>(h.batch_size));
    io::write_u32(os, static_cast<uint32_t>(h.inner_steps));
    io::write_f64(os, h.adv_lr);
    io::write_f64(os, h.lr);
    io::write_f64(os, h.beta);
    io::write_u32(os, static_cast<uint32_t>(h.order_o));
    io::write_u32(os, static_cast<uint32_t>(h.order_h));
    io::write_u32(os, static_cast<uint32_t>(h.order_r));
    io::write_u32(os, static_cast<uint32_t>(h.bits));
    io::write_u32(os, static_cast<uint32_t>(h.hidden));
    io::write_u32(os, static_cast<uint32_t>(h.encoder_layers));
    io::write_u32(os, static_cast<uint32_t>(h.prior_hidden));
    io::write_u32(os, static_cast<uint32_t>(h.prior_layers));
    io::write_u32(os, static_cast<uint32_t>(h.prior_embed));
    io::write_u32(os, static_cast<uint32_t>(h.patience));
    io::write_u32(os, static_cast<uint32_t>(h.max_epochs));
    io::write_f64(os, h.clip_norm);
    io::write_u32(os, static_cast<uint32_t>(h.eval_k));
    io::write_u64(os, h.seed);
}

Hyperparams read_hyper(std::istream& is) {
    Hyperparams h;
    h.alpha = io::read_f64(is);
    h.batch_size = static_cast<int>(io::read_u32(is));
    h.inner_steps = static_cast<int>(io::read_u32(is));
    h.adv_lr = io::read_f64(is);
    h.lr = io::read_f64(is);
    h.beta = io::read_f64(is);
    h.order_o = static_cast<int>(io::read_u32(is));
    h.order_h = static_cast<int>(io::read_u32(is));
    h.order_r = static_cast<int>(io::read_u32(is));
    h.bits = static_cast<int>(io::read_u32(is));
    h.hidden = static_cast<int>(io::read_u32(is));
    h.encoder_layers = static_cast<int>(io::read_u32(is));
    h.prior_hidden = static_cast<int>(io::read_u32(is));
    h.prior_layers = static_cast<int>(io::read_u32(is));
    h.prior_embed = static_cast<int>(io::read_u32(is));
    h.patience = static_cast<int>(io::read_u32(is));
    h.max_epochs = static_cast<int>(io::read_u32(is));
    h.clip_norm = io::read_f64(is);
    h.eval_k = static_cast<int>(io::read_u32(is));
    h.seed = io::read_u64(is);
    return h;
}

void write_f64_vec(std::ostream& os, const std::vector<double>& v) {
    io::write_u32(os, static_cast<uint32_t>(v.size()));
    for (double x : v) io::write_f64(os, x);
}

std::vector<double> read_f64_vec(std::istream& is) {
    uint32_t n = io::read_u32(is);
    std::vector<double> v(n);
    for (double& x : v) x = io::read_f64(is);
    return v;
}

}  // namespace

void checkpoint_save(const TrainState& st, const std::string& path) {
    std::ostringstream payload;
    io::write_u64(payload, st.config_hash);
    io::write_string(payload, mode_to_string(st.mode));
    write_hyper(payload, st.hyper);
    io::write_u32(payload, static_cast<uint32_t>(st.input_dim));
    io::write_u32(payload, static_cast<uint32_t>(st.epoch));
    io::write_u32(payload, static_cast<uint32_t>(st.batch_cursor));
    io::write_u32(payload, static_cast<uint32_t>(st.init_count));
    io::write_u32(payload, static_cast<uint32_t>(st.epochs_since_best));
    io::write_f64(payload, st.best_val);
    io::write_u32(payload, static_cast<uint32_t>(st.best_epoch + 1));  // -1 -> 0
    st.params.save(payload);
    st.best_params.save(payload);
    st.opt_model.save(payload);
    st.opt_prior.save(payload);
    io::write_u32(payload, static_cast<uint32_t>(st.trace.size()));
    for (const auto& r : st.trace) {
        io::write_u32(payload, static_cast<uint32_t>(r.epoch));
        io::write_f64(payload, r.encoder_loss);
        io::write_f64(payload, r.prior_loss);
        io::write_f64(payload, r.surrogate_nats);
        io::write_f64(payload, r.surrogate_bits);
        io::write_f64(payload, r.val_score);
    }
    write_f64_vec(payload, st.batch_prior_loss);
    write_f64_vec(payload, st.batch_encoder_loss);
    write_f64_vec(payload, st.batch_surrogate);

    std::string body = payload.str();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint_save: cannot open " + path);
    io::write_string(os, kCheckpointMagic);
    io::write_u32(os, kCheckpointVersion);
    io::write_u64(os, static_cast<uint64_t>(body.size()));
    os.write(body.data(), static_cast<std::streamsize>(body.size()));
    io::write_u64(os, fnv1a64(body));
    if (!os) throw std::runtime_error("checkpoint_save: write failed for " + path);
}

TrainState checkpoint_load(const std::string& path, uint64_t expected_config_hash) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint_load: cannot open " + path);
    if (io::read_string(is) != kCheckpointMagic)
        throw std::runtime_error("checkpoint_load: not a checkpoint file: " + path);
    uint32_t version = io::read_u32(is);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint_load: unsupported version " +
                                 std::to_string(version));
    uint64_t body_size = io::read_u64(is);
    std::string body(body_size, '\0');
    is.read(body.data(), static_cast<std::streamsize>(body_size));
    if (!is) throw std::runtime_error("checkpoint_load: truncated file " + path);
    uint64_t checksum = io::read_u64(is);
    if (checksum != fnv1a64(body))
        throw std::runtime_error("checkpoint_load: integrity check failed for " + path);

    std::istringstream ps(body);
    TrainState st;
    st.config_hash = io::read_u64(ps);
    if (expected_config_hash != 0 && st.config_hash != expected_config_hash)
        throw std::runtime_error("checkpoint_load: config hash mismatch for " + path);
    st.mode = mode_from_string(io::read_string(ps));
    st.hyper = read_hyper(ps);
    st.input_dim = static_cast<int>(io::read_u32(ps));
    st.epoch = static_cast<int>(io::read_u32(ps));
    st.batch_cursor = static_cast<int>(io::read_u32(ps));
    st.init_count = static_cast<int>(io::read_u32(ps));
    st.epochs_since_best = static_cast<int>(io::read_u32(ps));
    st.best_val = io::read_f64(ps);
    st.best_epoch = static_cast<int>(io::read_u32(ps)) - 1;
    st.params = nn::ParamStore::load(ps);
    st.best_params = nn::ParamStore::load(ps);
    st.opt_model = nn::AdamOpt::load(ps);
    st.opt_prior = nn::AdamOpt::load(ps);
    uint32_t rows = io::read_u32(ps);
    for (uint32_t i = 0; i < rows; ++i) {
        EpochMetrics r;
        r.epoch = static_cast<int>(io::read_u32(ps));
        r.encoder_loss = io::read_f64(ps);
        r.prior_loss = io::read_f64(ps);
        r.surrogate_nats = io::read_f64(ps);
        r.surrogate_bits = io::read_f64(ps);
        r.val_score = io::read_f64(ps);
        st.trace.push_back(r);
    }
    st.batch_prior_loss = read_f64_vec(ps);
    st.batch_encoder_loss = read_f64_vec(ps);
    st.batch_surrogate = read_f64_vec(ps);
    return st;
}

// ---------------------------------------------------------------------------
// Metrics files
// ---------------------------------------------------------------------------

void write_metrics_csv(const TrainState& st, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    os << "epoch,encoder_loss,prior_loss,surrogate_nats,surrogate_bits,val_score\n";
    for (const auto& r : st.trace)
        os << r.epoch << ',' << fmt_g17(r.encoder_loss) << ',' << fmt_g17(r.prior_loss) << ','
           << fmt_g17(r.surrogate_nats) << ',' << fmt_g17(r.surrogate_bits) << ','
           << fmt_g17(r.val_score) << '\n';
}

void write_metrics_json(const TrainState& st, const std::string& path) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : st.trace) {
        nlohmann::json j;
        j["epoch"] = r.epoch;
        j["encoder_loss"] = r.encoder_loss;
        j["prior_loss"] = r.prior_loss;
        j["surrogate_nats"] = r.surrogate_nats;
        j["surrogate_bits"] = r.surrogate_bits;
        j["val_score"] = r.val_score;
        rows.push_back(std::move(j));
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_metrics_json: cannot open " + path);
    os << rows.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Prior-order sweep
// ---------------------------------------------------------------------------

OrderSweepResult prior_order_sweep(const Corpus& corpus, const Hyperparams& base,
                                   const std::vector<int>& r_list, int max_prior_steps) {
    if (r_list.empty()) throw std::invalid_argument("order sweep: empty r list");
    if (base.bits > 16)
        throw std::invalid_argument("order sweep: bits exceeds the 16-bit enumeration guard");
    for (int r : r_list)
        if (r < base.order_o)
            throw std::invalid_argument("order sweep: r below the encoder order");

    OrderSweepResult out;
    out.partial_epochs = std::max(1, base.max_epochs / 5);
    out.batch_size = base.batch_size;

    // Partially trained exact-entropy encoder, then frozen.
    Trainer trainer(corpus, base, Mode::Bmmi);
    trainer.run_epochs(out.partial_epochs);
    const TrainState& st = trainer.state();

    // One fixed batch of training documents.
    std::vector<int> order(corpus.train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(base.seed ^ fnv1a64("order-sweep-batch"));
    std::shuffle(order.begin(), order.end(), rng);
    int n = std::min<int>(base.batch_size, static_cast<int>(order.size()));
    std::vector<const Document*> docs;
    for (int i = 0; i < n; ++i) docs.push_back(&corpus.train[order[i]]);

    nn::EncoderModel enc = nn::EncoderModel::topology("psi.", st.input_dim, base.hidden,
                                                      base.encoder_layers, base.bits,
                                                      base.order_o);
    Tensor enc_probs = enc.eval_probs(st.params, corpus.tfidf_rows(docs));

    std::vector<markov::MarkovParams> tables;
    const int width = base.bits << base.order_o;
    for (int l = 0; l < n; ++l) {
        std::vector<double> row(enc_probs.v.begin() + static_cast<size_t>(l) * width,
                                enc_probs.v.begin() + static_cast<size_t>(l + 1) * width);
        tables.push_back(markov::MarkovParams::from_probs(base.bits, base.order_o,
                                                          std::move(row)));
    }
    double brute_ref = objectives::brute_entropy_batch(tables);

    for (int r : r_list) {
        nn::ParamStore ps;
        nn::PriorModel prior = nn::PriorModel::make(ps, "theta.", base.prior_embed,
                                                    base.prior_hidden, base.prior_layers,
                                                    base.bits, r);
        Rng ir(base.seed ^ fnv1a64("order-sweep-prior/" + std::to_string(r)));
        nn::init_uniform(ps, "theta.", base.alpha, ir);
        nn::AdamOpt opt;

        double best_ce = 1e300;
        int best_step = 0;
        for (int step = 0; step < max_prior_steps; ++step) {
            Graph g;
            TableBatch encb = markov::table_batch_values(g, enc_probs, base.bits, base.order_o);
            TableBatch priorb = prior.build(g, ps);
            Var loss = g.mean_all(markov::cross_entropy_rows(g, encb, priorb));
            double lv = g.value(loss).v[0];
            if (lv < best_ce - 1e-9) {
                best_ce = lv;
                best_step = step;
            }
            if (step - best_step > 400) break;  // plateau
            g.backward(loss);
            nn::GradList grads;
            std::vector<Tensor*> bufs;
            for (const auto& name : ps.names("theta.")) {
                Var v = g.param_var(ps.ptr(name));
                if (!v.valid() || g.grad(v).size() == 0) continue;
                grads.emplace_back(name, &g.grad(v));
            }
            opt.step(ps, grads, base.adv_lr);
        }
        out.rows.push_back(OrderSweepRow{r, best_ce, brute_ref, base.order_o});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid / random sweep
// ---------------------------------------------------------------------------

std::vector<SweepRun> run_sweep(const Corpus& corpus, const Config& base,
                                const std::vector<SweepAxis>& axes, bool random_mode,
                                int samples, uint64_t seed) {
    if (axes.empty()) throw std::invalid_argument("sweep: no axes declared");
    for (const auto& axis : axes)
        if (axis.values.empty())
            throw std::invalid_argument("sweep: empty axis " + axis.key);

    std::vector<std::map<std::string, std::string>> assignments;
    if (random_mode) {
        if (samples < 1) throw std::invalid_argument("sweep: random mode needs samples >= 1");
        Rng rng(seed ^ fnv1a64("sweep-random"));
        for (int s = 0; s < samples; ++s) {
            std::map<std::string, std::string> a;
            for (const auto& axis : axes)
                a[axis.key] = axis.values[rng() % axis.values.size()];
            assignments.push_back(std::move(a));
        }
    } else {
        assignments.push_back({});
        for (const auto& axis : axes) {
            std::vector<std::map<std::string, std::string>> next;
            for (const auto& partial : assignments)
                for (const auto& v : axis.values) {
                    auto a = partial;
                    a[axis.key] = v;
                    next.push_back(std::move(a));
                }
            assignments = std::move(next);
        }
    }

    std::vector<SweepRun> runs;
    for (const auto& a : assignments) {
        Config cfg = base;
        std::string key;
        for (const auto& [k, v] : a) {
            cfg.set(k, v);
            key += k + "=" + v + ";";
        }
        SweepRun run;
        run.overrides = a;
        run.seed = seed ^ fnv1a64("sweep-run/" + key);
        cfg.set("seed", std::to_string(run.seed));
        Hyperparams hp = Hyperparams::from_config(cfg);
        Mode mode = mode_from_string(cfg.get_str("mode", "ammi"));
        TrainState st = mode == Mode::Bmmi ? train_bmmi(corpus, hp)
                                           : train_ammi(corpus, hp, mode);
        run.best_val = st.best_val;
        run.best_epoch = st.best_epoch;
        runs.push_back(std::move(run));
    }
    return runs;
}

}  // namespace ammi::training
