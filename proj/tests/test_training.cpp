#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ammi/markov_graph.hpp"
#include "ammi/objectives.hpp"
#include "ammi/training.hpp"
#include "test_support.hpp"

using namespace ammi;
using hashing::Corpus;
using training::Hyperparams;
using training::Mode;
using training::Trainer;
using training::TrainState;
namespace fs = std::filesystem;

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Small well-separated corpus; keeps every training test in the seconds
// range.
Corpus tiny_corpus(int topics = 2, int train_docs = 60, bool paired = false,
                   uint64_t seed = 5) {
    hashing::SyntheticSpec spec;
    spec.topics = topics;
    spec.vocab_size = 160;
    spec.train_docs = train_docs;
    spec.valid_docs = 16;
    spec.test_docs = 16;
    spec.doc_len = 40;
    spec.noise = 0.05;
    spec.paired = paired;
    spec.seed = seed;
    auto raw = hashing::make_synthetic(spec);
    return hashing::build_tfidf(raw.train, raw.valid, raw.test, spec.vocab_size);
}

Hyperparams tiny_hyper(int bits = 4, uint64_t seed = 1) {
    Hyperparams h;
    h.bits = bits;
    h.order_r = 1;
    h.hidden = 24;
    h.prior_hidden = 24;
    h.prior_embed = 8;
    h.batch_size = 16;
    h.max_epochs = 3;
    h.patience = 5;
    h.lr = 0.01;
    h.adv_lr = 0.01;
    h.eval_k = 10;
    h.seed = seed;
    return h;
}

fs::path temp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "ammi_train_test";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("hyperparameter validation") {
    Hyperparams h = tiny_hyper();
    CHECK_NOTHROW(h.validate());
    h.order_r = -1;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
    h = tiny_hyper();
    h.order_o = 2;
    h.order_r = 1;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
    h = tiny_hyper();
    h.inner_steps = 0;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
    h = tiny_hyper();
    h.batch_size = 0;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);

    Config cfg;
    cfg.set("bits", "6");
    cfg.set("lr", "0.004");
    cfg.set("order_r", "2");
    Hyperparams parsed = Hyperparams::from_config(cfg);
    CHECK(parsed.bits == 6);
    CHECK(parsed.lr == doctest::Approx(0.004));
    CHECK(parsed.order_r == 2);
    Config out;
    parsed.to_config(out);
    CHECK(out.get_int("bits", 0) == 6);
}

TEST_CASE("training is deterministic given the seed") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    TrainState a = training::train_ammi(corpus, h, Mode::AmmiSingle);
    TrainState b = training::train_ammi(corpus, h, Mode::AmmiSingle);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].encoder_loss == b.trace[i].encoder_loss);
        CHECK(a.trace[i].prior_loss == b.trace[i].prior_loss);
        CHECK(a.trace[i].val_score == b.trace[i].val_score);
    }
    CHECK(a.batch_encoder_loss == b.batch_encoder_loss);
    CHECK(a.params == b.params);
}

TEST_CASE("zero adversarial rate freezes theta while psi still moves") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.adv_lr = 0.0;
    h.inner_steps = 1;
    h.max_epochs = 2;
    Trainer t(corpus, h, Mode::AmmiSingle);
    t.init_params();
    nn::ParamStore before = t.state().params;
    t.run_epochs(2);
    const nn::ParamStore& after = t.state().params;
    for (const auto& name : after.names("theta."))
        CHECK(after.at(name).v == before.at(name).v);
    bool psi_moved = false;
    for (const auto& name : after.names("psi."))
        if (!(after.at(name).v == before.at(name).v)) psi_moved = true;
    CHECK(psi_moved);
}

TEST_CASE("theta persists across batches and epochs: one init only") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.max_epochs = 3;
    Trainer t(corpus, h, Mode::AmmiSingle);
    t.run_epochs(3);
    CHECK(t.state().init_count == 1);
    CHECK(t.state().epoch == 3);
}

TEST_CASE("early stopping returns the best-scoring checkpoint") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.max_epochs = 6;
    h.patience = 2;
    TrainState st = training::train_ammi(corpus, h, Mode::AmmiSingle);
    REQUIRE(!st.trace.empty());
    double max_val = -1.0;
    for (const auto& row : st.trace) max_val = std::max(max_val, row.val_score);
    CHECK(st.best_val == doctest::Approx(max_val));
    CHECK(st.params == st.best_params);
    CHECK(st.best_epoch >= 0);
}

TEST_CASE("frozen-encoder inner loop never raises the prior-loss running minimum") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.lr = 0.0;  // encoder frozen: the adversary faces a fixed target
    h.inner_steps = 2;
    h.max_epochs = 4;
    Trainer t(corpus, h, Mode::AmmiSingle);
    t.run_epochs(4);
    const auto& losses = t.state().batch_prior_loss;
    REQUIRE(losses.size() > 4);
    int per_epoch = static_cast<int>(losses.size()) / 4;
    double prev_min = 1e300;
    for (int e = 0; e < 4; ++e) {
        double epoch_min = 1e300;
        for (int b = 0; b < per_epoch; ++b)
            epoch_min = std::min(epoch_min, losses[e * per_epoch + b]);
        CHECK(epoch_min <= prev_min * 1.01 + 1e-9);
        prev_min = std::min(prev_min, epoch_min);
    }
}

TEST_CASE("bmmi on two separated clusters reaches the enumerated optimum") {
    Corpus corpus = tiny_corpus(2, 80, false, 11);
    Hyperparams h = tiny_hyper(2, 3);
    h.lr = 0.01;
    // No early stopping: the objective value of the final encoder is what
    // is being checked, not the best validation snapshot.
    Trainer t(corpus, h, Mode::Bmmi);
    t.run_epochs(25);
    const TrainState& st = t.state();

    // Objective value on the full training set under the final encoder.
    nn::EncoderModel enc = nn::EncoderModel::topology("psi.", st.input_dim, h.hidden,
                                                      h.encoder_layers, h.bits, h.order_o);
    nn::Tensor probs = enc.eval_probs(st.params, corpus.tfidf_rows(corpus.train));
    std::vector<markov::MarkovParams> tables;
    for (int l = 0; l < probs.rows; ++l) {
        std::vector<double> row(probs.v.begin() + static_cast<size_t>(l) * probs.cols,
                                probs.v.begin() + static_cast<size_t>(l + 1) * probs.cols);
        tables.push_back(markov::MarkovParams::from_probs(h.bits, 0, std::move(row)));
    }
    double objective = objectives::brute_entropy_batch(tables) -
                       objectives::cond_entropy_batch(tables).value;

    // Enumerated optimum over deterministic per-cluster code assignments.
    std::vector<int> cluster_sizes(2, 0);
    for (const auto& d : corpus.train) ++cluster_sizes[d.labels.at(0)];
    double n = cluster_sizes[0] + cluster_sizes[1];
    double best = 0.0;
    for (int c0 = 0; c0 < 4; ++c0)
        for (int c1 = 0; c1 < 4; ++c1) {
            double hz = 0.0;
            if (c0 != c1) {
                double p0 = cluster_sizes[0] / n;
                hz = -(p0 * std::log(p0) + (1 - p0) * std::log(1 - p0));
            }
            best = std::max(best, hz);  // deterministic codes: H(Z|Y) = 0
        }
    CHECK(best == doctest::Approx(kLn2).epsilon(0.05));
    CHECK(objective >= best - 0.05);
}

TEST_CASE("constant corpus carries no information") {
    // Every document identical: the objective cannot exceed 0.
    std::vector<hashing::RawDocument> docs;
    for (int i = 0; i < 40; ++i) {
        hashing::RawDocument d;
        d.id = "d" + std::to_string(i);
        d.term_counts = {{"only", 5}, {"words", 3}};
        d.labels = {"t0"};
        docs.push_back(std::move(d));
    }
    std::vector<hashing::RawDocument> valid(docs.begin(), docs.begin() + 8);
    std::vector<hashing::RawDocument> test(docs.begin(), docs.begin() + 8);
    for (size_t i = 0; i < valid.size(); ++i) valid[i].id = "v" + std::to_string(i);
    for (size_t i = 0; i < test.size(); ++i) test[i].id = "t" + std::to_string(i);
    auto corpus = hashing::build_tfidf(docs, valid, test, 10);
    Hyperparams h = tiny_hyper(4, 7);
    Trainer t(corpus, h, Mode::Bmmi);
    t.run_epochs(8);
    CHECK(std::fabs(t.state().trace.back().surrogate_nats) <= 1e-2);
}

TEST_CASE("ammi_pairs trains on the paired corpus") {
    Corpus corpus = tiny_corpus(3, 40, true, 13);
    Hyperparams h = tiny_hyper(4, 17);
    h.max_epochs = 2;
    TrainState st = training::train_ammi(corpus, h, Mode::AmmiPairs);
    CHECK(st.trace.size() >= 1);
    bool has_phi = false;
    for (const auto& name : st.params.names("phi."))
        if (!name.empty()) has_phi = true;
    CHECK(has_phi);
}

TEST_CASE("non-finite losses abort with a batch diagnostic") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.lr = 1e12;  // drives the logits to overflow within an epoch
    h.max_epochs = 3;
    Trainer t(corpus, h, Mode::AmmiSingle);
    try {
        t.run_epochs(3);
        // Overflow may saturate instead of producing NaN; either outcome is
        // acceptable as long as no silent corruption happens.
        for (double v : t.state().batch_encoder_loss) CHECK(std::isfinite(v));
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("batch") != std::string::npos);
    }
}

TEST_CASE("checkpoint round trip is bit exact and integrity checked") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.max_epochs = 2;
    Trainer t(corpus, h, Mode::AmmiSingle);
    t.run_epochs(2);
    t.state().config_hash = 0xabcdef;

    auto path = temp_file("ckpt.bin");
    training::checkpoint_save(t.state(), path.string());
    TrainState loaded = training::checkpoint_load(path.string(), 0xabcdef);
    CHECK(loaded.params == t.state().params);
    CHECK(loaded.best_params == t.state().best_params);
    CHECK(loaded.opt_model == t.state().opt_model);
    CHECK(loaded.opt_prior == t.state().opt_prior);
    CHECK(loaded.epoch == t.state().epoch);
    CHECK(loaded.batch_encoder_loss == t.state().batch_encoder_loss);
    CHECK(loaded.hyper.seed == h.seed);

    CHECK_THROWS_AS(training::checkpoint_load(path.string(), 0x1234), std::runtime_error);

    // Flip one payload byte: the checksum must catch it.
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(200);
    char byte;
    f.seekg(200);
    f.read(&byte, 1);
    byte ^= 0x40;
    f.seekp(200);
    f.write(&byte, 1);
    f.close();
    CHECK_THROWS_WITH_AS(training::checkpoint_load(path.string()),
                         doctest::Contains("integrity"), std::runtime_error);

    // Unsupported container version.
    auto vpath = temp_file("version.bin");
    {
        std::ofstream os(vpath, std::ios::binary);
        std::string magic = "ammi-checkpoint";
        uint32_t len = static_cast<uint32_t>(magic.size()), version = 999;
        os.write(reinterpret_cast<const char*>(&len), 4);
        os.write(magic.data(), len);
        os.write(reinterpret_cast<const char*>(&version), 4);
    }
    CHECK_THROWS_WITH_AS(training::checkpoint_load(vpath.string()),
                         doctest::Contains("version"), std::runtime_error);
}

TEST_CASE("mid-epoch resume reproduces the uninterrupted trace") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.max_epochs = 2;

    // Uninterrupted reference run.
    Trainer ref(corpus, h, Mode::AmmiSingle);
    ref.run_epochs(2);

    // Interrupted run: stop after three batches, checkpoint, resume.
    Trainer first(corpus, h, Mode::AmmiSingle);
    first.init_params();
    for (int b = 0; b < 3; ++b) first.step_batch();
    auto path = temp_file("resume.bin");
    training::checkpoint_save(first.state(), path.string());

    Trainer second(corpus, training::checkpoint_load(path.string()));
    while (second.step_batch()) {}
    second.finish_epoch();
    while (second.step_batch()) {}
    second.finish_epoch();

    CHECK(second.state().batch_encoder_loss == ref.state().batch_encoder_loss);
    CHECK(second.state().batch_prior_loss == ref.state().batch_prior_loss);
    CHECK(second.state().params == ref.state().params);
}

TEST_CASE("validation falls back to pair matching without labels") {
    hashing::SyntheticSpec spec;
    spec.topics = 2;
    spec.vocab_size = 120;
    spec.train_docs = 20;
    spec.valid_docs = 8;
    spec.test_docs = 8;
    spec.paired = true;
    spec.seed = 23;
    auto raw = hashing::make_synthetic(spec);
    for (auto* split : {&raw.train, &raw.valid, &raw.test})
        for (auto& d : *split) d.labels.clear();
    Corpus corpus = hashing::build_tfidf(raw.train, raw.valid, raw.test, spec.vocab_size);

    Hyperparams h = tiny_hyper(4, 29);
    Trainer t(corpus, h, Mode::AmmiPairs);
    t.init_params();
    double score = t.validate_now();
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);

    // No labels and no pairs: validation has nothing to score.
    for (auto* split : {&raw.train, &raw.valid, &raw.test})
        for (auto& d : *split) d.pair_id.clear();
    Corpus bare = hashing::build_tfidf(raw.train, raw.valid, raw.test, spec.vocab_size);
    Trainer t2(bare, h, Mode::AmmiSingle);
    t2.init_params();
    CHECK_THROWS_AS(t2.validate_now(), std::runtime_error);
}

TEST_CASE("metrics files carry one row per epoch") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.max_epochs = 2;
    TrainState st = training::train_ammi(corpus, h, Mode::AmmiSingle);
    auto csv_path = temp_file("metrics.csv");
    auto json_path = temp_file("metrics.json");
    training::write_metrics_csv(st, csv_path.string());
    training::write_metrics_json(st, json_path.string());

    std::ifstream is(csv_path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "epoch,encoder_loss,prior_loss,surrogate_nats,surrogate_bits,val_score");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(st.trace.size()));
}

TEST_CASE("prior order sweep is monotone and bounded by the mixture entropy") {
    Corpus corpus = tiny_corpus(3, 80, false, 31);
    Hyperparams h = tiny_hyper(6, 37);
    h.max_epochs = 10;  // partial training uses a fifth of this
    h.adv_lr = 0.01;
    auto result = training::prior_order_sweep(corpus, h, {0, 1, 2}, 1500);
    REQUIRE(result.rows.size() == 3);
    for (size_t i = 0; i < result.rows.size(); ++i) {
        CHECK(result.rows[i].converged_prior_ce >= result.rows[i].brute_entropy - 1e-9);
        if (i > 0)
            CHECK(result.rows[i].converged_prior_ce <=
                  result.rows[i - 1].converged_prior_ce * 1.01);
    }
    CHECK_THROWS_AS(training::prior_order_sweep(corpus, h, {}), std::invalid_argument);
}

TEST_CASE("four well-separated clusters reach high validation precision") {
    hashing::SyntheticSpec spec;
    spec.topics = 4;
    spec.vocab_size = 500;
    spec.train_docs = 400;
    spec.valid_docs = 100;
    spec.test_docs = 100;
    spec.seed = 3;
    auto raw = hashing::make_synthetic(spec);
    Corpus corpus = hashing::build_tfidf(raw.train, raw.valid, raw.test, spec.vocab_size);

    Hyperparams h;
    h.bits = 8;
    h.order_r = 3;
    h.hidden = 64;
    h.prior_hidden = 64;
    h.prior_embed = 16;
    h.batch_size = 64;
    h.max_epochs = 50;
    h.patience = 8;
    h.eval_k = 10;
    h.seed = 1;

    // The exact-entropy variant first, as the reference for the adversarial
    // machinery on the same corpus.
    TrainState bmmi = training::train_bmmi(corpus, h);
    CHECK(bmmi.best_val >= 0.90);

    TrainState ammi = training::train_ammi(corpus, h, Mode::AmmiSingle);
    CHECK(ammi.best_val >= 0.90);
    CHECK(ammi.epoch <= 50);
}

TEST_CASE("a larger entropy weight never shrinks code usage") {
    Corpus corpus = tiny_corpus(3, 120, false, 19);
    auto distinct_codes = [&](double beta) {
        Hyperparams h = tiny_hyper(8, 9);
        h.order_r = 2;
        h.beta = beta;
        Trainer t(corpus, h, Mode::AmmiSingle);
        t.run_epochs(6);
        const TrainState& st = t.state();
        nn::EncoderModel enc = nn::EncoderModel::topology("psi.", st.input_dim, h.hidden,
                                                          h.encoder_layers, h.bits, h.order_o);
        auto index = hashing::encode_all(enc, st.params, corpus, corpus.train);
        return hashing::count_distinct_codes(index);
    };
    int low = distinct_codes(1.0);
    int high = distinct_codes(3.0);
    CHECK(high >= low);
}

TEST_CASE("untrained encoders score near the label prior") {
    // Monte-Carlo baseline: random initialization is weakly
    // locality-sensitive, so the mean sits at or slightly above the
    // 1/topics prior.
    hashing::SyntheticSpec spec;
    spec.topics = 4;
    spec.vocab_size = 500;
    spec.train_docs = 400;
    spec.valid_docs = 100;
    spec.test_docs = 100;
    spec.seed = 3;
    auto raw = hashing::make_synthetic(spec);
    Corpus corpus = hashing::build_tfidf(raw.train, raw.valid, raw.test, spec.vocab_size);

    Hyperparams h;
    h.bits = 8;
    h.order_r = 3;
    h.hidden = 64;
    h.prior_hidden = 64;
    h.prior_embed = 16;
    h.eval_k = 100;
    double mean = 0.0;
    const int seeds = 8;
    for (uint64_t seed = 1; seed <= seeds; ++seed) {
        h.seed = seed;
        Trainer t(corpus, h, Mode::AmmiSingle);
        t.init_params();
        double score = t.validate_now();
        CHECK(score < 0.6);  // far from trained quality
        mean += score;
    }
    mean /= seeds;
    CHECK(std::fabs(mean - 0.25) <= 0.08);
}

TEST_CASE("gradient clipping trains and changes the trajectory") {
    Corpus corpus = tiny_corpus();
    Hyperparams h = tiny_hyper();
    h.max_epochs = 2;
    TrainState plain = training::train_ammi(corpus, h, Mode::AmmiSingle);
    h.clip_norm = 0.01;  // tight enough to bind
    TrainState clipped = training::train_ammi(corpus, h, Mode::AmmiSingle);
    REQUIRE(plain.batch_encoder_loss.size() == clipped.batch_encoder_loss.size());
    CHECK(plain.batch_encoder_loss != clipped.batch_encoder_loss);
    for (double v : clipped.batch_encoder_loss) CHECK(std::isfinite(v));
}

TEST_CASE("wide codes train end to end at m=128") {
    Corpus corpus = tiny_corpus(2, 40, false, 47);
    Hyperparams h = tiny_hyper(128, 53);
    h.order_r = 2;
    Trainer t(corpus, h, Mode::AmmiSingle);
    t.run_epochs(2);
    const TrainState& st = t.state();
    CHECK(st.trace.size() == 2);
    for (double v : st.batch_encoder_loss) CHECK(std::isfinite(v));
    // Surrogate bounded by the code length in nats.
    for (const auto& row : st.trace) CHECK(std::fabs(row.surrogate_nats) <= 128 * kLn2);

    nn::EncoderModel enc = nn::EncoderModel::topology("psi.", st.input_dim, h.hidden,
                                                      h.encoder_layers, h.bits, h.order_o);
    auto index = hashing::encode_all(enc, st.params, corpus, corpus.train);
    CHECK(index.m == 128);
    CHECK(hashing::count_distinct_codes(index) >= 1);
}

TEST_CASE("grid and random sweeps are deterministic in shape") {
    Corpus corpus = tiny_corpus(2, 24, false, 41);
    Config base;
    base.set("bits", "3");
    base.set("order_r", "1");
    base.set("hidden", "12");
    base.set("prior_hidden", "12");
    base.set("prior_embed", "6");
    base.set("batch_size", "12");
    base.set("max_epochs", "1");
    base.set("patience", "1");
    base.set("k", "5");
    base.set("mode", "ammi");

    std::vector<training::SweepAxis> axes{{"lr", {"0.01", "0.003"}}, {"beta", {"1.5"}}};
    auto runs = training::run_sweep(corpus, base, axes, false, 0, 7);
    CHECK(runs.size() == 2);
    CHECK(runs[0].seed != runs[1].seed);

    auto sampled = training::run_sweep(corpus, base, axes, true, 3, 7);
    CHECK(sampled.size() == 3);
}
