// Command-line driver: training, evaluation, encoding, oracle self-checks,
// the prior-order sweep, corpus generation, and hyperparameter sweeps.
//
// Exit codes: 0 success, 1 check failure, 2 usage/config/data error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ammi/config.hpp"
#include "ammi/corpus.hpp"
#include "ammi/markov.hpp"
#include "ammi/markov_graph.hpp"
#include "ammi/objectives.hpp"
#include "ammi/retrieval.hpp"
#include "ammi/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ammi;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir = ".";
    int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "config file (key = value lines)");
    if (needs_config) opt->required();
    cmd->add_option("--set", args.sets, "override a config key, KEY=VALUE (repeatable)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the config seed");
}

const std::set<std::string> kKnownKeys = {
    "alpha", "batch_size", "n", "inner_steps", "g", "adv_lr", "lr", "beta",
    "order_o", "o", "order_h", "h", "order_r", "r", "bits", "m", "hidden",
    "encoder_layers", "prior_hidden", "prior_layers", "prior_embed", "patience",
    "max_epochs", "clip_norm", "k", "seed", "mode", "vocab_size",
    "train_path", "valid_path", "test_path",
};

Config load_config(const CommonArgs& args) {
    Config cfg;
    if (!args.config_path.empty()) cfg.load_file(args.config_path);
    for (const auto& kv : args.sets) cfg.set_kv(kv);
    if (args.seed >= 0) cfg.set("seed", std::to_string(args.seed));
    for (const auto& [key, value] : cfg.entries())
        if (!kKnownKeys.count(key) && key.rfind("grid.", 0) != 0)
            throw std::runtime_error("unknown config key: " + key);
    return cfg;
}

hashing::Corpus load_corpus(const Config& cfg) {
    std::string train = cfg.get_str("train_path", "");
    std::string valid = cfg.get_str("valid_path", "");
    std::string test = cfg.get_str("test_path", "");
    if (train.empty() || valid.empty() || test.empty())
        throw std::runtime_error("config must set train_path, valid_path and test_path");
    int vocab_size = cfg.get_int("vocab_size", 10000);
    return hashing::build_tfidf(hashing::read_jsonl(train), hashing::read_jsonl(valid),
                                hashing::read_jsonl(test), vocab_size);
}

void write_run_info(const std::string& out_dir, const Config& cfg, double wall_sec) {
    json j;
    j["config_hash"] = hex_u64(cfg.hash());
    j["version"] = kVersion;
    j["wall_clock_sec"] = wall_sec;
    std::ofstream os(fs::path(out_dir) / "run-info.json");
    os << j.dump(2) << '\n';
}

double now_sec() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    return out;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const CommonArgs& args) {
    double t0 = now_sec();
    Config cfg = load_config(args);
    hashing::Corpus corpus = load_corpus(cfg);
    training::Hyperparams hyper = training::Hyperparams::from_config(cfg);
    training::Mode mode = training::mode_from_string(cfg.get_str("mode", "ammi"));

    fs::create_directories(args.out_dir);
    training::TrainState st = mode == training::Mode::Bmmi
                                  ? training::train_bmmi(corpus, hyper)
                                  : training::train_ammi(corpus, hyper, mode);
    st.config_hash = cfg.hash();

    fs::path out(args.out_dir);
    training::write_metrics_csv(st, (out / "metrics.csv").string());
    training::write_metrics_json(st, (out / "metrics.json").string());
    training::checkpoint_save(st, (out / "checkpoint.bin").string());
    hashing::write_vocab_sidecar((out / "vocab.json").string(), corpus);
    write_run_info(args.out_dir, cfg, now_sec() - t0);

    std::printf("trained %s for %d epochs, best val %.4f at epoch %d\n",
                training::mode_to_string(mode).c_str(), st.epoch, st.best_val, st.best_epoch);
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const CommonArgs& args, const std::string& checkpoint, int k_flag, bool bow,
             const std::string& drift_id, const std::string& drift_thresholds) {
    double t0 = now_sec();
    Config cfg = load_config(args);
    if (!fs::exists(checkpoint))
        throw std::runtime_error("checkpoint not found: " + checkpoint);
    hashing::Corpus corpus = load_corpus(cfg);
    training::TrainState st = training::checkpoint_load(checkpoint, cfg.hash());

    nn::EncoderModel enc = nn::EncoderModel::topology(
        "psi.", st.input_dim, st.hyper.hidden, st.hyper.encoder_layers, st.hyper.bits,
        st.hyper.order_o);
    int k = k_flag > 0 ? k_flag : st.hyper.eval_k;

    hashing::CodeIndex train_index = hashing::encode_all(enc, st.params, corpus, corpus.train);
    hashing::CodeIndex test_codes = hashing::encode_all(enc, st.params, corpus, corpus.test);

    json result;
    result["k"] = k;
    result["distinct_codes_train"] = hashing::count_distinct_codes(train_index);
    result["train_documents"] = train_index.size();
    result["bit_usage"] = hashing::bit_usage(train_index);

    bool labeled = true;
    for (const auto& d : corpus.train)
        if (d.labels.empty()) { labeled = false; break; }
    if (labeled && !corpus.test.empty()) {
        int kk = std::min<int>(k, static_cast<int>(train_index.size()));
        double prec = hashing::top_k_precision(test_codes.codes, test_codes.labels,
                                               test_codes.ids, train_index, kk);
        result["top_k_precision"] = prec;
        std::printf("top-%d precision: %.4f\n", kk, prec);
        if (bow) {
            hashing::CodeIndex bow_index, bow_queries;
            bow_index.m = static_cast<int>(corpus.vocab.size());
            bow_queries.m = bow_index.m;
            for (const auto& d : corpus.train)
                bow_index.add(d.id, hashing::bow_code(d, bow_index.m), d.labels);
            for (const auto& d : corpus.test)
                bow_queries.add(d.id, hashing::bow_code(d, bow_queries.m), d.labels);
            double bp = hashing::top_k_precision(bow_queries.codes, bow_queries.labels,
                                                 bow_queries.ids, bow_index, kk);
            result["bow_precision"] = bp;
            std::printf("bow baseline precision: %.4f\n", bp);
        }
    }

    std::vector<const hashing::Document*> pair_queries, candidates;
    for (const auto& d : corpus.test)
        if (!d.pair_id.empty()) pair_queries.push_back(&d);
    if (!pair_queries.empty()) {
        for (const auto* split : {&corpus.train, &corpus.valid, &corpus.test})
            for (const auto& d : *split)
                if (d.pair_id.empty()) candidates.push_back(&d);
        hashing::CodeIndex cand_index = hashing::encode_all(enc, st.params, corpus, candidates);
        hashing::CodeIndex query_index =
            hashing::encode_all(enc, st.params, corpus, pair_queries);
        std::vector<std::string> pair_ids;
        for (const auto* d : pair_queries) pair_ids.push_back(d->pair_id);
        int kk = std::min<int>(k, static_cast<int>(cand_index.size()));
        double prec = hashing::pair_matching_precision(query_index.codes, pair_ids,
                                                       query_index.ids, cand_index, kk);
        result["pair_matching_precision"] = prec;
        result["pair_candidates"] = cand_index.size();
        std::printf("pair-matching precision@%d: %.4f (over %zu candidates)\n", kk, prec,
                    cand_index.size());
    }

    std::printf("distinct codes on train: %d / %zu documents\n",
                result["distinct_codes_train"].get<int>(), train_index.size());

    if (!drift_id.empty()) {
        const hashing::Document& qdoc = corpus.by_id(drift_id);
        BitVector qcode = hashing::encode(enc, st.params, corpus, qdoc);
        std::vector<int> thresholds = parse_int_list(drift_thresholds);
        auto rows = hashing::drift_report(qcode, train_index, thresholds);
        std::fputs(hashing::drift_report_text(drift_id, rows).c_str(), stdout);
        result["drift"] = json::parse(hashing::drift_report_json(drift_id, rows));
    }

    fs::create_directories(args.out_dir);
    std::ofstream os(fs::path(args.out_dir) / "eval.json");
    os << result.dump(2) << '\n';
    write_run_info(args.out_dir, cfg, now_sec() - t0);
    return 0;
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

int cmd_encode(const CommonArgs& args, const std::string& checkpoint, const std::string& split,
               std::string out_file) {
    Config cfg = load_config(args);
    if (!fs::exists(checkpoint))
        throw std::runtime_error("checkpoint not found: " + checkpoint);
    hashing::Corpus corpus = load_corpus(cfg);
    training::TrainState st = training::checkpoint_load(checkpoint, cfg.hash());
    nn::EncoderModel enc = nn::EncoderModel::topology(
        "psi.", st.input_dim, st.hyper.hidden, st.hyper.encoder_layers, st.hyper.bits,
        st.hyper.order_o);
    hashing::CodeIndex codes = hashing::encode_all(enc, st.params, corpus, corpus.split(split));
    if (out_file.empty()) {
        fs::create_directories(args.out_dir);
        out_file = (fs::path(args.out_dir) / (split + "_codes.tsv")).string();
    }
    hashing::write_code_dump(out_file, codes);
    std::printf("wrote %zu codes to %s\n", codes.size(), out_file.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

struct OracleReport {
    double max_dp_rel = 0.0;
    double max_grad_rel = 0.0;
    int cases = 0;
};

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max({std::fabs(want), std::fabs(got), 1e-12});
}

// DP quantities against enumeration over all codes.
bool oracle_dp_suite(int max_m, int max_order, int trials, uint64_t seed, bool inject_bug,
                     OracleReport& report) {
    Rng rng(seed);
    bool ok = true;
    for (int o = 0; o <= max_order; ++o)
        for (int op = o; op <= max_order; ++op)
            for (int m = std::max(1, op); m <= max_m; ++m)
                for (int t = 0; t < trials; ++t) {
                    auto p = markov::MarkovParams::random(m, std::min(o, m), rng);
                    auto q = markov::MarkovParams::random(m, std::min(op, m), rng);
                    double dp = markov::cross_entropy(p, q);
                    if (inject_bug) dp += 1e-3;
                    double bf = markov::brute::cross_entropy(p, q);
                    report.max_dp_rel = std::max(report.max_dp_rel, rel_err(dp, bf));
                    report.max_dp_rel = std::max(
                        report.max_dp_rel, rel_err(markov::entropy(p), markov::brute::entropy(p)));
                    auto [vz, vlp] = markov::viterbi(p);
                    auto [bz, blp] = markov::brute::argmax(p);
                    if (!(vz == bz) || rel_err(vlp, blp) > 1e-9) ok = false;
                    ++report.cases;
                }
    return ok && report.max_dp_rel <= 1e-8;
}

// Gradients of the batch estimators against central finite differences.
bool oracle_grad_suite(int trials, uint64_t seed, OracleReport& report) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const int m = 8, N = 3;
    const double h = 1e-4;
    for (int t = 0; t < std::max(1, trials / 10); ++t) {
        nn::Tensor enc_probs(N, m);  // order 0
        for (double& x : enc_probs.v) x = uniform_in(rng, 0.15, 0.85);
        nn::Tensor prior_probs(1, m << 2);  // order 2
        for (double& x : prior_probs.v) x = uniform_in(rng, 0.15, 0.85);

        auto build = [&](int which, nn::Graph& g, const nn::Tensor& ep, const nn::Tensor& pp) {
            auto encb = markov::table_batch_param(g, &ep, m, 0);
            auto prib = markov::table_batch_param(g, &pp, m, 2);
            switch (which) {
            case 0: return g.mean_all(markov::cross_entropy_rows(g, encb, prib));
            case 1: return g.mean_all(markov::entropy_rows(g, encb));
            default: return g.mixture_code_entropy(encb.probs, m, 0);
            }
        };
        for (int which = 0; which < 3; ++which) {
            nn::Graph g;
            auto loss = build(which, g, enc_probs, prior_probs);
            g.backward(loss);
            auto eval = [&](const nn::Tensor& ep, const nn::Tensor& pp) {
                nn::Graph g2;
                return g2.value(build(which, g2, ep, pp)).v[0];
            };
            for (size_t i = 0; i < enc_probs.v.size(); i += 5) {
                nn::Tensor e1 = enc_probs, e2 = enc_probs;
                e1.v[i] += h;
                e2.v[i] -= h;
                double fd = (eval(e1, prior_probs) - eval(e2, prior_probs)) / (2 * h);
                double ad = g.grad(g.param_var(&enc_probs)).v[i];
                if (std::fabs(fd) > 1e-8 || std::fabs(ad) > 1e-8)
                    report.max_grad_rel = std::max(report.max_grad_rel, rel_err(ad, fd));
            }
            ++report.cases;
        }
    }
    return report.max_grad_rel <= 1e-4;
}

int cmd_oracle_check(int max_m, int max_order, int trials, uint64_t seed, bool inject_bug) {
    if (max_m > markov::brute::kMaxBits)
        throw std::runtime_error("oracle-check: --max-m exceeds the enumeration guard of 20");
    if (trials == 0) {
        std::printf("warning: trials = 0, vacuous pass\n");
        return 0;
    }
    OracleReport report;
    bool dp_ok = oracle_dp_suite(max_m, max_order, trials, seed, inject_bug, report);
    bool grad_ok = oracle_grad_suite(trials, seed, report);
    std::printf("dp-vs-enumeration: max relative error %.3e over %d cases [%s]\n",
                report.max_dp_rel, report.cases, dp_ok ? "ok" : "FAIL");
    std::printf("gradient-vs-finite-difference: max relative error %.3e [%s]\n",
                report.max_grad_rel, grad_ok ? "ok" : "FAIL");
    return dp_ok && grad_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// order-sweep
// ---------------------------------------------------------------------------

int cmd_order_sweep(const CommonArgs& args, const std::string& r_list_str) {
    double t0 = now_sec();
    Config cfg = load_config(args);
    std::vector<int> r_list = parse_int_list(r_list_str);
    if (r_list.empty()) throw std::runtime_error("order-sweep: empty --r-list");
    hashing::Corpus corpus = load_corpus(cfg);
    training::Hyperparams hyper = training::Hyperparams::from_config(cfg);

    training::OrderSweepResult result = training::prior_order_sweep(corpus, hyper, r_list);

    fs::create_directories(args.out_dir);
    fs::path out(args.out_dir);
    {
        std::ofstream os(out / "order_sweep.csv");
        os << "r,converged_prior_ce,brute_entropy,order_o\n";
        for (const auto& row : result.rows)
            os << row.order_r << ',' << fmt_g17(row.converged_prior_ce) << ','
               << fmt_g17(row.brute_entropy) << ',' << row.order_o << '\n';
    }
    {
        json j;
        j["partial_epochs"] = result.partial_epochs;
        j["batch_size"] = result.batch_size;
        j["rows"] = json::array();
        for (const auto& row : result.rows)
            j["rows"].push_back({{"r", row.order_r},
                                 {"converged_prior_ce", row.converged_prior_ce},
                                 {"brute_entropy", row.brute_entropy},
                                 {"order_o", row.order_o}});
        std::ofstream os(out / "order_sweep.json");
        os << j.dump(2) << '\n';
    }
    write_run_info(args.out_dir, cfg, now_sec() - t0);
    for (const auto& row : result.rows)
        std::printf("r=%d  prior cross-entropy %.6f nats  (mixture entropy %.6f)\n",
                    row.order_r, row.converged_prior_ce, row.brute_entropy);
    return 0;
}

// ---------------------------------------------------------------------------
// make-corpus
// ---------------------------------------------------------------------------

int cmd_make_corpus(const CommonArgs& args, const hashing::SyntheticSpec& spec,
                    const std::string& from_dir) {
    hashing::RawCorpus raw;
    if (!from_dir.empty()) {
        raw = hashing::load_labeled_dirs(from_dir);
    } else {
        raw = hashing::make_synthetic(spec);
    }
    fs::create_directories(args.out_dir);
    fs::path out(args.out_dir);
    hashing::write_jsonl((out / "train.jsonl").string(), raw.train);
    hashing::write_jsonl((out / "valid.jsonl").string(), raw.valid);
    hashing::write_jsonl((out / "test.jsonl").string(), raw.test);
    std::printf("wrote %zu/%zu/%zu documents to %s\n", raw.train.size(), raw.valid.size(),
                raw.test.size(), args.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const CommonArgs& args, bool random_mode, int samples) {
    double t0 = now_sec();
    Config cfg = load_config(args);
    hashing::Corpus corpus = load_corpus(cfg);

    std::vector<training::SweepAxis> axes;
    for (const auto& [key, value] : cfg.entries()) {
        if (key.rfind("grid.", 0) != 0) continue;
        training::SweepAxis axis;
        axis.key = key.substr(5);
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) axis.values.push_back(item);
        axes.push_back(std::move(axis));
    }
    if (axes.empty()) throw std::runtime_error("sweep: declare at least one grid.<key> entry");

    uint64_t seed = cfg.get_u64("seed", 1);
    auto runs = training::run_sweep(corpus, cfg, axes, random_mode, samples, seed);

    fs::create_directories(args.out_dir);
    std::ofstream os(fs::path(args.out_dir) / "sweep.csv");
    os << "overrides,seed,best_val,best_epoch\n";
    for (const auto& run : runs) {
        std::string ov;
        for (const auto& [k, v] : run.overrides) ov += k + "=" + v + ";";
        os << ov << ',' << run.seed << ',' << fmt_g17(run.best_val) << ',' << run.best_epoch
           << '\n';
        std::printf("%-40s best val %.4f (epoch %d)\n", ov.c_str(), run.best_val,
                    run.best_epoch);
    }
    write_run_info(args.out_dir, cfg, now_sec() - t0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary-code representation learning by adversarial entropy bounds"};
    app.require_subcommand(1);

    CommonArgs train_args, eval_args, encode_args, sweep_args, order_args, corpus_args;

    auto* train = app.add_subcommand("train", "train an encoder (modes: ammi, ammi_pairs, bmmi)");
    add_common(train, train_args);

    auto* eval = app.add_subcommand("eval", "retrieval evaluation of a trained checkpoint");
    add_common(eval, eval_args);
    std::string eval_checkpoint, eval_drift_id, eval_drift_thresholds = "1,5,10";
    int eval_k = 0;
    bool eval_bow = false;
    eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    eval->add_option("--k", eval_k, "neighbors to retrieve (default: config k)");
    eval->add_flag("--bow", eval_bow, "also score the bag-of-words presence baseline");
    eval->add_option("--drift-id", eval_drift_id,
                     "document id: report the nearest train documents at increasing "
                     "Hamming thresholds");
    eval->add_option("--drift-thresholds", eval_drift_thresholds,
                     "comma-separated distance thresholds");

    auto* encode = app.add_subcommand("encode", "dump codes for a split, id<TAB>hex per line");
    add_common(encode, encode_args);
    std::string encode_checkpoint, encode_split = "test", encode_out;
    encode->add_option("--checkpoint", encode_checkpoint, "checkpoint file")->required();
    encode->add_option("--split", encode_split, "train|valid|test");
    encode->add_option("--out-file", encode_out, "output path");

    auto* oracle = app.add_subcommand("oracle-check", "dynamic programming and gradient self-checks");
    int oracle_max_m = 12, oracle_max_order = 3, oracle_trials = 50;
    uint64_t oracle_seed = 1;
    bool oracle_bug = false;
    oracle->add_option("--max-m", oracle_max_m, "largest code length to enumerate");
    oracle->add_option("--max-order", oracle_max_order, "largest Markov order");
    oracle->add_option("--trials", oracle_trials, "random instances per configuration");
    oracle->add_option("--seed", oracle_seed, "random seed");
    oracle->add_flag("--inject-bug", oracle_bug, "perturb one result (negative control)")
        ->group("");  // hidden

    auto* order_sweep = app.add_subcommand("order-sweep",
                                           "fit priors of increasing order to a frozen encoder");
    add_common(order_sweep, order_args);
    std::string r_list = "0,1,2,3,4";
    order_sweep->add_option("--r-list", r_list, "comma-separated prior orders");

    auto* make_corpus = app.add_subcommand("make-corpus", "generate or import a corpus");
    add_common(make_corpus, corpus_args, false);
    hashing::SyntheticSpec spec;
    std::string from_dir;
    make_corpus->add_option("--topics", spec.topics, "planted topics");
    make_corpus->add_option("--train-docs", spec.train_docs, "train documents (pairs when --paired)");
    make_corpus->add_option("--valid-docs", spec.valid_docs, "validation documents");
    make_corpus->add_option("--test-docs", spec.test_docs, "test documents");
    make_corpus->add_option("--vocab", spec.vocab_size, "vocabulary size");
    make_corpus->add_option("--doc-len", spec.doc_len, "mean document length");
    make_corpus->add_option("--noise", spec.noise, "background word probability");
    make_corpus->add_flag("--paired", spec.paired, "emit paired documents");
    make_corpus->add_option("--gen-seed", spec.seed, "generator seed");
    make_corpus->add_option("--from-dir", from_dir, "import a label-per-directory corpus");

    auto* sweep = app.add_subcommand("sweep", "grid or random hyperparameter sweep");
    add_common(sweep, sweep_args);
    bool sweep_random = false;
    int sweep_samples = 8;
    sweep->add_flag("--random", sweep_random, "sample the grid instead of enumerating it");
    sweep->add_option("--samples", sweep_samples, "draws in random mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (train->parsed()) return cmd_train(train_args);
        if (eval->parsed())
            return cmd_eval(eval_args, eval_checkpoint, eval_k, eval_bow, eval_drift_id,
                            eval_drift_thresholds);
        if (encode->parsed())
            return cmd_encode(encode_args, encode_checkpoint, encode_split, encode_out);
        if (oracle->parsed())
            return cmd_oracle_check(oracle_max_m, oracle_max_order, oracle_trials, oracle_seed,
                                    oracle_bug);
        if (order_sweep->parsed()) return cmd_order_sweep(order_args, r_list);
        if (make_corpus->parsed()) return cmd_make_corpus(corpus_args, spec, from_dir);
        if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_random, sweep_samples);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
