#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ammi/bitvector.hpp"
#include "ammi/corpus.hpp"
#include "ammi/markov.hpp"
#include "ammi/objectives.hpp"
#include "ammi/retrieval.hpp"
#include "ammi/training.hpp"

namespace py = pybind11;
using namespace ammi;

namespace {

markov::MarkovParams params_from_list(int m, int order, const std::vector<double>& probs) {
    return markov::MarkovParams::from_probs(m, order, probs);
}

std::vector<markov::MarkovParams> batch_from_lists(int m, int order,
                                                   const std::vector<std::vector<double>>& t) {
    std::vector<markov::MarkovParams> out;
    out.reserve(t.size());
    for (const auto& row : t) out.push_back(markov::MarkovParams::from_probs(m, order, row));
    return out;
}

}  // namespace

PYBIND11_MODULE(_ammi, m) {
    m.doc() = "Markov-code mutual information maximization: exact DP kernels, "
              "adversarial training and Hamming retrieval";

    py::class_<BitVector>(m, "BitVector")
        .def(py::init<int>(), py::arg("m"))
        .def_static("from_bits",
                    [](const std::vector<int>& bits) {
                        std::vector<uint8_t> b(bits.begin(), bits.end());
                        return BitVector::from_bits(b);
                    })
        .def_static("from_hex", &BitVector::from_hex, py::arg("hex"), py::arg("m"))
        .def("to_bits",
             [](const BitVector& b) {
                 auto bits = b.to_bits();
                 return std::vector<int>(bits.begin(), bits.end());
             })
        .def("to_hex", &BitVector::to_hex)
        .def("__len__", &BitVector::size)
        .def("__eq__", [](const BitVector& a, const BitVector& b) { return a == b; });

    m.def("hamming", &hamming, py::arg("a"), py::arg("b"));

    py::class_<markov::MarkovParams>(m, "MarkovParams")
        .def(py::init(&params_from_list), py::arg("m"), py::arg("order"), py::arg("probs"))
        .def_readonly("m", &markov::MarkovParams::m)
        .def_readonly("order", &markov::MarkovParams::order)
        .def_readonly("table", &markov::MarkovParams::table)
        .def_static("random",
                    [](int m, int order, uint64_t seed) {
                        Rng rng(seed);
                        return markov::MarkovParams::random(m, order, rng);
                    },
                    py::arg("m"), py::arg("order"), py::arg("seed"));

    m.def("forward", [](const markov::MarkovParams& p) {
        auto f = markov::forward(p);
        std::vector<std::vector<double>> rows(p.m);
        for (int i = 0; i < p.m; ++i)
            for (int c = 0; c < p.contexts(); ++c) rows[i].push_back(f.at(i, c));
        return rows;
    });
    m.def("marginals", [](const markov::MarkovParams& p, int target_order) {
        auto mt = markov::marginals(p, target_order);
        std::vector<std::vector<double>> rows(p.m);
        for (int i = 0; i < p.m; ++i)
            for (int w = 0; w < (2 << target_order); ++w) rows[i].push_back(mt.at(i, w));
        return rows;
    });
    m.def("cross_entropy", &markov::cross_entropy, py::arg("p"), py::arg("q"));
    m.def("entropy", &markov::entropy);
    m.def("viterbi", [](const markov::MarkovParams& p) { return markov::viterbi(p); });
    m.def("sample",
          [](const markov::MarkovParams& p, uint64_t seed) { return markov::sample(p, seed); });
    m.def("dump_table", &markov::dump_table);

    auto brute = m.def_submodule("brute", "enumeration oracles for small m");
    brute.def("prob", &markov::brute::prob);
    brute.def("all_probs", &markov::brute::all_probs);
    brute.def("cross_entropy", &markov::brute::cross_entropy);
    brute.def("entropy", &markov::brute::entropy);
    brute.def("argmax", &markov::brute::argmax);
    brute.def("mixture_entropy", &markov::brute::mixture_entropy);

    m.def("cond_cross_entropy_batch",
          [](int m, int order_p, const std::vector<std::vector<double>>& enc, int order_q,
             const std::vector<std::vector<double>>& var) {
              auto e = batch_from_lists(m, order_p, enc);
              auto v = batch_from_lists(m, order_q, var);
              return objectives::cond_cross_entropy_batch(e, v).value;
          });
    m.def("brute_entropy_batch",
          [](int m, int order, const std::vector<std::vector<double>>& enc) {
              auto e = batch_from_lists(m, order, enc);
              return objectives::brute_entropy_batch(e);
          });

    py::class_<hashing::SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init<>())
        .def_readwrite("topics", &hashing::SyntheticSpec::topics)
        .def_readwrite("vocab_size", &hashing::SyntheticSpec::vocab_size)
        .def_readwrite("train_docs", &hashing::SyntheticSpec::train_docs)
        .def_readwrite("valid_docs", &hashing::SyntheticSpec::valid_docs)
        .def_readwrite("test_docs", &hashing::SyntheticSpec::test_docs)
        .def_readwrite("doc_len", &hashing::SyntheticSpec::doc_len)
        .def_readwrite("noise", &hashing::SyntheticSpec::noise)
        .def_readwrite("paired", &hashing::SyntheticSpec::paired)
        .def_readwrite("seed", &hashing::SyntheticSpec::seed);

    // Generates a synthetic corpus, trains with the given mode, and returns
    // (best validation precision, test precision, distinct train codes).
    m.def("train_synthetic",
          [](const hashing::SyntheticSpec& spec, const std::string& mode_name, int bits,
             int order_r, int max_epochs, int batch_size, int k, uint64_t seed) {
              auto raw = hashing::make_synthetic(spec);
              auto corpus = hashing::build_tfidf(raw.train, raw.valid, raw.test,
                                                 spec.vocab_size);
              training::Hyperparams hyper;
              hyper.bits = bits;
              hyper.order_r = order_r;
              hyper.max_epochs = max_epochs;
              hyper.batch_size = batch_size;
              hyper.seed = seed;
              hyper.hidden = 128;
              hyper.prior_hidden = 128;
              hyper.eval_k = k;
              training::Mode mode = training::mode_from_string(mode_name);
              training::TrainState st = mode == training::Mode::Bmmi
                                            ? training::train_bmmi(corpus, hyper)
                                            : training::train_ammi(corpus, hyper, mode);
              nn::EncoderModel enc = nn::EncoderModel::topology(
                  "psi.", st.input_dim, st.hyper.hidden, st.hyper.encoder_layers,
                  st.hyper.bits, st.hyper.order_o);
              auto index = hashing::encode_all(enc, st.params, corpus, corpus.train);
              auto queries = hashing::encode_all(enc, st.params, corpus, corpus.test);
              int kk = std::min<int>(k, static_cast<int>(index.size()));
              double prec = hashing::top_k_precision(queries.codes, queries.labels,
                                                     queries.ids, index, kk);
              return py::make_tuple(st.best_val, prec, hashing::count_distinct_codes(index));
          },
          py::arg("spec"), py::arg("mode") = "ammi", py::arg("bits") = 8,
          py::arg("order_r") = 2, py::arg("max_epochs") = 10, py::arg("batch_size") = 32,
          py::arg("k") = 10, py::arg("seed") = 1);
}
