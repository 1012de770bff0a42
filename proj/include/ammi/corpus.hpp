#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ammi/tensor.hpp"
#include "ammi/util.hpp"

namespace ammi::hashing {

// A document after vocabulary mapping. Term indices refer to the corpus
// vocabulary; tfidf is L2-normalized (or empty, with `empty` set, when no
// vocabulary term occurs).
struct Document {
    std::string id;
    std::vector<std::pair<int, int>> counts;     // (term index, count), sorted
    std::vector<std::pair<int, double>> tfidf;   // (term index, weight), sorted
    std::vector<int> labels;                     // label indices, sorted
    std::string pair_id;                         // paired document id, or ""
    bool empty = false;
};

// A document before vocabulary mapping, as read from disk or a generator.
struct RawDocument {
    std::string id;
    std::vector<std::pair<std::string, int>> term_counts;
    std::vector<std::string> labels;
    std::string pair_id;
};

struct Corpus {
    std::vector<std::string> vocab;
    std::vector<std::string> label_names;
    std::vector<double> idf;  // fitted on the train split only
    std::vector<Document> train, valid, test;

    const std::vector<Document>& split(const std::string& name) const;

    // Document lookup across all splits; throws on unknown id.
    const Document& by_id(const std::string& id) const;
    bool has_id(const std::string& id) const { return index_.count(id) != 0; }

    void rebuild_index();
    void validate() const;  // split disjointness, pair resolution, idf finite

    nn::SparseRows tfidf_rows(const std::vector<const Document*>& docs) const;
    nn::SparseRows tfidf_rows(const std::vector<Document>& docs) const;

private:
    std::unordered_map<std::string, const Document*> index_;
};

// Fits the vocabulary (top vocab_size train terms by document frequency,
// ties broken by term string) and idf on the train split, then maps all
// three splits. Weight: (1 + ln tf) * (ln((1 + D)/(1 + df)) + 1), then L2
// normalization.
Corpus build_tfidf(const std::vector<RawDocument>& train, const std::vector<RawDocument>& valid,
                   const std::vector<RawDocument>& test, int vocab_size);

// JSON-lines corpus files: one document per line with fields id (string),
// labels (array of strings), counts (object term -> integer count) and
// optional pair_id (string).
void write_jsonl(const std::string& path, const std::vector<RawDocument>& docs);
std::vector<RawDocument> read_jsonl(const std::string& path);

// Sidecar with the fitted vocabulary and idf vector.
void write_vocab_sidecar(const std::string& path, const Corpus& corpus);
void read_vocab_sidecar(const std::string& path, std::vector<std::string>* vocab,
                        std::vector<double>* idf);

// Synthetic topic-mixture corpus: k planted topics with Zipfian vocabularies
// over mostly disjoint word blocks plus shared background noise. Labels are
// "t<topic>". In paired mode each draw emits two documents of the same
// topic; the second carries pair_id pointing at the first.
struct SyntheticSpec {
    int topics = 4;
    int vocab_size = 1000;
    int train_docs = 2000;  // in paired mode: pairs per split
    int valid_docs = 500;
    int test_docs = 500;
    int doc_len = 60;
    double noise = 0.1;  // probability mass of background draws
    bool paired = false;
    uint64_t seed = 1;
};

struct RawCorpus {
    std::vector<RawDocument> train, valid, test;
};

RawCorpus make_synthetic(const SyntheticSpec& spec);

// Directory loader for labeled text corpora laid out as one subdirectory
// per label with one file per document (the layout 20 Newsgroups ships in;
// a root containing *-train/*-test subdirectories maps to splits, otherwise
// documents are split deterministically by id hash).
RawCorpus load_labeled_dirs(const std::string& root, double valid_fraction = 0.1,
                            double test_fraction = 0.1);

// Lowercased alphanumeric tokens of length >= 2.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace ammi::hashing
