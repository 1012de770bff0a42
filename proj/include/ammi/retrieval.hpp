#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ammi/bitvector.hpp"
#include "ammi/corpus.hpp"
#include "ammi/network.hpp"

namespace ammi::hashing {

// Code database for exact Hamming scan. Labels are optional (empty vectors
// when the collection is unlabeled).
struct CodeIndex {
    int m = 0;
    std::vector<std::string> ids;
    std::vector<BitVector> codes;
    std::vector<std::vector<int>> labels;

    void add(std::string id, BitVector code, std::vector<int> doc_labels = {});
    size_t size() const { return ids.size(); }
};

// sigma(FF(tfidf)) -> per-position tables -> most probable code.
BitVector encode(const nn::EncoderModel& enc, const nn::ParamStore& params,
                 const Corpus& corpus, const Document& doc);

// All documents of a collection in one pass.
CodeIndex encode_all(const nn::EncoderModel& enc, const nn::ParamStore& params,
                     const Corpus& corpus, const std::vector<const Document*>& docs);
CodeIndex encode_all(const nn::EncoderModel& enc, const nn::ParamStore& params,
                     const Corpus& corpus, const std::vector<Document>& docs);

// Positions of the K nearest index entries by (Hamming distance, id), with
// an optional id excluded (a query never retrieves itself). Throws if fewer
// than K candidates remain.
std::vector<size_t> k_nearest(const CodeIndex& index, const BitVector& code, int k,
                              const std::string& exclude_id = "");

// Mean over queries of the fraction of the K nearest sharing at least one
// label with the query. All index entries must be labeled.
double top_k_precision(const std::vector<BitVector>& query_codes,
                       const std::vector<std::vector<int>>& query_labels,
                       const std::vector<std::string>& query_ids, const CodeIndex& index,
                       int k);

// Fraction of queries whose designated pair appears among the K nearest.
double pair_matching_precision(const std::vector<BitVector>& query_codes,
                               const std::vector<std::string>& query_pair_ids,
                               const std::vector<std::string>& query_ids,
                               const CodeIndex& index, int k);

int count_distinct_codes(const CodeIndex& index);

// Per-bit frequency of 1s over the index.
std::vector<double> bit_usage(const CodeIndex& index);

// For each threshold d: the nearest indexed document at distance >= d
// (ties by id). Thresholds above the code length are rejected.
struct DriftRow {
    int threshold = 0;
    bool found = false;
    std::string id;
    int distance = 0;
};

std::vector<DriftRow> drift_report(const BitVector& query, const CodeIndex& index,
                                   const std::vector<int>& thresholds);
std::string drift_report_text(const std::string& query_id, const std::vector<DriftRow>& rows);
std::string drift_report_json(const std::string& query_id, const std::vector<DriftRow>& rows);

// Code dump: one line per document, "id<TAB>hex-packed-code".
void write_code_dump(const std::string& path, const CodeIndex& index);
CodeIndex read_code_dump(const std::string& path, int m);

// Bag-of-words presence baseline over the full vocabulary.
BitVector bow_code(const Document& doc, int vocab_size);

}  // namespace ammi::hashing
