#include "ammi/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "ammi/markov.hpp"

namespace ammi::hashing {

void CodeIndex::add(std::string id, BitVector code, std::vector<int> doc_labels) {
    if (m == 0) m = code.size();
    if (code.size() != m) throw std::invalid_argument("CodeIndex: code length mismatch");
    ids.push_back(std::move(id));
    codes.push_back(std::move(code));
    labels.push_back(std::move(doc_labels));
}

BitVector encode(const nn::EncoderModel& enc, const nn::ParamStore& params,
                 const Corpus& corpus, const Document& doc) {
    nn::SparseRows rows = corpus.tfidf_rows(std::vector<const Document*>{&doc});
    nn::Tensor probs = enc.eval_probs(params, rows);
    auto table = markov::MarkovParams::from_probs(enc.m, enc.order, std::move(probs.v));
    return markov::viterbi(table).first;
}

CodeIndex encode_all(const nn::EncoderModel& enc, const nn::ParamStore& params,
                     const Corpus& corpus, const std::vector<const Document*>& docs) {
    CodeIndex index;
    index.m = enc.m;
    if (docs.empty()) return index;
    nn::Tensor probs = enc.eval_probs(params, corpus.tfidf_rows(docs));
    const int width = enc.m << enc.order;
    for (size_t i = 0; i < docs.size(); ++i) {
        std::vector<double> row(probs.v.begin() + static_cast<size_t>(i) * width,
                                probs.v.begin() + static_cast<size_t>(i + 1) * width);
        auto table = markov::MarkovParams::from_probs(enc.m, enc.order, std::move(row));
        index.add(docs[i]->id, markov::viterbi(table).first, docs[i]->labels);
    }
    return index;
}

CodeIndex encode_all(const nn::EncoderModel& enc, const nn::ParamStore& params,
                     const Corpus& corpus, const std::vector<Document>& docs) {
    std::vector<const Document*> ptrs(docs.size());
    for (size_t i = 0; i < docs.size(); ++i) ptrs[i] = &docs[i];
    return encode_all(enc, params, corpus, ptrs);
}

std::vector<size_t> k_nearest(const CodeIndex& index, const BitVector& code, int k,
                              const std::string& exclude_id) {
    if (k <= 0) throw std::invalid_argument("k_nearest: k must be positive");
    std::vector<size_t> order;
    order.reserve(index.size());
    for (size_t i = 0; i < index.size(); ++i)
        if (exclude_id.empty() || index.ids[i] != exclude_id) order.push_back(i);
    if (static_cast<size_t>(k) > order.size())
        throw std::invalid_argument("k_nearest: k exceeds candidate count");

    std::vector<int> dist(index.size());
    for (size_t i : order) dist[i] = hamming(code, index.codes[i]);
    auto cmp = [&](size_t a, size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return index.ids[a] < index.ids[b];
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), cmp);
    order.resize(k);
    return order;
}

namespace {
bool share_label(const std::vector<int>& a, const std::vector<int>& b) {
    // Both sorted.
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j]) ++i; else ++j;
    }
    return false;
}
}  // namespace

double top_k_precision(const std::vector<BitVector>& query_codes,
                       const std::vector<std::vector<int>>& query_labels,
                       const std::vector<std::string>& query_ids, const CodeIndex& index,
                       int k) {
    if (query_codes.empty()) throw std::invalid_argument("top_k_precision: no queries");
    if (query_codes.size() != query_labels.size() || query_codes.size() != query_ids.size())
        throw std::invalid_argument("top_k_precision: query arrays misaligned");
    for (const auto& l : index.labels)
        if (l.empty()) throw std::invalid_argument("top_k_precision: unlabeled index entry");

    double total = 0.0;
    for (size_t qi = 0; qi < query_codes.size(); ++qi) {
        auto nearest = k_nearest(index, query_codes[qi], k, query_ids[qi]);
        int hits = 0;
        for (size_t pos : nearest)
            if (share_label(query_labels[qi], index.labels[pos])) ++hits;
        total += static_cast<double>(hits) / k;
    }
    return total / static_cast<double>(query_codes.size());
}

double pair_matching_precision(const std::vector<BitVector>& query_codes,
                               const std::vector<std::string>& query_pair_ids,
                               const std::vector<std::string>& query_ids,
                               const CodeIndex& index, int k) {
    if (query_codes.empty()) throw std::invalid_argument("pair_matching_precision: no queries");
    std::unordered_set<std::string> indexed(index.ids.begin(), index.ids.end());
    for (const auto& pid : query_pair_ids)
        if (pid.empty() || !indexed.count(pid))
            throw std::invalid_argument("pair_matching_precision: unresolved pair id " + pid);

    int hits = 0;
    for (size_t qi = 0; qi < query_codes.size(); ++qi) {
        auto nearest = k_nearest(index, query_codes[qi], k, query_ids[qi]);
        for (size_t pos : nearest)
            if (index.ids[pos] == query_pair_ids[qi]) { ++hits; break; }
    }
    return static_cast<double>(hits) / static_cast<double>(query_codes.size());
}

int count_distinct_codes(const CodeIndex& index) {
    std::unordered_set<std::string> seen;
    for (const auto& c : index.codes) seen.insert(c.to_hex());
    return static_cast<int>(seen.size());
}

std::vector<double> bit_usage(const CodeIndex& index) {
    std::vector<double> usage(index.m, 0.0);
    for (const auto& c : index.codes)
        for (int i = 0; i < index.m; ++i) usage[i] += c.bit(i);
    if (!index.codes.empty())
        for (double& u : usage) u /= static_cast<double>(index.codes.size());
    return usage;
}

std::vector<DriftRow> drift_report(const BitVector& query, const CodeIndex& index,
                                   const std::vector<int>& thresholds) {
    if (index.size() == 0) throw std::invalid_argument("drift_report: empty index");
    std::vector<DriftRow> rows;
    for (int d : thresholds) {
        if (d > query.size())
            throw std::invalid_argument("drift_report: threshold exceeds code length");
        DriftRow row;
        row.threshold = d;
        int best = query.size() + 1;
        for (size_t i = 0; i < index.size(); ++i) {
            int dist = hamming(query, index.codes[i]);
            if (dist < d) continue;
            if (dist < best || (dist == best && row.found && index.ids[i] < row.id)) {
                best = dist;
                row.found = true;
                row.id = index.ids[i];
                row.distance = dist;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string drift_report_text(const std::string& query_id, const std::vector<DriftRow>& rows) {
    std::ostringstream os;
    os << "drift report for " << query_id << "\n";
    for (const auto& r : rows) {
        os << "  >= " << r.threshold << ": ";
        if (r.found)
            os << r.id << " (distance " << r.distance << ")";
        else
            os << "(none)";
        os << "\n";
    }
    return os.str();
}

std::string drift_report_json(const std::string& query_id, const std::vector<DriftRow>& rows) {
    nlohmann::json j;
    j["query"] = query_id;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row;
        row["threshold"] = r.threshold;
        row["found"] = r.found;
        if (r.found) {
            row["id"] = r.id;
            row["distance"] = r.distance;
        }
        j["rows"].push_back(std::move(row));
    }
    return j.dump(2);
}

void write_code_dump(const std::string& path, const CodeIndex& index) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_code_dump: cannot open " + path);
    for (size_t i = 0; i < index.size(); ++i)
        os << index.ids[i] << '\t' << index.codes[i].to_hex() << '\n';
}

CodeIndex read_code_dump(const std::string& path, int m) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_code_dump: cannot open " + path);
    CodeIndex index;
    index.m = m;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("read_code_dump: malformed line in " + path);
        index.add(line.substr(0, tab), BitVector::from_hex(line.substr(tab + 1), m));
    }
    return index;
}

BitVector bow_code(const Document& doc, int vocab_size) {
    BitVector code(vocab_size);
    for (auto [t, n] : doc.counts)
        if (n > 0) code.set_bit(t, 1);
    return code;
}

}  // namespace ammi::hashing
