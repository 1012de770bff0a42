#include "ammi/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ammi::hashing {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<Document>& Corpus::split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "valid" || name == "validation") return valid;
    if (name == "test") return test;
    throw std::invalid_argument("Corpus::split: unknown split " + name);
}

const Document& Corpus::by_id(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("Corpus: unknown document id " + id);
    return *it->second;
}

void Corpus::rebuild_index() {
    index_.clear();
    for (const auto* split : {&train, &valid, &test})
        for (const auto& d : *split) {
            if (!index_.emplace(d.id, &d).second)
                throw std::invalid_argument("Corpus: duplicate document id " + d.id);
        }
}

void Corpus::validate() const {
    for (double v : idf)
        if (!std::isfinite(v)) throw std::invalid_argument("Corpus: non-finite idf");
    for (const auto* split : {&train, &valid, &test})
        for (const auto& d : *split) {
            if (!d.pair_id.empty() && !has_id(d.pair_id))
                throw std::invalid_argument("Corpus: unresolved pair_id " + d.pair_id);
            if (!d.empty) {
                double sq = 0.0;
                for (auto [t, w] : d.tfidf) {
                    if (t < 0 || t >= static_cast<int>(vocab.size()))
                        throw std::invalid_argument("Corpus: term index out of range");
                    sq += w * w;
                }
                if (std::fabs(std::sqrt(sq) - 1.0) > 1e-9)
                    throw std::invalid_argument("Corpus: tfidf not L2-normalized for " + d.id);
            }
        }
}

nn::SparseRows Corpus::tfidf_rows(const std::vector<const Document*>& docs) const {
    nn::SparseRows rows;
    rows.rows = static_cast<int>(docs.size());
    rows.cols = static_cast<int>(vocab.size());
    rows.items.resize(docs.size());
    for (size_t i = 0; i < docs.size(); ++i) rows.items[i] = docs[i]->tfidf;
    return rows;
}

nn::SparseRows Corpus::tfidf_rows(const std::vector<Document>& docs) const {
    std::vector<const Document*> ptrs(docs.size());
    for (size_t i = 0; i < docs.size(); ++i) ptrs[i] = &docs[i];
    return tfidf_rows(ptrs);
}

// ---------------------------------------------------------------------------
// TFIDF
// ---------------------------------------------------------------------------

namespace {

Document map_document(const RawDocument& raw,
                      const std::unordered_map<std::string, int>& term_index,
                      const std::unordered_map<std::string, int>& label_index,
                      const std::vector<double>& idf) {
    Document d;
    d.id = raw.id;
    d.pair_id = raw.pair_id;
    std::map<int, int> counts;
    for (const auto& [term, n] : raw.term_counts) {
        if (n <= 0) continue;
        auto it = term_index.find(term);
        if (it != term_index.end()) counts[it->second] += n;
    }
    d.counts.assign(counts.begin(), counts.end());
    double sq = 0.0;
    for (auto [t, n] : d.counts) {
        double w = (1.0 + std::log(static_cast<double>(n))) * idf[t];
        d.tfidf.emplace_back(t, w);
        sq += w * w;
    }
    if (d.tfidf.empty()) {
        d.empty = true;
    } else {
        double norm = std::sqrt(sq);
        for (auto& [t, w] : d.tfidf) w /= norm;
    }
    std::set<int> labels;
    for (const auto& name : raw.labels) {
        auto it = label_index.find(name);
        if (it != label_index.end()) labels.insert(it->second);
    }
    d.labels.assign(labels.begin(), labels.end());
    return d;
}

}  // namespace

Corpus build_tfidf(const std::vector<RawDocument>& train, const std::vector<RawDocument>& valid,
                   const std::vector<RawDocument>& test, int vocab_size) {
    if (vocab_size <= 0) throw std::invalid_argument("build_tfidf: vocab_size must be positive");

    // Document frequencies over the train split.
    std::map<std::string, int> df;
    for (const auto& d : train) {
        std::set<std::string> seen;
        for (const auto& [term, n] : d.term_counts)
            if (n > 0) seen.insert(term);
        for (const auto& t : seen) ++df[t];
    }
    if (df.empty()) throw std::invalid_argument("build_tfidf: empty train vocabulary");

    std::vector<std::pair<std::string, int>> ranked(df.begin(), df.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(ranked.size()) > vocab_size) ranked.resize(vocab_size);

    Corpus corpus;
    std::unordered_map<std::string, int> term_index;
    for (const auto& [term, n] : ranked) {
        term_index.emplace(term, static_cast<int>(corpus.vocab.size()));
        corpus.vocab.push_back(term);
    }

    const double dcount = static_cast<double>(train.size());
    corpus.idf.resize(corpus.vocab.size());
    for (const auto& [term, n] : ranked)
        corpus.idf[term_index[term]] = std::log((1.0 + dcount) / (1.0 + n)) + 1.0;

    std::set<std::string> label_set;
    for (const auto* split : {&train, &valid, &test})
        for (const auto& d : *split)
            for (const auto& l : d.labels) label_set.insert(l);
    std::unordered_map<std::string, int> label_index;
    for (const auto& name : label_set) {
        label_index.emplace(name, static_cast<int>(corpus.label_names.size()));
        corpus.label_names.push_back(name);
    }

    for (const auto& d : train)
        corpus.train.push_back(map_document(d, term_index, label_index, corpus.idf));
    for (const auto& d : valid)
        corpus.valid.push_back(map_document(d, term_index, label_index, corpus.idf));
    for (const auto& d : test)
        corpus.test.push_back(map_document(d, term_index, label_index, corpus.idf));

    corpus.rebuild_index();
    corpus.validate();
    return corpus;
}

// ---------------------------------------------------------------------------
// JSON-lines IO
// ---------------------------------------------------------------------------

void write_jsonl(const std::string& path, const std::vector<RawDocument>& docs) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_jsonl: cannot open " + path);
    for (const auto& d : docs) {
        json j;
        j["id"] = d.id;
        j["labels"] = d.labels;
        json counts = json::object();
        for (const auto& [term, n] : d.term_counts) counts[term] = n;
        j["counts"] = std::move(counts);
        if (!d.pair_id.empty()) j["pair_id"] = d.pair_id;
        os << j.dump() << '\n';
    }
}

std::vector<RawDocument> read_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_jsonl: cannot open " + path);
    std::vector<RawDocument> docs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("read_jsonl: " + path + ":" + std::to_string(lineno) +
                                     ": " + e.what());
        }
        RawDocument d;
        d.id = j.at("id").get<std::string>();
        if (j.contains("labels"))
            for (const auto& l : j["labels"]) d.labels.push_back(l.get<std::string>());
        if (j.contains("counts"))
            for (auto it = j["counts"].begin(); it != j["counts"].end(); ++it)
                d.term_counts.emplace_back(it.key(), it.value().get<int>());
        if (j.contains("pair_id")) d.pair_id = j["pair_id"].get<std::string>();
        std::sort(d.term_counts.begin(), d.term_counts.end());
        docs.push_back(std::move(d));
    }
    return docs;
}

void write_vocab_sidecar(const std::string& path, const Corpus& corpus) {
    json j;
    j["vocabulary"] = corpus.vocab;
    j["idf"] = corpus.idf;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_vocab_sidecar: cannot open " + path);
    os << j.dump(2) << '\n';
}

void read_vocab_sidecar(const std::string& path, std::vector<std::string>* vocab,
                        std::vector<double>* idf) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_vocab_sidecar: cannot open " + path);
    json j = json::parse(is);
    *vocab = j.at("vocabulary").get<std::vector<std::string>>();
    *idf = j.at("idf").get<std::vector<double>>();
    if (vocab->size() != idf->size())
        throw std::runtime_error("read_vocab_sidecar: vocabulary/idf size mismatch");
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

namespace {

// One planted topic: a Zipfian distribution over its own word block, mixed
// with uniform background noise over the shared tail block.
struct TopicModel {
    std::vector<double> cdf;  // over the topic block
    int block_start = 0;
    int block_size = 0;
    int background_start = 0;
    int background_size = 0;
    double noise = 0.0;

    int draw(Rng& rng) const {
        if (uniform01(rng) < noise)
            return background_start + static_cast<int>(uniform01(rng) * background_size);
        double u = uniform01(rng);
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        int off = static_cast<int>(it - cdf.begin());
        if (off >= block_size) off = block_size - 1;
        return block_start + off;
    }
};

std::vector<TopicModel> plant_topics(const SyntheticSpec& spec) {
    int block = spec.vocab_size / (spec.topics + 1);
    if (block < 4) throw std::invalid_argument("make_synthetic: vocab too small for topics");
    std::vector<TopicModel> topics(spec.topics);
    for (int t = 0; t < spec.topics; ++t) {
        TopicModel& tm = topics[t];
        tm.block_start = t * block;
        tm.block_size = block;
        tm.background_start = spec.topics * block;
        tm.background_size = spec.vocab_size - tm.background_start;
        tm.noise = spec.noise;
        tm.cdf.resize(block);
        double z = 0.0;
        for (int r = 0; r < block; ++r) z += 1.0 / (r + 1.0);
        double acc = 0.0;
        for (int r = 0; r < block; ++r) {
            acc += (1.0 / (r + 1.0)) / z;
            tm.cdf[r] = acc;
        }
    }
    return topics;
}

RawDocument emit_document(const std::string& id, int topic, const TopicModel& tm, int len,
                          Rng& rng) {
    std::map<int, int> counts;
    for (int i = 0; i < len; ++i) ++counts[tm.draw(rng)];
    RawDocument d;
    d.id = id;
    d.labels = {"t" + std::to_string(topic)};
    for (auto [w, n] : counts) d.term_counts.emplace_back("w" + std::to_string(w), n);
    return d;
}

}  // namespace

RawCorpus make_synthetic(const SyntheticSpec& spec) {
    if (spec.topics < 1) throw std::invalid_argument("make_synthetic: need at least one topic");
    auto topics = plant_topics(spec);
    Rng rng(spec.seed);
    RawCorpus out;

    auto fill = [&](std::vector<RawDocument>& docs, int count, const std::string& tag) {
        for (int i = 0; i < count; ++i) {
            int topic = static_cast<int>(rng() % spec.topics);
            int len = spec.doc_len / 2 + static_cast<int>(rng() % std::max(1, spec.doc_len));
            std::string base = tag + std::to_string(i);
            if (spec.paired) {
                RawDocument x = emit_document(base + ".x", topic, topics[topic], len, rng);
                RawDocument y = emit_document(base + ".y", topic, topics[topic], len, rng);
                y.pair_id = x.id;
                docs.push_back(std::move(x));
                docs.push_back(std::move(y));
            } else {
                docs.push_back(emit_document(base, topic, topics[topic], len, rng));
            }
        }
    };
    fill(out.train, spec.train_docs, "tr");
    fill(out.valid, spec.valid_docs, "va");
    fill(out.test, spec.test_docs, "te");
    return out;
}

// ---------------------------------------------------------------------------
// Directory loader
// ---------------------------------------------------------------------------

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            if (cur.size() >= 2) out.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 2) out.push_back(cur);
    return out;
}

namespace {

std::vector<RawDocument> load_class_dirs(const fs::path& root, const std::string& id_prefix) {
    std::vector<RawDocument> docs;
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());
    for (const auto& dir : class_dirs) {
        std::string label = dir.filename().string();
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream is(file);
            std::stringstream ss;
            ss << is.rdbuf();
            std::map<std::string, int> counts;
            for (const auto& tok : tokenize(ss.str())) ++counts[tok];
            RawDocument d;
            d.id = id_prefix + label + "/" + file.filename().string();
            d.labels = {label};
            for (const auto& [t, n] : counts) d.term_counts.emplace_back(t, n);
            docs.push_back(std::move(d));
        }
    }
    return docs;
}

}  // namespace

RawCorpus load_labeled_dirs(const std::string& root, double valid_fraction,
                            double test_fraction) {
    fs::path rp(root);
    if (!fs::is_directory(rp)) throw std::runtime_error("load_labeled_dirs: not a directory: " + root);

    fs::path train_dir, test_dir;
    for (const auto& entry : fs::directory_iterator(rp)) {
        if (!entry.is_directory()) continue;
        std::string name = entry.path().filename().string();
        if (name.ends_with("-train")) train_dir = entry.path();
        if (name.ends_with("-test")) test_dir = entry.path();
    }

    RawCorpus out;
    if (!train_dir.empty() && !test_dir.empty()) {
        // Pre-split layout: carve validation off the train portion.
        std::vector<RawDocument> all_train = load_class_dirs(train_dir, "train/");
        out.test = load_class_dirs(test_dir, "test/");
        for (auto& d : all_train) {
            bool to_valid = (fnv1a64(d.id) % 1000) < static_cast<uint64_t>(valid_fraction * 1000);
            (to_valid ? out.valid : out.train).push_back(std::move(d));
        }
        return out;
    }

    std::vector<RawDocument> all = load_class_dirs(rp, "");
    for (auto& d : all) {
        uint64_t h = fnv1a64(d.id) % 1000;
        if (h < static_cast<uint64_t>(test_fraction * 1000))
            out.test.push_back(std::move(d));
        else if (h < static_cast<uint64_t>((test_fraction + valid_fraction) * 1000))
            out.valid.push_back(std::move(d));
        else
            out.train.push_back(std::move(d));
    }
    return out;
}

}  // namespace ammi::hashing
