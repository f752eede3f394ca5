#include "vatd/data_synth.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "vatd/rng.hpp"

namespace vatd {

void SynthSpec::validate() const {
    if (num_classes < 2) {
        throw std::invalid_argument("synth spec: need at least 2 classes");
    }
    if (keywords_per_class < 1 || filler_pool < 1) {
        throw std::invalid_argument("synth spec: empty token pool");
    }
    if (len_min < 1 || len_max < len_min) {
        throw std::invalid_argument("synth spec: bad length range");
    }
    if (keyword_rate < 0.0 || keyword_rate > 1.0) {
        throw std::invalid_argument("synth spec: keyword_rate out of [0, 1]");
    }
    if (label_noise < 0.0 || label_noise >= 0.5) {
        throw std::invalid_argument("synth spec: label_noise out of [0, 0.5)");
    }
}

SynthSpec default_spec() {
    SynthSpec s;
    s.num_classes = 5;
    s.keywords_per_class = 40;
    s.filler_pool = 160;
    s.len_min = 8;
    s.len_max = 24;
    s.keyword_rate = 0.5;
    s.label_noise = 0.10;
    return s;
}

namespace {

std::string class_label(int c) { return "c" + std::to_string(c); }

std::string keyword(int c, int j) {
    return "c" + std::to_string(c) + "w" + std::to_string(j);
}

std::string filler(int j) { return "f" + std::to_string(j); }

}  // namespace

RawCorpus generate(const SynthSpec& spec, int n_total) {
    spec.validate();
    if (n_total < spec.num_classes) {
        throw std::invalid_argument("generate: n_total below class count");
    }
    RawCorpus corpus;
    corpus.reserve(static_cast<size_t>(n_total));
    for (int i = 0; i < n_total; ++i) {
        auto rng = make_rng(spec.seed, "example", static_cast<uint64_t>(i));
        RawExample ex;
        const int true_class =
            static_cast<int>(uniform_below(rng, static_cast<uint64_t>(spec.num_classes)));
        const int len = uniform_int(rng, spec.len_min, spec.len_max);
        ex.tokens.reserve(static_cast<size_t>(len));
        for (int t = 0; t < len; ++t) {
            if (uniform_double(rng) < spec.keyword_rate) {
                ex.tokens.push_back(keyword(
                    true_class,
                    static_cast<int>(uniform_below(
                        rng, static_cast<uint64_t>(spec.keywords_per_class)))));
            } else {
                ex.tokens.push_back(filler(static_cast<int>(
                    uniform_below(rng, static_cast<uint64_t>(spec.filler_pool)))));
            }
        }
        int observed = true_class;
        if (spec.label_noise > 0.0 && uniform_double(rng) < spec.label_noise) {
            // flip to a uniformly random *other* class
            const int shift = 1 + static_cast<int>(uniform_below(
                                      rng, static_cast<uint64_t>(spec.num_classes - 1)));
            observed = (true_class + shift) % spec.num_classes;
        }
        ex.class_id = observed;
        ex.label = class_label(observed);
        corpus.push_back(std::move(ex));
    }
    return corpus;
}

SplitResult split(const RawCorpus& corpus, int n_labeled_per_class,
                  int n_unlabeled, int n_dev, uint64_t seed) {
    if (n_labeled_per_class < 1 || n_unlabeled < 0 || n_dev < 0) {
        throw std::invalid_argument("split: bad partition sizes");
    }
    int num_classes = 0;
    for (const auto& ex : corpus) {
        if (ex.class_id < 0) {
            throw std::invalid_argument("split: corpus has unlabeled examples");
        }
        num_classes = std::max(num_classes, ex.class_id + 1);
    }

    std::vector<size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, "split");
    shuffle(order, rng);

    SplitResult out;
    std::vector<int> quota(static_cast<size_t>(num_classes),
                           n_labeled_per_class);
    std::vector<size_t> pool;
    for (size_t idx : order) {
        const auto& ex = corpus[idx];
        if (quota[static_cast<size_t>(ex.class_id)] > 0) {
            --quota[static_cast<size_t>(ex.class_id)];
            out.labeled.push_back(ex);
        } else {
            pool.push_back(idx);
        }
    }
    for (int q : quota) {
        if (q > 0) {
            throw std::invalid_argument(
                "split: not enough examples to balance the labeled set");
        }
    }
    if (pool.size() < static_cast<size_t>(n_unlabeled) + static_cast<size_t>(n_dev)) {
        throw std::invalid_argument("split: not enough examples for the requested partitions");
    }
    size_t at = 0;
    for (int i = 0; i < n_unlabeled; ++i) out.unlabeled.push_back(corpus[pool[at++]]);
    for (int i = 0; i < n_dev; ++i) out.dev.push_back(corpus[pool[at++]]);
    while (at < pool.size()) out.test.push_back(corpus[pool[at++]]);
    return out;
}

int LabelMap::id_for(const std::string& name) {
    for (size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return static_cast<int>(i);
    }
    names_.push_back(name);
    return static_cast<int>(names_.size()) - 1;
}

int LabelMap::find(const std::string& name) const {
    for (size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return static_cast<int>(i);
    }
    return -1;
}

const std::string& LabelMap::name(int id) const {
    if (id < 0 || id >= size()) {
        throw std::invalid_argument("label map: id out of range");
    }
    return names_[static_cast<size_t>(id)];
}

LabelMap LabelMap::from_names(const std::vector<std::string>& names) {
    LabelMap m;
    for (const auto& n : names) m.id_for(n);
    return m;
}

RawCorpus load_tsv(const std::string& path, LabelMap& labels) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open data file: " + path);
    }
    RawCorpus corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": missing tab separator");
        }
        RawExample ex;
        ex.label = line.substr(0, tab);
        if (ex.label.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": empty label");
        }
        ex.tokens = split_whitespace(line.substr(tab + 1));
        if (ex.tokens.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": empty text");
        }
        ex.class_id = labels.id_for(ex.label);
        corpus.push_back(std::move(ex));
    }
    return corpus;
}

void save_tsv(const RawCorpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open data file for writing: " + path);
    }
    for (const auto& ex : corpus) {
        out << ex.label << '\t';
        for (size_t i = 0; i < ex.tokens.size(); ++i) {
            if (i) out << ' ';
            out << ex.tokens[i];
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing data file: " + path);
    }
}

std::vector<std::string> corpus_texts(const RawCorpus& corpus) {
    std::vector<std::string> out;
    out.reserve(corpus.size());
    for (const auto& ex : corpus) {
        std::string line;
        for (size_t i = 0; i < ex.tokens.size(); ++i) {
            if (i) line += ' ';
            line += ex.tokens[i];
        }
        out.push_back(std::move(line));
    }
    return out;
}

std::vector<LabeledExample> encode_corpus(const RawCorpus& corpus,
                                          const Vocab& vocab) {
    std::vector<LabeledExample> out;
    out.reserve(corpus.size());
    for (const auto& ex : corpus) {
        LabeledExample le;
        le.label = ex.class_id;
        Sentence s;
        for (const auto& tok : ex.tokens) {
            s.ids.push_back(vocab.id(tok));
        }
        le.sentence = std::move(s);
        out.push_back(std::move(le));
    }
    return out;
}

std::vector<Sentence> encode_sentences(const RawCorpus& corpus,
                                       const Vocab& vocab) {
    std::vector<Sentence> out;
    out.reserve(corpus.size());
    for (const auto& ex : corpus) {
        Sentence s;
        for (const auto& tok : ex.tokens) {
            s.ids.push_back(vocab.id(tok));
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace vatd
