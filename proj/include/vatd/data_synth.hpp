#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vatd/text.hpp"

namespace vatd {

// Synthetic topic-classification task: each class owns a disjoint keyword
// pool, every class shares one filler pool, and difficulty is set by how
// often a token is class-diagnostic (keyword_rate) plus label noise.
struct SynthSpec {
    int num_classes = 5;
    int keywords_per_class = 40;
    int filler_pool = 160;
    int len_min = 8;
    int len_max = 24;
    double keyword_rate = 0.3;
    double label_noise = 0.05;
    uint64_t seed = 0;

    void validate() const;
};

// The frozen benchmark configuration the experiment commands and tests use.
SynthSpec default_spec();

struct RawExample {
    std::string label;
    int class_id = -1;
    std::vector<std::string> tokens;
};

using RawCorpus = std::vector<RawExample>;

RawCorpus generate(const SynthSpec& spec, int n_total);

struct SplitResult {
    RawCorpus labeled;
    RawCorpus unlabeled;
    RawCorpus dev;
    RawCorpus test;
};

// Balanced labeled partition first (n per class), the rest of the shuffled
// pool feeds unlabeled, dev, and finally test.
SplitResult split(const RawCorpus& corpus, int n_labeled_per_class,
                  int n_unlabeled, int n_dev, uint64_t seed);

// Dense class ids in first-seen order.
class LabelMap {
public:
    int id_for(const std::string& name);        // inserts when missing
    int find(const std::string& name) const;    // -1 when missing
    const std::string& name(int id) const;
    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

    static LabelMap from_names(const std::vector<std::string>& names);

private:
    std::vector<std::string> names_;
};

// "label<TAB>text" per line; labels become dense ids via the shared map.
RawCorpus load_tsv(const std::string& path, LabelMap& labels);
void save_tsv(const RawCorpus& corpus, const std::string& path);

std::vector<std::string> corpus_texts(const RawCorpus& corpus);

struct LabeledExample {
    Sentence sentence;
    int label = -1;
};

std::vector<LabeledExample> encode_corpus(const RawCorpus& corpus,
                                          const Vocab& vocab);
std::vector<Sentence> encode_sentences(const RawCorpus& corpus,
                                       const Vocab& vocab);

}  // namespace vatd
