#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace vatd {

struct Sentence {
    std::vector<int32_t> ids;

    int length() const { return static_cast<int>(ids.size()); }
    bool operator==(const Sentence&) const = default;
};

// Token inventory. Ids 0 and 1 are always <pad> and <unk>; the rest come
// from the corpus in frequency order.
class Vocab {
public:
    static constexpr int32_t kPadId = 0;
    static constexpr int32_t kUnkId = 1;

    Vocab();
    static Vocab from_tokens(const std::vector<std::string>& tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token(int32_t id) const;
    // returns kUnkId for unknown tokens
    int32_t id(const std::string& token) const;
    bool contains(const std::string& token) const;

    Sentence encode(const std::string& text) const;
    std::string decode(const Sentence& s) const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int32_t> index_;

    void push(const std::string& token);
};

// Frequency-ranked vocabulary over whitespace-split corpus lines. Ties in
// frequency break lexicographically. max_size counts the two reserved slots.
Vocab build_vocab(const std::vector<std::string>& corpus, int min_freq = 1,
                  int max_size = 0);

void save_vocab(const Vocab& v, const std::string& path);
Vocab load_vocab(const std::string& path);

std::vector<std::string> split_whitespace(const std::string& text);

// Hamming distance between equal-length sentences.
int hamming(const Sentence& a, const Sentence& b);

// max(1, floor(tau * length)): how many positions a perturbation may touch.
int perturbation_budget(int length, double tau);

}  // namespace vatd
