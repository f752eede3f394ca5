#include "vatd/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vatd {

Vocab::Vocab() {
    push("<pad>");
    push("<unk>");
}

void Vocab::push(const std::string& token) {
    index_[token] = static_cast<int32_t>(tokens_.size());
    tokens_.push_back(token);
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
    Vocab v;
    for (const auto& t : tokens) {
        if (t.empty()) {
            throw std::invalid_argument("vocab: empty token");
        }
        if (v.index_.count(t)) {
            throw std::invalid_argument("vocab: duplicate token '" + t + "'");
        }
        v.push(t);
    }
    return v;
}

const std::string& Vocab::token(int32_t id) const {
    if (id < 0 || id >= static_cast<int32_t>(tokens_.size())) {
        throw std::invalid_argument("vocab: token id out of range");
    }
    return tokens_[static_cast<size_t>(id)];
}

int32_t Vocab::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnkId : it->second;
}

bool Vocab::contains(const std::string& token) const {
    return index_.count(token) != 0;
}

std::vector<std::string> split_whitespace(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

Sentence Vocab::encode(const std::string& text) const {
    Sentence s;
    for (const auto& tok : split_whitespace(text)) {
        s.ids.push_back(id(tok));
    }
    if (s.ids.empty()) {
        throw std::invalid_argument("encode: empty sentence");
    }
    return s;
}

std::string Vocab::decode(const Sentence& s) const {
    std::string out;
    for (size_t i = 0; i < s.ids.size(); ++i) {
        if (i) out += ' ';
        out += token(s.ids[i]);
    }
    return out;
}

Vocab build_vocab(const std::vector<std::string>& corpus, int min_freq,
                  int max_size) {
    std::unordered_map<std::string, int64_t> freq;
    for (const auto& line : corpus) {
        for (const auto& tok : split_whitespace(line)) {
            ++freq[tok];
        }
    }
    std::vector<std::pair<std::string, int64_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> kept;
    for (const auto& [tok, n] : ranked) {
        if (n < min_freq) break;
        if (max_size > 0 && static_cast<int>(kept.size()) + 2 >= max_size) break;
        kept.push_back(tok);
    }
    return Vocab::from_tokens(kept);
}

void save_vocab(const Vocab& v, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open vocab file for writing: " + path);
    }
    for (int i = 0; i < v.size(); ++i) {
        out << v.token(i) << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing vocab file: " + path);
    }
}

Vocab load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open vocab file: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    if (lines.size() < 2 || lines[0] != "<pad>" || lines[1] != "<unk>") {
        throw std::runtime_error("malformed vocab file: " + path);
    }
    return Vocab::from_tokens({lines.begin() + 2, lines.end()});
}

int hamming(const Sentence& a, const Sentence& b) {
    if (a.ids.size() != b.ids.size()) {
        throw std::invalid_argument("hamming: length mismatch");
    }
    int d = 0;
    for (size_t i = 0; i < a.ids.size(); ++i) {
        d += a.ids[i] != b.ids[i];
    }
    return d;
}

int perturbation_budget(int length, double tau) {
    if (length <= 0) {
        throw std::invalid_argument("perturbation_budget: non-positive length");
    }
    if (tau < 0.0 || tau > 1.0) {
        throw std::invalid_argument("perturbation_budget: tau out of [0, 1]");
    }
    return std::max(1, static_cast<int>(std::floor(tau * length)));
}

}  // namespace vatd
