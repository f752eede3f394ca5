#include "vatd/mlm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vatd/checkpoint.hpp"
#include "vatd/optim.hpp"
#include "vatd/rng.hpp"

namespace vatd {

namespace {

void fill_uniform(std::mt19937_64& rng, Vec& v, double s) {
    for (double& x : v) {
        x = (2.0 * uniform_double(rng) - 1.0) * s;
    }
}

// context token ids around m: m-w..m-1, m+1..m+w, pad outside the sentence
void context_ids(const Sentence& s, int m, int w, std::vector<int32_t>& out) {
    out.clear();
    for (int off = -w; off <= w; ++off) {
        if (off == 0) continue;
        const int j = m + off;
        out.push_back(j >= 0 && j < s.length() ? s.ids[static_cast<size_t>(j)]
                                               : Vocab::kPadId);
    }
}

struct MLMTrace {
    std::vector<int32_t> ctx;
    Vec z;       // concatenated context embeddings
    Vec hidden_pre;
    Vec hidden;
    Distribution probs;
};

MLMTrace mlm_forward(const MLMParams& mlm, const Sentence& s, int m) {
    if (m < 0 || m >= s.length()) {
        throw std::invalid_argument("mlm: position out of range");
    }
    for (int32_t id : s.ids) {
        if (id < 0 || id >= mlm.vocab_size) {
            throw std::invalid_argument("mlm: token id out of range");
        }
    }
    MLMTrace tr;
    context_ids(s, m, mlm.w, tr.ctx);
    tr.z.resize(static_cast<size_t>(2 * mlm.w) * mlm.d_m);
    for (size_t slot = 0; slot < tr.ctx.size(); ++slot) {
        const double* e = mlm.E_m[tr.ctx[slot]];
        std::copy(e, e + mlm.d_m, tr.z.begin() + static_cast<ptrdiff_t>(slot * mlm.d_m));
    }
    tr.hidden_pre.resize(static_cast<size_t>(mlm.h_m));
    tr.hidden.resize(static_cast<size_t>(mlm.h_m));
    for (int i = 0; i < mlm.h_m; ++i) {
        const double v = dot(mlm.W_c[i], tr.z.data(), static_cast<int>(tr.z.size())) +
                         mlm.b_c[static_cast<size_t>(i)];
        tr.hidden_pre[static_cast<size_t>(i)] = v;
        tr.hidden[static_cast<size_t>(i)] = v > 0.0 ? v : 0.0;
    }
    Vec logits(static_cast<size_t>(mlm.vocab_size));
    for (int v = 0; v < mlm.vocab_size; ++v) {
        logits[static_cast<size_t>(v)] =
            dot(mlm.W_o[v], tr.hidden.data(), mlm.h_m) + mlm.b_o[static_cast<size_t>(v)];
    }
    tr.probs = softmax(logits);
    return tr;
}

struct MLMGradients {
    Matrix E_m;
    Matrix W_c;
    Vec b_c;
    Matrix W_o;
    Vec b_o;

    explicit MLMGradients(const MLMParams& p)
        : E_m(p.vocab_size, p.d_m),
          W_c(p.h_m, 2 * p.w * p.d_m),
          b_c(static_cast<size_t>(p.h_m), 0.0),
          W_o(p.vocab_size, p.h_m),
          b_o(static_cast<size_t>(p.vocab_size), 0.0) {}

    std::vector<std::span<const double>> tensors() const {
        return {E_m.a, W_c.a, b_c, W_o.a, b_o};
    }
    void zero() {
        for (auto* v : {&E_m.a, &W_c.a, &b_c, &W_o.a, &b_o}) {
            std::fill(v->begin(), v->end(), 0.0);
        }
    }
};

// accumulates gradients of weight * CE(target | context); returns the loss
double mlm_backward(const MLMParams& mlm, const Sentence& s, int m,
                    double weight, MLMGradients& g) {
    MLMTrace tr = mlm_forward(mlm, s, m);
    const int32_t target = s.ids[static_cast<size_t>(m)];
    const double loss =
        -std::log(std::max(tr.probs[target], kProbFloor));

    Vec dlogits(static_cast<size_t>(mlm.vocab_size));
    for (int v = 0; v < mlm.vocab_size; ++v) {
        dlogits[static_cast<size_t>(v)] = tr.probs[v] * weight;
    }
    dlogits[static_cast<size_t>(target)] -= weight;

    add_outer(g.W_o, dlogits, tr.hidden, 1.0);
    axpy(g.b_o, dlogits, 1.0);
    Vec dhidden;
    matvec_t(mlm.W_o, dlogits, dhidden);
    Vec dhidden_pre(static_cast<size_t>(mlm.h_m));
    for (int i = 0; i < mlm.h_m; ++i) {
        dhidden_pre[static_cast<size_t>(i)] =
            tr.hidden_pre[static_cast<size_t>(i)] > 0.0
                ? dhidden[static_cast<size_t>(i)]
                : 0.0;
    }
    add_outer(g.W_c, dhidden_pre, tr.z, 1.0);
    axpy(g.b_c, dhidden_pre, 1.0);
    Vec dz;
    matvec_t(mlm.W_c, dhidden_pre, dz);
    for (size_t slot = 0; slot < tr.ctx.size(); ++slot) {
        double* row = g.E_m[tr.ctx[slot]];
        const double* src = dz.data() + slot * static_cast<size_t>(mlm.d_m);
        for (int c = 0; c < mlm.d_m; ++c) {
            row[c] += src[c];
        }
    }
    return loss;
}

}  // namespace

std::vector<std::span<double>> MLMParams::tensors() {
    return {E_m.a, W_c.a, b_c, W_o.a, b_o};
}

std::vector<std::span<const double>> MLMParams::tensors() const {
    return {E_m.a, W_c.a, b_c, W_o.a, b_o};
}

size_t MLMParams::parameter_count() const {
    size_t n = 0;
    for (const auto& t : tensors()) n += t.size();
    return n;
}

MLMParams init_mlm(int vocab_size, const MLMTrainConfig& cfg) {
    if (vocab_size < 2 || cfg.d_m < 1 || cfg.h_m < 1 || cfg.window < 1) {
        throw std::invalid_argument("init_mlm: dims must be positive");
    }
    MLMParams p;
    p.vocab_size = vocab_size;
    p.d_m = cfg.d_m;
    p.h_m = cfg.h_m;
    p.w = cfg.window;
    p.seed = cfg.seed;
    p.E_m = Matrix(vocab_size, cfg.d_m);
    p.W_c = Matrix(cfg.h_m, 2 * cfg.window * cfg.d_m);
    p.b_c.assign(static_cast<size_t>(cfg.h_m), 0.0);
    p.W_o = Matrix(vocab_size, cfg.h_m);
    p.b_o.assign(static_cast<size_t>(vocab_size), 0.0);

    auto rng = make_rng(cfg.seed, "mlm-init");
    const int zin = 2 * cfg.window * cfg.d_m;
    fill_uniform(rng, p.E_m.a, std::sqrt(6.0 / (vocab_size + cfg.d_m)));
    fill_uniform(rng, p.W_c.a, std::sqrt(6.0 / (zin + cfg.h_m)));
    fill_uniform(rng, p.W_o.a, std::sqrt(6.0 / (cfg.h_m + vocab_size)));
    return p;
}

MLMParams train_mlm(const std::vector<Sentence>& corpus, int vocab_size,
                    const MLMTrainConfig& cfg,
                    std::vector<double>* epoch_losses) {
    if (corpus.empty()) {
        throw std::invalid_argument("train_mlm: empty corpus");
    }
    if (cfg.epochs < 1 || cfg.lr <= 0.0 || cfg.batch_size < 1) {
        throw std::invalid_argument("train_mlm: bad training config");
    }
    MLMParams mlm = init_mlm(vocab_size, cfg);

    std::vector<std::pair<int, int>> examples;  // (sentence index, position)
    for (size_t i = 0; i < corpus.size(); ++i) {
        for (int m = 0; m < corpus[i].length(); ++m) {
            examples.emplace_back(static_cast<int>(i), m);
        }
    }

    AdamState state(mlm.parameter_count());
    MLMGradients grads(mlm);
    auto rng = make_rng(cfg.seed, "mlm-data");
    if (epoch_losses) epoch_losses->clear();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(examples, rng);
        double epoch_loss = 0.0;
        size_t done = 0;
        while (done < examples.size()) {
            const size_t take = std::min(static_cast<size_t>(cfg.batch_size),
                                         examples.size() - done);
            grads.zero();
            const double weight = 1.0 / static_cast<double>(take);
            for (size_t j = 0; j < take; ++j) {
                const auto& [si, m] = examples[done + j];
                epoch_loss +=
                    mlm_backward(mlm, corpus[static_cast<size_t>(si)], m,
                                 weight, grads);
            }
            auto params = mlm.tensors();
            adam_update(params, grads.tensors(), state, cfg.lr);
            done += take;
        }
        if (epoch_losses) {
            epoch_losses->push_back(epoch_loss /
                                    static_cast<double>(examples.size()));
        }
    }
    return mlm;
}

Distribution mlm_predict(const MLMParams& mlm, const Sentence& sentence,
                         int m) {
    return mlm_forward(mlm, sentence, m).probs;
}

double mlm_log_prob(const MLMParams& mlm, const Sentence& sentence, int m,
                    int32_t token) {
    if (token < 0 || token >= mlm.vocab_size) {
        throw std::invalid_argument("mlm_log_prob: token id out of range");
    }
    Distribution p = mlm_predict(mlm, sentence, m);
    return std::log(std::max(p[token], kProbFloor));
}

CandidateSet top_k_candidates(const MLMParams& mlm, const Sentence& sentence,
                              int m, int k, int32_t exclude) {
    if (k < 1) {
        throw std::invalid_argument("top_k_candidates: k must be >= 1");
    }
    if (k >= mlm.vocab_size) {
        throw std::invalid_argument("top_k_candidates: k >= vocabulary size");
    }
    Distribution p = mlm_predict(mlm, sentence, m);

    std::vector<int32_t> ids;
    ids.reserve(static_cast<size_t>(mlm.vocab_size));
    for (int32_t v = 0; v < mlm.vocab_size; ++v) {
        if (v == exclude || v == Vocab::kPadId) continue;
        ids.push_back(v);
    }
    const size_t kk = std::min(static_cast<size_t>(k), ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<ptrdiff_t>(kk),
                      ids.end(), [&](int32_t a, int32_t b) {
                          if (p[a] != p[b]) return p[a] > p[b];
                          return a < b;
                      });
    ids.resize(kk);

    CandidateSet out;
    out.position = m;
    out.token_ids = std::move(ids);
    out.log_probs.reserve(kk);
    for (int32_t v : out.token_ids) {
        out.log_probs.push_back(std::log(std::max(p[v], kProbFloor)));
    }
    return out;
}

double pseudo_perplexity(const MLMParams& mlm, const Sentence& sentence) {
    if (sentence.length() < 1) {
        throw std::invalid_argument("pseudo_perplexity: empty sentence");
    }
    double nll = 0.0;
    for (int m = 0; m < sentence.length(); ++m) {
        nll -= mlm_log_prob(mlm, sentence, m, sentence.ids[static_cast<size_t>(m)]);
    }
    return std::exp(nll / sentence.length());
}

void save_mlm(const MLMParams& mlm, const std::string& path) {
    nlohmann::json meta;
    meta["kind"] = "mlm";
    meta["vocab_size"] = mlm.vocab_size;
    meta["d_m"] = mlm.d_m;
    meta["h_m"] = mlm.h_m;
    meta["w"] = mlm.w;
    meta["seed"] = std::to_string(mlm.seed);
    std::vector<std::span<const double>> tensors;
    for (const auto& t : mlm.tensors()) tensors.push_back(t);
    write_checkpoint(path, meta, tensors);
}

MLMParams load_mlm(const std::string& path) {
    RawCheckpoint raw = read_checkpoint(path);
    if (!raw.meta.contains("kind") || raw.meta["kind"] != "mlm") {
        throw std::runtime_error("incompatible checkpoint: not an mlm");
    }
    MLMParams p;
    try {
        p.vocab_size = raw.meta.at("vocab_size").get<int>();
        p.d_m = raw.meta.at("d_m").get<int>();
        p.h_m = raw.meta.at("h_m").get<int>();
        p.w = raw.meta.at("w").get<int>();
        p.seed = std::stoull(raw.meta.at("seed").get<std::string>());
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error("incompatible checkpoint: bad metadata");
    }
    if (p.vocab_size < 2 || p.d_m < 1 || p.h_m < 1 || p.w < 1) {
        throw std::runtime_error("incompatible checkpoint: bad dims");
    }
    p.E_m = Matrix(p.vocab_size, p.d_m);
    p.W_c = Matrix(p.h_m, 2 * p.w * p.d_m);
    p.b_c.assign(static_cast<size_t>(p.h_m), 0.0);
    p.W_o = Matrix(p.vocab_size, p.h_m);
    p.b_o.assign(static_cast<size_t>(p.vocab_size), 0.0);
    if (raw.data.size() != p.parameter_count()) {
        throw std::runtime_error("incompatible checkpoint: payload size");
    }
    size_t off = 0;
    for (auto t : p.tensors()) {
        std::copy(raw.data.begin() + static_cast<ptrdiff_t>(off),
                  raw.data.begin() + static_cast<ptrdiff_t>(off + t.size()),
                  t.begin());
        off += t.size();
    }
    return p;
}

}  // namespace vatd
