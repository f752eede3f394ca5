#include "vatd/classifier.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vatd/checkpoint.hpp"
#include "vatd/optim.hpp"
#include "vatd/rng.hpp"

namespace vatd {

namespace {

std::atomic<uint64_t> g_backward_count{0};

void fill_uniform(std::mt19937_64& rng, Vec& v, double s) {
    for (double& x : v) {
        x = (2.0 * uniform_double(rng) - 1.0) * s;
    }
}

double glorot(int fan_in, int fan_out) {
    return std::sqrt(6.0 / (fan_in + fan_out));
}

}  // namespace

std::vector<std::span<double>> ClassifierParams::tensors() {
    return {E.a, W_a.a, b_a, v_a, W_1.a, b_1, W_2.a, b_2};
}

std::vector<std::span<const double>> ClassifierParams::tensors() const {
    return {E.a, W_a.a, b_a, v_a, W_1.a, b_1, W_2.a, b_2};
}

size_t ClassifierParams::parameter_count() const {
    size_t n = 0;
    for (const auto& t : tensors()) n += t.size();
    return n;
}

ClassifierGradients::ClassifierGradients(const ClassifierParams& p)
    : E(p.vocab_size, p.d),
      W_a(p.d_a, p.d),
      b_a(static_cast<size_t>(p.d_a), 0.0),
      v_a(static_cast<size_t>(p.d_a), 0.0),
      W_1(p.h, p.d),
      b_1(static_cast<size_t>(p.h), 0.0),
      W_2(p.C, p.h),
      b_2(static_cast<size_t>(p.C), 0.0) {}

std::vector<std::span<const double>> ClassifierGradients::tensors() const {
    return {E.a, W_a.a, b_a, v_a, W_1.a, b_1, W_2.a, b_2};
}

void ClassifierGradients::zero() {
    for (auto* v : {&E.a, &W_a.a, &b_a, &v_a, &W_1.a, &b_1, &W_2.a, &b_2}) {
        std::fill(v->begin(), v->end(), 0.0);
    }
}

ClassifierParams init_classifier(int vocab_size, int d, int d_a, int h, int C,
                                 uint64_t seed) {
    if (vocab_size < 2 || d < 1 || d_a < 1 || h < 1 || C < 1) {
        throw std::invalid_argument("init_classifier: dims must be positive");
    }
    ClassifierParams p;
    p.vocab_size = vocab_size;
    p.d = d;
    p.d_a = d_a;
    p.h = h;
    p.C = C;
    p.seed = seed;
    p.E = Matrix(vocab_size, d);
    p.W_a = Matrix(d_a, d);
    p.b_a.assign(static_cast<size_t>(d_a), 0.0);
    p.v_a.assign(static_cast<size_t>(d_a), 0.0);
    p.W_1 = Matrix(h, d);
    p.b_1.assign(static_cast<size_t>(h), 0.0);
    p.W_2 = Matrix(C, h);
    p.b_2.assign(static_cast<size_t>(C), 0.0);

    auto rng = make_rng(seed, "classifier-init");
    fill_uniform(rng, p.E.a, glorot(vocab_size, d));
    fill_uniform(rng, p.W_a.a, glorot(d, d_a));
    fill_uniform(rng, p.v_a, glorot(d_a, 1));
    fill_uniform(rng, p.W_1.a, glorot(d, h));
    fill_uniform(rng, p.W_2.a, glorot(h, C));
    for (int c = 0; c < d; ++c) {
        p.E[Vocab::kPadId][c] = 0.0;
    }
    return p;
}

namespace {

ForwardTrace forward_impl(const ClassifierParams& params,
                          const std::vector<const double*>& emb,
                          const std::vector<bool>& is_pad) {
    const int M = static_cast<int>(emb.size());
    ForwardTrace tr;
    tr.is_pad = is_pad;
    tr.alpha.assign(static_cast<size_t>(M), 0.0);
    tr.tanh_act.resize(static_cast<size_t>(M));

    // attention scores, pads masked out
    Vec scores(static_cast<size_t>(M),
               -std::numeric_limits<double>::infinity());
    int real = 0;
    for (int m = 0; m < M; ++m) {
        if (is_pad[static_cast<size_t>(m)]) continue;
        ++real;
        Vec pre(static_cast<size_t>(params.d_a));
        for (int i = 0; i < params.d_a; ++i) {
            pre[static_cast<size_t>(i)] =
                dot(params.W_a[i], emb[static_cast<size_t>(m)], params.d) +
                params.b_a[static_cast<size_t>(i)];
        }
        Vec& t = tr.tanh_act[static_cast<size_t>(m)];
        t.resize(static_cast<size_t>(params.d_a));
        for (int i = 0; i < params.d_a; ++i) {
            t[static_cast<size_t>(i)] = std::tanh(pre[static_cast<size_t>(i)]);
        }
        scores[static_cast<size_t>(m)] = dot(params.v_a, t);
    }
    if (real == 0) {
        throw std::invalid_argument("sentence has no real tokens");
    }

    double mx = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < M; ++m) {
        if (!is_pad[static_cast<size_t>(m)]) {
            mx = std::max(mx, scores[static_cast<size_t>(m)]);
        }
    }
    double z = 0.0;
    for (int m = 0; m < M; ++m) {
        if (is_pad[static_cast<size_t>(m)]) continue;
        tr.alpha[static_cast<size_t>(m)] =
            std::exp(scores[static_cast<size_t>(m)] - mx);
        z += tr.alpha[static_cast<size_t>(m)];
    }
    for (int m = 0; m < M; ++m) {
        tr.alpha[static_cast<size_t>(m)] /= z;
    }

    tr.pooled.assign(static_cast<size_t>(params.d), 0.0);
    for (int m = 0; m < M; ++m) {
        const double am = tr.alpha[static_cast<size_t>(m)];
        if (am == 0.0) continue;
        const double* e = emb[static_cast<size_t>(m)];
        for (int c = 0; c < params.d; ++c) {
            tr.pooled[static_cast<size_t>(c)] += am * e[c];
        }
    }

    tr.hidden_pre.resize(static_cast<size_t>(params.h));
    tr.hidden.resize(static_cast<size_t>(params.h));
    for (int i = 0; i < params.h; ++i) {
        const double v = dot(params.W_1[i], tr.pooled.data(), params.d) +
                         params.b_1[static_cast<size_t>(i)];
        tr.hidden_pre[static_cast<size_t>(i)] = v;
        tr.hidden[static_cast<size_t>(i)] = v > 0.0 ? v : 0.0;
    }

    tr.logits.resize(static_cast<size_t>(params.C));
    for (int i = 0; i < params.C; ++i) {
        tr.logits[static_cast<size_t>(i)] =
            dot(params.W_2[i], tr.hidden.data(), params.h) +
            params.b_2[static_cast<size_t>(i)];
    }
    tr.probs = softmax(tr.logits);
    return tr;
}

std::vector<const double*> lookup(const ClassifierParams& params,
                                  const Sentence& sentence,
                                  std::vector<bool>& is_pad) {
    if (sentence.ids.empty()) {
        throw std::invalid_argument("classifier: empty sentence");
    }
    std::vector<const double*> emb;
    emb.reserve(sentence.ids.size());
    is_pad.clear();
    for (int32_t id : sentence.ids) {
        if (id < 0 || id >= params.vocab_size) {
            throw std::invalid_argument("classifier: token id out of range");
        }
        emb.push_back(params.E[id]);
        is_pad.push_back(id == Vocab::kPadId);
    }
    return emb;
}

}  // namespace

ForwardTrace classifier_forward(const ClassifierParams& params,
                                const Sentence& sentence) {
    std::vector<bool> is_pad;
    auto emb = lookup(params, sentence, is_pad);
    return forward_impl(params, emb, is_pad);
}

ForwardTrace classifier_forward_embedded(const ClassifierParams& params,
                                         const std::vector<Vec>& embedded,
                                         const std::vector<bool>& is_pad) {
    if (embedded.size() != is_pad.size()) {
        throw std::invalid_argument("forward_embedded: length mismatch");
    }
    std::vector<const double*> emb;
    emb.reserve(embedded.size());
    for (const auto& e : embedded) {
        if (static_cast<int>(e.size()) != params.d) {
            throw std::invalid_argument("forward_embedded: bad embedding width");
        }
        emb.push_back(e.data());
    }
    return forward_impl(params, emb, is_pad);
}

double classifier_backward(const ClassifierParams& params,
                           const Sentence& sentence,
                           const Distribution& target, double weight,
                           ClassifierGradients* grads,
                           std::vector<Vec>* input_grads) {
    if (target.size() != params.C) {
        throw std::invalid_argument("classifier_backward: target dimension");
    }
    std::vector<bool> is_pad;
    auto emb = lookup(params, sentence, is_pad);
    ForwardTrace tr = forward_impl(params, emb, is_pad);
    g_backward_count.fetch_add(1, std::memory_order_relaxed);

    const int M = sentence.length();
    const double loss = kl_divergence(target, tr.probs);

    Vec dlogits(static_cast<size_t>(params.C));
    for (int i = 0; i < params.C; ++i) {
        dlogits[static_cast<size_t>(i)] =
            (tr.probs[i] - target[i]) * weight;
    }

    if (grads) {
        add_outer(grads->W_2, dlogits, tr.hidden, 1.0);
        axpy(grads->b_2, dlogits, 1.0);
    }
    Vec dhidden;
    matvec_t(params.W_2, dlogits, dhidden);
    Vec dhidden_pre(static_cast<size_t>(params.h));
    for (int i = 0; i < params.h; ++i) {
        dhidden_pre[static_cast<size_t>(i)] =
            tr.hidden_pre[static_cast<size_t>(i)] > 0.0
                ? dhidden[static_cast<size_t>(i)]
                : 0.0;
    }
    if (grads) {
        add_outer(grads->W_1, dhidden_pre, tr.pooled, 1.0);
        axpy(grads->b_1, dhidden_pre, 1.0);
    }
    Vec dpooled;
    matvec_t(params.W_1, dhidden_pre, dpooled);

    // backward through alpha = softmax(scores) over real positions
    Vec dalpha(static_cast<size_t>(M), 0.0);
    double sum_ad = 0.0;
    for (int m = 0; m < M; ++m) {
        if (is_pad[static_cast<size_t>(m)]) continue;
        dalpha[static_cast<size_t>(m)] =
            dot(emb[static_cast<size_t>(m)], dpooled.data(), params.d);
        sum_ad += tr.alpha[static_cast<size_t>(m)] *
                  dalpha[static_cast<size_t>(m)];
    }

    if (input_grads) {
        input_grads->assign(static_cast<size_t>(M),
                            Vec(static_cast<size_t>(params.d), 0.0));
    }

    Vec dpre(static_cast<size_t>(params.d_a));
    for (int m = 0; m < M; ++m) {
        if (is_pad[static_cast<size_t>(m)]) continue;
        const double am = tr.alpha[static_cast<size_t>(m)];
        const double da =
            am * (dalpha[static_cast<size_t>(m)] - sum_ad);  // d(score_m)
        const Vec& t = tr.tanh_act[static_cast<size_t>(m)];

        for (int i = 0; i < params.d_a; ++i) {
            const double ti = t[static_cast<size_t>(i)];
            dpre[static_cast<size_t>(i)] =
                da * params.v_a[static_cast<size_t>(i)] * (1.0 - ti * ti);
        }

        Vec de(static_cast<size_t>(params.d));
        const double* e = emb[static_cast<size_t>(m)];
        for (int c = 0; c < params.d; ++c) {
            double v = am * dpooled[static_cast<size_t>(c)];
            for (int i = 0; i < params.d_a; ++i) {
                v += params.W_a[i][c] * dpre[static_cast<size_t>(i)];
            }
            de[static_cast<size_t>(c)] = v;
        }

        if (grads) {
            for (int i = 0; i < params.d_a; ++i) {
                const double di = dpre[static_cast<size_t>(i)];
                grads->b_a[static_cast<size_t>(i)] += di;
                grads->v_a[static_cast<size_t>(i)] +=
                    da * t[static_cast<size_t>(i)];
                double* row = grads->W_a[i];
                for (int c = 0; c < params.d; ++c) {
                    row[c] += di * e[c];
                }
            }
            double* erow = grads->E[sentence.ids[static_cast<size_t>(m)]];
            for (int c = 0; c < params.d; ++c) {
                erow[c] += de[static_cast<size_t>(c)];
            }
        }
        if (input_grads) {
            (*input_grads)[static_cast<size_t>(m)] = std::move(de);
        }
    }
    return loss;
}

std::vector<Vec> input_gradients(const ClassifierParams& params,
                                 const Sentence& sentence,
                                 const Distribution& target) {
    std::vector<Vec> g;
    classifier_backward(params, sentence, target, 1.0, nullptr, &g);
    return g;
}

uint64_t backward_pass_count() {
    return g_backward_count.load(std::memory_order_relaxed);
}

void reset_backward_pass_count() {
    g_backward_count.store(0, std::memory_order_relaxed);
}

void classifier_train_step(ClassifierParams& params,
                           const ClassifierGradients& grads, AdamState& state,
                           double lr) {
    for (const auto& t : grads.tensors()) {
        for (double v : t) {
            if (!std::isfinite(v)) {
                throw std::runtime_error("train_step: non-finite gradient");
            }
        }
    }
    auto p = params.tensors();
    adam_update(p, grads.tensors(), state, lr);
    for (int c = 0; c < params.d; ++c) {
        params.E[Vocab::kPadId][c] = 0.0;
    }
}

void save_classifier(const ClassifierParams& params, const std::string& path,
                     const std::vector<std::string>& labels,
                     const std::string& config_hash) {
    nlohmann::json meta;
    meta["kind"] = "classifier";
    meta["vocab_size"] = params.vocab_size;
    meta["d"] = params.d;
    meta["d_a"] = params.d_a;
    meta["h"] = params.h;
    meta["C"] = params.C;
    // decimal string: uint64 does not survive a round trip through JSON
    // numbers intact
    meta["seed"] = std::to_string(params.seed);
    meta["labels"] = labels;
    meta["config_hash"] = config_hash;
    std::vector<std::span<const double>> tensors;
    for (const auto& t : params.tensors()) tensors.push_back(t);
    write_checkpoint(path, meta, tensors);
}

ClassifierCheckpoint load_classifier(const std::string& path) {
    RawCheckpoint raw = read_checkpoint(path);
    if (!raw.meta.contains("kind") || raw.meta["kind"] != "classifier") {
        throw std::runtime_error("incompatible checkpoint: not a classifier");
    }
    ClassifierCheckpoint out;
    ClassifierParams& p = out.params;
    try {
        p.vocab_size = raw.meta.at("vocab_size").get<int>();
        p.d = raw.meta.at("d").get<int>();
        p.d_a = raw.meta.at("d_a").get<int>();
        p.h = raw.meta.at("h").get<int>();
        p.C = raw.meta.at("C").get<int>();
        p.seed = std::stoull(raw.meta.at("seed").get<std::string>());
        if (raw.meta.contains("labels")) {
            out.labels = raw.meta["labels"].get<std::vector<std::string>>();
        }
        if (raw.meta.contains("config_hash")) {
            out.config_hash = raw.meta["config_hash"].get<std::string>();
        }
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error("incompatible checkpoint: bad metadata");
    }
    if (p.vocab_size < 2 || p.d < 1 || p.d_a < 1 || p.h < 1 || p.C < 1) {
        throw std::runtime_error("incompatible checkpoint: bad dims");
    }
    p.E = Matrix(p.vocab_size, p.d);
    p.W_a = Matrix(p.d_a, p.d);
    p.b_a.assign(static_cast<size_t>(p.d_a), 0.0);
    p.v_a.assign(static_cast<size_t>(p.d_a), 0.0);
    p.W_1 = Matrix(p.h, p.d);
    p.b_1.assign(static_cast<size_t>(p.h), 0.0);
    p.W_2 = Matrix(p.C, p.h);
    p.b_2.assign(static_cast<size_t>(p.C), 0.0);

    size_t expected = p.parameter_count();
    if (raw.data.size() != expected) {
        throw std::runtime_error("incompatible checkpoint: payload size");
    }
    size_t off = 0;
    for (auto t : p.tensors()) {
        std::copy(raw.data.begin() + static_cast<ptrdiff_t>(off),
                  raw.data.begin() + static_cast<ptrdiff_t>(off + t.size()),
                  t.begin());
        off += t.size();
    }
    return out;
}

}  // namespace vatd
