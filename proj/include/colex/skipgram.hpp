#pragma once
// Skip-gram with negative sampling over node sequences.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "colex/common.hpp"
#include "colex/embedding.hpp"
#include "colex/walk.hpp"

namespace colex {

struct TrainConfig {
    std::size_t dim = 200;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double learning_rate = 0.025;
    std::uint64_t seed = 1;
    unsigned threads = 1;  // > 1 enables unsynchronized parallel updates (not bit-reproducible)

    void validate() const {
        if (dim < 1 || window < 1 || negatives < 1 || epochs < 1) throw ValidationError("train config counts must be >= 1");
        if (!(learning_rate > 0)) throw ValidationError("learning_rate must be positive");
    }
};

template <class T>
T log_sigmoid(T x) {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <class T>
T sigmoid(T x) {
    if (x >= 0) return T(1) / (T(1) + std::exp(-x));
    T e = std::exp(x);
    return e / (T(1) + e);
}

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Loss for one (center, context, negatives) triple:
//   -log s(u_ctx . v) - sum_k log s(-u_k . v)
template <class T>
T sgns_loss(std::span<const T> center, std::span<const T> context, const std::vector<std::span<const T>>& negatives) {
    T loss = -log_sigmoid(dot(context, center));
    for (const auto& u : negatives) loss -= log_sigmoid(-dot(u, center));
    return loss;
}

// Gradients of sgns_loss with respect to every vector involved. Output spans
// must be sized like the inputs; they are overwritten. Returns the loss.
template <class T>
T sgns_gradient(std::span<const T> center, std::span<const T> context, const std::vector<std::span<const T>>& negatives,
                std::span<T> g_center, std::span<T> g_context, const std::vector<std::span<T>>& g_negatives) {
    const std::size_t dim = center.size();
    std::fill(g_center.begin(), g_center.end(), T(0));
    T s = dot(context, center);
    T loss = -log_sigmoid(s);
    T coef = sigmoid(s) - T(1);
    for (std::size_t i = 0; i < dim; ++i) {
        g_center[i] += coef * context[i];
        g_context[i] = coef * center[i];
    }
    for (std::size_t k = 0; k < negatives.size(); ++k) {
        T sk = dot(negatives[k], center);
        loss -= log_sigmoid(-sk);
        T ck = sigmoid(sk);
        for (std::size_t i = 0; i < dim; ++i) {
            g_center[i] += ck * negatives[k][i];
            g_negatives[k][i] = ck * center[i];
        }
    }
    return loss;
}

namespace detail {

// Cumulative unigram^0.75 table over node frequencies in the walks.
class NegativeSampler {
public:
    explicit NegativeSampler(const std::vector<std::uint64_t>& counts) {
        cumulative_.reserve(counts.size());
        double acc = 0;
        for (auto c : counts) {
            acc += std::pow(double(c), 0.75);
            cumulative_.push_back(acc);
        }
    }
    template <class Rng>
    std::uint32_t draw(Rng& rng) const {
        double u = uniform01(rng) * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return static_cast<std::uint32_t>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
};

struct SgnsState {
    std::size_t dim;
    std::vector<float> input;   // node vectors (the embeddings)
    std::vector<float> output;  // context vectors

    std::span<float> in(std::size_t v) { return {input.data() + v * dim, dim}; }
    std::span<float> out(std::size_t v) { return {output.data() + v * dim, dim}; }
};

}  // namespace detail

// Trains node vectors on walks over a vocabulary of `vocab.size()` nodes
// (walk entries index into vocab). Serial mode is bit-reproducible per seed.
inline EmbeddingTable train_skipgram(const std::vector<Walk>& walks, const std::vector<std::string>& vocab, const TrainConfig& cfg) {
    cfg.validate();
    if (vocab.empty()) throw Error("train_skipgram: empty vocabulary");
    if (walks.empty()) throw Error("train_skipgram: no walks");
    const std::size_t V = vocab.size(), dim = cfg.dim;

    std::vector<std::uint64_t> counts(V, 0);
    std::uint64_t pairs_per_epoch = 0;
    for (const auto& w : walks) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] >= V) throw Error("train_skipgram: walk references node outside vocabulary");
            ++counts[w[i]];
            std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
            std::size_t hi = std::min(w.size() - 1, i + cfg.window);
            pairs_per_epoch += hi - lo;
        }
    }
    for (auto& c : counts) c = std::max<std::uint64_t>(c, 1);
    detail::NegativeSampler sampler(counts);

    detail::SgnsState st{dim, std::vector<float>(V * dim), std::vector<float>(V * dim, 0.0f)};
    {
        std::mt19937_64 init(derive_seed(cfg.seed, 0x1417));
        for (auto& x : st.input) x = static_cast<float>((uniform01(init) - 0.5) / double(dim));
    }
    const double total_pairs = double(pairs_per_epoch) * double(cfg.epochs);

    // Trains walks [begin, end) for one epoch; `done` counts pairs seen before this slice.
    auto run_slice = [&](std::size_t epoch, std::size_t begin, std::size_t end, std::uint64_t done, std::uint64_t stream) {
        std::mt19937_64 rng(derive_seed(cfg.seed, epoch + 1, stream));
        std::vector<float> g_center(dim), g_context(dim);
        std::vector<std::vector<float>> g_neg(cfg.negatives, std::vector<float>(dim));
        std::vector<std::uint32_t> negs;
        std::vector<std::span<const float>> neg_vecs;
        std::vector<std::span<float>> neg_grads;
        for (std::size_t wi = begin; wi < end; ++wi) {
            const auto& w = walks[wi];
            for (std::size_t i = 0; i < w.size(); ++i) {
                std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
                std::size_t hi = std::min(w.size() - 1, i + cfg.window);
                for (std::size_t j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    const double lr = cfg.learning_rate * std::max(1e-4, 1.0 - double(done++) / total_pairs);
                    const std::uint32_t c = w[i], o = w[j];
                    negs.clear();
                    for (std::size_t k = 0; k < cfg.negatives; ++k) {
                        std::uint32_t n = sampler.draw(rng);
                        if (n != o) negs.push_back(n);
                    }
                    neg_vecs.clear();
                    neg_grads.clear();
                    for (std::size_t k = 0; k < negs.size(); ++k) {
                        neg_vecs.push_back(st.out(negs[k]));
                        neg_grads.push_back(g_neg[k]);
                    }
                    auto vc = st.in(c);
                    auto uo = st.out(o);
                    sgns_gradient<float>(vc, uo, neg_vecs, g_center, g_context, neg_grads);
                    const float a = static_cast<float>(lr);
                    for (std::size_t d = 0; d < dim; ++d) uo[d] -= a * g_context[d];
                    for (std::size_t k = 0; k < negs.size(); ++k) {
                        auto uk = st.out(negs[k]);
                        for (std::size_t d = 0; d < dim; ++d) uk[d] -= a * g_neg[k][d];
                    }
                    for (std::size_t d = 0; d < dim; ++d) vc[d] -= a * g_center[d];
                }
            }
        }
    };

    auto pairs_in = [&](std::size_t begin, std::size_t end) {
        std::uint64_t n = 0;
        for (std::size_t wi = begin; wi < end; ++wi) {
            const auto len = walks[wi].size();
            for (std::size_t i = 0; i < len; ++i)
                n += std::min(len - 1, i + cfg.window) - (i >= cfg.window ? i - cfg.window : 0);
        }
        return n;
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::uint64_t before = pairs_per_epoch * epoch;
        const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(walks.size())));
        if (threads == 1) {
            run_slice(epoch, 0, walks.size(), before, 0);
            continue;
        }
        std::vector<std::thread> pool;
        std::size_t chunk = (walks.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::size_t b = std::min(walks.size(), t * chunk), e = std::min(walks.size(), b + chunk);
            pool.emplace_back(run_slice, epoch, b, e, before + pairs_in(0, b), t);
        }
        for (auto& th : pool) th.join();
    }
    return EmbeddingTable(vocab, dim, std::move(st.input));
}

// Walks on the graph followed by training; vocabulary = graph nodes.
inline EmbeddingTable embed_graph(const WalkGraph& g, const WalkConfig& wcfg, const TrainConfig& tcfg, unsigned workers = 1,
                                  std::vector<Walk>* walks_out = nullptr) {
    auto walks = generate_walks(g, wcfg, workers);
    auto table = train_skipgram(walks, g.keys(), tcfg);
    if (walks_out) *walks_out = std::move(walks);
    return table;
}

}  // namespace colex
