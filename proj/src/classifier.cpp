#include "csknn/classifier.hpp"

#include "csknn/distributions.hpp"
#include "csknn/math_util.hpp"

#include <cmath>
#include <stdexcept>

namespace csknn {

ProbVector estimate_eta(const std::vector<int>& labels, int L) {
    if (labels.empty()) throw std::invalid_argument("estimate_eta needs at least one label");
    std::vector<double> w(static_cast<std::size_t>(L), 0.0);
    for (int y : labels) {
        if (y < 1 || y > L) throw std::invalid_argument("label out of range");
        w[static_cast<std::size_t>(y - 1)] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(labels.size());
    for (double& v : w) v *= inv;
    return ProbVector{std::move(w)};
}

int predict(const CostMatrix& phi, const ProbVector& eta_hat) {
    return optimal_labels(phi, eta_hat).front();
}

int k_schedule(const Schedule& s, long n, std::optional<double> xi) {
    if (n < 1) throw std::invalid_argument("k_schedule needs n >= 1");
    if (!(s.k0 > 0.0)) throw std::invalid_argument("k0 must be positive");
    if (!(s.alpha > 0.0 && s.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    if (s.gamma < 1) throw std::invalid_argument("gamma must be a positive integer");
    const double expo = 2.0 * s.alpha / (2.0 * s.alpha + s.gamma);
    double k = s.k0 * std::pow(static_cast<double>(n), expo);
    if (xi) {
        if (!(*xi > 0.0 && *xi < 1.0)) throw std::invalid_argument("xi must lie in (0,1)");
        const double conf_expo = s.gamma / (2.0 * s.alpha + s.gamma);
        k *= std::pow(1.0 + std::log(1.0 / *xi), conf_expo);
    }
    double clamped = std::min(std::max(std::ceil(k), 1.0), static_cast<double>(n));
    return static_cast<int>(clamped);
}

int classify(const NeighbourIndex& idx, const CostMatrix& phi, const double* x,
             int k, QueryMode mode) {
    QueryResult res;
    switch (mode) {
        case QueryMode::exact: res = query_exact(idx, x, k); break;
        case QueryMode::projected: res = query_projected(idx, x, k); break;
        case QueryMode::oracle:
            throw std::invalid_argument("oracle mode needs a distribution; use evaluate");
    }
    std::vector<int> labels;
    labels.reserve(res.indices.size());
    for (int i : res.indices)
        labels.push_back(idx.data.labels[static_cast<std::size_t>(i)]);
    return predict(phi, estimate_eta(labels, phi.L));
}

EvalResult evaluate(const NeighbourIndex& idx, const CostMatrix& phi,
                    const SyntheticDistribution& dist, int k, QueryMode mode,
                    int m_test, std::uint64_t seed) {
    if (m_test < 1) throw std::invalid_argument("evaluate needs m_test >= 1");
    if (dist.num_labels() != phi.L)
        throw std::invalid_argument("distribution and cost matrix disagree on L");
    Rng rng(seed);
    std::vector<double> excess(static_cast<std::size_t>(m_test));
    std::vector<double> miss(static_cast<std::size_t>(m_test));
    auto score = [&](int t, const double* x, int f_hat) {
        auto eta = dist.eta(x);
        excess[static_cast<std::size_t>(t)] = regret(phi, f_hat, eta);
        auto opt = optimal_labels(phi, eta);
        bool in_opt = false;
        for (int y : opt) in_opt = in_opt || y == f_hat;
        miss[static_cast<std::size_t>(t)] = in_opt ? 0.0 : 1.0;
    };
    if (mode == QueryMode::oracle) {
        for (int t = 0; t < m_test; ++t) {
            auto x = dist.sample_point(rng);
            score(t, x.data(), predict(phi, dist.eta(x.data())));
        }
    } else {
        // draw and classify in chunks: the classifier consumes no randomness,
        // so pre-drawing each chunk leaves the stream identical to a 1-by-1
        // loop while the batched queries share scans of the training matrix
        if (dist.ambient_dim() != idx.data.d)
            throw std::invalid_argument("distribution dimension does not match index");
        const int d = idx.data.d;
        constexpr int chunk = 2048;
        std::vector<double> xs;
        std::vector<int> labels;
        for (int t0 = 0; t0 < m_test; t0 += chunk) {
            const int c = std::min(chunk, m_test - t0);
            xs.resize(static_cast<std::size_t>(c) * static_cast<std::size_t>(d));
            for (int t = 0; t < c; ++t) {
                auto x = dist.sample_point(rng);
                std::copy(x.begin(), x.end(),
                          xs.begin() + static_cast<std::size_t>(t) * static_cast<std::size_t>(d));
            }
            auto results = mode == QueryMode::exact ? query_exact_batch(idx, xs, k)
                                                    : query_projected_batch(idx, xs, k);
            for (int t = 0; t < c; ++t) {
                const auto& res = results[static_cast<std::size_t>(t)];
                labels.clear();
                labels.reserve(res.indices.size());
                for (int i : res.indices)
                    labels.push_back(idx.data.labels[static_cast<std::size_t>(i)]);
                score(t0 + t, xs.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(d),
                      predict(phi, estimate_eta(labels, phi.L)));
            }
        }
    }
    EvalResult out;
    out.excess_risk = pairwise_mean(excess);
    out.misclass_prob = pairwise_mean(miss);
    return out;
}

} // namespace csknn
