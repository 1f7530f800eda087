#pragma once

#include "csknn/cost_geometry.hpp"
#include "csknn/neighbours.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace csknn {

class SyntheticDistribution;

struct Schedule {
    double k0 = 1.0;
    double alpha = 1.0;
    int gamma = 1;
};

ProbVector estimate_eta(const std::vector<int>& labels, int L);

// min element of the argmin-cost set
int predict(const CostMatrix& phi, const ProbVector& eta_hat);

// ceil(k0 * n^{2a/(2a+g)} * (1+ln(1/xi))^{g/(2a+g)}), clamped to [1,n]
int k_schedule(const Schedule& s, long n, std::optional<double> xi = std::nullopt);

enum class QueryMode { exact, projected, oracle };

int classify(const NeighbourIndex& idx, const CostMatrix& phi, const double* x,
             int k, QueryMode mode);

struct EvalResult {
    double excess_risk = 0.0;
    double misclass_prob = 0.0;
};

// Monte-Carlo risk over m_test fresh draws X ~ mu; oracle mode feeds eta(X)
// directly to predict, bypassing the index.
EvalResult evaluate(const NeighbourIndex& idx, const CostMatrix& phi,
                    const SyntheticDistribution& dist, int k, QueryMode mode,
                    int m_test, std::uint64_t seed);

} // namespace csknn
