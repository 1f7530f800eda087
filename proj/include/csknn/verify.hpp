#pragma once

#include "csknn/distributions.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace csknn {

// Monte-Carlo check of the two neighbour concentration bounds on one
// distribution: the k-NN radius exceeding the p-quantile radius, and the
// empirical label frequency drifting from the mean conditional.
struct ConcentrationReport {
    double xi = 0.0;           // 1 - k / (n p); needs k <= n p
    double radius_bound = 0.0; // exp(-k xi^2 / 2)
    double radius_freq = 0.0;
    double radius_sigma = 0.0;
    bool radius_pass = false;
    double eta_bound = 0.0; // 2 L exp(-2 k delta^2)
    double eta_freq = 0.0;
    double eta_sigma = 0.0;
    bool eta_pass = false;

    bool pass() const { return radius_pass && eta_pass; }
};

ConcentrationReport verify_concentration(const SyntheticDistribution& dist, int n, int k,
                                         double p, double delta, int trials,
                                         std::uint64_t seed);

struct CheckResult {
    std::string name;
    bool pass = false;
    double slack = 0.0; // headroom under the binding bound; negative on failure
};

// Random reasonable matrices and a 50-point delta grid each: the two-point
// margin must beat c_scale * c_phi * delta, and the optimal label sets at
// kappa + delta and kappa - delta must be disjoint. c_scale > 1 inflates the
// claimed slope, which is how a deliberate fault is injected.
CheckResult margin_guarantee_sweep(int matrices, double c_scale, std::uint64_t seed);

struct VerifySummary {
    std::vector<CheckResult> checks;
    bool all_pass() const;
};

// Full self-check battery: margin sweep, projection distortion trend, exact
// neighbour equivalence, projected radius and measure ratios, ball volume and
// intersection bounds, packing counts, support volume sandwich, the three
// distribution validators on both families, and the concentration bounds.
// Failures are reported in the summary, never thrown. fault_scale feeds the
// margin sweep so a broken guarantee is observable end to end.
VerifySummary verify_all(std::uint64_t seed, double fault_scale = 1.0);

// machine-readable: one "name,PASS|FAIL,slack" line per check
std::string format_summary(const VerifySummary& summary);

} // namespace csknn
