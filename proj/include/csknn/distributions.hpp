#pragma once

#include "csknn/cost_geometry.hpp"
#include "csknn/manifold.hpp"
#include "csknn/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace csknn {

struct Dataset;

// Label distribution over an embedded manifold with analytic oracles.
// eta/ball_measure/quantile_radius are exact or tightly approximated so
// Monte-Carlo estimates can be tested against them.
class SyntheticDistribution {
public:
    virtual ~SyntheticDistribution() = default;

    virtual int ambient_dim() const = 0;
    virtual int num_labels() const = 0;
    virtual const EmbeddedManifold& manifold() const = 0;
    virtual const CostMatrix& cost_matrix() const = 0;
    virtual const RegularityParams& params() const = 0;

    virtual std::vector<double> sample_point(Rng& rng) const = 0;
    virtual bool on_support(const double* x) const = 0;
    virtual ProbVector eta(const double* x) const = 0;

    // mu(closed Euclidean ball of radius r around x)
    virtual double ball_measure(const double* x, double r) const = 0;
    // smallest r with ball_measure >= p, bisected to 1e-10
    virtual double quantile_radius(const double* x, double p) const = 0;

    int sample_label(const double* x, Rng& rng) const;
    Dataset sample_dataset(int n, Rng& rng) const;
};

ProbVector conditional_eval(const SyntheticDistribution& dist, const double* x);
Dataset sample(const SyntheticDistribution& dist, int count, std::uint64_t seed);

struct HardConstruction {
    double r = 0.0;
    double tau_tilde = 0.0;
    double r_star = 0.0; // tau_tilde / 16
    std::vector<std::vector<double>> centers;
    int Q = 0;
    double delta_r = 0.0;
    int m_r = 0;
    double u_r = 0.0;
    double v_r = 0.0;
    double nu_star = 0.0;
    double support_volume = 0.0;
};

// Derives the lower-bound construction parameters; centers come from a greedy
// Euclidean-separated net over 10^5 uniform candidates in the geodesic ball.
HardConstruction hard_params(const CostMatrix& phi, const RegularityParams& params,
                             const EmbeddedManifold& m, double r, std::uint64_t seed = 0);

class HardDistribution final : public SyntheticDistribution {
public:
    HardDistribution(EmbeddedManifold manifold, CostMatrix phi, RegularityParams params,
                     double r, std::vector<int> sigma, std::uint64_t seed);

    int ambient_dim() const override { return m_.d; }
    int num_labels() const override { return phi_.L; }
    const EmbeddedManifold& manifold() const override { return m_; }
    const CostMatrix& cost_matrix() const override { return phi_; }
    const RegularityParams& params() const override { return params_; }
    std::vector<double> sample_point(Rng& rng) const override;
    bool on_support(const double* x) const override;
    ProbVector eta(const double* x) const override;
    double ball_measure(const double* x, double r) const override;
    double quantile_radius(const double* x, double p) const override;

    // the bump formula, defined on the whole manifold (no support check)
    ProbVector conditional_formula(const double* x) const;

    struct MeasureEstimate {
        double value = 0.0;
        double sigma = 0.0; // binomial error; 0 when the arc formula is exact
    };
    MeasureEstimate ball_measure_estimate(const double* x, double r) const;

    const HardConstruction& construction() const { return hc_; }
    const CostCalibration& calibration() const { return cal_; }
    const std::vector<int>& sigma() const { return sigma_; }

private:
    EmbeddedManifold m_;
    CostMatrix phi_;
    CostCalibration cal_;
    RegularityParams params_;
    HardConstruction hc_;
    std::vector<int> sigma_;
    double cap_radius_ = 0.0; // geodesic radius of the sampling cap around x_star
    std::vector<double> x_star_;
    std::vector<std::vector<double>> mc_pool_; // sphere-only ball_measure pool

    double nearest_center_geo(const double* x) const;
};

class BenignDistribution final : public SyntheticDistribution {
public:
    BenignDistribution(EmbeddedManifold manifold, int m_freq, double kappa,
                       double amplitude, CostMatrix phi);

    int ambient_dim() const override { return m_.d; }
    int num_labels() const override { return 2; }
    const EmbeddedManifold& manifold() const override { return m_; }
    const CostMatrix& cost_matrix() const override { return phi_; }
    const RegularityParams& params() const override { return params_; }
    std::vector<double> sample_point(Rng& rng) const override;
    bool on_support(const double* x) const override;
    ProbVector eta(const double* x) const override;
    double ball_measure(const double* x, double r) const override;
    double quantile_radius(const double* x, double p) const override;

    int frequency() const { return m_freq_; }
    double kappa() const { return kappa_; }
    double amplitude() const { return amplitude_; }

private:
    EmbeddedManifold m_;
    CostMatrix phi_;
    RegularityParams params_;
    int m_freq_ = 1;
    double kappa_ = 0.5;
    double amplitude_ = 0.5;
};

std::unique_ptr<HardDistribution> build_hard(const EmbeddedManifold& m, const CostMatrix& phi,
                                             const RegularityParams& params, double r,
                                             const std::vector<int>& sigma, std::uint64_t seed);

std::unique_ptr<BenignDistribution> build_benign(const EmbeddedManifold& m, int m_freq = 1,
                                                 double kappa = 0.5, double amplitude = 0.5,
                                                 CostMatrix phi = CostMatrix::zero_one(2));

struct BayesOracle {
    double risk = 0.0;
    double sigma = 0.0; // 0: exact formula or quadrature
    std::function<int(const double*)> f_star;
};
BayesOracle bayes_oracle(const SyntheticDistribution& dist, const CostMatrix& phi);

enum class ValidationKind { margin, holder, regularity };

struct ValidationReport {
    bool pass = false;
    // margin
    double hat_c_beta = 0.0;
    double worst_zeta = 0.0;
    // holder
    double worst_ratio = 0.0;
    // regularity
    double min_ratio = 0.0;
    double sigma = 0.0;
};

// z scales every sigma allowance; 3 is the per-probe default, raise it when a
// family sits exactly on its claimed constant and the probe count multiplies
// the false-alarm rate
ValidationReport validate(const SyntheticDistribution& dist, ValidationKind kind,
                          int budget, std::uint64_t seed, double z = 3.0);

} // namespace csknn
