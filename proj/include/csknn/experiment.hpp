#pragma once

#include "csknn/classifier.hpp"
#include "csknn/io.hpp"
#include "csknn/projection.hpp"

#include <string>
#include <utility>
#include <vector>

namespace csknn {

struct ExperimentConfig {
    DistributionSpec dist;
    CostMatrix phi = CostMatrix::zero_one(2);
    std::vector<long> n_grid;
    int trials = 20;
    Schedule schedule;
    bool projected = false;
    int proj_h = 0;
    ProjectionKind proj_kind = ProjectionKind::achlioptas;
    int m_test = 20000;
    std::uint64_t base_seed = 0;
    double xi = 0.0;        // > 0 feeds the confidence term of k_schedule
    double delta_proj = 0.01;
    int threads = 1;
    std::string out_path;
};

ExperimentConfig experiment_from_config(const ConfigMap& cfg);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
};

// OLS on (ln n, ln value); pairs need n > 0 and value > 0
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs);

struct TrialRow {
    long n = 0;
    int n_index = 0;
    int trial = 0;
    int k = 0;
    double excess = 0.0;
    double misclass = 0.0;
    std::uint64_t seed = 0; // slot seed the three substreams derive from
};

struct RateReport {
    std::vector<long> n_grid;
    std::vector<int> k_per_n;
    std::vector<TrialRow> rows; // n-major, trial-minor
    std::vector<double> mean_excess;
    std::vector<double> stderr_excess;
    SlopeFit fit;
    double theory_exponent = 0.0; // -alpha (1 + beta) / (2 alpha + gamma)
    bool clipped = false;         // some mean was floored at 1e-6 before the log fit
    std::string mode = "exact";
};

RateReport run_rate(const ExperimentConfig& cfg);

// columns: family,gamma,d,n,k,mode,trial,excess_risk,misclass_prob,seed
std::string trial_csv(const RateReport& rep, const ExperimentConfig& cfg);
// columns: n,mean_excess,stderr,k,slope_so_far
std::string summary_csv(const RateReport& rep);

} // namespace csknn
