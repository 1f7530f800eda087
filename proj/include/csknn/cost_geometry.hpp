#pragma once

#include <limits>
#include <string>
#include <vector>

namespace csknn {

// L x L cost table, row-major; at(i, j) = cost of predicting label i+1 when
// the truth is j+1. Labels are 1-based in every public signature.
struct CostMatrix {
    int L = 0;
    std::vector<double> entries;  // L*L, row-major

    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * L + j]; }
    double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * L + j]; }

    static CostMatrix zero_one(int L);
    static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);
};

void validate(const CostMatrix& phi);

// Point on the (L-1)-simplex.
struct ProbVector {
    std::vector<double> w;

    int size() const { return static_cast<int>(w.size()); }
    double operator[](int i) const { return w[i]; }
};

ProbVector make_prob_vector(std::vector<double> w);
ProbVector one_hot(int y, int L);               // e(y), y 1-based
ProbVector two_point(double p, int L);          // (1-p, p, 0, ..., 0)

// Output of calibrate(): the constants the two-point margin guarantee needs.
struct CostCalibration {
    double kappa = 0.0;    // crossing point of label 1's cost line
    double beta_phi = 0.0; // min_{y != 1} (phi_{y1} - phi_{11})
    double c_phi = 0.0;    // margin slope guarantee
    double t_phi = 0.0;    // guarantee range: delta in (0, t_phi)
    double z_phi = 0.0;    // margin at n(kappa); +inf when every label ties
    std::vector<int> j_star;  // optimal labels at n(kappa), 1-based ascending
    std::vector<int> k_star;  // minimal-slope subset of j_star
    std::vector<int> l_star;  // minimal-slope subset of j_star \ k_star
};

bool is_reasonable(const CostMatrix& phi);

// e(y)^T Phi n, y 1-based.
double label_cost(const CostMatrix& phi, int y, const ProbVector& n);

// Tie tolerance for cost comparisons: 1e-9 * (1 + max compared cost).
double cost_tie_tolerance(const std::vector<double>& costs);

// All labels attaining the minimal cost, ascending, 1-based.
std::vector<int> optimal_labels(const CostMatrix& phi, const ProbVector& n);

// e(y)^T Phi n - min_l e(l)^T Phi n, >= 0.
double regret(const CostMatrix& phi, int y, const ProbVector& n);

// min over y0 optimal, y1 not optimal of (e(y1) - e(y0))^T Phi n;
// +inf when every label is optimal.
double margin(const CostMatrix& phi, const ProbVector& n);

// max over columns j of the spread of off-diagonal entries in column j.
double asymmetry(const CostMatrix& phi);

// (L - 2) * asymmetry + 2 * max |entry|.
double lambda_const(const CostMatrix& phi);

// Two-point calibration constants; requires is_reasonable(phi).
CostCalibration calibrate(const CostMatrix& phi);

inline double infinite_margin() { return std::numeric_limits<double>::infinity(); }

}  // namespace csknn
