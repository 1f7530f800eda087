#include "csknn/cost_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csknn {

CostMatrix CostMatrix::zero_one(int L) {
    CostMatrix phi;
    phi.L = L;
    phi.entries.assign(static_cast<std::size_t>(L) * L, 1.0);
    for (int i = 0; i < L; ++i) phi.at(i, i) = 0.0;
    return phi;
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    CostMatrix phi;
    phi.L = static_cast<int>(rows.size());
    phi.entries.reserve(static_cast<std::size_t>(phi.L) * phi.L);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != phi.L)
            throw std::invalid_argument("cost matrix must be square");
        phi.entries.insert(phi.entries.end(), row.begin(), row.end());
    }
    validate(phi);
    return phi;
}

void validate(const CostMatrix& phi) {
    if (phi.L < 2) throw std::invalid_argument("cost matrix needs L >= 2");
    if (static_cast<int>(phi.entries.size()) != phi.L * phi.L)
        throw std::invalid_argument("cost matrix entry count mismatch");
    for (double e : phi.entries) {
        if (!(e >= 0.0) || !std::isfinite(e))
            throw std::invalid_argument("cost matrix entries must be finite and nonnegative");
    }
}

ProbVector make_prob_vector(std::vector<double> w) {
    double sum = 0.0;
    for (double x : w) {
        if (x < -1e-12 || x > 1.0 + 1e-12)
            throw std::invalid_argument("probability weight outside [0,1]");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("probability weights must sum to 1");
    return ProbVector{std::move(w)};
}

ProbVector one_hot(int y, int L) {
    if (y < 1 || y > L) throw std::invalid_argument("label out of range");
    std::vector<double> w(static_cast<std::size_t>(L), 0.0);
    w[y - 1] = 1.0;
    return ProbVector{std::move(w)};
}

ProbVector two_point(double p, int L) {
    if (L < 2) throw std::invalid_argument("two_point needs L >= 2");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("two_point needs p in [0,1]");
    std::vector<double> w(static_cast<std::size_t>(L), 0.0);
    w[0] = 1.0 - p;
    w[1] = p;
    return ProbVector{std::move(w)};
}

bool is_reasonable(const CostMatrix& phi) {
    for (int j = 0; j < phi.L; ++j) {
        for (int i = 0; i < phi.L; ++i) {
            if (i == j) continue;
            if (!(phi.at(j, j) < phi.at(i, j))) return false;
        }
    }
    return true;
}

double label_cost(const CostMatrix& phi, int y, const ProbVector& n) {
    if (y < 1 || y > phi.L) throw std::invalid_argument("label out of range");
    if (n.size() != phi.L) throw std::invalid_argument("dimension mismatch");
    double c = 0.0;
    for (int j = 0; j < phi.L; ++j) c += phi.at(y - 1, j) * n[j];
    return c;
}

static std::vector<double> all_costs(const CostMatrix& phi, const ProbVector& n) {
    if (n.size() != phi.L) throw std::invalid_argument("dimension mismatch");
    std::vector<double> costs(static_cast<std::size_t>(phi.L));
    for (int y = 0; y < phi.L; ++y) {
        double c = 0.0;
        for (int j = 0; j < phi.L; ++j) c += phi.at(y, j) * n[j];
        costs[y] = c;
    }
    return costs;
}

double cost_tie_tolerance(const std::vector<double>& costs) {
    double m = 0.0;
    for (double c : costs) m = std::max(m, std::abs(c));
    return 1e-9 * (1.0 + m);
}

std::vector<int> optimal_labels(const CostMatrix& phi, const ProbVector& n) {
    const std::vector<double> costs = all_costs(phi, n);
    const double cmin = *std::min_element(costs.begin(), costs.end());
    const double tol = cost_tie_tolerance(costs);
    std::vector<int> out;
    for (int y = 0; y < phi.L; ++y) {
        if (costs[y] <= cmin + tol) out.push_back(y + 1);
    }
    return out;
}

double regret(const CostMatrix& phi, int y, const ProbVector& n) {
    const std::vector<double> costs = all_costs(phi, n);
    if (y < 1 || y > phi.L) throw std::invalid_argument("label out of range");
    const double cmin = *std::min_element(costs.begin(), costs.end());
    return std::max(0.0, costs[y - 1] - cmin);
}

double margin(const CostMatrix& phi, const ProbVector& n) {
    const std::vector<double> costs = all_costs(phi, n);
    const double cmin = *std::min_element(costs.begin(), costs.end());
    const double tol = cost_tie_tolerance(costs);
    double best_opt = -infinite_margin();   // max cost over optimal labels
    double best_non = infinite_margin();    // min cost over non-optimal labels
    bool any_non = false;
    for (int y = 0; y < phi.L; ++y) {
        if (costs[y] <= cmin + tol) {
            best_opt = std::max(best_opt, costs[y]);
        } else {
            any_non = true;
            best_non = std::min(best_non, costs[y]);
        }
    }
    if (!any_non) return infinite_margin();
    return best_non - best_opt;
}

double asymmetry(const CostMatrix& phi) {
    double worst = 0.0;
    for (int j = 0; j < phi.L; ++j) {
        double lo = infinite_margin();
        double hi = -infinite_margin();
        for (int i = 0; i < phi.L; ++i) {
            if (i == j) continue;
            lo = std::min(lo, phi.at(i, j));
            hi = std::max(hi, phi.at(i, j));
        }
        if (hi > lo) worst = std::max(worst, hi - lo);
    }
    return worst;
}

double lambda_const(const CostMatrix& phi) {
    double norm_inf = 0.0;
    for (double e : phi.entries) norm_inf = std::max(norm_inf, std::abs(e));
    return (phi.L - 2) * asymmetry(phi) + 2.0 * norm_inf;
}

namespace {

// cost of label y (0-based) at n(p): (1-p)*phi_{y,0} + p*phi_{y,1}
struct CostLine {
    double value0;  // value at p = 0
    double slope;   // phi_{y,1} - phi_{y,0}
    double at(double p) const { return value0 + slope * p; }
};

std::vector<CostLine> cost_lines(const CostMatrix& phi) {
    std::vector<CostLine> lines(static_cast<std::size_t>(phi.L));
    for (int y = 0; y < phi.L; ++y) {
        lines[y] = CostLine{phi.at(y, 0), phi.at(y, 1) - phi.at(y, 0)};
    }
    return lines;
}

// true if the sorted label sets agree
bool same_label_set(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

}  // namespace

CostCalibration calibrate(const CostMatrix& phi) {
    validate(phi);
    if (!is_reasonable(phi)) throw std::invalid_argument("calibrate needs a reasonable matrix");

    CostCalibration cal;
    const int L = phi.L;

    // beta: cheapest wrong-prediction surcharge in column 1.
    double beta = infinite_margin();
    for (int y = 1; y < L; ++y) beta = std::min(beta, phi.at(y, 0) - phi.at(0, 0));
    cal.beta_phi = beta;

    // kappa: first p > 0 where some label's cost line meets label 1's.
    double kappa = infinite_margin();
    bool found = false;
    for (int y = 1; y < L; ++y) {
        if (!(phi.at(y, 1) < phi.at(0, 1))) continue;
        const double num = phi.at(y, 0) - phi.at(0, 0);
        const double den = num + (phi.at(0, 1) - phi.at(y, 1));
        kappa = std::min(kappa, num / den);
        found = true;
    }
    if (!found) throw std::invalid_argument("calibrate: crossing candidate set empty");
    cal.kappa = kappa;

    cal.j_star = optimal_labels(phi, two_point(kappa, L));
    cal.z_phi = margin(phi, two_point(kappa, L));

    const std::vector<CostLine> lines = cost_lines(phi);

    // slope tie tolerance on the same relative scale as cost ties
    double max_slope = 0.0;
    for (const auto& ln : lines) max_slope = std::max(max_slope, std::abs(ln.slope));
    const double slope_tol = 1e-9 * (1.0 + max_slope);

    double min_slope = infinite_margin();
    for (int y : cal.j_star) min_slope = std::min(min_slope, lines[y - 1].slope);
    for (int y : cal.j_star) {
        if (lines[y - 1].slope <= min_slope + slope_tol) cal.k_star.push_back(y);
    }
    double min_slope_rest = infinite_margin();
    for (int y : cal.j_star) {
        const bool in_k = std::find(cal.k_star.begin(), cal.k_star.end(), y) != cal.k_star.end();
        if (!in_k) min_slope_rest = std::min(min_slope_rest, lines[y - 1].slope);
    }
    for (int y : cal.j_star) {
        const bool in_k = std::find(cal.k_star.begin(), cal.k_star.end(), y) != cal.k_star.end();
        if (!in_k && lines[y - 1].slope <= min_slope_rest + slope_tol) cal.l_star.push_back(y);
    }
    if (cal.k_star.empty() || cal.l_star.empty())
        throw std::runtime_error("calibrate: degenerate K*/L* (unexpected for reasonable input)");

    cal.c_phi = std::min(cal.beta_phi / cal.kappa, min_slope_rest - min_slope);

    // t: scan the affine arrangement right of kappa. Within each open
    // segment between consecutive crossings the argmin set and the cost order
    // are constant, so checking segment midpoints is exact.
    const double t_cap = std::min(kappa, 1.0 - kappa);
    std::vector<double> cuts;
    for (int a = 0; a < L; ++a) {
        for (int b = a + 1; b < L; ++b) {
            const double ds = lines[a].slope - lines[b].slope;
            if (ds == 0.0) continue;
            const double p = (lines[b].value0 - lines[a].value0) / ds;
            if (p > kappa + 1e-12 && p < kappa + t_cap - 1e-15) cuts.push_back(p);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-13; }),
               cuts.end());

    double t = t_cap;
    double seg_lo = kappa;
    cuts.push_back(kappa + t_cap);
    for (double seg_hi : cuts) {
        const double mid = 0.5 * (seg_lo + seg_hi);
        const ProbVector nm = two_point(mid, L);
        const std::vector<int> opt = optimal_labels(phi, nm);
        bool ok = same_label_set(opt, cal.k_star);
        if (ok) {
            // cheapest non-optimal cost must be attained inside L*
            std::vector<double> costs(static_cast<std::size_t>(L));
            for (int y = 0; y < L; ++y) costs[y] = lines[y].at(mid);
            const double tol = cost_tie_tolerance(costs);
            double cheapest_non = infinite_margin();
            for (int y = 1; y <= L; ++y) {
                if (std::find(opt.begin(), opt.end(), y) == opt.end())
                    cheapest_non = std::min(cheapest_non, costs[y - 1]);
            }
            double cheapest_l = infinite_margin();
            for (int y : cal.l_star) cheapest_l = std::min(cheapest_l, costs[y - 1]);
            ok = cheapest_l <= cheapest_non + tol;
        }
        if (!ok) {
            t = seg_lo - kappa;
            break;
        }
        seg_lo = seg_hi;
    }
    if (!(t > 0.0)) throw std::runtime_error("calibrate: vanishing guarantee range");
    cal.t_phi = t;
    return cal;
}

}  // namespace csknn
