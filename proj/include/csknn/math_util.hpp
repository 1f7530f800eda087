#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace csknn {

// Order-independent summation: recursive pairwise halving. Used wherever
// aggregation must not depend on thread count or accumulation order.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return pairwise_sum(v) / static_cast<double>(v.size());
}

inline double sq(double x) { return x * x; }

inline double euclidean_dist2(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

inline double euclidean_dist(const double* a, const double* b, int d) {
    return std::sqrt(euclidean_dist2(a, b, d));
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// max{ln x, 0}; the convention used by every dimension bound here.
inline double log_plus(double x) {
    if (x <= 1.0) return 0.0;
    return std::log(x);
}

namespace detail {
inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                                   double b, double fb, double m, double fm, double whole,
                                   double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson quadrature; tolerant of mild kinks in the integrand.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = detail::simpson(a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

struct MeanStd {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

// Mean and standard error of the mean, pairwise-summed.
inline MeanStd mean_stderr(std::span<const double> v) {
    MeanStd out;
    const std::size_t n = v.size();
    if (n == 0) return out;
    out.mean = pairwise_mean(v);
    if (n < 2) return out;
    std::vector<double> dev2(n);
    for (std::size_t i = 0; i < n; ++i) dev2[i] = sq(v[i] - out.mean);
    const double var = pairwise_sum(dev2) / static_cast<double>(n - 1);
    out.stderr_of_mean = std::sqrt(var / static_cast<double>(n));
    return out;
}

}  // namespace csknn
