#include "csknn/projection.hpp"

#include "csknn/math_util.hpp"
#include "csknn/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace csknn {

double default_psi2(ProjectionKind kind) {
    switch (kind) {
        case ProjectionKind::gaussian: return 1.0;
        case ProjectionKind::achlioptas: return std::sqrt(3.0 / std::log(2.0));
        case ProjectionKind::identity_test: return 1.0;
    }
    throw std::logic_error("unknown projection kind");
}

ProjectionSpec normalized(const ProjectionSpec& spec) {
    ProjectionSpec s = spec;
    if (s.ambient_dim < 1) throw std::invalid_argument("ambient dimension must be >= 1");
    if (s.target_dim < 1) throw std::invalid_argument("target dimension must be >= 1");
    if (s.target_dim > s.ambient_dim)
        throw std::invalid_argument("projection must reduce or preserve dimension");
    if (s.kind == ProjectionKind::identity_test && s.target_dim != s.ambient_dim)
        throw std::invalid_argument("identity-test projection requires h = d");
    if (s.psi2 <= 0.0) s.psi2 = default_psi2(s.kind);
    return s;
}

ProjectionMatrix sample_projection(const ProjectionSpec& spec) {
    ProjectionMatrix m;
    m.spec = normalized(spec);
    const int d = m.spec.ambient_dim;
    const int h = m.spec.target_dim;
    m.rows.assign(static_cast<std::size_t>(h) * d, 0.0);
    switch (m.spec.kind) {
        case ProjectionKind::identity_test:
            for (int i = 0; i < h; ++i)
                m.rows[static_cast<std::size_t>(i) * d + i] = 1.0;
            break;
        case ProjectionKind::gaussian: {
            Rng rng(m.spec.seed);
            for (auto& e : m.rows) e = rng.normal();
            break;
        }
        case ProjectionKind::achlioptas: {
            Rng rng(m.spec.seed);
            const double root3 = std::sqrt(3.0);
            for (auto& e : m.rows) {
                double u = rng.uniform01();
                e = (u < 1.0 / 6.0) ? -root3 : (u < 5.0 / 6.0) ? 0.0 : root3;
            }
            break;
        }
    }
    return m;
}

void apply_into(const ProjectionMatrix& m, const double* x, double* out) {
    const int d = m.spec.ambient_dim;
    const int h = m.spec.target_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(h));
    const double* row = m.rows.data();
    for (int i = 0; i < h; ++i, row += d) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += row[j] * x[j];
        out[i] = scale * acc;
    }
}

std::vector<double> apply(const ProjectionMatrix& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.spec.ambient_dim)
        throw std::invalid_argument("apply: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(m.spec.target_dim));
    apply_into(m, x.data(), out.data());
    return out;
}

namespace {

int ceil_bound(double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
        throw std::domain_error("dimension bound is not finite");
    double c = std::ceil(value);
    if (c < 1.0) c = 1.0;
    return static_cast<int>(c);
}

} // namespace

int dimension_bound_theta(double theta, int gamma, double tau, double r0,
                          double c0, double nu_min, double delta, double psi2,
                          double K) {
    if (!(theta > 1.0)) throw std::domain_error("dimension bound needs theta > 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0,1)");
    double g = static_cast<double>(gamma);
    double geom = g * log_plus(g / (r0 * tau)) - log_plus(c0 * nu_min) + g;
    double ratio = (theta * theta + 1.0) / (theta * theta - 1.0);
    double psi4 = psi2 * psi2 * psi2 * psi2;
    double rhs = K * psi4 * ratio * ratio * std::max(geom, std::log(1.0 / delta));
    return ceil_bound(rhs);
}

int dimension_bound_epsilon(double eps, int gamma, double tau, double r0,
                            double c0, double volume, double delta, double psi2,
                            double K) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("dimension bound needs eps in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0,1)");
    double g = static_cast<double>(gamma);
    double geom = g * log_plus(g / (r0 * tau)) + log_plus(volume / c0) + g;
    double psi4 = psi2 * psi2 * psi2 * psi2;
    double rhs = K * psi4 / (eps * eps) * std::max(geom, std::log(1.0 / delta));
    return ceil_bound(rhs);
}

DistortionReport distortion(const ProjectionMatrix& m,
                            const std::vector<std::vector<double>>& points) {
    const std::size_t n = points.size();
    const int d = m.spec.ambient_dim;
    const int h = m.spec.target_dim;
    for (const auto& p : points)
        if (static_cast<int>(p.size()) != d)
            throw std::invalid_argument("distortion: point dimension mismatch");

    std::vector<double> proj(n * static_cast<std::size_t>(h));
    for (std::size_t i = 0; i < n; ++i)
        apply_into(m, points[i].data(), proj.data() + i * h);

    DistortionReport rep;
    rep.eps_hat = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d2 = euclidean_dist2(points[i].data(), points[j].data(), d);
            if (d2 == 0.0) continue;
            double p2 = euclidean_dist2(proj.data() + i * h, proj.data() + j * h, h);
            double dev = std::abs(p2 / d2 - 1.0);
            if (dev > rep.eps_hat) {
                rep.eps_hat = dev;
                rep.pair_i = i;
                rep.pair_j = j;
            }
        }
    }
    if (rep.eps_hat < 0.0)
        throw std::invalid_argument("distortion needs at least 2 distinct points");
    return rep;
}

double theta_from_epsilon(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw std::domain_error("theta_from_epsilon needs eps in [0,1)");
    return std::sqrt((1.0 + eps) / (1.0 - eps));
}

double epsilon_from_theta(double theta) {
    if (!(theta >= 1.0)) throw std::domain_error("epsilon_from_theta needs theta >= 1");
    double t2 = theta * theta;
    return (t2 - 1.0) / (t2 + 1.0);
}

} // namespace csknn
