#include "csknn/manifold.hpp"

#include "csknn/math_util.hpp"
#include "csknn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace csknn {

namespace {

constexpr double pi = std::numbers::pi;

} // namespace

double EmbeddedManifold::v_gamma() const { return gamma == 1 ? 2.0 : pi; }

double EmbeddedManifold::total_volume() const {
    return gamma == 1 ? 2.0 * pi * R : 4.0 * pi * R * R;
}

std::vector<double> EmbeddedManifold::embed(const double* c) const {
    const int q = gamma + 1;
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < q; ++j) {
        const double* col = frame.data() + static_cast<std::size_t>(j) * d;
        for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] += col[i] * c[j];
    }
    return x;
}

std::vector<double> EmbeddedManifold::embed(const std::vector<double>& c) const {
    if (static_cast<int>(c.size()) != gamma + 1)
        throw std::invalid_argument("canonical point has wrong dimension");
    return embed(c.data());
}

std::vector<double> EmbeddedManifold::canonical(const double* x) const {
    const int q = gamma + 1;
    std::vector<double> c(static_cast<std::size_t>(q), 0.0);
    for (int j = 0; j < q; ++j) {
        const double* col = frame.data() + static_cast<std::size_t>(j) * d;
        double acc = 0.0;
        for (int i = 0; i < d; ++i) acc += col[i] * x[i];
        c[static_cast<std::size_t>(j)] = acc;
    }
    return c;
}

void EmbeddedManifold::require_on_surface(const double* x, double tol) const {
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) n2 += x[i] * x[i];
    if (std::abs(std::sqrt(n2) - R) > tol)
        throw std::invalid_argument("point is not on the manifold surface");
}

EmbeddedManifold make_manifold(ManifoldKind kind, double R, int d, std::uint64_t rotation_seed) {
    if (!(R > 0.0)) throw std::invalid_argument("manifold radius must be positive");
    EmbeddedManifold m;
    m.kind = kind;
    m.R = R;
    m.gamma = kind == ManifoldKind::circle ? 1 : 2;
    m.d = d;
    m.rotation_seed = rotation_seed;
    const int q = m.gamma + 1;
    if (d < q) throw std::invalid_argument("ambient dimension too small for the manifold");

    // first q columns of a seeded Gaussian matrix, orthonormalized
    Rng rng(rotation_seed);
    m.frame.resize(static_cast<std::size_t>(q) * d);
    for (int j = 0; j < q; ++j) {
        double* col = m.frame.data() + static_cast<std::size_t>(j) * d;
        for (int i = 0; i < d; ++i) col[i] = rng.normal();
        for (int pass = 0; pass < 2; ++pass) { // twice for numerical orthogonality
            for (int p = 0; p < j; ++p) {
                const double* prev = m.frame.data() + static_cast<std::size_t>(p) * d;
                double dot = 0.0;
                for (int i = 0; i < d; ++i) dot += col[i] * prev[i];
                for (int i = 0; i < d; ++i) col[i] -= dot * prev[i];
            }
        }
        double norm = 0.0;
        for (int i = 0; i < d; ++i) norm += col[i] * col[i];
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw std::runtime_error("degenerate rotation draw");
        for (int i = 0; i < d; ++i) col[i] /= norm;
    }
    return m;
}

double geodesic_distance(const EmbeddedManifold& m, const double* x0, const double* x1) {
    m.require_on_surface(x0);
    m.require_on_surface(x1);
    double dot = 0.0;
    for (int i = 0; i < m.d; ++i) dot += x0[i] * x1[i];
    double c = dot / (m.R * m.R);
    c = std::clamp(c, -1.0, 1.0);
    return m.R * std::acos(c);
}

double geodesic_distance(const EmbeddedManifold& m, const std::vector<double>& x0,
                         const std::vector<double>& x1) {
    return geodesic_distance(m, x0.data(), x1.data());
}

std::vector<std::vector<double>> sample_uniform(const EmbeddedManifold& m, int count,
                                                std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("sample count must be >= 0");
    Rng rng(seed);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        if (m.gamma == 1) {
            double a = 2.0 * pi * rng.uniform01();
            double c[2] = {m.R * std::cos(a), m.R * std::sin(a)};
            out.push_back(m.embed(c));
        } else {
            // Archimedes: z uniform on [-R, R], longitude uniform
            double z = m.R * (2.0 * rng.uniform01() - 1.0);
            double a = 2.0 * pi * rng.uniform01();
            double rho = std::sqrt(std::max(0.0, m.R * m.R - z * z));
            double c[3] = {rho * std::cos(a), rho * std::sin(a), z};
            out.push_back(m.embed(c));
        }
    }
    return out;
}

double geodesic_ball_volume(const EmbeddedManifold& m, double r) {
    if (r < 0.0) throw std::invalid_argument("radius must be >= 0");
    if (m.gamma == 1) return std::min(2.0 * r, 2.0 * pi * m.R);
    double angle = std::min(r / m.R, pi);
    return 2.0 * pi * m.R * m.R * (1.0 - std::cos(angle));
}

double euclidean_ball_volume(const EmbeddedManifold& m, double r) {
    if (r < 0.0) throw std::invalid_argument("radius must be >= 0");
    if (m.gamma == 1) {
        if (r >= 2.0 * m.R) return 2.0 * pi * m.R;
        return 4.0 * m.R * std::asin(r / (2.0 * m.R));
    }
    if (r >= 2.0 * m.R) return 4.0 * pi * m.R * m.R;
    return pi * r * r; // cap area below chord r; exact on the sphere
}

std::vector<VolumeBoundsRow> check_volume_bounds(const EmbeddedManifold& m,
                                                 const std::vector<double>& r_grid) {
    std::vector<VolumeBoundsRow> rows;
    rows.reserve(r_grid.size());
    for (double r : r_grid) {
        if (!(r < m.reach() / 8.0))
            throw std::invalid_argument("volume bounds need r < reach/8");
        VolumeBoundsRow row;
        row.r = r;
        const double vg = m.v_gamma();
        const double rg = std::pow(r, static_cast<double>(m.gamma));
        row.lower = std::pow(4.0, -m.gamma) * vg * rg;
        row.upper = std::pow(4.0, m.gamma) * vg * rg;
        row.v_geo = geodesic_ball_volume(m, r);
        row.v_eucl = euclidean_ball_volume(m, r);
        const double slack = 1e-12 * (1.0 + row.upper);
        row.pass = row.lower <= row.v_geo + slack && row.v_geo <= row.v_eucl + slack &&
                   row.v_eucl <= row.upper + slack;
        rows.push_back(row);
    }
    return rows;
}

IntersectionReport check_intersection_bound(const EmbeddedManifold& m, const double* x,
                                            const double* x_tilde, double r, double r_tilde,
                                            int mc_n, std::uint64_t seed) {
    if (!(r_tilde <= r && r < m.reach() / 8.0))
        throw std::invalid_argument("intersection bound needs r_tilde <= r < reach/8");
    const double rho = geodesic_distance(m, x, x_tilde);
    if (!(rho <= r + r_tilde / 2.0))
        throw std::invalid_argument("intersection bound needs rho_g <= r + r_tilde/2");

    IntersectionReport rep;
    rep.bound = std::pow(2.0, -4.0 * m.gamma) * m.v_gamma() *
                std::pow(r_tilde, static_cast<double>(m.gamma));
    if (m.gamma == 1) {
        // arcs [-r, r] and [rho - r_tilde, rho + r_tilde] in arclength coordinates
        double lo = std::max(-r, rho - r_tilde);
        double hi = std::min(r, rho + r_tilde);
        rep.volume = std::max(0.0, hi - lo);
        rep.sigma = 0.0;
    } else {
        if (mc_n < 1) throw std::invalid_argument("mc_n must be >= 1");
        auto samples = sample_uniform(m, mc_n, seed);
        std::size_t hits = 0;
        for (const auto& s : samples) {
            if (geodesic_distance(m, s.data(), x) <= r &&
                geodesic_distance(m, s.data(), x_tilde) <= r_tilde)
                ++hits;
        }
        const double p = static_cast<double>(hits) / mc_n;
        const double area = m.total_volume();
        rep.volume = p * area;
        rep.sigma = area * std::sqrt(std::max(p * (1.0 - p), 1.0 / mc_n) / mc_n);
    }
    rep.pass = rep.volume >= rep.bound - 3.0 * rep.sigma;
    return rep;
}

std::vector<int> separated_net(const std::vector<std::vector<double>>& points, double r) {
    if (r < 0.0) throw std::invalid_argument("separation radius must be >= 0");
    std::vector<int> kept;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool ok = true;
        for (int j : kept) {
            const auto& p = points[static_cast<std::size_t>(j)];
            double d2 = euclidean_dist2(points[i].data(), p.data(),
                                        static_cast<int>(p.size()));
            if (!(d2 > r * r)) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(static_cast<int>(i));
    }
    return kept;
}

int covering_number(const std::vector<std::vector<double>>& points, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("covering radius must be > 0");
    if (points.empty()) return 0;
    const int dim = static_cast<int>(points[0].size());
    const double cover2 = r * r * (1.0 + 1e-9); // guards exact-chord ties
    std::vector<double> mind2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        mind2[i] = euclidean_dist2(points[i].data(), points[0].data(), dim);
    int centers = 1;
    for (;;) {
        std::size_t far = 0;
        double far_d2 = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (mind2[i] > far_d2) {
                far_d2 = mind2[i];
                far = i;
            }
        if (far_d2 <= cover2) break;
        ++centers;
        for (std::size_t i = 0; i < points.size(); ++i)
            mind2[i] = std::min(mind2[i],
                                euclidean_dist2(points[i].data(), points[far].data(), dim));
    }
    return centers;
}

CoveringBounds covering_bounds(const std::vector<std::vector<double>>& points, double r) {
    CoveringBounds b;
    b.upper = covering_number(points, r);
    b.lower = static_cast<int>(separated_net(points, 2.0 * r).size());
    return b;
}

double dudley_bound(const std::vector<std::vector<double>>& points) {
    if (points.empty()) throw std::invalid_argument("dudley_bound needs at least one point");
    const int dim = static_cast<int>(points[0].size());
    double diam2 = 0.0;
    double min_pos2 = std::numeric_limits<double>::infinity();
    std::size_t n_distinct = 0;
    {
        // count distinct points through the 0-separated greedy net
        n_distinct = separated_net(points, 0.0).size();
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double d2 = euclidean_dist2(points[i].data(), points[j].data(), dim);
            diam2 = std::max(diam2, d2);
            if (d2 > 0.0) min_pos2 = std::min(min_pos2, d2);
        }
    if (n_distinct <= 1) return 0.0;

    const double r_lo = 0.5 * std::sqrt(min_pos2);
    const double diam = std::sqrt(diam2);
    const double head = r_lo * std::sqrt(std::log(static_cast<double>(n_distinct)));

    constexpr int steps = 64;
    const double ratio = diam / r_lo;
    auto node = [&](int i) { return r_lo * std::pow(ratio, static_cast<double>(i) / steps); };
    auto integrand = [&](double r) {
        return std::sqrt(std::log(static_cast<double>(covering_number(points, r))));
    };
    double trap = 0.0;
    double prev_r = node(0);
    double prev_g = integrand(prev_r);
    for (int i = 1; i <= steps; ++i) {
        double cur_r = node(i);
        double cur_g = integrand(cur_r);
        trap += 0.5 * (cur_r - prev_r) * (prev_g + cur_g);
        prev_r = cur_r;
        prev_g = cur_g;
    }
    return (head + trap) / std::sqrt(std::log(2.0));
}

void validate(const RegularityParams& p) {
    if (!(p.c0 > 0.0 && p.c0 <= 1.0)) throw std::invalid_argument("c0 must lie in (0,1]");
    if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    for (double v : {p.r0, p.nu_min, p.nu_max, p.zeta_max, p.C_alpha, p.beta, p.C_beta})
        if (!(v > 0.0)) throw std::invalid_argument("regularity params must be positive");
    if (p.nu_max < p.nu_min) throw std::invalid_argument("nu_max must be >= nu_min");
}

std::pair<double, double> smoothness_constants(const RegularityParams& p,
                                               const EmbeddedManifold& m) {
    validate(p);
    const double g = static_cast<double>(m.gamma);
    const double lambda = p.alpha / g;
    const double head = std::max({p.C_alpha, std::pow(m.reach() / 8.0, -p.alpha),
                                  std::pow(p.r0, -p.alpha)});
    const double cell = p.c0 * p.nu_min * std::pow(4.0, -g) * m.v_gamma();
    return {lambda, head * std::pow(cell, -lambda)};
}

double doubling_constant(const RegularityParams& p, const EmbeddedManifold& m) {
    validate(p);
    const double g = static_cast<double>(m.gamma);
    const double cell = p.c0 * p.nu_min * std::pow(4.0, -g) * m.v_gamma();
    const double a = p.nu_max * std::pow(4.0, g) * m.v_gamma();
    const double b = std::pow(std::min(m.reach() / 8.0, p.r0), -g);
    return std::max(a, b) / cell;
}

} // namespace csknn
