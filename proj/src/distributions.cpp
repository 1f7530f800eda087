#include "csknn/distributions.hpp"

#include "csknn/math_util.hpp"
#include "csknn/neighbours.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csknn {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// piecewise-linear bump: 1 on [0,1/3], 2-3t on [1/3,2/3], 0 beyond
double bump(double t) {
    if (t <= 1.0 / 3.0) return 1.0;
    if (t >= 2.0 / 3.0) return 0.0;
    return 2.0 - 3.0 * t;
}

double min_label_cost(const CostMatrix& phi, const ProbVector& n) {
    double best = label_cost(phi, 1, n);
    for (int y = 2; y <= phi.L; ++y) best = std::min(best, label_cost(phi, y, n));
    return best;
}

// uniform draw from the closed geodesic cap of radius cap_r around the
// canonical base point (angle 0 / north pole)
std::vector<double> draw_in_cap(const EmbeddedManifold& m, double cap_r, Rng& rng) {
    if (m.kind == ManifoldKind::circle) {
        const double a = cap_r / m.R;
        const double theta = rng.uniform(-a, a);
        const double canon[2] = {m.R * std::cos(theta), m.R * std::sin(theta)};
        return m.embed(canon);
    }
    const double z_lo = m.R * std::cos(std::min(cap_r / m.R, kPi));
    const double z = rng.uniform(z_lo, m.R);
    const double phi_ang = rng.uniform(0.0, 2.0 * kPi);
    const double rho = std::sqrt(std::max(m.R * m.R - z * z, 0.0));
    const double canon[3] = {rho * std::cos(phi_ang), rho * std::sin(phi_ang), z};
    return m.embed(canon);
}

double bisect_quantile(const SyntheticDistribution& dist, const double* x, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
    if (p == 0.0) return 0.0;
    double lo = 0.0;
    double hi = 2.0 * dist.manifold().R;
    // below the 1e-10 contract: the hard-family measure has arc slope up to
    // ~nu_star, so radius error must stay ~1e-12 for the identity check
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (dist.ball_measure(x, mid) >= p) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

} // namespace

int SyntheticDistribution::sample_label(const double* x, Rng& rng) const {
    const ProbVector p = eta(x);
    const double u = rng.uniform01();
    double cum = 0.0;
    for (int y = 0; y < p.size(); ++y) {
        cum += p[y];
        if (u < cum) return y + 1;
    }
    return p.size();
}

Dataset SyntheticDistribution::sample_dataset(int n, Rng& rng) const {
    if (n < 0) throw std::invalid_argument("sample count must be nonnegative");
    Dataset data;
    data.d = ambient_dim();
    data.L = num_labels();
    data.features.reserve(static_cast<std::size_t>(n) * data.d);
    data.labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::vector<double> x = sample_point(rng);
        data.features.insert(data.features.end(), x.begin(), x.end());
        data.labels.push_back(sample_label(x.data(), rng));
    }
    return data;
}

ProbVector conditional_eval(const SyntheticDistribution& dist, const double* x) {
    return dist.eta(x);
}

Dataset sample(const SyntheticDistribution& dist, int count, std::uint64_t seed) {
    Rng rng(seed);
    return dist.sample_dataset(count, rng);
}

HardConstruction hard_params(const CostMatrix& phi, const RegularityParams& params,
                             const EmbeddedManifold& m, double r, std::uint64_t seed) {
    validate(params);
    const CostCalibration cal = calibrate(phi);
    HardConstruction hc;
    hc.r = r;
    hc.tau_tilde = std::min(m.reach(), 1.0);
    hc.r_star = hc.tau_tilde / 16.0;
    if (!(r > 0.0) || r >= hc.r_star) throw std::invalid_argument("cell scale r out of range");

    // greedy maximal Euclidean r-separated net over the base point plus 1e5
    // uniform candidates in the closed geodesic ball of radius r_star
    std::vector<std::vector<double>> candidates;
    candidates.reserve(100001);
    {
        std::vector<double> canon(static_cast<std::size_t>(m.gamma) + 1, 0.0);
        canon[m.kind == ManifoldKind::circle ? 0 : 2] = m.R;
        candidates.push_back(m.embed(canon));
    }
    Rng rng(seed);
    for (int i = 0; i < 100000; ++i) candidates.push_back(draw_in_cap(m, hc.r_star, rng));
    const std::vector<int> kept = separated_net(candidates, r);
    hc.centers.reserve(kept.size());
    for (int idx : kept) hc.centers.push_back(candidates[static_cast<std::size_t>(idx)]);
    hc.Q = static_cast<int>(hc.centers.size());

    const double packing = std::pow(std::pow(2.0, -8.0) * hc.tau_tilde, m.gamma) *
                           std::pow(r, -static_cast<double>(m.gamma));
    if (static_cast<double>(hc.Q) < packing) {
        throw std::logic_error("net smaller than the guaranteed packing");
    }

    hc.support_volume = hc.Q * geodesic_ball_volume(m, r / 6.0);
    hc.nu_star = 1.0 / hc.support_volume;

    hc.delta_r = std::min(cal.t_phi / 2.0, (params.C_alpha / 12.0) * std::pow(r, params.alpha));
    const double vg = m.v_gamma();
    hc.v_r = hc.nu_star * std::pow(4.0, -m.gamma) * vg * std::pow(r / 6.0, m.gamma);
    hc.u_r = hc.nu_star * std::pow(4.0, m.gamma) * vg * std::pow(r / 3.0, m.gamma);
    const double mass_cap = params.C_beta * std::pow(cal.c_phi * hc.delta_r, params.beta);
    const double m_real = std::floor(mass_cap / hc.u_r);
    hc.m_r = static_cast<int>(std::min<double>(hc.Q, std::max(0.0, m_real)));
    if (hc.m_r * hc.u_r > mass_cap * (1.0 + 1e-12)) {
        throw std::logic_error("flipped-cell mass exceeds the margin budget");
    }
    return hc;
}

HardDistribution::HardDistribution(EmbeddedManifold manifold, CostMatrix phi,
                                   RegularityParams params, double r, std::vector<int> sigma,
                                   std::uint64_t seed)
    : m_(std::move(manifold)), phi_(std::move(phi)), params_(params), sigma_(std::move(sigma)) {
    cal_ = calibrate(phi_);
    hc_ = hard_params(phi_, params, m_, r, seed);
    if (static_cast<int>(sigma_.size()) != hc_.m_r) throw std::invalid_argument("sigma length mismatch");
    for (int s : sigma_) {
        if (s < -1 || s > 1) throw std::invalid_argument("sigma entries must be -1, 0 or +1");
    }
    // support regularity and margin range follow from the construction, not
    // from the caller: nu is uniform on S(r), the margin scale is Z_phi / 2
    params_.c0 = std::pow(2.0, -14.0 * m_.gamma);
    params_.r0 = std::min(hc_.r_star, m_.reach() / 8.0);
    params_.nu_min = hc_.nu_star;
    params_.nu_max = hc_.nu_star;
    params_.zeta_max = std::isfinite(cal_.z_phi) ? cal_.z_phi / 2.0 : cal_.c_phi * cal_.t_phi;
    validate(params_);

    cap_radius_ = hc_.r_star + hc_.r / 6.0;
    std::vector<double> canon(static_cast<std::size_t>(m_.gamma) + 1, 0.0);
    canon[m_.kind == ManifoldKind::circle ? 0 : 2] = m_.R;
    x_star_ = m_.embed(canon);

    if (m_.kind == ManifoldKind::sphere) {
        // fixed sample pool so ball_measure is a deterministic function
        Rng pool_rng(derive_seed(seed, 0xBA11));
        mc_pool_.reserve(40000);
        for (int i = 0; i < 40000; ++i) {
            std::vector<double> x;
            do {
                x = draw_in_cap(m_, cap_radius_, pool_rng);
            } while (nearest_center_geo(x.data()) > hc_.r / 6.0);
            mc_pool_.push_back(std::move(x));
        }
    }
}

double HardDistribution::nearest_center_geo(const double* x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : hc_.centers) {
        best = std::min(best, geodesic_distance(m_, x, w.data()));
    }
    return best;
}

std::vector<double> HardDistribution::sample_point(Rng& rng) const {
    for (long attempt = 0; attempt < 10000000L; ++attempt) {
        std::vector<double> x = draw_in_cap(m_, cap_radius_, rng);
        if (nearest_center_geo(x.data()) <= hc_.r / 6.0) return x;
    }
    throw std::runtime_error("rejection sampler failed to hit the support");
}

bool HardDistribution::on_support(const double* x) const {
    const std::vector<double> c = m_.canonical(x);
    double norm2 = 0.0;
    for (double v : c) norm2 += v * v;
    if (std::abs(std::sqrt(norm2) - m_.R) > 1e-8) return false;
    return nearest_center_geo(x) <= hc_.r / 6.0 + 1e-9;
}

ProbVector HardDistribution::conditional_formula(const double* x) const {
    m_.require_on_surface(x);
    double s = 0.0;
    for (int j = 0; j < hc_.m_r; ++j) {
        if (sigma_[static_cast<std::size_t>(j)] == 0) continue;
        const double rho = euclidean_dist(x, hc_.centers[static_cast<std::size_t>(j)].data(), m_.d);
        s += sigma_[static_cast<std::size_t>(j)] * bump(2.0 * rho / hc_.r);
    }
    return two_point(cal_.kappa + hc_.delta_r * s, phi_.L);
}

ProbVector HardDistribution::eta(const double* x) const {
    if (!on_support(x)) throw std::invalid_argument("point off the support");
    return conditional_formula(x);
}

double HardDistribution::ball_measure(const double* x, double r) const {
    return ball_measure_estimate(x, r).value;
}

HardDistribution::MeasureEstimate HardDistribution::ball_measure_estimate(const double* x,
                                                                          double r) const {
    if (r < 0.0) throw std::invalid_argument("ball radius must be nonnegative");
    if (m_.kind == ManifoldKind::circle) {
        const std::vector<double> c = m_.canonical(x);
        const double theta = std::atan2(c[1], c[0]);
        // chord <= r covers the arc of angular half-width b around x
        const double b = 2.0 * std::asin(std::min(r / (2.0 * m_.R), 1.0));
        const double half_cell = (hc_.r / 6.0) / m_.R;
        double arc = 0.0;
        for (const auto& w : hc_.centers) {
            const std::vector<double> cw = m_.canonical(w.data());
            double dlt = std::atan2(cw[1], cw[0]) - theta;
            while (dlt > kPi) dlt -= 2.0 * kPi;
            while (dlt <= -kPi) dlt += 2.0 * kPi;
            for (int k = -1; k <= 1; ++k) {
                const double lo = dlt + 2.0 * kPi * k - half_cell;
                const double hi = dlt + 2.0 * kPi * k + half_cell;
                arc += std::max(0.0, std::min(hi, b) - std::max(lo, -b));
            }
        }
        return {std::min(1.0, hc_.nu_star * m_.R * arc), 0.0};
    }
    std::size_t hits = 0;
    const double r2 = r * r;
    for (const auto& p : mc_pool_) {
        if (euclidean_dist2(x, p.data(), m_.d) <= r2) ++hits;
    }
    const double n = static_cast<double>(mc_pool_.size());
    const double frac = static_cast<double>(hits) / n;
    return {frac, std::sqrt(std::max(frac * (1.0 - frac), 1.0 / n) / n)};
}

double HardDistribution::quantile_radius(const double* x, double p) const {
    return bisect_quantile(*this, x, p);
}

std::unique_ptr<HardDistribution> build_hard(const EmbeddedManifold& m, const CostMatrix& phi,
                                             const RegularityParams& params, double r,
                                             const std::vector<int>& sigma, std::uint64_t seed) {
    return std::make_unique<HardDistribution>(m, phi, params, r, sigma, seed);
}

BenignDistribution::BenignDistribution(EmbeddedManifold manifold, int m_freq, double kappa,
                                       double amplitude, CostMatrix phi)
    : m_(std::move(manifold)), phi_(std::move(phi)), m_freq_(m_freq), kappa_(kappa),
      amplitude_(amplitude) {
    if (m_freq_ < 1) throw std::invalid_argument("frequency must be at least 1");
    if (!(amplitude_ >= 0.0)) throw std::invalid_argument("amplitude must be nonnegative");
    if (kappa_ - amplitude_ < -1e-12 || kappa_ + amplitude_ > 1.0 + 1e-12) {
        throw std::invalid_argument("sinusoid range leaves [0, 1]");
    }
    if (phi_.L != 2) throw std::invalid_argument("sinusoid family is binary");

    params_.c0 = 1.0; // full support
    params_.r0 = m_.R;
    params_.nu_min = 1.0 / m_.total_volume();
    params_.nu_max = params_.nu_min;
    params_.alpha = 1.0;
    if (amplitude_ > 0.0) {
        // chord-exact on the circle; the pi/2 factor covers latitude waves
        // with m >= 2 whose chord ratio exceeds the geodesic one
        const double base = amplitude_ * m_freq_ / m_.R;
        params_.C_alpha = (m_.kind == ManifoldKind::sphere && m_freq_ >= 2) ? base * kPi / 2.0 : base;
        params_.beta = 1.0;
        params_.C_beta = 1.0 / (2.0 * amplitude_);
        params_.zeta_max = 2.0 * amplitude_;
    } else {
        params_.C_alpha = 1.0;
        params_.beta = 1.0;
        params_.C_beta = 1.0;
        const double m0 = margin(phi_, two_point(1.0 - kappa_, 2));
        params_.zeta_max = (std::isfinite(m0) && m0 > 0.0) ? m0 / 2.0 : 1.0;
    }
    validate(params_);
}

std::vector<double> BenignDistribution::sample_point(Rng& rng) const {
    if (m_.kind == ManifoldKind::circle) {
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double canon[2] = {m_.R * std::cos(theta), m_.R * std::sin(theta)};
        return m_.embed(canon);
    }
    const double z = rng.uniform(-m_.R, m_.R);
    const double phi_ang = rng.uniform(0.0, 2.0 * kPi);
    const double rho = std::sqrt(std::max(m_.R * m_.R - z * z, 0.0));
    const double canon[3] = {rho * std::cos(phi_ang), rho * std::sin(phi_ang), z};
    return m_.embed(canon);
}

bool BenignDistribution::on_support(const double* x) const {
    const std::vector<double> c = m_.canonical(x);
    double norm2 = 0.0;
    for (double v : c) norm2 += v * v;
    return std::abs(std::sqrt(norm2) - m_.R) <= 1e-8;
}

ProbVector BenignDistribution::eta(const double* x) const {
    m_.require_on_surface(x);
    const std::vector<double> c = m_.canonical(x);
    double eta1;
    if (m_.kind == ManifoldKind::circle) {
        eta1 = kappa_ + amplitude_ * std::sin(m_freq_ * std::atan2(c[1], c[0]));
    } else {
        const double lat = std::asin(std::clamp(c[2] / m_.R, -1.0, 1.0));
        eta1 = kappa_ + amplitude_ * std::sin(m_freq_ * lat);
    }
    eta1 = clamp01(eta1);
    return make_prob_vector({eta1, 1.0 - eta1});
}

double BenignDistribution::ball_measure(const double* x, double r) const {
    if (r < 0.0) throw std::invalid_argument("ball radius must be nonnegative");
    (void)x;
    if (m_.kind == ManifoldKind::circle) {
        return (2.0 / kPi) * std::asin(std::min(r / (2.0 * m_.R), 1.0));
    }
    return std::min(1.0, (r * r) / (4.0 * m_.R * m_.R));
}

double BenignDistribution::quantile_radius(const double* x, double p) const {
    return bisect_quantile(*this, x, p);
}

std::unique_ptr<BenignDistribution> build_benign(const EmbeddedManifold& m, int m_freq,
                                                 double kappa, double amplitude, CostMatrix phi) {
    return std::make_unique<BenignDistribution>(m, m_freq, kappa, amplitude, std::move(phi));
}

BayesOracle bayes_oracle(const SyntheticDistribution& dist, const CostMatrix& phi) {
    if (phi.L != dist.num_labels()) throw std::invalid_argument("label count mismatch");
    BayesOracle out;
    if (const auto* h = dynamic_cast<const HardDistribution*>(&dist)) {
        // eta is exactly n(kappa + delta sigma_j) on cell j and the cells
        // carry equal mass 1/Q, so the Bayes risk is a finite average
        const HardConstruction& hc = h->construction();
        const double kappa = h->calibration().kappa;
        double total = 0.0;
        for (int j = 0; j < hc.m_r; ++j) {
            total += min_label_cost(phi, two_point(kappa + hc.delta_r * h->sigma()[static_cast<std::size_t>(j)], phi.L));
        }
        total += (hc.Q - hc.m_r) * min_label_cost(phi, two_point(kappa, phi.L));
        out.risk = total / hc.Q;
    } else if (const auto* b = dynamic_cast<const BenignDistribution*>(&dist)) {
        const double kappa = b->kappa();
        const double amp = b->amplitude();
        const int freq = b->frequency();
        if (dist.manifold().kind == ManifoldKind::circle) {
            const auto f = [&](double theta) {
                const double e1 = clamp01(kappa + amp * std::sin(freq * theta));
                return min_label_cost(phi, make_prob_vector({e1, 1.0 - e1}));
            };
            out.risk = integrate(f, 0.0, 2.0 * kPi, 1e-12) / (2.0 * kPi);
        } else {
            const double R = dist.manifold().R;
            const auto f = [&](double z) {
                const double e1 = clamp01(kappa + amp * std::sin(freq * std::asin(std::clamp(z / R, -1.0, 1.0))));
                return min_label_cost(phi, make_prob_vector({e1, 1.0 - e1}));
            };
            out.risk = integrate(f, -R, R, 1e-12) / (2.0 * R);
        }
    } else {
        throw std::logic_error("no oracle for this distribution family");
    }
    out.sigma = 0.0;
    out.f_star = [pd = &dist, phi](const double* x) {
        return optimal_labels(phi, pd->eta(x)).front();
    };
    return out;
}

ValidationReport validate(const SyntheticDistribution& dist, ValidationKind kind, int budget,
                          std::uint64_t seed, double z) {
    if (budget < 1000) throw std::invalid_argument("validation budget must be at least 1000");
    if (!(z > 0.0)) throw std::invalid_argument("sigma multiplier must be positive");
    const RegularityParams& p = dist.params();
    ValidationReport rep;
    Rng rng(seed);

    if (kind == ValidationKind::margin) {
        const CostMatrix& phi = dist.cost_matrix();
        std::vector<double> margins(static_cast<std::size_t>(budget));
        for (auto& mg : margins) {
            const std::vector<double> x = dist.sample_point(rng);
            mg = margin(phi, dist.eta(x.data()));
        }
        std::sort(margins.begin(), margins.end());
        rep.pass = true;
        rep.hat_c_beta = 0.0;
        for (int g = 1; g <= 50; ++g) {
            const double zeta = p.zeta_max * g / 50.0;
            const auto it = std::upper_bound(margins.begin(), margins.end(), zeta);
            const double frac = static_cast<double>(it - margins.begin()) / budget;
            const double sg = std::sqrt(std::max(frac * (1.0 - frac), 1.0 / budget) / budget);
            const double cap = p.C_beta * std::pow(zeta, p.beta);
            if (frac > cap + z * sg) rep.pass = false;
            const double feasible = frac / std::pow(zeta, p.beta);
            if (feasible > rep.hat_c_beta) {
                rep.hat_c_beta = feasible;
                rep.worst_zeta = zeta;
                rep.sigma = sg;
            }
        }
        return rep;
    }

    if (kind == ValidationKind::holder) {
        rep.pass = true;
        rep.worst_ratio = 0.0;
        for (int i = 0; i < budget; ++i) {
            const std::vector<double> x0 = dist.sample_point(rng);
            const std::vector<double> x1 = dist.sample_point(rng);
            const double rho = euclidean_dist(x0.data(), x1.data(), dist.ambient_dim());
            if (rho < 1e-15) continue;
            const ProbVector e0 = dist.eta(x0.data());
            const ProbVector e1 = dist.eta(x1.data());
            double diff = 0.0;
            for (int y = 0; y < e0.size(); ++y) diff = std::max(diff, std::abs(e0[y] - e1[y]));
            rep.worst_ratio = std::max(rep.worst_ratio, diff / std::pow(rho, p.alpha));
        }
        rep.pass = rep.worst_ratio <= p.C_alpha + 1e-9;
        return rep;
    }

    // regularity: V(A n B_r(x)) >= c0 V(B_r(x)) for support centers x, r <= r0
    const EmbeddedManifold& m = dist.manifold();
    const int n_centers = 20;
    const int n_radii = 16;
    std::vector<std::vector<double>> centers;
    centers.reserve(n_centers);
    for (int i = 0; i < n_centers; ++i) centers.push_back(dist.sample_point(rng));
    const auto cloud = sample_uniform(m, budget, derive_seed(seed, 77));
    std::vector<char> in_support(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        in_support[i] = dist.on_support(cloud[i].data()) ? 1 : 0;
    }
    const double vm = m.total_volume();
    rep.pass = true;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    std::vector<double> d2(cloud.size());
    for (const auto& c : centers) {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            d2[i] = euclidean_dist2(c.data(), cloud[i].data(), m.d);
        }
        for (int t = 1; t <= n_radii; ++t) {
            const double r = p.r0 * t / n_radii;
            const double r2 = r * r;
            std::size_t hits = 0;
            for (std::size_t i = 0; i < cloud.size(); ++i) {
                if (in_support[i] && d2[i] <= r2) ++hits;
            }
            const double frac = static_cast<double>(hits) / static_cast<double>(cloud.size());
            const double denom = euclidean_ball_volume(m, r);
            const double ratio = vm * frac / denom;
            const double sg = vm * std::sqrt(std::max(frac * (1.0 - frac), 1.0 / budget) / budget) / denom;
            if (ratio < p.c0 - z * sg) rep.pass = false;
            if (ratio < rep.min_ratio) {
                rep.min_ratio = ratio;
                rep.sigma = sg;
            }
        }
    }
    return rep;
}

} // namespace csknn
