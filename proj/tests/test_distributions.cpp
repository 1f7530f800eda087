#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "csknn/classifier.hpp"
#include "csknn/distributions.hpp"
#include "csknn/math_util.hpp"
#include "csknn/neighbours.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace csknn;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> embed_angle(const EmbeddedManifold& m, double theta) {
    const double canon[2] = {m.R * std::cos(theta), m.R * std::sin(theta)};
    return m.embed(canon);
}

std::vector<double> embed_lat(const EmbeddedManifold& m, double z, double lon) {
    const double rho = std::sqrt(std::max(m.R * m.R - z * z, 0.0));
    const double canon[3] = {rho * std::cos(lon), rho * std::sin(lon), z};
    return m.embed(canon);
}

RegularityParams smooth_params(double c_beta) {
    RegularityParams p;
    p.alpha = 1.0;
    p.C_alpha = 1.0;
    p.beta = 1.0;
    p.C_beta = c_beta;
    return p;
}

std::unique_ptr<HardDistribution> circle_hard(std::vector<int> sigma_pattern = {},
                                              std::uint64_t seed = 5) {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    const auto phi = CostMatrix::zero_one(2);
    const HardConstruction hc = hard_params(phi, smooth_params(2000.0), m, 1.0 / 32.0, seed);
    std::vector<int> sigma(static_cast<std::size_t>(hc.m_r), 0);
    for (std::size_t j = 0; j < sigma.size() && j < sigma_pattern.size(); ++j) {
        sigma[j] = sigma_pattern[j];
    }
    return build_hard(m, phi, smooth_params(2000.0), 1.0 / 32.0, sigma, seed);
}

} // namespace

TEST_CASE("hard construction on the circle") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    const auto phi = CostMatrix::zero_one(2);
    const double r = 1.0 / 32.0;
    const HardConstruction hc = hard_params(phi, smooth_params(2000.0), m, r, 5);

    CHECK(hc.tau_tilde == 1.0);
    CHECK(hc.r_star == 1.0 / 16.0);
    CHECK(hc.Q >= 3);
    CHECK(hc.Q <= 5);
    CHECK(static_cast<double>(hc.Q) >= std::pow(2.0, -8.0) / r); // packing bound

    // centers live in the geodesic r_star ball and are r-separated
    std::vector<double> canon{m.R, 0.0};
    const auto x_star = m.embed(canon);
    for (std::size_t i = 0; i < hc.centers.size(); ++i) {
        CHECK(geodesic_distance(m, x_star.data(), hc.centers[i].data()) <= hc.r_star + 1e-7);
        for (std::size_t j = i + 1; j < hc.centers.size(); ++j) {
            CHECK(euclidean_dist(hc.centers[i].data(), hc.centers[j].data(), m.d) > r);
        }
    }

    CHECK(hc.delta_r == doctest::Approx(1.0 / 384.0).epsilon(1e-12)); // min{1/4, r/12}
    CHECK(hc.support_volume == doctest::Approx(hc.Q * 2.0 * (r / 6.0)).epsilon(1e-12));
    CHECK(hc.nu_star == doctest::Approx(1.0 / hc.support_volume).epsilon(1e-12));

    const double vg = 2.0;
    CHECK(hc.v_r == doctest::Approx(hc.nu_star * 0.25 * vg * (r / 6.0)).epsilon(1e-12));
    CHECK(hc.u_r == doctest::Approx(hc.nu_star * 4.0 * vg * (r / 3.0)).epsilon(1e-12));

    // flipped mass stays within the margin budget, and here saturates at Q
    CHECK(hc.m_r == hc.Q);
    CHECK(hc.m_r * hc.u_r <= 2000.0 * (2.0 * hc.delta_r) * (1.0 + 1e-12));

    // support volume sandwich
    const double lower = (1.0 / 3.0) * std::pow(2.0, -12.0) * vg;
    const double upper = vg * 0.5;
    CHECK(hc.support_volume >= lower);
    CHECK(hc.support_volume <= upper);
}

TEST_CASE("hard construction rejects bad inputs") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 4, 2);
    const auto phi = CostMatrix::zero_one(2);
    CHECK_THROWS(hard_params(phi, smooth_params(10.0), m, 1.0 / 16.0, 1)); // r == r_star
    CHECK_THROWS(hard_params(phi, smooth_params(10.0), m, 0.0, 1));
    CHECK_THROWS(hard_params(phi, smooth_params(10.0), m, -0.5, 1));

    const HardConstruction hc = hard_params(phi, smooth_params(2000.0), m, 1.0 / 32.0, 1);
    std::vector<int> bad_len(static_cast<std::size_t>(hc.m_r) + 1, 0);
    CHECK_THROWS(build_hard(m, phi, smooth_params(2000.0), 1.0 / 32.0, bad_len, 1));
    std::vector<int> bad_entry(static_cast<std::size_t>(hc.m_r), 0);
    bad_entry[0] = 5;
    CHECK_THROWS(build_hard(m, phi, smooth_params(2000.0), 1.0 / 32.0, bad_entry, 1));
}

TEST_CASE("hard conditional takes the three cell values") {
    auto dist = circle_hard({+1, -1});
    const auto& hc = dist->construction();
    const double kappa = dist->calibration().kappa;
    const double delta = hc.delta_r;
    REQUIRE(hc.m_r >= 3);

    const ProbVector at_plus = dist->eta(hc.centers[0].data());
    CHECK(at_plus[1] == doctest::Approx(kappa + delta).epsilon(1e-12));
    const ProbVector at_minus = dist->eta(hc.centers[1].data());
    CHECK(at_minus[1] == doctest::Approx(kappa - delta).epsilon(1e-12));
    const ProbVector at_zero = dist->eta(hc.centers[2].data());
    CHECK(at_zero[1] == doctest::Approx(kappa).epsilon(1e-12));

    // half-height of the bump at Euclidean distance r/4 from a flipped center;
    // that point is off the support, so only the raw formula accepts it
    const auto cw = dist->manifold().canonical(hc.centers[1].data());
    const double phi1 = std::atan2(cw[1], cw[0]);
    const double u = 2.0 * std::asin(hc.r / 8.0);
    const auto x_quarter = embed_angle(dist->manifold(), phi1 + u);
    CHECK(euclidean_dist(x_quarter.data(), hc.centers[1].data(), dist->ambient_dim()) ==
          doctest::Approx(hc.r / 4.0).epsilon(1e-12));
    CHECK_FALSE(dist->on_support(x_quarter.data()));
    CHECK_THROWS(dist->eta(x_quarter.data()));
    const ProbVector half = dist->conditional_formula(x_quarter.data());
    CHECK(half[1] == doctest::Approx(kappa - delta / 2.0).epsilon(1e-9));

    // antipode of the base point: off support, formula still evaluates
    const auto antipode = embed_angle(dist->manifold(), kPi);
    CHECK_THROWS(dist->eta(antipode.data()));
    const ProbVector far = dist->conditional_formula(antipode.data());
    CHECK(far[1] == doctest::Approx(kappa).epsilon(1e-12));

    // all-zero sigma collapses to the constant two-point conditional
    auto flat = circle_hard();
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const auto x = flat->sample_point(rng);
        const ProbVector e = flat->eta(x.data());
        CHECK(e[1] == doctest::Approx(kappa).epsilon(1e-12));
    }
}

TEST_CASE("hard sampler stays on the support and is deterministic") {
    auto dist = circle_hard({+1, -1, +1});
    const auto& hc = dist->construction();
    Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
        const auto x = dist->sample_point(rng);
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& w : hc.centers) {
            nearest = std::min(nearest, geodesic_distance(dist->manifold(), x.data(), w.data()));
        }
        CHECK(nearest <= hc.r / 6.0 + 1e-9);
    }

    const Dataset a = sample(*dist, 300, 99);
    const Dataset b = sample(*dist, 300, 99);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.d == 5);
    CHECK(a.L == 2);
    for (int y : a.labels) {
        CHECK(y >= 1);
        CHECK(y <= 2);
    }
}

TEST_CASE("hard label frequencies match the conditional") {
    auto dist = circle_hard({+1, +1, -1});
    const auto& hc = dist->construction();
    const double kappa = dist->calibration().kappa;
    int sum_sigma = 0;
    for (int s : dist->sigma()) sum_sigma += s;
    const double expect = kappa + hc.delta_r * sum_sigma / hc.Q;

    const int n = 200000;
    const Dataset data = sample(*dist, n, 314);
    double freq2 = 0.0;
    for (int y : data.labels) freq2 += (y == 2) ? 1.0 : 0.0;
    freq2 /= n;
    const double sg = std::sqrt(expect * (1.0 - expect) / n);
    CHECK(std::abs(freq2 - expect) <= 3.0 * sg);
}

TEST_CASE("hard ball measure on the circle: arcs, monotonicity, quantile identity") {
    auto dist = circle_hard({+1, -1});
    const auto& hc = dist->construction();
    const double* w0 = hc.centers[0].data();
    const double rc = hc.r;

    // ball of geodesic radius rc/12 around a center covers half its cell
    const double half_cell_chord = 2.0 * std::sin(rc / 24.0);
    CHECK(dist->ball_measure(w0, half_cell_chord) ==
          doctest::Approx(1.0 / (2.0 * hc.Q)).epsilon(1e-10));
    CHECK(dist->quantile_radius(w0, 1.0 / (2.0 * hc.Q)) ==
          doctest::Approx(half_cell_chord).epsilon(1e-7));

    double prev = -1.0;
    for (int t = 0; t <= 40; ++t) {
        const double r = 2.0 * t / 40.0;
        const double mu = dist->ball_measure(w0, r);
        CHECK(mu >= prev - 1e-15);
        prev = mu;
    }
    CHECK(dist->ball_measure(w0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(dist->quantile_radius(w0, 0.0) == 0.0);
    const double r_full = dist->quantile_radius(w0, 1.0);
    CHECK(dist->ball_measure(w0, r_full) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(dist->quantile_radius(w0, -0.1));
    CHECK_THROWS(dist->quantile_radius(w0, 1.5));

    // identity grid inside the strictly increasing stretch around one cell
    for (double frac : {0.2, 0.5, 0.8, 0.99}) {
        const double r = 2.0 * std::sin(frac * rc / 12.0);
        const double back = dist->quantile_radius(w0, dist->ball_measure(w0, r));
        CHECK(std::abs(back - r) <= 1e-8);
    }
}

TEST_CASE("benign ball measure and quantile") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 6, 3);
    auto dist = build_benign(m);
    const auto x = embed_angle(m, 0.7);
    CHECK(dist->ball_measure(x.data(), 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist->ball_measure(x.data(), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(dist->quantile_radius(x.data(), 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    for (double frac : {0.1, 0.4, 0.9}) {
        const double back = dist->quantile_radius(x.data(), dist->ball_measure(x.data(), frac));
        CHECK(std::abs(back - frac) <= 1e-8);
    }

    const auto ms = make_manifold(ManifoldKind::sphere, 1.0, 6, 3);
    auto dsph = build_benign(ms);
    const auto xs = embed_lat(ms, 0.3, 1.1);
    CHECK(dsph->ball_measure(xs.data(), 1.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(dsph->ball_measure(xs.data(), 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double frac : {0.1, 0.5, 1.3}) {
        const double back = dsph->quantile_radius(xs.data(), dsph->ball_measure(xs.data(), frac));
        CHECK(std::abs(back - frac) <= 1e-8);
    }
}

TEST_CASE("hard sphere instance") {
    const auto m = make_manifold(ManifoldKind::sphere, 1.0, 5, 3);
    const auto phi = CostMatrix::zero_one(2);
    const double r = 1.0 / 32.0;
    const HardConstruction probe = hard_params(phi, smooth_params(10000.0), m, r, 9);
    CHECK(probe.Q >= 5);
    REQUIRE(probe.m_r >= 1);

    std::vector<int> sigma(static_cast<std::size_t>(probe.m_r), 0);
    sigma[0] = 1;
    if (sigma.size() > 1) sigma[1] = -1;
    auto dist = build_hard(m, phi, smooth_params(10000.0), r, sigma, 9);
    const auto& hc = dist->construction();

    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        const auto x = dist->sample_point(rng);
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& w : hc.centers) {
            nearest = std::min(nearest, geodesic_distance(m, x.data(), w.data()));
        }
        CHECK(nearest <= hc.r / 6.0 + 1e-9);
    }

    const double* w0 = hc.centers[0].data();
    const auto est = dist->ball_measure_estimate(w0, 0.02);
    CHECK(est.sigma > 0.0);
    CHECK(est.value >= 0.0);
    CHECK(est.value <= 1.0);
    double prev = -1.0;
    for (int t = 0; t <= 20; ++t) {
        const double mu = dist->ball_measure(w0, 2.0 * t / 20.0);
        CHECK(mu >= prev);
        prev = mu;
    }
    CHECK(dist->ball_measure(w0, 2.0) == 1.0);
    // step CDF from the sample pool: one-sided quantile consistency
    for (double p : {0.1, 0.5, 0.9}) {
        const double q = dist->quantile_radius(w0, p);
        CHECK(dist->ball_measure(w0, q) >= p);
        CHECK(dist->ball_measure(w0, q * (1.0 - 1e-9)) <= p + 1e-4);
    }

    for (ValidationKind kind :
         {ValidationKind::margin, ValidationKind::holder, ValidationKind::regularity}) {
        const ValidationReport rep = validate(*dist, kind, 20000, 23);
        CHECK(rep.pass);
    }
}

TEST_CASE("benign conditional values") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 11);
    auto dist = build_benign(m);
    const auto x0 = embed_angle(m, 0.0);
    const ProbVector e0 = dist->eta(x0.data());
    CHECK(e0[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e0[1] == doctest::Approx(0.5).epsilon(1e-12));
    const auto x1 = embed_angle(m, kPi / 2.0);
    CHECK(dist->eta(x1.data())[0] == doctest::Approx(1.0).epsilon(1e-12));

    const auto ms = make_manifold(ManifoldKind::sphere, 2.0, 5, 11);
    auto dsph = build_benign(ms);
    const auto north = embed_lat(ms, 2.0, 0.0);
    CHECK(dsph->eta(north.data())[0] == doctest::Approx(1.0).epsilon(1e-12));
    const auto equator = embed_lat(ms, 0.0, 0.4);
    CHECK(dsph->eta(equator.data())[0] == doctest::Approx(0.5).epsilon(1e-12));

    auto constant = build_benign(m, 1, 1.0, 0.0);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const auto x = constant->sample_point(rng);
        CHECK(constant->eta(x.data())[0] == doctest::Approx(1.0).epsilon(1e-15));
    }

    CHECK_THROWS(build_benign(m, 0));
    CHECK_THROWS(build_benign(m, 1, 0.5, 0.75)); // range leaves [0, 1]
    CHECK_THROWS(build_benign(m, 1, 0.5, -0.1));
    CHECK_THROWS(build_benign(m, 1, 0.5, 0.5, CostMatrix::zero_one(3)));
}

TEST_CASE("benign class frequency") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 4, 1);
    auto dist = build_benign(m);
    const int n = 1000000;
    const Dataset data = sample(*dist, n, 8);
    double freq2 = 0.0;
    for (int y : data.labels) freq2 += (y == 2) ? 1.0 : 0.0;
    freq2 /= n;
    CHECK(std::abs(freq2 - 0.5) <= 3.0 * 0.0005);
}

TEST_CASE("bayes oracles") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    const auto phi = CostMatrix::zero_one(2);

    auto benign = build_benign(m);
    const BayesOracle oc = bayes_oracle(*benign, phi);
    CHECK(oc.risk == doctest::Approx(0.5 - 1.0 / kPi).epsilon(1e-9));
    CHECK(oc.sigma == 0.0);
    const auto top = embed_angle(m, kPi / 2.0);
    CHECK(oc.f_star(top.data()) == 1);
    const auto bottom = embed_angle(m, -kPi / 2.0);
    CHECK(oc.f_star(bottom.data()) == 2);

    auto flat = circle_hard();
    CHECK(bayes_oracle(*flat, phi).risk == doctest::Approx(0.5).epsilon(1e-12));

    auto mixed = circle_hard({+1, -1, +1});
    const auto& hc = mixed->construction();
    int flips = 0;
    for (int s : mixed->sigma()) flips += (s != 0) ? 1 : 0;
    const double expect = 0.5 - hc.delta_r * flips / hc.Q;
    CHECK(bayes_oracle(*mixed, phi).risk == doctest::Approx(expect).epsilon(1e-12));

    auto sure = build_benign(m, 1, 1.0, 0.0);
    CHECK(bayes_oracle(*sure, phi).risk == doctest::Approx(0.0).epsilon(1e-12));

    const auto ms = make_manifold(ManifoldKind::sphere, 1.0, 5, 7);
    auto latitude = build_benign(ms);
    CHECK(bayes_oracle(*latitude, phi).risk == doctest::Approx(0.25).epsilon(1e-9));

    CHECK_THROWS(bayes_oracle(*benign, CostMatrix::zero_one(3)));
}

TEST_CASE("margin validator") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    auto benign = build_benign(m);
    const ValidationReport rep = validate(*benign, ValidationKind::margin, 20000, 4);
    CHECK(rep.pass);
    CHECK(rep.hat_c_beta >= 1.0 - 1e-9);
    CHECK(rep.hat_c_beta <= 1.1);

    auto hard = circle_hard({+1, -1, +1});
    CHECK(validate(*hard, ValidationKind::margin, 20000, 4).pass);

    // flipped cells sit at margin >= c_phi * delta
    const auto& hc = hard->construction();
    const auto& cal = hard->calibration();
    for (int j = 0; j < hc.m_r; ++j) {
        if (hard->sigma()[static_cast<std::size_t>(j)] == 0) continue;
        const double mg = margin(hard->cost_matrix(), hard->eta(hc.centers[static_cast<std::size_t>(j)].data()));
        CHECK(mg >= cal.c_phi * hc.delta_r - 1e-9);
    }

    CHECK_THROWS(validate(*benign, ValidationKind::margin, 999, 1));
}

TEST_CASE("holder validator") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    auto benign = build_benign(m);
    const ValidationReport rep = validate(*benign, ValidationKind::holder, 20000, 6);
    CHECK(rep.pass);
    CHECK(rep.worst_ratio <= 0.5 + 1e-9);
    CHECK(rep.worst_ratio > 0.45);

    auto constant = build_benign(m, 1, 1.0, 0.0);
    const ValidationReport flat = validate(*constant, ValidationKind::holder, 2000, 6);
    CHECK(flat.pass);
    CHECK(flat.worst_ratio == 0.0);

    auto hard = circle_hard({+1, -1, +1});
    CHECK(validate(*hard, ValidationKind::holder, 20000, 6).pass);

    const auto ms = make_manifold(ManifoldKind::sphere, 1.0, 5, 7);
    auto latitude = build_benign(ms);
    const ValidationReport sph = validate(*latitude, ValidationKind::holder, 20000, 6);
    CHECK(sph.pass);
    CHECK(sph.worst_ratio > 0.0);
}

TEST_CASE("regularity validator") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    auto benign = build_benign(m);
    const ValidationReport rep = validate(*benign, ValidationKind::regularity, 20000, 8);
    CHECK(rep.pass);
    CHECK(rep.min_ratio > 0.8);
    CHECK(rep.min_ratio < 1.2);

    auto hard = circle_hard({+1, -1});
    const ValidationReport hrep = validate(*hard, ValidationKind::regularity, 20000, 8);
    CHECK(hrep.pass);
    CHECK(hrep.min_ratio >= 0.0);
}

TEST_CASE("evaluate against the oracle mode") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    auto dist = build_benign(m);
    const auto phi = CostMatrix::zero_one(2);
    const Dataset train = sample(*dist, 64, 1);
    const NeighbourIndex idx = build_index(train);

    const EvalResult oracle = evaluate(idx, phi, *dist, 5, QueryMode::oracle, 2000, 77);
    CHECK(oracle.excess_risk == 0.0);
    CHECK(oracle.misclass_prob == 0.0);
}

TEST_CASE("evaluate a constant predictor against quadrature") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    auto dist = build_benign(m);
    const auto phi = CostMatrix::zero_one(2);

    // all-ones training labels force the k-NN vote to predict label 1
    Dataset train = sample(*dist, 256, 3);
    std::fill(train.labels.begin(), train.labels.end(), 1);
    const NeighbourIndex idx = build_index(train);

    const int m_test = 200000;
    const EvalResult res = evaluate(idx, phi, *dist, 256, QueryMode::exact, m_test, 12);
    // E[regret(1, eta)] = (1/2pi) integral max(0, -sin) = 1/pi
    CHECK(std::abs(res.excess_risk - 1.0 / kPi) <= 0.004);
    CHECK(std::abs(res.misclass_prob - 0.5) <= 0.004);
}

TEST_CASE("evaluate scales linearly with the cost matrix") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    auto dist = build_benign(m);
    const Dataset train = sample(*dist, 512, 21);
    const NeighbourIndex idx = build_index(train, nullptr, true);

    const auto phi = CostMatrix::zero_one(2);
    auto scaled = phi;
    for (auto& v : scaled.entries) v *= 7.25;

    const EvalResult base = evaluate(idx, phi, *dist, 17, QueryMode::exact, 4000, 5);
    const EvalResult big = evaluate(idx, scaled, *dist, 17, QueryMode::exact, 4000, 5);
    CHECK(big.excess_risk == doctest::Approx(7.25 * base.excess_risk).epsilon(1e-12));
    CHECK(big.misclass_prob == doctest::Approx(base.misclass_prob).epsilon(1e-12));
}

TEST_CASE("excess risk shrinks with more data") {
    const auto m = make_manifold(ManifoldKind::circle, 1.0, 5, 7);
    auto dist = build_benign(m);
    const auto phi = CostMatrix::zero_one(2);

    double mean_small = 0.0;
    double mean_big = 0.0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        for (int which = 0; which < 2; ++which) {
            const int n = which == 0 ? 512 : 8192;
            const Dataset train = sample(*dist, n, 1000 + t * 2 + which);
            const NeighbourIndex idx = build_index(train, nullptr, true);
            const int k = static_cast<int>(std::ceil(std::pow(n, 2.0 / 3.0)));
            const EvalResult res = evaluate(idx, phi, *dist, k, QueryMode::exact, 2000,
                                            5000 + t * 2 + which);
            (which == 0 ? mean_small : mean_big) += res.excess_risk / trials;
        }
    }
    CHECK(mean_big < mean_small);
}
