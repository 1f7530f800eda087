#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "csknn/manifold.hpp"
#include "csknn/math_util.hpp"
#include "csknn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace csknn;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<std::vector<double>> circle_grid(int n, double radius) {
  std::vector<std::vector<double>> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * pi * i / n;
    pts.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return pts;
}

} // namespace

TEST_CASE("frame is orthonormal and embedding is isometric") {
  auto m = make_manifold(ManifoldKind::sphere, 1.5, 7, 42);
  const int q = m.gamma + 1;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b <= a; ++b) {
      double dot = 0.0;
      for (int i = 0; i < m.d; ++i)
        dot += m.frame[static_cast<std::size_t>(a) * m.d + i] *
               m.frame[static_cast<std::size_t>(b) * m.d + i];
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-10);
    }

  Rng rng(9);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> c0(static_cast<std::size_t>(q)), c1(static_cast<std::size_t>(q));
    for (auto& v : c0) v = rng.normal();
    for (auto& v : c1) v = rng.normal();
    auto x0 = m.embed(c0.data());
    auto x1 = m.embed(c1.data());
    double canon = std::sqrt(euclidean_dist2(c0.data(), c1.data(), q));
    double amb = std::sqrt(euclidean_dist2(x0.data(), x1.data(), m.d));
    CHECK(std::abs(canon - amb) < 1e-10);
  }
}

TEST_CASE("geodesic distances") {
  auto circ = make_manifold(ManifoldKind::circle, 1.0, 4, 3);
  double a[2] = {1, 0}, b[2] = {0, 1};
  auto xa = circ.embed(a);
  auto xb = circ.embed(b);
  CHECK(geodesic_distance(circ, xa, xb) == doctest::Approx(pi / 2));
  CHECK(geodesic_distance(circ, xa, xa) == doctest::Approx(0.0));
  // geodesic dominates the chord
  CHECK(geodesic_distance(circ, xa, xb) >=
        std::sqrt(euclidean_dist2(xa.data(), xb.data(), circ.d)) - 1e-12);

  auto sph = make_manifold(ManifoldKind::sphere, 2.0, 5, 4);
  double n_[3] = {0, 0, 2}, s_[3] = {0, 0, -2};
  auto xn = sph.embed(n_);
  auto xs = sph.embed(s_);
  CHECK(geodesic_distance(sph, xn, xs) == doctest::Approx(2 * pi));

  auto off = xa;
  for (auto& v : off) v *= 1.1;
  CHECK_THROWS(geodesic_distance(circ, off, xb));
}

TEST_CASE("uniform sampling laws") {
  auto circ = make_manifold(ManifoldKind::circle, 1.0, 5, 12);
  CHECK(sample_uniform(circ, 0, 1).empty());
  auto again1 = sample_uniform(circ, 5, 99);
  auto again2 = sample_uniform(circ, 5, 99);
  CHECK(again1 == again2);

  const int N = 1000000, bins = 100;
  {
    auto pts = sample_uniform(circ, N, 2024);
    std::vector<int> count(bins, 0);
    for (const auto& p : pts) {
      auto c = circ.canonical(p.data());
      double ang = std::atan2(c[1], c[0]);
      if (ang < 0) ang += 2 * pi;
      int b = std::min(bins - 1, static_cast<int>(ang / (2 * pi) * bins));
      ++count[static_cast<std::size_t>(b)];
    }
    double expct = static_cast<double>(N) / bins;
    double chi2 = 0.0;
    for (int c : count) chi2 += (c - expct) * (c - expct) / expct;
    // chi2_{99}: mean 99, sd sqrt(198)
    CHECK(chi2 <= 99.0 + 3.0 * std::sqrt(198.0));
  }
  {
    auto sph = make_manifold(ManifoldKind::sphere, 1.0, 6, 13);
    auto pts = sample_uniform(sph, N, 2025);
    std::vector<int> count(bins, 0);
    for (const auto& p : pts) {
      auto c = sph.canonical(p.data());
      double z = std::clamp(c[2], -1.0, 1.0);
      int b = std::min(bins - 1, static_cast<int>((z + 1.0) / 2.0 * bins));
      ++count[static_cast<std::size_t>(b)];
    }
    double expct = static_cast<double>(N) / bins;
    double chi2 = 0.0;
    for (int c : count) chi2 += (c - expct) * (c - expct) / expct;
    CHECK(chi2 <= 99.0 + 3.0 * std::sqrt(198.0));
  }
}

TEST_CASE("ball volumes") {
  auto circ = make_manifold(ManifoldKind::circle, 1.0, 3, 0);
  CHECK(geodesic_ball_volume(circ, 0.1) == doctest::Approx(0.2));
  CHECK(geodesic_ball_volume(circ, 0.0) == doctest::Approx(0.0));
  CHECK(geodesic_ball_volume(circ, 100.0) == doctest::Approx(2 * pi));
  CHECK_THROWS(geodesic_ball_volume(circ, -0.1));

  auto sph = make_manifold(ManifoldKind::sphere, 1.0, 4, 0);
  CHECK(geodesic_ball_volume(sph, pi / 2) == doctest::Approx(2 * pi));
  CHECK(geodesic_ball_volume(sph, pi) == doctest::Approx(4 * pi));

  CHECK(euclidean_ball_volume(circ, 0.1) == doctest::Approx(4 * std::asin(0.05)));
  CHECK(euclidean_ball_volume(circ, 2.5) == doctest::Approx(2 * pi));
  CHECK(euclidean_ball_volume(sph, 0.05) == doctest::Approx(pi * 0.0025));
  CHECK(euclidean_ball_volume(sph, 2.0) == doctest::Approx(4 * pi));
}

TEST_CASE("volume sandwich on a 50-point grid") {
  for (auto kind : {ManifoldKind::circle, ManifoldKind::sphere}) {
    auto m = make_manifold(kind, 1.0, 5, 21);
    std::vector<double> grid;
    for (int i = 1; i <= 50; ++i) grid.push_back(i / 51.0 * (1.0 / 8.0));
    auto rows = check_volume_bounds(m, grid);
    REQUIRE(rows.size() == 50);
    for (const auto& row : rows) CHECK(row.pass);
  }

  auto circ = make_manifold(ManifoldKind::circle, 1.0, 3, 0);
  auto rows = check_volume_bounds(circ, {0.1});
  CHECK(rows[0].lower == doctest::Approx(0.05));
  CHECK(rows[0].v_geo == doctest::Approx(0.2));
  CHECK(rows[0].upper == doctest::Approx(0.8));

  // sphere volumes fall inside the tighter pi r^2/4 .. 4 pi r^2 bracket too
  auto sph = make_manifold(ManifoldKind::sphere, 1.0, 4, 0);
  double r = 0.05;
  double vg = geodesic_ball_volume(sph, r);
  double ve = euclidean_ball_volume(sph, r);
  CHECK(vg >= pi * r * r / 4);
  CHECK(ve >= pi * r * r / 4);
  CHECK(vg <= 4 * pi * r * r);
  CHECK(ve <= 4 * pi * r * r);

  CHECK_THROWS(check_volume_bounds(circ, {0.2}));
}

TEST_CASE("intersection lower bound, circle analytic") {
  auto circ = make_manifold(ManifoldKind::circle, 1.0, 4, 8);
  auto at = [&](double ang) {
    double c[2] = {std::cos(ang), std::sin(ang)};
    return circ.embed(c);
  };
  auto x = at(0.0);
  auto xt = at(0.15);
  auto rep = check_intersection_bound(circ, x.data(), xt.data(), 0.1, 0.1, 0, 0);
  CHECK(rep.volume == doctest::Approx(0.05));
  CHECK(rep.bound == doctest::Approx(0.0125));
  CHECK(rep.pass);

  // coincident centers: intersection is the whole smaller ball
  auto same = check_intersection_bound(circ, x.data(), x.data(), 0.1, 0.05, 0, 0);
  CHECK(same.volume == doctest::Approx(geodesic_ball_volume(circ, 0.05)));
  CHECK(same.pass);

  auto far = at(0.3);
  CHECK_THROWS(check_intersection_bound(circ, x.data(), far.data(), 0.1, 0.1, 0, 0));
  CHECK_THROWS(check_intersection_bound(circ, x.data(), xt.data(), 0.05, 0.1, 0, 0));
}

TEST_CASE("intersection lower bound, sphere Monte-Carlo") {
  auto sph = make_manifold(ManifoldKind::sphere, 1.0, 5, 9);
  double cn[3] = {0, 0, 1};
  double ct[3] = {std::sin(0.12), 0, std::cos(0.12)};
  auto x = sph.embed(cn);
  auto xt = sph.embed(ct);
  auto rep = check_intersection_bound(sph, x.data(), xt.data(), 0.1, 0.05, 100000, 31);
  CHECK(rep.bound == doctest::Approx(std::pow(2.0, -8.0) * pi * 0.0025));
  CHECK(rep.pass);
}

TEST_CASE("separated nets") {
  auto pts = circle_grid(720, 1.0);
  auto big = separated_net(pts, 3.0);
  CHECK(big.size() == 1);
  auto all = separated_net(pts, 1e-9);
  CHECK(all.size() == pts.size());
  auto two = separated_net(pts, 1.9);
  CHECK(two.size() == 2);

  // r-separation and maximality on a random cloud
  Rng rng(77);
  std::vector<std::vector<double>> cloud(60, std::vector<double>(3));
  for (auto& p : cloud)
    for (auto& v : p) v = rng.uniform(-1.0, 1.0);
  double r = 0.6;
  auto net = separated_net(cloud, r);
  for (std::size_t a = 0; a < net.size(); ++a)
    for (std::size_t b = a + 1; b < net.size(); ++b) {
      double d2 = euclidean_dist2(cloud[static_cast<std::size_t>(net[a])].data(),
                                  cloud[static_cast<std::size_t>(net[b])].data(), 3);
      CHECK(d2 > r * r);
    }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double best = 1e300;
    for (int j : net)
      best = std::min(best, euclidean_dist2(cloud[i].data(),
                                            cloud[static_cast<std::size_t>(j)].data(), 3));
    CHECK(best <= r * r + 1e-12);
  }
}

TEST_CASE("covering numbers") {
  auto pts = circle_grid(360, 1.0);
  CHECK(covering_number(pts, 2.1) == 1);
  CHECK(covering_number(pts, std::sqrt(2.0)) == 2);
  CHECK(covering_number({{0.0, 0.0}}, 0.5) == 1);
  CHECK_THROWS(covering_number(pts, 0.0));

  auto b = covering_bounds(pts, 0.3);
  CHECK(b.lower <= b.upper);
  CHECK(b.lower >= 1);

  // shape bound N(r) <= c0^{-1} V_M (gamma+4)^{gamma/2+2} r^{-gamma}
  double vm = 2 * pi;
  for (double r : {0.05, 0.1, 0.2, 0.4}) {
    double cap = vm * std::pow(5.0, 2.5) / r;
    CHECK(covering_number(pts, r) <= cap);
  }
}

TEST_CASE("dudley bound") {
  CHECK(dudley_bound({{1.0, 2.0}}) == doctest::Approx(0.0));
  CHECK(dudley_bound({{0.0}, {0.0}}) == doctest::Approx(0.0));
  double two = dudley_bound({{0.0}, {1.0}});
  CHECK(two == doctest::Approx(1.0).epsilon(0.02));

  auto base = circle_grid(100, 1.0);
  auto scaled = circle_grid(100, 2.0);
  double b1 = dudley_bound(base);
  double b2 = dudley_bound(scaled);
  CHECK(b2 == doctest::Approx(2.0 * b1).epsilon(1e-9));
  CHECK(b1 > 0.0);
}

TEST_CASE("smoothness constants") {
  RegularityParams p;
  p.c0 = 1.0;
  p.r0 = 1.0;
  p.nu_min = 1.0 / (2 * pi);
  p.nu_max = 1.0 / (2 * pi);
  p.alpha = 1.0;
  p.C_alpha = 1.0;
  auto m = make_manifold(ManifoldKind::circle, 8.0, 3, 0); // reach 8
  auto [lambda, c_lambda] = smoothness_constants(p, m);
  CHECK(lambda == doctest::Approx(1.0));
  CHECK(c_lambda == doctest::Approx(4 * pi));

  RegularityParams hi = p;
  hi.nu_min = 2.0 * p.nu_min;
  hi.nu_max = 2.0 * p.nu_max;
  auto [l2, c2] = smoothness_constants(hi, m);
  CHECK(l2 == doctest::Approx(1.0));
  CHECK(c2 < c_lambda);

  RegularityParams bad = p;
  bad.c0 = 1.5;
  CHECK_THROWS(validate(bad));
  bad = p;
  bad.alpha = 0.0;
  CHECK_THROWS(validate(bad));
}

TEST_CASE("doubling constant") {
  RegularityParams p;
  p.c0 = 1.0;
  p.r0 = 0.1;
  p.nu_min = 1.0 / (2 * pi);
  p.nu_max = 1.0 / (2 * pi);
  auto m = make_manifold(ManifoldKind::circle, 1.0, 3, 0); // reach 1
  CHECK(doubling_constant(p, m) == doctest::Approx(40 * pi));

  Rng rng(55);
  for (int rep = 0; rep < 100; ++rep) {
    RegularityParams q;
    q.c0 = rng.uniform(0.05, 1.0);
    q.r0 = rng.uniform(0.01, 2.0);
    q.nu_min = rng.uniform(0.01, 1.0);
    q.nu_max = q.nu_min * rng.uniform(1.0, 3.0);
    auto mm = make_manifold(rep % 2 == 0 ? ManifoldKind::circle : ManifoldKind::sphere,
                            rng.uniform(0.5, 2.0), 5, 1);
    CHECK(doubling_constant(q, mm) >= 1.0);
  }
}

TEST_CASE("doubling inequality holds empirically on the uniform circle") {
  auto m = make_manifold(ManifoldKind::circle, 1.0, 4, 66);
  RegularityParams p;
  p.c0 = 1.0;
  p.r0 = 0.1;
  p.nu_min = 1.0 / (2 * pi);
  p.nu_max = 1.0 / (2 * pi);
  double ct = doubling_constant(p, m);

  const int N = 200000;
  auto pts = sample_uniform(m, N, 77);
  double base[2] = {1.0, 0.0};
  auto x = m.embed(base);
  auto measure = [&](double r) {
    std::size_t hits = 0;
    for (const auto& s : pts)
      if (euclidean_dist2(s.data(), x.data(), m.d) <= r * r) ++hits;
    double frac = static_cast<double>(hits) / N;
    double sg = std::sqrt(std::max(frac * (1 - frac), 1.0 / N) / N);
    return std::pair<double, double>{frac, sg};
  };
  for (double r : {0.02, 0.05, 0.1}) {
    auto [mu_r, sg_r] = measure(r);
    for (double theta : {1.0, 2.0, 4.0}) {
      auto [mu_tr, sg_tr] = measure(theta * r);
      CHECK(mu_tr <= ct * theta * mu_r + 3.0 * (sg_tr + ct * theta * sg_r));
    }
  }
}
