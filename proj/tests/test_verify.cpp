#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "csknn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace csknn;

namespace {

std::unique_ptr<BenignDistribution> flat_circle() {
    return build_benign(make_manifold(ManifoldKind::circle, 1.0, 2, 0));
}

bool has_check(const VerifySummary& s, const std::string& name, bool* pass = nullptr) {
    for (const CheckResult& c : s.checks) {
        if (c.name == name) {
            if (pass) *pass = c.pass;
            return true;
        }
    }
    return false;
}

} // namespace

TEST_CASE("concentration bounds match the frozen constants") {
    const auto dist = flat_circle();

    const ConcentrationReport radius =
        verify_concentration(*dist, 500, 50, 0.2, 0.2, 2000, 3);
    CHECK(radius.xi == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(radius.radius_bound == doctest::Approx(std::exp(-6.25)).epsilon(1e-12));
    CHECK(std::abs(radius.radius_bound - 0.00193) < 2e-5);
    CHECK(radius.radius_pass);
    CHECK(radius.radius_freq <= radius.radius_bound + 3.0 * radius.radius_sigma);
    CHECK(radius.radius_sigma > 0.0);

    const ConcentrationReport eta =
        verify_concentration(*dist, 500, 100, 0.25, 0.2, 2000, 3);
    CHECK(eta.eta_bound == doctest::Approx(4.0 * std::exp(-8.0)).epsilon(1e-12));
    CHECK(std::abs(eta.eta_bound - 0.00134) < 1e-5);
    CHECK(eta.eta_pass);
    CHECK(eta.eta_freq <= eta.eta_bound + 3.0 * eta.eta_sigma);
}

TEST_CASE("concentration with k equal to n p is vacuous but valid") {
    const auto dist = flat_circle();
    const ConcentrationReport rep = verify_concentration(*dist, 500, 100, 0.2, 0.2, 50, 1);
    CHECK(rep.xi == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.radius_bound == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.radius_pass); // frequency can never beat a vacuous bound
}

TEST_CASE("concentration rejects invalid configurations") {
    const auto dist = flat_circle();
    CHECK_THROWS_AS(verify_concentration(*dist, 500, 101, 0.2, 0.2, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_concentration(*dist, 500, 50, 0.0, 0.2, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_concentration(*dist, 500, 50, 1.5, 0.2, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_concentration(*dist, 500, 50, 0.2, 0.0, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_concentration(*dist, 500, 50, 0.2, 0.2, 0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_concentration(*dist, 500, 0, 0.2, 0.2, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_concentration(*dist, 0, 1, 0.2, 0.2, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("concentration is deterministic in the seed") {
    const auto dist = flat_circle();
    const ConcentrationReport a = verify_concentration(*dist, 200, 20, 0.2, 0.2, 300, 9);
    const ConcentrationReport b = verify_concentration(*dist, 200, 20, 0.2, 0.2, 300, 9);
    CHECK(a.radius_freq == b.radius_freq);
    CHECK(a.eta_freq == b.eta_freq);
}

TEST_CASE("margin sweep holds at scale one and breaks at scale ten") {
    const CheckResult ok = margin_guarantee_sweep(200, 1.0, 42);
    CHECK(ok.pass);
    CHECK(ok.slack >= -1e-9);

    const CheckResult broken = margin_guarantee_sweep(200, 10.0, 42);
    CHECK_FALSE(broken.pass);
    CHECK(broken.slack < 0.0);

    CHECK_THROWS_AS(margin_guarantee_sweep(0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(margin_guarantee_sweep(10, 0.0, 1), std::invalid_argument);
}

TEST_CASE("verify_all battery passes and lists every check") {
    const VerifySummary summary = verify_all(2026);
    CHECK(summary.all_pass());
    const char* expected[] = {
        "margin-guarantee-sweep",   "projection-distortion-trend",
        "kd-brute-equivalence",     "projected-theta-bound",
        "projected-omega-bound",    "volume-bounds-circle",
        "volume-bounds-sphere",     "intersection-bound-circle",
        "intersection-bound-sphere", "packing-bound-circle",
        "packing-bound-sphere",     "support-volume-sandwich",
        "margin-validator-hard",    "holder-validator-hard",
        "regularity-validator-hard", "margin-validator-benign",
        "holder-validator-benign",  "regularity-validator-benign",
        "radius-concentration",     "eta-concentration",
    };
    for (const char* name : expected) {
        bool pass = false;
        CHECK_MESSAGE(has_check(summary, name, &pass), name);
        CHECK_MESSAGE(pass, name);
    }
    CHECK(summary.checks.size() == std::size(expected));

    const std::string text = format_summary(summary);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "check,pass,slack");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 2);
        CHECK(line.find(",PASS,") != std::string::npos);
    }
    CHECK(rows == static_cast<int>(summary.checks.size()));
}

TEST_CASE("verify_all reports an injected margin fault without throwing") {
    const VerifySummary faulty = verify_all(2026, 10.0);
    CHECK_FALSE(faulty.all_pass());
    bool sweep_pass = true;
    REQUIRE(has_check(faulty, "margin-guarantee-sweep", &sweep_pass));
    CHECK_FALSE(sweep_pass);
    int failures = 0;
    for (const CheckResult& c : faulty.checks) {
        if (!c.pass) ++failures;
    }
    CHECK(failures == 1); // only the doctored guarantee fails
    CHECK(format_summary(faulty).find("margin-guarantee-sweep,FAIL") != std::string::npos);
}
