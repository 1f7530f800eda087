#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace csknn {

enum class ManifoldKind { circle, sphere };

// Circle or sphere of radius R isometrically embedded in R^d through a seeded
// random orthonormal frame. Reach equals R; closed-form geodesics and volumes.
class EmbeddedManifold {
public:
    ManifoldKind kind = ManifoldKind::circle;
    double R = 1.0;
    int gamma = 1;      // intrinsic dimension
    int d = 2;          // ambient dimension
    std::uint64_t rotation_seed = 0;
    std::vector<double> frame; // d x (gamma+1), column-major

    double reach() const { return R; }
    double v_gamma() const;      // volume of the unit gamma-ball
    double total_volume() const; // V_M

    std::vector<double> embed(const double* canonical) const;
    std::vector<double> embed(const std::vector<double>& canonical) const;
    std::vector<double> canonical(const double* x) const;
    void require_on_surface(const double* x, double tol = 1e-8) const;
};

EmbeddedManifold make_manifold(ManifoldKind kind, double R, int d, std::uint64_t rotation_seed);

double geodesic_distance(const EmbeddedManifold& m, const double* x0, const double* x1);
double geodesic_distance(const EmbeddedManifold& m, const std::vector<double>& x0,
                         const std::vector<double>& x1);

std::vector<std::vector<double>> sample_uniform(const EmbeddedManifold& m, int count,
                                                std::uint64_t seed);

double geodesic_ball_volume(const EmbeddedManifold& m, double r);
// surface volume of {y on M : |y - x| <= r} (chord ball); position independent
double euclidean_ball_volume(const EmbeddedManifold& m, double r);

struct VolumeBoundsRow {
    double r = 0.0;
    double lower = 0.0;  // 4^{-gamma} v_gamma r^gamma
    double v_geo = 0.0;
    double v_eucl = 0.0;
    double upper = 0.0;  // 4^{gamma} v_gamma r^gamma
    bool pass = false;
};
std::vector<VolumeBoundsRow> check_volume_bounds(const EmbeddedManifold& m,
                                                 const std::vector<double>& r_grid);

struct IntersectionReport {
    double volume = 0.0; // analytic on the circle, Monte-Carlo on the sphere
    double bound = 0.0;  // 2^{-4 gamma} v_gamma r_tilde^gamma
    double sigma = 0.0;  // MC standard error (0 for analytic)
    bool pass = false;
};
IntersectionReport check_intersection_bound(const EmbeddedManifold& m, const double* x,
                                            const double* x_tilde, double r, double r_tilde,
                                            int mc_n, std::uint64_t seed);

// greedy in input order; pairwise Euclidean distance strictly greater than r
std::vector<int> separated_net(const std::vector<std::vector<double>>& points, double r);

// farthest-point greedy net size; upper estimate of the covering number
int covering_number(const std::vector<std::vector<double>>& points, double r);

struct CoveringBounds {
    int lower = 0; // size of a greedy 2r-separated subset
    int upper = 0; // greedy net size
};
CoveringBounds covering_bounds(const std::vector<std::vector<double>>& points, double r);

double dudley_bound(const std::vector<std::vector<double>>& points);

struct RegularityParams {
    double c0 = 1.0;
    double r0 = 1.0;
    double nu_min = 1.0;
    double nu_max = 1.0;
    double zeta_max = 1.0;
    double alpha = 1.0;
    double C_alpha = 1.0;
    double beta = 1.0;
    double C_beta = 1.0;
};
void validate(const RegularityParams& p);

// Holder-smoothness transfer: (lambda, C_lambda)
std::pair<double, double> smoothness_constants(const RegularityParams& p,
                                               const EmbeddedManifold& m);
double doubling_constant(const RegularityParams& p, const EmbeddedManifold& m);

} // namespace csknn
