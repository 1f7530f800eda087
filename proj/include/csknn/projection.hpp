#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <vector>

namespace csknn {

enum class ProjectionKind { gaussian, achlioptas, identity_test };

struct ProjectionSpec {
    ProjectionKind kind = ProjectionKind::gaussian;
    int ambient_dim = 0;
    int target_dim = 0;
    double psi2 = 0.0; // <= 0 selects the family default
    std::uint64_t seed = 0;
};

double default_psi2(ProjectionKind kind);

// Throws on invalid dims; returns a copy with psi2 defaulted when unset.
ProjectionSpec normalized(const ProjectionSpec& spec);

struct ProjectionMatrix {
    ProjectionSpec spec;
    std::vector<double> rows; // h x d row-major, unscaled

    double entry(int i, int j) const {
        return rows[static_cast<std::size_t>(i) * spec.ambient_dim + j];
    }
};

ProjectionMatrix sample_projection(const ProjectionSpec& spec);

// h^{-1/2} * rows * x
std::vector<double> apply(const ProjectionMatrix& m, std::span<const double> x);
void apply_into(const ProjectionMatrix& m, const double* x, double* out);

// Target-dimension bounds; K is the unspecified absolute constant, formula shape only.
int dimension_bound_theta(double theta, int gamma, double tau, double r0,
                          double c0, double nu_min, double delta, double psi2,
                          double K = 1.0);
int dimension_bound_epsilon(double eps, int gamma, double tau, double r0,
                            double c0, double volume, double delta, double psi2,
                            double K = 1.0);

struct DistortionReport {
    double eps_hat = 0.0;
    std::size_t pair_i = 0;
    std::size_t pair_j = 0;
};

DistortionReport distortion(const ProjectionMatrix& m,
                            const std::vector<std::vector<double>>& points);

double theta_from_epsilon(double eps);
double epsilon_from_theta(double theta);

} // namespace csknn
