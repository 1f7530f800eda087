#include "csknn/classifier.hpp"
#include "csknn/cost_geometry.hpp"
#include "csknn/distributions.hpp"
#include "csknn/experiment.hpp"
#include "csknn/io.hpp"
#include "csknn/manifold.hpp"
#include "csknn/neighbours.hpp"
#include "csknn/projection.hpp"
#include "csknn/verify.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace py = pybind11;
using namespace csknn;

namespace {

// python callers hand plain sequences; length checks happen here so the
// pointer-based C++ entry points stay assert-free
const double* checked(const std::vector<double>& x, int d, const char* what) {
    if (static_cast<int>(x.size()) != d)
        throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(d));
    return x.data();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "cost-sensitive k-NN on manifolds with random projections";

    py::class_<CostMatrix>(m, "CostMatrix")
        .def_readonly("L", &CostMatrix::L)
        .def_readonly("entries", &CostMatrix::entries)
        .def_static("zero_one", &CostMatrix::zero_one, py::arg("L"))
        .def_static("from_rows", &CostMatrix::from_rows, py::arg("rows"))
        .def("at", [](const CostMatrix& phi, int i, int j) { return phi.at(i, j); },
             py::arg("i"), py::arg("j"));

    py::class_<ProbVector>(m, "ProbVector")
        .def(py::init([](std::vector<double> w) { return ProbVector{std::move(w)}; }),
             py::arg("weights"))
        .def_readonly("w", &ProbVector::w)
        .def("size", &ProbVector::size)
        .def("__getitem__", [](const ProbVector& v, int i) {
            if (i < 0 || i >= v.size()) throw std::out_of_range("probability index");
            return v[i];
        });

    m.def("is_reasonable", &is_reasonable, py::arg("phi"));
    m.def("two_point", &two_point, py::arg("p"), py::arg("L"));
    m.def("optimal_labels", &optimal_labels, py::arg("phi"), py::arg("eta"));
    m.def("regret", &regret, py::arg("phi"), py::arg("label"), py::arg("eta"));
    m.def("margin", &margin, py::arg("phi"), py::arg("eta"));
    m.def("infinite_margin", &infinite_margin);

    py::class_<CostCalibration>(m, "CostCalibration")
        .def_readonly("kappa", &CostCalibration::kappa)
        .def_readonly("beta_phi", &CostCalibration::beta_phi)
        .def_readonly("c_phi", &CostCalibration::c_phi)
        .def_readonly("t_phi", &CostCalibration::t_phi)
        .def_readonly("z_phi", &CostCalibration::z_phi)
        .def_readonly("j_star", &CostCalibration::j_star)
        .def_readonly("k_star", &CostCalibration::k_star)
        .def_readonly("l_star", &CostCalibration::l_star);
    m.def("calibrate", &calibrate, py::arg("phi"));

    py::enum_<ManifoldKind>(m, "ManifoldKind")
        .value("circle", ManifoldKind::circle)
        .value("sphere", ManifoldKind::sphere);

    py::class_<EmbeddedManifold>(m, "EmbeddedManifold")
        .def_readonly("kind", &EmbeddedManifold::kind)
        .def_readonly("R", &EmbeddedManifold::R)
        .def_readonly("gamma", &EmbeddedManifold::gamma)
        .def_readonly("d", &EmbeddedManifold::d)
        .def("reach", &EmbeddedManifold::reach)
        .def("v_gamma", &EmbeddedManifold::v_gamma)
        .def("total_volume", &EmbeddedManifold::total_volume)
        .def("embed",
             [](const EmbeddedManifold& mf, const std::vector<double>& canon) {
                 return mf.embed(checked(canon, mf.gamma + 1, "canonical point"));
             },
             py::arg("canonical"));
    m.def("make_manifold", &make_manifold, py::arg("kind"), py::arg("radius"),
          py::arg("ambient_dim"), py::arg("rotation_seed"));
    m.def("geodesic_distance",
          [](const EmbeddedManifold& mf, const std::vector<double>& a,
             const std::vector<double>& b) {
              return geodesic_distance(mf, checked(a, mf.d, "point"), checked(b, mf.d, "point"));
          },
          py::arg("manifold"), py::arg("x0"), py::arg("x1"));
    m.def("geodesic_ball_volume", &geodesic_ball_volume, py::arg("manifold"), py::arg("r"));
    m.def("euclidean_ball_volume", &euclidean_ball_volume, py::arg("manifold"), py::arg("r"));
    m.def("sample_uniform", &sample_uniform, py::arg("manifold"), py::arg("count"),
          py::arg("seed"));

    py::class_<VolumeBoundsRow>(m, "VolumeBoundsRow")
        .def_readonly("r", &VolumeBoundsRow::r)
        .def_readonly("lower", &VolumeBoundsRow::lower)
        .def_readonly("v_geo", &VolumeBoundsRow::v_geo)
        .def_readonly("v_eucl", &VolumeBoundsRow::v_eucl)
        .def_readonly("upper", &VolumeBoundsRow::upper)
        .def_readonly("pass_", &VolumeBoundsRow::pass);
    m.def("check_volume_bounds", &check_volume_bounds, py::arg("manifold"), py::arg("r_grid"));

    py::class_<IntersectionReport>(m, "IntersectionReport")
        .def_readonly("volume", &IntersectionReport::volume)
        .def_readonly("bound", &IntersectionReport::bound)
        .def_readonly("sigma", &IntersectionReport::sigma)
        .def_readonly("pass_", &IntersectionReport::pass);
    m.def("check_intersection_bound",
          [](const EmbeddedManifold& mf, const std::vector<double>& x,
             const std::vector<double>& x_tilde, double r, double r_tilde, int mc_n,
             std::uint64_t seed) {
              return check_intersection_bound(mf, checked(x, mf.d, "point"),
                                              checked(x_tilde, mf.d, "point"), r, r_tilde,
                                              mc_n, seed);
          },
          py::arg("manifold"), py::arg("x"), py::arg("x_tilde"), py::arg("r"),
          py::arg("r_tilde"), py::arg("mc_n"), py::arg("seed"));

    m.def("separated_net", &separated_net, py::arg("points"), py::arg("r"));
    m.def("covering_number", &covering_number, py::arg("points"), py::arg("r"));
    py::class_<CoveringBounds>(m, "CoveringBounds")
        .def_readonly("lower", &CoveringBounds::lower)
        .def_readonly("upper", &CoveringBounds::upper);
    m.def("covering_bounds", &covering_bounds, py::arg("points"), py::arg("r"));
    m.def("dudley_bound", &dudley_bound, py::arg("points"));

    py::enum_<ProjectionKind>(m, "ProjectionKind")
        .value("gaussian", ProjectionKind::gaussian)
        .value("achlioptas", ProjectionKind::achlioptas)
        .value("identity_test", ProjectionKind::identity_test);

    py::class_<ProjectionSpec>(m, "ProjectionSpec")
        .def(py::init<>())
        .def_readwrite("kind", &ProjectionSpec::kind)
        .def_readwrite("ambient_dim", &ProjectionSpec::ambient_dim)
        .def_readwrite("target_dim", &ProjectionSpec::target_dim)
        .def_readwrite("psi2", &ProjectionSpec::psi2)
        .def_readwrite("seed", &ProjectionSpec::seed);

    py::class_<ProjectionMatrix>(m, "ProjectionMatrix")
        .def_readonly("spec", &ProjectionMatrix::spec)
        .def("apply", [](const ProjectionMatrix& pm, const std::vector<double>& x) {
            std::vector<double> out(static_cast<std::size_t>(pm.spec.target_dim));
            apply_into(pm, checked(x, pm.spec.ambient_dim, "point"), out.data());
            return out;
        }, py::arg("x"));

    py::class_<DistortionReport>(m, "DistortionReport")
        .def_readonly("eps_hat", &DistortionReport::eps_hat)
        .def_readonly("pair_i", &DistortionReport::pair_i)
        .def_readonly("pair_j", &DistortionReport::pair_j);

    m.def("sample_projection", &sample_projection, py::arg("spec"));
    m.def("distortion", &distortion, py::arg("projection"), py::arg("points"));
    m.def("theta_from_epsilon", &theta_from_epsilon, py::arg("eps"));
    m.def("epsilon_from_theta", &epsilon_from_theta, py::arg("theta"));
    m.def("dimension_bound_theta", &dimension_bound_theta, py::arg("theta"), py::arg("gamma"),
          py::arg("tau"), py::arg("r0"), py::arg("c0"), py::arg("nu_min"), py::arg("delta"),
          py::arg("psi2"), py::arg("K") = 1.0);
    m.def("dimension_bound_epsilon", &dimension_bound_epsilon, py::arg("eps"), py::arg("gamma"),
          py::arg("tau"), py::arg("r0"), py::arg("c0"), py::arg("volume"), py::arg("delta"),
          py::arg("psi2"), py::arg("K") = 1.0);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("d", &Dataset::d)
        .def_readwrite("L", &Dataset::L)
        .def_readwrite("features", &Dataset::features)
        .def_readwrite("labels", &Dataset::labels)
        .def("size", &Dataset::size)
        .def("point", [](const Dataset& data, std::size_t i) {
            if (i >= data.size()) throw std::out_of_range("point index");
            return std::vector<double>(data.point(i), data.point(i) + data.d);
        }, py::arg("i"));

    py::class_<QueryResult>(m, "QueryResult")
        .def_readonly("indices", &QueryResult::indices)
        .def_readonly("radius", &QueryResult::radius);

    py::class_<NeighbourIndex>(m, "NeighbourIndex")
        .def_readonly("data", &NeighbourIndex::data)
        .def_readonly("accelerated", &NeighbourIndex::accelerated)
        .def("has_projection", &NeighbourIndex::has_projection);

    m.def("build_index",
          [](const Dataset& data, std::optional<ProjectionMatrix> proj, bool accelerated) {
              return build_index(data, proj ? &*proj : nullptr, accelerated);
          },
          py::arg("data"), py::arg("projection") = std::nullopt,
          py::arg("accelerated") = false);
    m.def("query_exact",
          [](const NeighbourIndex& idx, const std::vector<double>& x, int k) {
              return query_exact(idx, x, k);
          },
          py::arg("index"), py::arg("x"), py::arg("k"));
    m.def("query_projected",
          [](const NeighbourIndex& idx, const std::vector<double>& x, int k) {
              return query_projected(idx, x, k);
          },
          py::arg("index"), py::arg("x"), py::arg("k"));
    m.def("theta_ratio", &theta_ratio, py::arg("exact"), py::arg("approx"));
    m.def("omega_ratio", &omega_ratio, py::arg("exact"), py::arg("approx"),
          py::arg("ball_measure"));

    py::enum_<QueryMode>(m, "QueryMode")
        .value("exact", QueryMode::exact)
        .value("projected", QueryMode::projected)
        .value("oracle", QueryMode::oracle);

    py::class_<Schedule>(m, "Schedule")
        .def(py::init<>())
        .def_readwrite("k0", &Schedule::k0)
        .def_readwrite("alpha", &Schedule::alpha)
        .def_readwrite("gamma", &Schedule::gamma);

    m.def("estimate_eta", &estimate_eta, py::arg("labels"), py::arg("L"));
    m.def("predict", &predict, py::arg("phi"), py::arg("eta_hat"));
    m.def("k_schedule", &k_schedule, py::arg("schedule"), py::arg("n"),
          py::arg("xi") = std::nullopt);
    m.def("classify",
          [](const NeighbourIndex& idx, const CostMatrix& phi, const std::vector<double>& x,
             int k, QueryMode mode) {
              return classify(idx, phi, checked(x, idx.data.d, "query"), k, mode);
          },
          py::arg("index"), py::arg("phi"), py::arg("x"), py::arg("k"),
          py::arg("mode") = QueryMode::exact);

    py::class_<EvalResult>(m, "EvalResult")
        .def_readonly("excess_risk", &EvalResult::excess_risk)
        .def_readonly("misclass_prob", &EvalResult::misclass_prob);
    m.def("evaluate", &evaluate, py::arg("index"), py::arg("phi"), py::arg("dist"),
          py::arg("k"), py::arg("mode"), py::arg("m_test"), py::arg("seed"));

    py::class_<RegularityParams>(m, "RegularityParams")
        .def(py::init<>())
        .def_readwrite("c0", &RegularityParams::c0)
        .def_readwrite("r0", &RegularityParams::r0)
        .def_readwrite("nu_min", &RegularityParams::nu_min)
        .def_readwrite("nu_max", &RegularityParams::nu_max)
        .def_readwrite("zeta_max", &RegularityParams::zeta_max)
        .def_readwrite("alpha", &RegularityParams::alpha)
        .def_readwrite("C_alpha", &RegularityParams::C_alpha)
        .def_readwrite("beta", &RegularityParams::beta)
        .def_readwrite("C_beta", &RegularityParams::C_beta);
    m.def("doubling_constant", &doubling_constant, py::arg("params"), py::arg("manifold"));
    m.def("smoothness_constants", &smoothness_constants, py::arg("params"), py::arg("manifold"));

    py::class_<SyntheticDistribution>(m, "SyntheticDistribution")
        .def("ambient_dim", &SyntheticDistribution::ambient_dim)
        .def("num_labels", &SyntheticDistribution::num_labels)
        .def("manifold", &SyntheticDistribution::manifold,
             py::return_value_policy::reference_internal)
        .def("cost_matrix", &SyntheticDistribution::cost_matrix,
             py::return_value_policy::reference_internal)
        .def("params", &SyntheticDistribution::params,
             py::return_value_policy::reference_internal)
        .def("eta",
             [](const SyntheticDistribution& dist, const std::vector<double>& x) {
                 return dist.eta(checked(x, dist.ambient_dim(), "point"));
             },
             py::arg("x"))
        .def("on_support",
             [](const SyntheticDistribution& dist, const std::vector<double>& x) {
                 return dist.on_support(checked(x, dist.ambient_dim(), "point"));
             },
             py::arg("x"))
        .def("ball_measure",
             [](const SyntheticDistribution& dist, const std::vector<double>& x, double r) {
                 return dist.ball_measure(checked(x, dist.ambient_dim(), "point"), r);
             },
             py::arg("x"), py::arg("r"))
        .def("quantile_radius",
             [](const SyntheticDistribution& dist, const std::vector<double>& x, double p) {
                 return dist.quantile_radius(checked(x, dist.ambient_dim(), "point"), p);
             },
             py::arg("x"), py::arg("p"));

    py::class_<HardConstruction>(m, "HardConstruction")
        .def_readonly("r", &HardConstruction::r)
        .def_readonly("tau_tilde", &HardConstruction::tau_tilde)
        .def_readonly("r_star", &HardConstruction::r_star)
        .def_readonly("centers", &HardConstruction::centers)
        .def_readonly("Q", &HardConstruction::Q)
        .def_readonly("delta_r", &HardConstruction::delta_r)
        .def_readonly("m_r", &HardConstruction::m_r)
        .def_readonly("u_r", &HardConstruction::u_r)
        .def_readonly("v_r", &HardConstruction::v_r)
        .def_readonly("nu_star", &HardConstruction::nu_star)
        .def_readonly("support_volume", &HardConstruction::support_volume);
    m.def("hard_params", &hard_params, py::arg("phi"), py::arg("params"), py::arg("manifold"),
          py::arg("r"), py::arg("seed") = 0);

    py::class_<DistributionSpec>(m, "DistributionSpec")
        .def(py::init<>())
        .def_readwrite("family", &DistributionSpec::family)
        .def_readwrite("kind", &DistributionSpec::kind)
        .def_readwrite("radius", &DistributionSpec::radius)
        .def_readwrite("ambient_dim", &DistributionSpec::ambient_dim)
        .def_readwrite("rotation_seed", &DistributionSpec::rotation_seed)
        .def_readwrite("m_freq", &DistributionSpec::m_freq)
        .def_readwrite("kappa", &DistributionSpec::kappa)
        .def_readwrite("amplitude", &DistributionSpec::amplitude)
        .def_readwrite("r", &DistributionSpec::r)
        .def_readwrite("sigma", &DistributionSpec::sigma)
        .def_readwrite("seed", &DistributionSpec::seed)
        .def_readwrite("params", &DistributionSpec::params)
        .def_readwrite("phi", &DistributionSpec::phi);
    m.def("build_distribution", &build_distribution, py::arg("spec"));
    m.def("serialize_distribution", &serialize_distribution, py::arg("spec"));
    m.def("parse_distribution", &parse_distribution, py::arg("text"));
    m.def("sample", &sample, py::arg("dist"), py::arg("count"), py::arg("seed"));

    py::enum_<ValidationKind>(m, "ValidationKind")
        .value("margin", ValidationKind::margin)
        .value("holder", ValidationKind::holder)
        .value("regularity", ValidationKind::regularity);

    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("pass_", &ValidationReport::pass)
        .def_readonly("hat_c_beta", &ValidationReport::hat_c_beta)
        .def_readonly("worst_zeta", &ValidationReport::worst_zeta)
        .def_readonly("worst_ratio", &ValidationReport::worst_ratio)
        .def_readonly("min_ratio", &ValidationReport::min_ratio)
        .def_readonly("sigma", &ValidationReport::sigma);
    m.def("validate_distribution",
          [](const SyntheticDistribution& dist, ValidationKind kind, int budget,
             std::uint64_t seed, double z) { return validate(dist, kind, budget, seed, z); },
          py::arg("dist"), py::arg("kind"), py::arg("budget"), py::arg("seed"),
          py::arg("z") = 3.0);

    py::class_<BayesOracle>(m, "BayesOracle")
        .def_readonly("risk", &BayesOracle::risk)
        .def_readonly("sigma", &BayesOracle::sigma)
        .def("f_star", [](const BayesOracle& b, const std::vector<double>& x) {
            return b.f_star(x.data());
        }, py::arg("x"));
    m.def("bayes_oracle", &bayes_oracle, py::arg("dist"), py::arg("phi"));

    py::class_<SlopeFit>(m, "SlopeFit")
        .def_readonly("slope", &SlopeFit::slope)
        .def_readonly("intercept", &SlopeFit::intercept)
        .def_readonly("stderr_slope", &SlopeFit::stderr_slope);
    m.def("fit_slope", &fit_slope, py::arg("pairs"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("dist", &ExperimentConfig::dist)
        .def_readwrite("phi", &ExperimentConfig::phi)
        .def_readwrite("n_grid", &ExperimentConfig::n_grid)
        .def_readwrite("trials", &ExperimentConfig::trials)
        .def_readwrite("schedule", &ExperimentConfig::schedule)
        .def_readwrite("projected", &ExperimentConfig::projected)
        .def_readwrite("proj_h", &ExperimentConfig::proj_h)
        .def_readwrite("proj_kind", &ExperimentConfig::proj_kind)
        .def_readwrite("m_test", &ExperimentConfig::m_test)
        .def_readwrite("base_seed", &ExperimentConfig::base_seed)
        .def_readwrite("xi", &ExperimentConfig::xi)
        .def_readwrite("delta_proj", &ExperimentConfig::delta_proj)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("out_path", &ExperimentConfig::out_path);

    py::class_<TrialRow>(m, "TrialRow")
        .def_readonly("n", &TrialRow::n)
        .def_readonly("n_index", &TrialRow::n_index)
        .def_readonly("trial", &TrialRow::trial)
        .def_readonly("k", &TrialRow::k)
        .def_readonly("excess", &TrialRow::excess)
        .def_readonly("misclass", &TrialRow::misclass)
        .def_readonly("seed", &TrialRow::seed);

    py::class_<RateReport>(m, "RateReport")
        .def_readonly("n_grid", &RateReport::n_grid)
        .def_readonly("k_per_n", &RateReport::k_per_n)
        .def_readonly("rows", &RateReport::rows)
        .def_readonly("mean_excess", &RateReport::mean_excess)
        .def_readonly("stderr_excess", &RateReport::stderr_excess)
        .def_readonly("fit", &RateReport::fit)
        .def_readonly("theory_exponent", &RateReport::theory_exponent)
        .def_readonly("clipped", &RateReport::clipped)
        .def_readonly("mode", &RateReport::mode);
    m.def("run_rate", &run_rate, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("trial_csv", &trial_csv, py::arg("report"), py::arg("config"));
    m.def("summary_csv", &summary_csv, py::arg("report"));

    py::class_<ConcentrationReport>(m, "ConcentrationReport")
        .def_readonly("xi", &ConcentrationReport::xi)
        .def_readonly("radius_bound", &ConcentrationReport::radius_bound)
        .def_readonly("radius_freq", &ConcentrationReport::radius_freq)
        .def_readonly("radius_sigma", &ConcentrationReport::radius_sigma)
        .def_readonly("radius_pass", &ConcentrationReport::radius_pass)
        .def_readonly("eta_bound", &ConcentrationReport::eta_bound)
        .def_readonly("eta_freq", &ConcentrationReport::eta_freq)
        .def_readonly("eta_sigma", &ConcentrationReport::eta_sigma)
        .def_readonly("eta_pass", &ConcentrationReport::eta_pass)
        .def("passed", &ConcentrationReport::pass);
    m.def("verify_concentration", &verify_concentration, py::arg("dist"), py::arg("n"),
          py::arg("k"), py::arg("p"), py::arg("delta"), py::arg("trials"), py::arg("seed"));

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("pass_", &CheckResult::pass)
        .def_readonly("slack", &CheckResult::slack);
    m.def("margin_guarantee_sweep", &margin_guarantee_sweep, py::arg("matrices"),
          py::arg("c_scale"), py::arg("seed"));

    py::class_<VerifySummary>(m, "VerifySummary")
        .def_readonly("checks", &VerifySummary::checks)
        .def("all_pass", &VerifySummary::all_pass);
    m.def("verify_all", &verify_all, py::arg("seed"), py::arg("fault_scale") = 1.0,
          py::call_guard<py::gil_scoped_release>());
    m.def("format_summary", &format_summary, py::arg("summary"));
}
