#include "csknn/classifier.hpp"
#include "csknn/experiment.hpp"
#include "csknn/io.hpp"
#include "csknn/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>

using namespace csknn;

namespace {

// trial CSV at out, summary CSV alongside: x.csv becomes x.summary.csv
std::string summary_path_for(const std::string& out) {
    const std::size_t dot = out.find_last_of('.');
    const std::size_t slash = out.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return out + ".summary.csv";
    }
    return out.substr(0, dot) + ".summary" + out.substr(dot);
}

std::string join_labels(const std::vector<int>& ys) {
    std::ostringstream out;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (i) out << " ";
        out << ys[i];
    }
    return out.str();
}

ProjectionKind kind_from_string(const std::string& name) {
    if (name == "gaussian") return ProjectionKind::gaussian;
    if (name == "achlioptas") return ProjectionKind::achlioptas;
    throw std::invalid_argument("proj_kind must be gaussian or achlioptas");
}

struct GlobalArgs {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;

    ConfigMap config() const {
        return config_path.empty() ? ConfigMap{} : read_config_file(config_path);
    }
    std::uint64_t resolve_seed(const ConfigMap& cfg) const {
        return seed_given ? seed : config_u64(cfg, "seed", 0);
    }
    std::string resolve_out(const ConfigMap& cfg) const {
        return !out_path.empty() ? out_path : config_str(cfg, "out", "");
    }
    void apply(ExperimentConfig& exp) const {
        if (seed_given) exp.base_seed = seed;
        if (threads > 0) exp.threads = threads;
        if (!out_path.empty()) exp.out_path = out_path;
    }
};

int run_generate(const GlobalArgs& g) {
    const ConfigMap cfg = g.config();
    const DistributionSpec spec = distribution_from_config(cfg);
    const long n = config_long(cfg, "n", 1000);
    if (n < 1) throw std::invalid_argument("n must be positive");
    const std::string out = g.resolve_out(cfg);
    if (out.empty()) throw std::invalid_argument("generate needs --out for the dataset");
    const auto dist = build_distribution(spec);
    const Dataset data = sample(*dist, static_cast<int>(n), g.resolve_seed(cfg));
    write_dataset(data, out);
    std::printf("wrote %zu points d=%d L=%d to %s\n", data.size(), data.d, data.L, out.c_str());
    return 0;
}

int run_evaluate(const GlobalArgs& g) {
    const ConfigMap cfg = g.config();
    ExperimentConfig exp = experiment_from_config(cfg);
    g.apply(exp);
    const long n = config_long(cfg, "n", 1024);
    if (n < 1) throw std::invalid_argument("n must be positive");
    const std::optional<double> xi =
        exp.xi > 0.0 ? std::optional<double>(exp.xi) : std::nullopt;
    const int k = static_cast<int>(config_long(cfg, "k", k_schedule(exp.schedule, n, xi)));

    const auto dist = build_distribution(exp.dist);
    const std::uint64_t slot_seed = exp.base_seed;
    Rng train_rng(derive_seed(slot_seed, 1));
    const Dataset train = dist->sample_dataset(static_cast<int>(n), train_rng);
    const bool accelerate = exp.dist.ambient_dim <= 64;
    NeighbourIndex idx;
    if (exp.projected) {
        ProjectionSpec ps;
        ps.kind = exp.proj_kind;
        ps.ambient_dim = exp.dist.ambient_dim;
        ps.target_dim = exp.proj_h;
        ps.seed = derive_seed(slot_seed, 3);
        const ProjectionMatrix proj = sample_projection(ps);
        idx = build_index(train, &proj, accelerate);
    } else {
        idx = build_index(train, nullptr, accelerate);
    }
    const EvalResult res =
        evaluate(idx, exp.phi, *dist, k, exp.projected ? QueryMode::projected : QueryMode::exact,
                 exp.m_test, derive_seed(slot_seed, 2));

    std::printf("n=%ld k=%d mode=%s m_test=%d\n", n, k, exp.projected ? "projected" : "exact",
                exp.m_test);
    std::printf("excess_risk=%s\n", format_g17(res.excess_risk).c_str());
    std::printf("misclass_prob=%s\n", format_g17(res.misclass_prob).c_str());

    if (!exp.out_path.empty()) {
        RateReport rep;
        rep.mode = exp.projected ? "projected" : "exact";
        TrialRow row;
        row.n = n;
        row.k = k;
        row.excess = res.excess_risk;
        row.misclass = res.misclass_prob;
        row.seed = slot_seed;
        rep.rows.push_back(row);
        write_text_file(exp.out_path, trial_csv(rep, exp));
        std::printf("wrote %s\n", exp.out_path.c_str());
    }
    return 0;
}

int run_rate_cmd(const GlobalArgs& g) {
    const ConfigMap cfg = g.config();
    ExperimentConfig exp = experiment_from_config(cfg);
    g.apply(exp);
    const RateReport rep = run_rate(exp);
    std::fputs(summary_csv(rep).c_str(), stdout);
    std::printf("slope=%s stderr=%s theory=%s\n", format_g17(rep.fit.slope).c_str(),
                format_g17(rep.fit.stderr_slope).c_str(),
                format_g17(rep.theory_exponent).c_str());
    if (rep.clipped) std::printf("note: some mean excess was floored at 1e-6 for the fit\n");
    if (!exp.out_path.empty()) {
        write_text_file(exp.out_path, trial_csv(rep, exp));
        const std::string spath = summary_path_for(exp.out_path);
        write_text_file(spath, summary_csv(rep));
        std::printf("wrote %s and %s\n", exp.out_path.c_str(), spath.c_str());
    }
    return 0;
}

int run_project_check(const GlobalArgs& g) {
    const ConfigMap cfg = g.config();
    const DistributionSpec spec = distribution_from_config(cfg);
    const std::uint64_t seed = g.resolve_seed(cfg);
    const long n = config_long(cfg, "n", 500);
    const long queries = config_long(cfg, "queries", 200);
    const int k = static_cast<int>(config_long(cfg, "k", 5));
    const int h = static_cast<int>(config_long(cfg, "proj_h", 16));
    if (n < 1 || queries < 1 || k < 1 || h < 1) {
        throw std::invalid_argument("n, queries, k and proj_h must be positive");
    }
    const ProjectionKind kind = kind_from_string(config_str(cfg, "proj_kind", "achlioptas"));

    const auto dist = build_distribution(spec);
    Rng train_rng(derive_seed(seed, 1));
    const Dataset train = dist->sample_dataset(static_cast<int>(n), train_rng);
    ProjectionSpec ps;
    ps.kind = kind;
    ps.ambient_dim = spec.ambient_dim;
    ps.target_dim = h;
    ps.seed = derive_seed(seed, 3);
    const ProjectionMatrix proj = sample_projection(ps);
    const NeighbourIndex idx = build_index(train, &proj, spec.ambient_dim <= 64);
    const Dataset probe = sample(*dist, static_cast<int>(queries), derive_seed(seed, 2));

    std::vector<std::vector<double>> everything;
    everything.reserve(train.size() + probe.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const double* p = train.point(i);
        everything.emplace_back(p, p + train.d);
    }
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double* p = probe.point(i);
        everything.emplace_back(p, p + probe.d);
    }
    const double eps = distortion(proj, everything).eps_hat;

    std::ostringstream out;
    out << "query_id,k,exact_radius,approx_radius,theta,omega\n";
    double max_theta = 0.0;
    for (std::size_t q = 0; q < probe.size(); ++q) {
        const double* x = probe.point(q);
        const QueryResult ex = query_exact(idx, x, k);
        const QueryResult ap = query_projected(idx, x, k);
        const double theta = theta_ratio(ex, ap);
        const double omega =
            omega_ratio(ex, ap, [&](double r) { return dist->ball_measure(x, r); });
        max_theta = std::max(max_theta, theta);
        out << q << "," << k << "," << format_g17(ex.radius) << "," << format_g17(ap.radius)
            << "," << format_g17(theta) << "," << format_g17(omega) << "\n";
    }

    const std::string dest = g.resolve_out(cfg);
    if (dest.empty()) {
        std::fputs(out.str().c_str(), stdout);
    } else {
        write_text_file(dest, out.str());
        std::printf("wrote %s\n", dest.c_str());
    }
    std::printf("h=%d eps_hat=%s theta_bound=%s max_theta=%s\n", h, format_g17(eps).c_str(),
                format_g17(theta_from_epsilon(eps)).c_str(), format_g17(max_theta).c_str());
    return 0;
}

int run_verify_cmd(const GlobalArgs& g, double fault_scale) {
    const ConfigMap cfg = g.config();
    const VerifySummary summary = verify_all(g.resolve_seed(cfg), fault_scale);
    const std::string text = format_summary(summary);
    std::fputs(text.c_str(), stdout);
    const std::string dest = g.resolve_out(cfg);
    if (!dest.empty()) write_text_file(dest, text);
    return summary.all_pass() ? 0 : 1;
}

int run_calibrate(const GlobalArgs& g) {
    const ConfigMap cfg = g.config();
    const std::string path = config_str(cfg, "cost_matrix", "");
    const CostMatrix phi = path.empty()
                               ? CostMatrix::zero_one(static_cast<int>(config_long(cfg, "L", 2)))
                               : read_cost_matrix(path);
    const CostCalibration cal = calibrate(phi);
    std::ostringstream out;
    out << "L " << phi.L << "\n";
    out << "kappa " << format_g17(cal.kappa) << "\n";
    out << "beta_phi " << format_g17(cal.beta_phi) << "\n";
    out << "c_phi " << format_g17(cal.c_phi) << "\n";
    out << "t_phi " << format_g17(cal.t_phi) << "\n";
    out << "z_phi " << format_g17(cal.z_phi) << "\n";
    out << "j_star " << join_labels(cal.j_star) << "\n";
    out << "k_star " << join_labels(cal.k_star) << "\n";
    out << "l_star " << join_labels(cal.l_star) << "\n";
    std::fputs(out.str().c_str(), stdout);
    const std::string dest = g.resolve_out(cfg);
    if (!dest.empty()) write_text_file(dest, out.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cost-sensitive k-NN on low-dimensional manifolds: synthetic families, "
                 "random projections, convergence-rate experiments and self checks"};
    app.require_subcommand(1);

    GlobalArgs g;
    auto* seed_opt = app.add_option("--seed", g.seed, "base RNG seed, overrides the config value");
    app.add_option("--config", g.config_path, "key-value config file");
    app.add_option("--out", g.out_path, "output CSV path, overrides the config value");
    app.add_option("--threads", g.threads, "worker threads, overrides the config value")
        ->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("generate", "sample a labelled dataset from a distribution");
    auto* ev = app.add_subcommand("evaluate", "train once, report excess risk and error rate");
    auto* rate =
        app.add_subcommand("rate", "sweep n, fit the log-log excess-risk slope, emit CSVs");
    auto* pc =
        app.add_subcommand("project-check", "compare exact and projected neighbour queries");
    auto* ver = app.add_subcommand("verify", "run the self-check battery, nonzero exit on failure");
    double fault_scale = 1.0;
    ver->add_option("--fault-scale", fault_scale,
                    "inflate the claimed margin slope to probe the battery");
    auto* cal = app.add_subcommand("calibrate", "print two-point calibration constants");
    for (CLI::App* sub : {gen, ev, rate, pc, ver, cal}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    g.seed_given = seed_opt->count() > 0;

    try {
        if (gen->parsed()) return run_generate(g);
        if (ev->parsed()) return run_evaluate(g);
        if (rate->parsed()) return run_rate_cmd(g);
        if (pc->parsed()) return run_project_check(g);
        if (ver->parsed()) return run_verify_cmd(g, fault_scale);
        if (cal->parsed()) return run_calibrate(g);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
