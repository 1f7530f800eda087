#include "csknn/experiment.hpp"

#include "csknn/math_util.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace csknn {

namespace {

std::vector<long> parse_grid(const std::string& text) {
    std::vector<long> grid;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        std::istringstream inner(token);
        long v = 0;
        while (inner >> v) grid.push_back(v);
    }
    return grid;
}

void check_config(const ExperimentConfig& cfg) {
    if (cfg.n_grid.size() < 2) throw std::invalid_argument("n_grid needs at least 2 entries");
    for (std::size_t i = 0; i + 1 < cfg.n_grid.size(); ++i) {
        if (cfg.n_grid[i] >= cfg.n_grid[i + 1]) {
            throw std::invalid_argument("n_grid must be strictly increasing");
        }
    }
    if (cfg.n_grid.front() < 1) throw std::invalid_argument("sample sizes must be positive");
    if (cfg.trials < 1) throw std::invalid_argument("trials must be positive");
    if (cfg.m_test < 1) throw std::invalid_argument("m_test must be positive");
    if (cfg.threads < 1) throw std::invalid_argument("threads must be positive");
    if (cfg.projected && cfg.proj_h < 1) throw std::invalid_argument("projected mode needs h >= 1");
}

} // namespace

ExperimentConfig experiment_from_config(const ConfigMap& cfg) {
    ExperimentConfig out;
    out.dist = distribution_from_config(cfg);
    out.phi = out.dist.phi;
    out.n_grid = parse_grid(config_str(cfg, "n_grid", "512,1024,2048,4096,8192,16384"));
    out.trials = static_cast<int>(config_long(cfg, "trials", out.trials));
    out.schedule.k0 = config_double(cfg, "k0", out.schedule.k0);
    out.schedule.alpha = config_double(cfg, "schedule_alpha", out.schedule.alpha);
    out.schedule.gamma = static_cast<int>(
        config_long(cfg, "schedule_gamma", out.dist.kind == ManifoldKind::sphere ? 2 : 1));
    const std::string mode = config_str(cfg, "mode", "exact");
    if (mode == "projected") {
        out.projected = true;
    } else if (mode != "exact") {
        throw std::invalid_argument("mode must be exact or projected");
    }
    out.proj_h = static_cast<int>(config_long(cfg, "proj_h", out.proj_h));
    const std::string kind = config_str(cfg, "proj_kind", "achlioptas");
    if (kind == "gaussian") {
        out.proj_kind = ProjectionKind::gaussian;
    } else if (kind == "achlioptas") {
        out.proj_kind = ProjectionKind::achlioptas;
    } else {
        throw std::invalid_argument("proj_kind must be gaussian or achlioptas");
    }
    out.m_test = static_cast<int>(config_long(cfg, "m_test", out.m_test));
    out.base_seed = config_u64(cfg, "seed", out.base_seed);
    out.xi = config_double(cfg, "xi", out.xi);
    out.delta_proj = config_double(cfg, "delta", out.delta_proj);
    out.threads = static_cast<int>(config_long(cfg, "threads", out.threads));
    out.out_path = config_str(cfg, "out", out.out_path);
    return out;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) throw std::invalid_argument("slope fit needs at least 2 pairs");
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(pairs[i].first > 0.0) || !(pairs[i].second > 0.0)) {
            throw std::invalid_argument("slope fit needs positive pairs");
        }
        xs[i] = std::log(pairs[i].first);
        ys[i] = std::log(pairs[i].second);
    }
    const double xbar = pairwise_mean(xs);
    const double ybar = pairwise_mean(ys);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx <= 0.0) throw std::invalid_argument("slope fit needs distinct n values");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double resid = ys[i] - fit.intercept - fit.slope * xs[i];
            rss += resid * resid;
        }
        fit.stderr_slope = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

RateReport run_rate(const ExperimentConfig& cfg) {
    check_config(cfg);
    const std::unique_ptr<SyntheticDistribution> dist = build_distribution(cfg.dist);
    if (dist->num_labels() != cfg.phi.L) throw std::invalid_argument("label count mismatch");

    RateReport rep;
    rep.n_grid = cfg.n_grid;
    rep.mode = cfg.projected ? "projected" : "exact";
    const double beta = dist->params().beta;
    rep.theory_exponent = -cfg.schedule.alpha * (1.0 + beta) /
                          (2.0 * cfg.schedule.alpha + cfg.schedule.gamma);

    rep.k_per_n.resize(cfg.n_grid.size());
    const std::optional<double> xi =
        cfg.xi > 0.0 ? std::optional<double>(cfg.xi) : std::nullopt;
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        rep.k_per_n[i] = k_schedule(cfg.schedule, cfg.n_grid[i], xi);
    }

    const std::size_t slots = cfg.n_grid.size() * static_cast<std::size_t>(cfg.trials);
    rep.rows.resize(slots);

    // slot seeds are base + trial + 1e6 * n_index so any subset reproduces;
    // slot-indexed writes keep the output independent of the thread count
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= slots) return;
            const std::size_t n_index = slot / static_cast<std::size_t>(cfg.trials);
            const int trial = static_cast<int>(slot % static_cast<std::size_t>(cfg.trials));
            const long n = cfg.n_grid[n_index];
            const std::uint64_t slot_seed =
                cfg.base_seed + static_cast<std::uint64_t>(trial) + 1000000ULL * n_index;

            Rng train_rng(derive_seed(slot_seed, 1));
            const Dataset train = dist->sample_dataset(static_cast<int>(n), train_rng);

            // kd pruning buys nothing in high ambient dimension; the flat scan
            // and the tree return bit-identical results either way
            const bool accelerate = cfg.dist.ambient_dim <= 64;
            NeighbourIndex idx;
            if (cfg.projected) {
                ProjectionSpec pspec;
                pspec.kind = cfg.proj_kind;
                pspec.ambient_dim = cfg.dist.ambient_dim;
                pspec.target_dim = cfg.proj_h;
                pspec.seed = derive_seed(slot_seed, 3);
                const ProjectionMatrix proj = sample_projection(pspec);
                idx = build_index(train, &proj, accelerate);
            } else {
                idx = build_index(train, nullptr, accelerate);
            }

            const EvalResult res =
                evaluate(idx, cfg.phi, *dist, rep.k_per_n[n_index],
                         cfg.projected ? QueryMode::projected : QueryMode::exact, cfg.m_test,
                         derive_seed(slot_seed, 2));
            TrialRow& row = rep.rows[slot];
            row.n = n;
            row.n_index = static_cast<int>(n_index);
            row.trial = trial;
            row.k = rep.k_per_n[n_index];
            row.excess = res.excess_risk;
            row.misclass = res.misclass_prob;
            row.seed = slot_seed;
        }
    };
    if (cfg.threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(cfg.threads));
        for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    rep.mean_excess.resize(cfg.n_grid.size());
    rep.stderr_excess.resize(cfg.n_grid.size());
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        std::vector<double> excess(static_cast<std::size_t>(cfg.trials));
        for (int t = 0; t < cfg.trials; ++t) {
            excess[static_cast<std::size_t>(t)] =
                rep.rows[i * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)].excess;
        }
        const MeanStd ms = mean_stderr(excess);
        rep.mean_excess[i] = ms.mean;
        rep.stderr_excess[i] = ms.stderr_of_mean;
    }

    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(cfg.n_grid.size());
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        double mean = rep.mean_excess[i];
        if (mean < 1e-6) {
            mean = 1e-6; // logs are undefined otherwise
            rep.clipped = true;
        }
        pairs.emplace_back(static_cast<double>(cfg.n_grid[i]), mean);
    }
    rep.fit = fit_slope(pairs);
    return rep;
}

std::string trial_csv(const RateReport& rep, const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "family,gamma,d,n,k,mode,trial,excess_risk,misclass_prob,seed\n";
    const int gamma = cfg.dist.kind == ManifoldKind::sphere ? 2 : 1;
    for (const TrialRow& row : rep.rows) {
        out << cfg.dist.family << "," << gamma << "," << cfg.dist.ambient_dim << "," << row.n
            << "," << row.k << "," << rep.mode << "," << row.trial << ","
            << format_g17(row.excess) << "," << format_g17(row.misclass) << "," << row.seed
            << "\n";
    }
    return out.str();
}

std::string summary_csv(const RateReport& rep) {
    std::ostringstream out;
    out << "n,mean_excess,stderr,k,slope_so_far\n";
    for (std::size_t i = 0; i < rep.n_grid.size(); ++i) {
        double slope_so_far = std::numeric_limits<double>::quiet_NaN();
        if (i >= 1) {
            std::vector<std::pair<double, double>> prefix;
            for (std::size_t j = 0; j <= i; ++j) {
                prefix.emplace_back(static_cast<double>(rep.n_grid[j]),
                                    std::max(rep.mean_excess[j], 1e-6));
            }
            slope_so_far = fit_slope(prefix).slope;
        }
        out << rep.n_grid[i] << "," << format_g17(rep.mean_excess[i]) << ","
            << format_g17(rep.stderr_excess[i]) << "," << rep.k_per_n[i] << ","
            << format_g17(slope_so_far) << "\n";
    }
    return out.str();
}

} // namespace csknn
