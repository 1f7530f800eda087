#include "csknn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace csknn {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(what);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed number for " + what + ": '" + s + "'");
    }
}

long parse_long(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(what);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed integer for " + what + ": '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(what);
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed seed for " + what + ": '" + s + "'");
    }
}

} // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ConfigMap read_config_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto space = line.find_first_of(" \t");
        if (space == std::string::npos) {
            cfg[line] = "";
            continue;
        }
        cfg[line.substr(0, space)] = trim(line.substr(space + 1));
    }
    return cfg;
}

ConfigMap read_config_file(const std::string& path) {
    return read_config_text(read_text_file(path));
}

std::string config_str(const ConfigMap& cfg, const std::string& key, const std::string& fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
}

double config_double(const ConfigMap& cfg, const std::string& key, double fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : parse_double(it->second, key);
}

long config_long(const ConfigMap& cfg, const std::string& key, long fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : parse_long(it->second, key);
}

std::uint64_t config_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : parse_u64(it->second, key);
}

EmbeddedManifold manifold_from_spec(const DistributionSpec& spec) {
    return make_manifold(spec.kind, spec.radius, spec.ambient_dim, spec.rotation_seed);
}

std::unique_ptr<SyntheticDistribution> build_distribution(const DistributionSpec& spec) {
    const EmbeddedManifold m = manifold_from_spec(spec);
    if (spec.family == "benign") {
        return build_benign(m, spec.m_freq, spec.kappa, spec.amplitude, spec.phi);
    }
    if (spec.family == "hard") {
        std::vector<int> sigma;
        if (spec.sigma.empty()) {
            const HardConstruction hc = hard_params(spec.phi, spec.params, m, spec.r, spec.seed);
            sigma.assign(static_cast<std::size_t>(hc.m_r), 0);
        } else {
            sigma.reserve(spec.sigma.size());
            for (char c : spec.sigma) {
                if (c == '+') {
                    sigma.push_back(1);
                } else if (c == '-') {
                    sigma.push_back(-1);
                } else if (c == '0') {
                    sigma.push_back(0);
                } else {
                    throw std::invalid_argument("sigma string must use '+', '-' and '0'");
                }
            }
        }
        return build_hard(m, spec.phi, spec.params, spec.r, sigma, spec.seed);
    }
    throw std::invalid_argument("unknown family: " + spec.family);
}

std::string serialize_distribution(const DistributionSpec& spec) {
    std::ostringstream out;
    out << "family " << spec.family << "\n";
    out << "manifold " << (spec.kind == ManifoldKind::circle ? "circle" : "sphere") << "\n";
    out << "radius " << format_g17(spec.radius) << "\n";
    out << "ambient_dim " << spec.ambient_dim << "\n";
    out << "rotation_seed " << spec.rotation_seed << "\n";
    if (spec.family == "benign") {
        out << "m_freq " << spec.m_freq << "\n";
        out << "kappa " << format_g17(spec.kappa) << "\n";
        out << "amplitude " << format_g17(spec.amplitude) << "\n";
    } else {
        out << "r " << format_g17(spec.r) << "\n";
        if (!spec.sigma.empty()) out << "sigma " << spec.sigma << "\n";
        out << "alpha " << format_g17(spec.params.alpha) << "\n";
        out << "c_alpha " << format_g17(spec.params.C_alpha) << "\n";
        out << "beta " << format_g17(spec.params.beta) << "\n";
        out << "c_beta " << format_g17(spec.params.C_beta) << "\n";
    }
    out << "dist_seed " << spec.seed << "\n";
    return out.str();
}

DistributionSpec distribution_from_config(const ConfigMap& cfg) {
    DistributionSpec spec;
    spec.family = config_str(cfg, "family", spec.family);
    const std::string kind = config_str(cfg, "manifold", "circle");
    if (kind == "circle") {
        spec.kind = ManifoldKind::circle;
    } else if (kind == "sphere") {
        spec.kind = ManifoldKind::sphere;
    } else {
        throw std::invalid_argument("unknown manifold: " + kind);
    }
    spec.radius = config_double(cfg, "radius", spec.radius);
    spec.ambient_dim = static_cast<int>(config_long(cfg, "ambient_dim", spec.ambient_dim));
    spec.rotation_seed = config_u64(cfg, "rotation_seed", spec.rotation_seed);
    spec.m_freq = static_cast<int>(config_long(cfg, "m_freq", spec.m_freq));
    spec.kappa = config_double(cfg, "kappa", spec.kappa);
    spec.amplitude = config_double(cfg, "amplitude", spec.amplitude);
    spec.r = config_double(cfg, "r", spec.r);
    spec.sigma = config_str(cfg, "sigma", spec.sigma);
    spec.seed = config_u64(cfg, "dist_seed", spec.seed);
    spec.params.alpha = config_double(cfg, "alpha", spec.params.alpha);
    spec.params.C_alpha = config_double(cfg, "c_alpha", spec.params.C_alpha);
    spec.params.beta = config_double(cfg, "beta", spec.params.beta);
    spec.params.C_beta = config_double(cfg, "c_beta", spec.params.C_beta);
    const std::string phi_path = config_str(cfg, "cost_matrix", "");
    if (!phi_path.empty()) spec.phi = read_cost_matrix(phi_path);
    return spec;
}

DistributionSpec parse_distribution(const std::string& text) {
    return distribution_from_config(read_config_text(text));
}

CostMatrix read_cost_matrix(const std::string& path) {
    std::istringstream in(read_text_file(path));
    int L = 0;
    if (!(in >> L) || L < 2) throw std::invalid_argument("cost matrix file needs L >= 2: " + path);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(L),
                                          std::vector<double>(static_cast<std::size_t>(L)));
    for (auto& row : rows) {
        for (auto& v : row) {
            if (!(in >> v)) throw std::invalid_argument("cost matrix file truncated: " + path);
        }
    }
    return CostMatrix::from_rows(rows);
}

void write_cost_matrix(const CostMatrix& phi, const std::string& path) {
    std::ostringstream out;
    out << phi.L << "\n";
    for (int i = 0; i < phi.L; ++i) {
        for (int j = 0; j < phi.L; ++j) {
            out << (j ? " " : "") << format_g17(phi.at(i, j));
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

Dataset read_dataset(const std::string& path) {
    std::istringstream in(read_text_file(path));
    long n = 0;
    Dataset data;
    if (!(in >> n >> data.d >> data.L) || n < 0 || data.d < 1 || data.L < 2) {
        throw std::invalid_argument("dataset header must be 'n d L': " + path);
    }
    data.features.resize(static_cast<std::size_t>(n) * data.d);
    data.labels.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        for (int j = 0; j < data.d; ++j) {
            if (!(in >> data.features[static_cast<std::size_t>(i) * data.d + j])) {
                throw std::invalid_argument("dataset file truncated: " + path);
            }
        }
        if (!(in >> data.labels[static_cast<std::size_t>(i)])) {
            throw std::invalid_argument("dataset file truncated: " + path);
        }
    }
    validate(data);
    return data;
}

void write_dataset(const Dataset& data, const std::string& path) {
    std::ostringstream out;
    out << data.size() << " " << data.d << " " << data.L << "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int j = 0; j < data.d; ++j) {
            out << format_g17(data.features[i * data.d + j]) << " ";
        }
        out << data.labels[i] << "\n";
    }
    write_text_file(path, out.str());
}

} // namespace csknn
