#pragma once

#include "csknn/cost_geometry.hpp"
#include "csknn/distributions.hpp"
#include "csknn/neighbours.hpp"

#include <map>
#include <memory>
#include <string>

namespace csknn {

// Buildable description of a synthetic distribution. Serializes to the same
// key-value text the config reader consumes.
struct DistributionSpec {
    std::string family = "benign"; // "benign" | "hard"
    ManifoldKind kind = ManifoldKind::circle;
    double radius = 1.0;
    int ambient_dim = 2;
    std::uint64_t rotation_seed = 0;
    // benign fields
    int m_freq = 1;
    double kappa = 0.5;
    double amplitude = 0.5;
    // hard fields
    double r = 0.03125;
    std::string sigma;          // one char per flipped cell: '+', '-' or '0'; empty = all '0'
    std::uint64_t seed = 0;     // construction seed (net candidates, measure pool)
    RegularityParams params;    // alpha/C_alpha/beta/C_beta inputs for the hard family
    CostMatrix phi = CostMatrix::zero_one(2);
};

EmbeddedManifold manifold_from_spec(const DistributionSpec& spec);
std::unique_ptr<SyntheticDistribution> build_distribution(const DistributionSpec& spec);

std::string serialize_distribution(const DistributionSpec& spec);
DistributionSpec parse_distribution(const std::string& text);

// plain key-value text: one "key value..." per line, '#' starts a comment
using ConfigMap = std::map<std::string, std::string>;
ConfigMap read_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);
DistributionSpec distribution_from_config(const ConfigMap& cfg);

// helpers with defaults; throw on malformed values
std::string config_str(const ConfigMap& cfg, const std::string& key, const std::string& fallback);
double config_double(const ConfigMap& cfg, const std::string& key, double fallback);
long config_long(const ConfigMap& cfg, const std::string& key, long fallback);
std::uint64_t config_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback);

// cost matrix file: first line L, then L rows of L entries
CostMatrix read_cost_matrix(const std::string& path);
void write_cost_matrix(const CostMatrix& phi, const std::string& path);

// dataset file: header "n d L", then n rows of d coordinates and a label
Dataset read_dataset(const std::string& path);
void write_dataset(const Dataset& data, const std::string& path);

// shortest round-trip decimal (%.17g)
std::string format_g17(double v);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace csknn
