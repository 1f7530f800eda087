#pragma once

#include "csknn/projection.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace csknn {

struct Dataset {
    int d = 0;
    int L = 0;
    std::vector<double> features; // n x d row-major
    std::vector<int> labels;      // values in 1..L

    std::size_t size() const { return labels.size(); }
    const double* point(std::size_t i) const { return features.data() + i * static_cast<std::size_t>(d); }
};

void validate(const Dataset& data);

// Exact kd-tree; mirrors a brute-force scan result for result, including
// lexicographic (distance, index) tie handling.
class KdTree {
public:
    KdTree() = default;
    void build(const std::vector<double>& pts, int dim);
    bool empty() const { return nodes_.empty(); }
    // appends (dist^2, original index) of the k nearest into out (sorted ascending)
    void query(const double* x, int k, std::vector<std::pair<double, int>>& out) const;

private:
    struct Node {
        int dim = -1;      // split dimension, -1 for leaf
        double split = 0;  // split coordinate
        int lo = 0, hi = 0; // leaf point range
        int left = -1, right = -1;
    };
    int d_ = 0;
    std::vector<Node> nodes_;
    std::vector<double> coords_; // reordered n x d
    std::vector<int> idx_;       // reordered original indices

    int build_node(std::vector<int>& order, int lo, int hi, const std::vector<double>& pts);
};

struct QueryResult {
    std::vector<int> indices; // ascending (distance, training index) order
    double radius = 0.0;      // max distance in the ORIGINAL space over indices
};

class NeighbourIndex {
public:
    Dataset data;
    std::optional<ProjectionMatrix> projection;
    std::vector<double> projected; // n x h, filled when projection present
    bool accelerated = false;
    KdTree tree_ambient;
    KdTree tree_projected;

    bool has_projection() const { return projection.has_value(); }
};

NeighbourIndex build_index(const Dataset& data,
                           const ProjectionMatrix* proj = nullptr,
                           bool accelerated = false);

QueryResult query_exact(const NeighbourIndex& idx, const double* x, int k);
QueryResult query_exact(const NeighbourIndex& idx, const std::vector<double>& x, int k);
QueryResult query_projected(const NeighbourIndex& idx, const double* x, int k);
QueryResult query_projected(const NeighbourIndex& idx, const std::vector<double>& x, int k);

// batched variants: one result per query row (m x d, row-major). Results are
// identical to the per-query calls; the flat scan streams the training matrix
// once per block of queries instead of once per query.
std::vector<QueryResult> query_exact_batch(const NeighbourIndex& idx,
                                           const std::vector<double>& queries, int k);
std::vector<QueryResult> query_projected_batch(const NeighbourIndex& idx,
                                               const std::vector<double>& queries, int k);

double theta_ratio(const QueryResult& exact, const QueryResult& approx);
double omega_ratio(const QueryResult& exact, const QueryResult& approx,
                   const std::function<double(double)>& ball_measure);

} // namespace csknn
