#include "csknn/neighbours.hpp"

#include "csknn/math_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csknn {

void validate(const Dataset& data) {
    if (data.d < 1) throw std::invalid_argument("dataset dimension must be >= 1");
    if (data.L < 2) throw std::invalid_argument("dataset needs L >= 2");
    if (data.labels.empty()) throw std::invalid_argument("dataset must hold at least one point");
    if (data.features.size() != data.labels.size() * static_cast<std::size_t>(data.d))
        throw std::invalid_argument("dataset feature block size mismatch");
    for (int y : data.labels)
        if (y < 1 || y > data.L) throw std::invalid_argument("dataset label out of range");
    for (double v : data.features)
        if (!std::isfinite(v)) throw std::invalid_argument("dataset feature not finite");
}

void KdTree::build(const std::vector<double>& pts, int dim) {
    d_ = dim;
    const int n = static_cast<int>(pts.size() / static_cast<std::size_t>(dim));
    nodes_.clear();
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    nodes_.reserve(static_cast<std::size_t>(2 * n) / 16 + 8);
    int root = build_node(order, 0, n, pts);
    (void)root;
    coords_.resize(pts.size());
    idx_ = order;
    for (int i = 0; i < n; ++i)
        std::copy_n(pts.data() + static_cast<std::size_t>(order[i]) * d_, d_,
                    coords_.data() + static_cast<std::size_t>(i) * d_);
}

int KdTree::build_node(std::vector<int>& order, int lo, int hi, const std::vector<double>& pts) {
    constexpr int leaf_size = 24;
    Node node;
    node.lo = lo;
    node.hi = hi;
    const int count = hi - lo;
    if (count > leaf_size) {
        // split on the widest dimension of this subset
        int best_dim = 0;
        double best_spread = -1.0;
        for (int j = 0; j < d_; ++j) {
            double mn = std::numeric_limits<double>::infinity();
            double mx = -mn;
            for (int i = lo; i < hi; ++i) {
                double v = pts[static_cast<std::size_t>(order[i]) * d_ + j];
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (mx - mn > best_spread) {
                best_spread = mx - mn;
                best_dim = j;
            }
        }
        if (best_spread > 0.0) {
            int mid = lo + count / 2;
            auto coord = [&](int i) { return pts[static_cast<std::size_t>(i) * d_ + best_dim]; };
            std::nth_element(order.begin() + lo, order.begin() + mid, order.begin() + hi,
                             [&](int a, int b) { return coord(a) < coord(b); });
            node.dim = best_dim;
            node.split = coord(order[mid]);
            int self = static_cast<int>(nodes_.size());
            nodes_.push_back(node);
            int left = build_node(order, lo, mid, pts);
            int right = build_node(order, mid, hi, pts);
            nodes_[self].left = left;
            nodes_[self].right = right;
            return self;
        }
        // all points identical: keep as one leaf
    }
    int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    return self;
}

namespace {

using Key = std::pair<double, int>; // (squared distance, training index)

struct BoundedHeap {
    std::vector<Key> heap; // max-heap on Key
    int k;

    explicit BoundedHeap(int k_) : k(k_) { heap.reserve(static_cast<std::size_t>(k_)); }

    bool full() const { return static_cast<int>(heap.size()) == k; }
    double worst_d2() const {
        return full() ? heap.front().first : std::numeric_limits<double>::infinity();
    }
    void offer(Key key) {
        if (!full()) {
            heap.push_back(key);
            std::push_heap(heap.begin(), heap.end());
        } else if (key < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = key;
            std::push_heap(heap.begin(), heap.end());
        }
    }
};

} // namespace

void KdTree::query(const double* x, int k, std::vector<Key>& out) const {
    BoundedHeap best(k);
    // explicit stack of (node, lower bound on squared distance to its box)
    struct Frame { int node; double bound; };
    std::vector<Frame> stack;
    std::vector<double> off(static_cast<std::size_t>(d_), 0.0);

    // recursive walk, nearer child first
    auto walk = [&](auto&& self, int ni, double bound) -> void {
        const Node& node = nodes_[static_cast<std::size_t>(ni)];
        if (node.dim < 0) {
            const double* p = coords_.data() + static_cast<std::size_t>(node.lo) * d_;
            for (int i = node.lo; i < node.hi; ++i, p += d_) {
                double d2 = euclidean_dist2(x, p, d_);
                best.offer(Key{d2, idx_[static_cast<std::size_t>(i)]});
            }
            return;
        }
        double delta = x[node.dim] - node.split;
        int near = delta <= 0.0 ? node.left : node.right;
        int far = delta <= 0.0 ? node.right : node.left;
        self(self, near, bound);
        double old = off[static_cast<std::size_t>(node.dim)];
        double far_bound = bound - old * old + delta * delta;
        // equal bounds must still be visited so index ties resolve as in a flat scan
        if (!(far_bound > best.worst_d2())) {
            off[static_cast<std::size_t>(node.dim)] = delta;
            self(self, far, far_bound);
            off[static_cast<std::size_t>(node.dim)] = old;
        }
    };
    walk(walk, 0, 0.0);

    out.assign(best.heap.begin(), best.heap.end());
    std::sort(out.begin(), out.end());
}

NeighbourIndex build_index(const Dataset& data, const ProjectionMatrix* proj, bool accelerated) {
    validate(data);
    NeighbourIndex idx;
    idx.data = data;
    idx.accelerated = accelerated;
    if (proj) {
        if (proj->spec.ambient_dim != data.d)
            throw std::invalid_argument("projection dimension does not match dataset");
        idx.projection = *proj;
        const int h = proj->spec.target_dim;
        idx.projected.resize(data.size() * static_cast<std::size_t>(h));
        for (std::size_t i = 0; i < data.size(); ++i)
            apply_into(*proj, data.point(i), idx.projected.data() + i * static_cast<std::size_t>(h));
    }
    if (accelerated) {
        idx.tree_ambient.build(idx.data.features, idx.data.d);
        if (idx.has_projection())
            idx.tree_projected.build(idx.projected, idx.projection->spec.target_dim);
    }
    return idx;
}

namespace {

void brute_knn(const std::vector<double>& pts, int d, const double* x, int k,
               std::vector<Key>& out) {
    const int n = static_cast<int>(pts.size() / static_cast<std::size_t>(d));
    BoundedHeap best(k);
    const double* p = pts.data();
    for (int i = 0; i < n; ++i, p += d) {
        double d2 = euclidean_dist2(x, p, d);
        best.offer(Key{d2, i});
    }
    out.assign(best.heap.begin(), best.heap.end());
    std::sort(out.begin(), out.end());
}

// block width for batched flat scans; one cache pass over the training matrix
// serves this many queries at a time
constexpr int kQueryBlock = 64;

#if defined(__x86_64__) && defined(__GNUC__)
#define CSKNN_HOT_CLONES __attribute__((target_clones("default", "avx2", "avx512f")))
#else
#define CSKNN_HOT_CLONES
#endif

// squared distances from one training point to b query lanes. Lane q sums its
// terms in ascending j with separate sub/mul/add roundings, so acc[q] equals
// euclidean_dist2(query_q, p, d) bit for bit at any vector width.
CSKNN_HOT_CLONES
void block_terms(const double* __restrict qt, const double* __restrict p, int d, int b,
                 double* __restrict acc) {
    for (int q = 0; q < b; ++q) acc[q] = 0.0;
    for (int j = 0; j < d; ++j) {
        const double pj = p[j];
        const double* __restrict row = qt + static_cast<std::size_t>(j) * b;
        for (int q = 0; q < b; ++q) {
            const double diff = row[q] - pj;
            acc[q] += diff * diff;
        }
    }
}

// one heap per query in the block, offered the training points in the same
// ascending-index order as brute_knn, so each query's result is bit-identical
// to a lone scan
void brute_knn_block(const std::vector<double>& pts, int d, const double* queries, int b, int k,
                     std::vector<std::vector<Key>>& out) {
    const int n = static_cast<int>(pts.size() / static_cast<std::size_t>(d));
    std::vector<BoundedHeap> heaps;
    heaps.reserve(static_cast<std::size_t>(b));
    for (int q = 0; q < b; ++q) heaps.emplace_back(k);
    // query block transposed to dimension-major so lanes read contiguously
    std::vector<double> qt(static_cast<std::size_t>(b) * static_cast<std::size_t>(d));
    for (int q = 0; q < b; ++q)
        for (int j = 0; j < d; ++j)
            qt[static_cast<std::size_t>(j) * b + q] = queries[static_cast<std::size_t>(q) * d + j];
    std::vector<double> acc(static_cast<std::size_t>(b));
    const double* p = pts.data();
    for (int i = 0; i < n; ++i, p += d) {
        block_terms(qt.data(), p, d, b, acc.data());
        for (int q = 0; q < b; ++q)
            heaps[static_cast<std::size_t>(q)].offer(Key{acc[static_cast<std::size_t>(q)], i});
    }
    for (int q = 0; q < b; ++q) {
        auto& keys = out[static_cast<std::size_t>(q)];
        auto& heap = heaps[static_cast<std::size_t>(q)].heap;
        keys.assign(heap.begin(), heap.end());
        std::sort(keys.begin(), keys.end());
    }
}

void check_k(const NeighbourIndex& idx, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > idx.data.size())
        throw std::invalid_argument("k out of range");
}

int query_count(const NeighbourIndex& idx, const std::vector<double>& queries, int stride) {
    if (stride < 1 || queries.size() % static_cast<std::size_t>(stride) != 0)
        throw std::invalid_argument("query buffer is not a whole number of points");
    (void)idx;
    return static_cast<int>(queries.size() / static_cast<std::size_t>(stride));
}

} // namespace

QueryResult query_exact(const NeighbourIndex& idx, const double* x, int k) {
    check_k(idx, k);
    std::vector<Key> keys;
    if (idx.accelerated && !idx.tree_ambient.empty())
        idx.tree_ambient.query(x, k, keys);
    else
        brute_knn(idx.data.features, idx.data.d, x, k, keys);
    QueryResult res;
    res.indices.reserve(keys.size());
    for (const auto& key : keys) res.indices.push_back(key.second);
    res.radius = std::sqrt(keys.back().first);
    return res;
}

QueryResult query_exact(const NeighbourIndex& idx, const std::vector<double>& x, int k) {
    if (static_cast<int>(x.size()) != idx.data.d)
        throw std::invalid_argument("query dimension mismatch");
    return query_exact(idx, x.data(), k);
}

QueryResult query_projected(const NeighbourIndex& idx, const double* x, int k) {
    if (!idx.has_projection())
        throw std::invalid_argument("index has no projection attached");
    check_k(idx, k);
    const int h = idx.projection->spec.target_dim;
    std::vector<double> qx(static_cast<std::size_t>(h));
    apply_into(*idx.projection, x, qx.data());
    std::vector<Key> keys;
    if (idx.accelerated && !idx.tree_projected.empty())
        idx.tree_projected.query(qx.data(), k, keys);
    else
        brute_knn(idx.projected, h, qx.data(), k, keys);
    QueryResult res;
    res.indices.reserve(keys.size());
    double worst = 0.0;
    for (const auto& key : keys) {
        res.indices.push_back(key.second);
        worst = std::max(worst, euclidean_dist2(x, idx.data.point(static_cast<std::size_t>(key.second)), idx.data.d));
    }
    res.radius = std::sqrt(worst);
    return res;
}

QueryResult query_projected(const NeighbourIndex& idx, const std::vector<double>& x, int k) {
    if (static_cast<int>(x.size()) != idx.data.d)
        throw std::invalid_argument("query dimension mismatch");
    return query_projected(idx, x.data(), k);
}

std::vector<QueryResult> query_exact_batch(const NeighbourIndex& idx,
                                           const std::vector<double>& queries, int k) {
    const int d = idx.data.d;
    const int m = query_count(idx, queries, d);
    std::vector<QueryResult> out(static_cast<std::size_t>(m));
    if (idx.accelerated && !idx.tree_ambient.empty()) {
        for (int q = 0; q < m; ++q)
            out[static_cast<std::size_t>(q)] =
                query_exact(idx, queries.data() + static_cast<std::size_t>(q) * d, k);
        return out;
    }
    check_k(idx, k);
    std::vector<std::vector<Key>> keys(kQueryBlock);
    for (int q0 = 0; q0 < m; q0 += kQueryBlock) {
        const int b = std::min(kQueryBlock, m - q0);
        brute_knn_block(idx.data.features, d, queries.data() + static_cast<std::size_t>(q0) * d,
                        b, k, keys);
        for (int q = 0; q < b; ++q) {
            QueryResult& res = out[static_cast<std::size_t>(q0 + q)];
            const auto& ks = keys[static_cast<std::size_t>(q)];
            res.indices.reserve(ks.size());
            for (const auto& key : ks) res.indices.push_back(key.second);
            res.radius = std::sqrt(ks.back().first);
        }
    }
    return out;
}

std::vector<QueryResult> query_projected_batch(const NeighbourIndex& idx,
                                               const std::vector<double>& queries, int k) {
    if (!idx.has_projection())
        throw std::invalid_argument("index has no projection attached");
    const int d = idx.data.d;
    const int m = query_count(idx, queries, d);
    std::vector<QueryResult> out(static_cast<std::size_t>(m));
    if (idx.accelerated && !idx.tree_projected.empty()) {
        for (int q = 0; q < m; ++q)
            out[static_cast<std::size_t>(q)] =
                query_projected(idx, queries.data() + static_cast<std::size_t>(q) * d, k);
        return out;
    }
    check_k(idx, k);
    const int h = idx.projection->spec.target_dim;
    std::vector<double> qproj(static_cast<std::size_t>(m) * static_cast<std::size_t>(h));
    for (int q = 0; q < m; ++q)
        apply_into(*idx.projection, queries.data() + static_cast<std::size_t>(q) * d,
                   qproj.data() + static_cast<std::size_t>(q) * h);
    std::vector<std::vector<Key>> keys(kQueryBlock);
    for (int q0 = 0; q0 < m; q0 += kQueryBlock) {
        const int b = std::min(kQueryBlock, m - q0);
        brute_knn_block(idx.projected, h, qproj.data() + static_cast<std::size_t>(q0) * h,
                        b, k, keys);
        for (int q = 0; q < b; ++q) {
            QueryResult& res = out[static_cast<std::size_t>(q0 + q)];
            const double* x = queries.data() + static_cast<std::size_t>(q0 + q) * d;
            double worst = 0.0;
            const auto& ks = keys[static_cast<std::size_t>(q)];
            res.indices.reserve(ks.size());
            for (const auto& key : ks) {
                res.indices.push_back(key.second);
                worst = std::max(worst, euclidean_dist2(
                                            x, idx.data.point(static_cast<std::size_t>(key.second)),
                                            d));
            }
            res.radius = std::sqrt(worst);
        }
    }
    return out;
}

double theta_ratio(const QueryResult& exact, const QueryResult& approx) {
    if (exact.indices.size() != approx.indices.size())
        throw std::invalid_argument("theta_ratio needs results for the same k");
    if (exact.radius == 0.0) {
        if (approx.radius == 0.0) return 1.0;
        throw std::domain_error("theta undefined: exact radius 0 with approx radius > 0");
    }
    return approx.radius / exact.radius;
}

double omega_ratio(const QueryResult& exact, const QueryResult& approx,
                   const std::function<double(double)>& ball_measure) {
    if (approx.radius == exact.radius) return 1.0;
    double m0 = ball_measure(exact.radius);
    if (!(m0 > 0.0)) throw std::domain_error("omega undefined: exact ball has measure 0");
    return ball_measure(approx.radius) / m0;
}

} // namespace csknn
