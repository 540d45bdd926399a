#include "treeclust/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace treeclust {

Dataset::Dataset(std::vector<double> coords, int dim) : coords_(std::move(coords)), dim_(dim) {
    if (dim_ < 1) throw std::invalid_argument("Dataset: dim must be >= 1");
    if (coords_.empty()) throw std::invalid_argument("Dataset: need at least one point");
    if (coords_.size() % static_cast<std::size_t>(dim_) != 0)
        throw std::invalid_argument("Dataset: coordinate buffer is not a multiple of dim");
    n_ = static_cast<int>(coords_.size() / static_cast<std::size_t>(dim_));
    for (double v : coords_)
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite coordinate");
    lo_.assign(dim_, std::numeric_limits<double>::infinity());
    hi_.assign(dim_, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n_; ++i)
        for (int a = 0; a < dim_; ++a) {
            double v = coords_[static_cast<std::size_t>(i) * dim_ + a];
            lo_[a] = std::min(lo_[a], v);
            hi_[a] = std::max(hi_[a], v);
        }
}

Dataset Dataset::from_points(const std::vector<std::vector<double>>& pts) {
    if (pts.empty()) throw std::invalid_argument("Dataset: need at least one point");
    int dim = static_cast<int>(pts.front().size());
    std::vector<double> flat;
    flat.reserve(pts.size() * pts.front().size());
    for (const auto& p : pts) {
        if (static_cast<int>(p.size()) != dim)
            throw std::invalid_argument("Dataset: ragged point dimensions");
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return Dataset(std::move(flat), dim);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

namespace {

// Uniform grid of cell size r. Cells are sparse (hash map keyed by packed
// cell coordinates); a query visits the 3^d cells around the center.
struct GridIndex {
    const Dataset* ds;
    double r;
    int dim;
    std::vector<std::int64_t> cell_count;  // cells per axis
    std::unordered_map<std::int64_t, std::vector<int>> cells;

    static constexpr std::int64_t kMaxCellsPerAxis = 1 << 20;

    bool build(const Dataset& d, double radius) {
        ds = &d;
        r = radius;
        dim = d.dim();
        cell_count.resize(dim);
        for (int a = 0; a < dim; ++a) {
            double extent = d.max_coord(a) - d.min_coord(a);
            std::int64_t c = static_cast<std::int64_t>(std::floor(extent / r)) + 1;
            if (c > kMaxCellsPerAxis) return false;  // radius too small for grid hashing
            cell_count[a] = c;
        }
        cells.reserve(static_cast<std::size_t>(d.size()));
        for (int i = 0; i < d.size(); ++i) cells[key_of(d.point(i))].push_back(i);
        return true;
    }

    std::int64_t cell_coord(double v, int a) const {
        auto c = static_cast<std::int64_t>(std::floor((v - ds->min_coord(a)) / r));
        return std::clamp<std::int64_t>(c, 0, cell_count[a] - 1);
    }

    std::int64_t key_of(std::span<const double> p) const {
        std::int64_t k = 0;
        for (int a = 0; a < dim; ++a) k = k * (kMaxCellsPerAxis + 2) + cell_coord(p[a], a);
        return k;
    }

    void query(std::span<const double> center, double r2, bool strict, std::vector<int>& out) const {
        std::vector<std::int64_t> base(dim);
        for (int a = 0; a < dim; ++a) base[a] = cell_coord(center[a], a);
        std::vector<std::int64_t> off(dim, -1);
        while (true) {
            bool in_range = true;
            std::int64_t k = 0;
            for (int a = 0; a < dim && in_range; ++a) {
                std::int64_t c = base[a] + off[a];
                if (c < 0 || c >= cell_count[a]) in_range = false;
                k = k * (kMaxCellsPerAxis + 2) + c;
            }
            if (in_range) {
                auto it = cells.find(k);
                if (it != cells.end()) {
                    for (int i : it->second) {
                        double d2 = squared_distance(ds->point(i), center);
                        if (strict ? d2 < r2 : d2 <= r2) out.push_back(i);
                    }
                }
            }
            int a = dim - 1;
            while (a >= 0 && off[a] == 1) off[a--] = -1;
            if (a < 0) break;
            ++off[a];
        }
    }
};

// Median-split k-d tree with fixed-radius search, for d > 3.
struct KdTree {
    struct Node {
        int axis = -1;
        double split = 0.0;
        int begin = 0, end = 0;  // leaf range into order
        int left = -1, right = -1;
    };
    const Dataset* ds;
    std::vector<int> order;
    std::vector<Node> nodes;
    static constexpr int kLeafSize = 16;

    void build(const Dataset& d) {
        ds = &d;
        order.resize(d.size());
        for (int i = 0; i < d.size(); ++i) order[i] = i;
        nodes.reserve(2 * d.size() / kLeafSize + 4);
        build_node(0, d.size());
    }

    int build_node(int begin, int end) {
        int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        if (end - begin <= kLeafSize) {
            nodes[id].begin = begin;
            nodes[id].end = end;
            return id;
        }
        // split the widest axis at the median
        int dim = ds->dim();
        int axis = 0;
        double best_spread = -1.0;
        for (int a = 0; a < dim; ++a) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int t = begin; t < end; ++t) {
                double v = ds->point(order[t])[a];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                axis = a;
            }
        }
        int mid = (begin + end) / 2;
        std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                         [&](int x, int y) { return ds->point(x)[axis] < ds->point(y)[axis]; });
        nodes[id].axis = axis;
        nodes[id].split = ds->point(order[mid])[axis];
        int l = build_node(begin, mid);
        int r = build_node(mid, end);
        nodes[id].left = l;
        nodes[id].right = r;
        return id;
    }

    void query(int id, std::span<const double> center, double r, double r2, bool strict,
               std::vector<int>& out) const {
        const Node& nd = nodes[id];
        if (nd.axis < 0) {
            for (int t = nd.begin; t < nd.end; ++t) {
                int i = order[t];
                double d2 = squared_distance(ds->point(i), center);
                if (strict ? d2 < r2 : d2 <= r2) out.push_back(i);
            }
            return;
        }
        double delta = center[nd.axis] - nd.split;
        if (delta <= r) query(nd.left, center, r, r2, strict, out);
        if (delta >= -r) query(nd.right, center, r, r2, strict, out);
    }
};

}  // namespace

struct NeighborIndex::Impl {
    GridIndex grid;
    KdTree tree;
    bool use_grid = false;
};

NeighborIndex::NeighborIndex(const Dataset& ds, double radius)
    : ds_(&ds), radius_(radius), impl_(std::make_unique<Impl>()) {
    if (!(radius > 0.0)) throw std::invalid_argument("NeighborIndex: radius must be positive");
    impl_->use_grid = ds.dim() <= 3 && impl_->grid.build(ds, radius);
    if (!impl_->use_grid) impl_->tree.build(ds);
}

NeighborIndex::~NeighborIndex() = default;
NeighborIndex::NeighborIndex(NeighborIndex&&) noexcept = default;
NeighborIndex& NeighborIndex::operator=(NeighborIndex&&) noexcept = default;

void NeighborIndex::within(std::span<const double> center, std::vector<int>& out, bool strict) const {
    if (static_cast<int>(center.size()) != ds_->dim())
        throw std::invalid_argument("NeighborIndex: query dimension mismatch");
    out.clear();
    double r2 = radius_ * radius_;
    if (impl_->use_grid)
        impl_->grid.query(center, r2, strict, out);
    else
        impl_->tree.query(0, center, radius_, r2, strict, out);
    std::sort(out.begin(), out.end());
}

std::vector<int> NeighborIndex::within(std::span<const double> center) const {
    std::vector<int> out;
    within(center, out, false);
    return out;
}

std::vector<int> radius_neighbors(const Dataset& ds, std::span<const double> center, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("radius_neighbors: r must be positive");
    if (static_cast<int>(center.size()) != ds.dim())
        throw std::invalid_argument("radius_neighbors: center dimension mismatch");
    NeighborIndex index(ds, r);
    return index.within(center);
}

UnionFind::UnionFind(int n)
    : parent_(n), size_(n, 1), min_member_(n), components_(n) {
    for (int i = 0; i < n; ++i) {
        parent_[i] = i;
        min_member_[i] = i;
    }
}

int UnionFind::find(int i) {
    while (parent_[i] != i) {
        parent_[i] = parent_[parent_[i]];
        i = parent_[i];
    }
    return i;
}

bool UnionFind::unite(int i, int j) {
    int a = find(i), b = find(j);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    min_member_[a] = std::min(min_member_[a], min_member_[b]);
    --components_;
    return true;
}

std::vector<std::vector<int>> epsilon_graph_components(const Dataset& ds,
                                                       const std::vector<int>& active,
                                                       double threshold, EdgeRule rule) {
    if (!(threshold > 0.0)) throw std::invalid_argument("epsilon_graph_components: threshold must be positive");
    if (active.empty()) return {};

    std::vector<char> is_active(ds.size(), 0);
    for (int i : active) {
        if (i < 0 || i >= ds.size()) throw std::invalid_argument("epsilon_graph_components: index out of range");
        is_active[i] = 1;
    }

    NeighborIndex index(ds, threshold);
    UnionFind uf(ds.size());
    std::vector<int> buf;
    bool strict = rule == EdgeRule::Strict;
    for (int i : active) {
        index.within(ds.point(i), buf, strict);
        for (int j : buf)
            if (is_active[j] && j != i) uf.unite(i, j);
    }

    std::unordered_map<int, std::vector<int>> blocks;
    for (int i = 0; i < ds.size(); ++i)
        if (is_active[i]) blocks[uf.find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    out.reserve(blocks.size());
    for (auto& [root, members] : blocks) out.push_back(std::move(members));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

}  // namespace treeclust
