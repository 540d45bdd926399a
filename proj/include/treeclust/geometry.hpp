#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace treeclust {

/// Immutable point cloud in R^d. Point order is stable: index i refers to the
/// same point for the lifetime of the object.
class Dataset {
public:
    /// Takes row-major coordinates, n = coords.size() / dim.
    /// Throws std::invalid_argument on empty input, ragged size or non-finite
    /// coordinates.
    Dataset(std::vector<double> coords, int dim);

    static Dataset from_points(const std::vector<std::vector<double>>& pts);

    int dim() const { return dim_; }
    int size() const { return n_; }

    std::span<const double> point(int i) const {
        return {coords_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& coords() const { return coords_; }

    double min_coord(int axis) const { return lo_[axis]; }
    double max_coord(int axis) const { return hi_[axis]; }

private:
    std::vector<double> coords_;
    int dim_ = 0;
    int n_ = 0;
    std::vector<double> lo_, hi_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Fixed-radius neighbor index over an immutable dataset. Uses a uniform grid
/// of cell size r for d <= 3 and a k-d tree for d > 3 (or when the grid would
/// need too many cells along one axis). Safe to share across readers.
class NeighborIndex {
public:
    NeighborIndex(const Dataset& ds, double radius);
    ~NeighborIndex();
    NeighborIndex(NeighborIndex&&) noexcept;
    NeighborIndex& operator=(NeighborIndex&&) noexcept;

    double radius() const { return radius_; }

    /// Indices i with ||X_i - center|| <= radius (closed ball), ascending.
    std::vector<int> within(std::span<const double> center) const;

    /// Same, appending to out (cleared first). strict switches the predicate
    /// to ||X_i - center|| < radius.
    void within(std::span<const double> center, std::vector<int>& out, bool strict = false) const;

private:
    const Dataset* ds_;
    double radius_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Indices i with ||X_i - center|| <= r (closed ball, Euclidean). Includes the
/// center when it is itself a sample point. One-shot convenience; sweeps that
/// query many centers at one radius should build a NeighborIndex.
std::vector<int> radius_neighbors(const Dataset& ds, std::span<const double> center, double r);

/// Disjoint-set forest with path halving and union by size. Tracks the number
/// of components and the minimum member index per component (used as the
/// canonical cluster id).
class UnionFind {
public:
    explicit UnionFind(int n);

    int find(int i);
    /// Returns true when the union actually merged two components.
    bool unite(int i, int j);
    int components() const { return components_; }
    int size() const { return static_cast<int>(parent_.size()); }
    /// Minimum member index of i's component.
    int min_member(int i) { return min_member_[find(i)]; }

private:
    std::vector<std::int32_t> parent_;
    std::vector<std::int32_t> size_;
    std::vector<std::int32_t> min_member_;
    int components_;
};

enum class EdgeRule { Strict, Closed };  // ||Xi-Xj|| < t  vs  <= t

/// Connected components of the geometric graph on `active` with edges between
/// points at distance < threshold (Strict) or <= threshold (Closed).
/// Blocks are sorted by minimum member; members ascending. Empty active set
/// yields an empty partition.
std::vector<std::vector<int>> epsilon_graph_components(const Dataset& ds,
                                                       const std::vector<int>& active,
                                                       double threshold, EdgeRule rule);

}  // namespace treeclust
