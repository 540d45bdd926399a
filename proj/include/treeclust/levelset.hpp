#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "treeclust/geometry.hpp"
#include "treeclust/kde.hpp"

namespace treeclust {

/// Axis-aligned regular grid of cells over a bounding box.
struct GridGeometry {
    std::vector<double> lo, hi;
    std::vector<int> shape;    // cells per axis
    std::vector<double> step;  // cell edge per axis

    /// Shapes the box into cells of edge `step` (last cell may be shrunk by
    /// at most one step to cover the box). Throws std::length_error above
    /// 1e8 cells.
    static GridGeometry regular(std::vector<double> lo, std::vector<double> hi, double step);

    int dim() const { return static_cast<int>(shape.size()); }
    std::size_t size() const;
    std::size_t flatten(const std::vector<int>& c) const;
    std::vector<int> unflatten(std::size_t flat) const;
    std::vector<double> center(std::size_t flat) const;
    std::optional<std::size_t> cell_of(std::span<const double> x) const;
    double cell_volume() const;
    std::vector<double> centers_row_major() const;  // all cell centers, flattened
};

/// Density (or any scalar field) sampled at cell centers of a regular grid.
class GriddedDensity {
public:
    GriddedDensity(GridGeometry geom, std::vector<double> values);

    const GridGeometry& geometry() const { return geom_; }
    int dim() const { return geom_.dim(); }
    std::size_t cell_count() const { return values_.size(); }
    double value(std::size_t flat) const { return values_[flat]; }
    const std::vector<double>& values() const { return values_; }
    double max_value() const;

    /// Cached ascending distinct values.
    const std::vector<double>& sorted_distinct_values() const;

    /// sum of values * cell volume.
    double integral() const;

    /// Face-adjacency flood fill of {value >= lambda}. labels get -1 below
    /// lambda, else a component id (0,1,... in scan order). Returns the
    /// component count. Only d <= 2 is supported.
    int components_at(double lambda, std::vector<int>& labels) const;

    /// Component label of each sample point at level lambda (-1 when the
    /// point's cell is below lambda or outside the box).
    std::vector<int> label_points(double lambda, const Dataset& ds) const;

private:
    GridGeometry geom_;
    std::vector<double> values_;
    mutable std::vector<double> distinct_;  // built on first use
};

/// p_hat evaluated at the cell centers of `geom`.
GriddedDensity kde_grid(const GridGeometry& geom, const Dataset& ds, const Kernel& kernel, double h);

/// Boolean region on a grid.
struct GridMask {
    GridGeometry geom;
    std::vector<char> cells;

    double measure() const;  // count * cell volume
    bool contains(std::span<const double> x) const;
};

GridMask threshold_mask(const GriddedDensity& gd, double lambda);                  // {p >= lambda}
GridMask label_mask(const GridGeometry& geom, const std::vector<int>& labels, int which);

/// Grid h-dilation and h-erosion of a region: a cell joins the dilation when
/// some region cell center lies within h of its center, and survives the
/// erosion when every cell center within h is in the region (cells outside the
/// box count as absent). Requires grid step < h/4.
std::pair<GridMask, GridMask> dilate_erode(const GridMask& region, double h);

/// Union of closed balls of radius h around count-filtered sample points:
/// centers = {i : |B(X_i,h) ∩ sample| >= k}.
struct LevelSetEstimate {
    const Dataset* dataset;
    std::vector<int> centers;  // ascending sample indices
    double radius;

    bool empty() const { return centers.empty(); }
    bool contains(std::span<const double> x) const;  // linear scan over centers
    /// Exact Lebesgue measure of the interval union (d = 1 only).
    double measure_1d() const;
};

LevelSetEstimate devroye_wise(const Dataset& ds, double h, int k);

/// Fast membership tests for a ball union (builds a neighbor index once).
class BallUnionRegion {
public:
    BallUnionRegion(const Dataset& ds, std::vector<int> centers, double h);
    bool contains(std::span<const double> x) const;

private:
    Dataset centers_;  // owns copies of the selected points
    double h_;
    std::optional<NeighborIndex> index_;  // empty when there are no centers
};

/// Resolved inputs for level-set estimation at a gap.
struct GapInputs {
    double lambda;   // midpoint of (lambda_* + a_n, lambda^* - a_n]
    int k;           // ceil(n h^d V_d lambda)
    double a_n;      // budget value used for the interval
    double min_h;    // C1 (log n / (n eps^2))^{1/d}
    bool h_ok;       // h >= min_h
};

/// Throws std::domain_error when the admissible interval is empty
/// (gap <= 2 a_n).
GapInputs gap_inputs(int n, int d, double h, double lambda_star_low, double lambda_star_high,
                     const ErrorBudget& budget, double C1 = 1.0);

/// Lebesgue measure of (A \ B) ∪ (B \ A) by cell counting over `geom` (d <= 2).
double symmetric_difference_measure(const std::function<bool(std::span<const double>)>& a,
                                    const std::function<bool(std::span<const double>)>& b,
                                    const GridGeometry& geom);

struct MonteCarloMeasure {
    double measure;
    double standard_error;
    std::size_t draws;
};

/// Monte Carlo symmetric difference over a bounding box (any d); deterministic
/// per seed, with batches aggregated in a fixed order.
MonteCarloMeasure symmetric_difference_monte_carlo(
    const std::function<bool(std::span<const double>)>& a,
    const std::function<bool(std::span<const double>)>& b, const std::vector<double>& lo,
    const std::vector<double>& hi, std::size_t draws = 1'000'000, std::uint64_t seed = 0);

/// Face-adjacency component labels of {value >= lambda} plus per-sample labels
/// (the grid-restricted clustering route). Only d <= 2.
struct GridLevelClusters {
    double lambda;
    int component_count;
    std::vector<int> cell_labels;   // -1 below lambda
    std::vector<int> point_labels;  // per sample index
};

GridLevelClusters grid_levelset_components(const GriddedDensity& gd, double lambda,
                                           const Dataset* points = nullptr);

/// Checks the two cluster-recovery statements at a gap: test sets are the
/// 2h-erosions of the true components of S = {p >= lambda_star_high}.
///  (i) sample points inside one eroded component share one estimated cluster;
///  (ii) points from different eroded components get distinct clusters.
struct GapClusterReport {
    bool connectivity_pass = true;
    bool separation_pass = true;
    int nonempty_test_sets = 0;
    std::vector<std::string> failures;

    bool pass() const { return connectivity_pass && separation_pass; }
};

GapClusterReport gap_cluster_check(const std::vector<std::vector<int>>& estimated_components,
                                   const Dataset& ds, const GriddedDensity& truth,
                                   double lambda_star_high, double h);

}  // namespace treeclust
