#include "treeclust/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "treeclust/dbscan.hpp"
#include "treeclust/util.hpp"

namespace treeclust {

GridGeometry GridGeometry::regular(std::vector<double> lo, std::vector<double> hi, double step) {
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("GridGeometry: bad box");
    if (!(step > 0.0)) throw std::invalid_argument("GridGeometry: step must be positive");
    GridGeometry g;
    g.lo = std::move(lo);
    g.hi = std::move(hi);
    double total = 1.0;
    for (std::size_t a = 0; a < g.lo.size(); ++a) {
        if (!(g.hi[a] > g.lo[a])) throw std::invalid_argument("GridGeometry: empty box");
        double cells = std::max(1.0, std::ceil((g.hi[a] - g.lo[a]) / step - 1e-12));
        total *= cells;
        if (total > 1e8) throw std::length_error("GridGeometry: more than 1e8 cells");
        g.shape.push_back(static_cast<int>(cells));
        g.step.push_back((g.hi[a] - g.lo[a]) / g.shape.back());
    }
    return g;
}

std::size_t GridGeometry::size() const {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
}

std::size_t GridGeometry::flatten(const std::vector<int>& c) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim(); ++a) flat = flat * shape[a] + c[a];
    return flat;
}

std::vector<int> GridGeometry::unflatten(std::size_t flat) const {
    std::vector<int> c(dim());
    for (int a = dim() - 1; a >= 0; --a) {
        c[a] = static_cast<int>(flat % shape[a]);
        flat /= shape[a];
    }
    return c;
}

std::vector<double> GridGeometry::center(std::size_t flat) const {
    auto c = unflatten(flat);
    std::vector<double> x(dim());
    for (int a = 0; a < dim(); ++a) x[a] = lo[a] + (c[a] + 0.5) * step[a];
    return x;
}

std::optional<std::size_t> GridGeometry::cell_of(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim()) throw std::invalid_argument("cell_of: dimension mismatch");
    std::vector<int> c(dim());
    for (int a = 0; a < dim(); ++a) {
        if (x[a] < lo[a] || x[a] > hi[a]) return std::nullopt;
        c[a] = std::min(shape[a] - 1, static_cast<int>((x[a] - lo[a]) / step[a]));
    }
    return flatten(c);
}

double GridGeometry::cell_volume() const {
    double v = 1.0;
    for (double s : step) v *= s;
    return v;
}

std::vector<double> GridGeometry::centers_row_major() const {
    std::vector<double> out;
    out.reserve(size() * dim());
    for (std::size_t f = 0; f < size(); ++f) {
        auto c = center(f);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

GriddedDensity::GriddedDensity(GridGeometry geom, std::vector<double> values)
    : geom_(std::move(geom)), values_(std::move(values)) {
    if (values_.size() != geom_.size())
        throw std::invalid_argument("GriddedDensity: one value per cell required");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("GriddedDensity: non-finite value");
}

double GriddedDensity::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

const std::vector<double>& GriddedDensity::sorted_distinct_values() const {
    if (distinct_.empty() && !values_.empty()) {
        distinct_ = values_;
        std::sort(distinct_.begin(), distinct_.end());
        distinct_.erase(std::unique(distinct_.begin(), distinct_.end()), distinct_.end());
    }
    return distinct_;
}

double GriddedDensity::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * geom_.cell_volume();
}

int GriddedDensity::components_at(double lambda, std::vector<int>& labels) const {
    if (dim() > 2) throw std::invalid_argument("components_at: only d <= 2 is supported");
    const std::size_t n = values_.size();
    labels.assign(n, -1);
    int next = 0;
    std::vector<std::size_t> stack;
    const int w = dim() == 2 ? geom_.shape[1] : static_cast<int>(n);
    const std::size_t rows = dim() == 2 ? static_cast<std::size_t>(geom_.shape[0]) : 1;

    auto in_set = [&](std::size_t f) { return values_[f] >= lambda; };
    for (std::size_t s = 0; s < n; ++s) {
        if (labels[s] >= 0 || !in_set(s)) continue;
        int id = next++;
        stack.push_back(s);
        labels[s] = id;
        while (!stack.empty()) {
            std::size_t f = stack.back();
            stack.pop_back();
            std::size_t r = f / w, c = f % w;
            auto visit = [&](std::size_t g) {
                if (labels[g] < 0 && in_set(g)) {
                    labels[g] = id;
                    stack.push_back(g);
                }
            };
            if (c > 0) visit(f - 1);
            if (c + 1 < static_cast<std::size_t>(w)) visit(f + 1);
            if (r > 0) visit(f - w);
            if (r + 1 < rows) visit(f + w);
        }
    }
    return next;
}

std::vector<int> GriddedDensity::label_points(double lambda, const Dataset& ds) const {
    std::vector<int> cell_labels;
    components_at(lambda, cell_labels);
    std::vector<int> out(ds.size(), -1);
    for (int i = 0; i < ds.size(); ++i) {
        auto f = geom_.cell_of(ds.point(i));
        if (f) out[i] = cell_labels[*f];
    }
    return out;
}

GriddedDensity kde_grid(const GridGeometry& geom, const Dataset& ds, const Kernel& kernel, double h) {
    return GriddedDensity(geom, kde_at_points(ds, kernel, geom.centers_row_major(), h));
}

double GridMask::measure() const {
    std::size_t count = 0;
    for (char c : cells) count += c != 0;
    return static_cast<double>(count) * geom.cell_volume();
}

bool GridMask::contains(std::span<const double> x) const {
    auto f = geom.cell_of(x);
    return f && cells[*f];
}

GridMask threshold_mask(const GriddedDensity& gd, double lambda) {
    GridMask m{gd.geometry(), std::vector<char>(gd.cell_count(), 0)};
    for (std::size_t f = 0; f < gd.cell_count(); ++f) m.cells[f] = gd.value(f) >= lambda;
    return m;
}

GridMask label_mask(const GridGeometry& geom, const std::vector<int>& labels, int which) {
    GridMask m{geom, std::vector<char>(labels.size(), 0)};
    for (std::size_t f = 0; f < labels.size(); ++f) m.cells[f] = labels[f] == which;
    return m;
}

namespace {

// Cell-offset stencil covering the closed h-ball between cell centers.
std::vector<std::vector<int>> ball_stencil(const GridGeometry& geom, double h) {
    int d = geom.dim();
    std::vector<int> reach(d);
    for (int a = 0; a < d; ++a) reach[a] = static_cast<int>(std::floor(h / geom.step[a]));
    std::vector<std::vector<int>> offsets;
    std::vector<int> cur(d, 0);
    for (int a = 0; a < d; ++a) cur[a] = -reach[a];
    while (true) {
        double dist2 = 0.0;
        for (int a = 0; a < d; ++a) dist2 += (cur[a] * geom.step[a]) * (cur[a] * geom.step[a]);
        if (dist2 <= h * h) offsets.push_back(cur);
        int a = d - 1;
        while (a >= 0 && cur[a] == reach[a]) {
            cur[a] = -reach[a];
            --a;
        }
        if (a < 0) break;
        ++cur[a];
    }
    return offsets;
}

}  // namespace

std::pair<GridMask, GridMask> dilate_erode(const GridMask& region, double h) {
    const GridGeometry& geom = region.geom;
    for (double s : geom.step)
        if (!(s < h / 4.0))
            throw std::domain_error("dilate_erode: grid resolution must be finer than h/4");

    auto offsets = ball_stencil(geom, h);
    GridMask dil{geom, std::vector<char>(region.cells.size(), 0)};
    GridMask ero{geom, std::vector<char>(region.cells.size(), 0)};
    const int d = geom.dim();

    std::vector<int> q(d);
    for (std::size_t f = 0; f < region.cells.size(); ++f) {
        auto c = geom.unflatten(f);
        bool any = false, all = true;
        for (const auto& off : offsets) {
            bool inside_box = true;
            for (int a = 0; a < d; ++a) {
                q[a] = c[a] + off[a];
                if (q[a] < 0 || q[a] >= geom.shape[a]) inside_box = false;
            }
            bool val = inside_box && region.cells[geom.flatten(q)];
            any = any || val;
            all = all && val;
            if (any && !all) break;  // both flags are settled
        }
        dil.cells[f] = any;
        ero.cells[f] = all;
    }
    return {dil, ero};
}

LevelSetEstimate devroye_wise(const Dataset& ds, double h, int k) {
    if (!(h > 0.0)) throw std::invalid_argument("devroye_wise: h must be positive");
    if (k < 0 || k > ds.size()) throw std::invalid_argument("devroye_wise: k must be in 0..n");
    NeighborIndex index(ds, h);
    std::vector<int> centers, buf;
    for (int i = 0; i < ds.size(); ++i) {
        index.within(ds.point(i), buf);
        if (static_cast<int>(buf.size()) >= k) centers.push_back(i);
    }
    return LevelSetEstimate{&ds, std::move(centers), h};
}

bool LevelSetEstimate::contains(std::span<const double> x) const {
    double r2 = radius * radius;
    for (int i : centers)
        if (squared_distance(dataset->point(i), x) <= r2) return true;
    return false;
}

double LevelSetEstimate::measure_1d() const {
    if (dataset->dim() != 1) throw std::logic_error("measure_1d: dataset is not one-dimensional");
    if (centers.empty()) return 0.0;
    std::vector<std::pair<double, double>> iv;
    iv.reserve(centers.size());
    for (int i : centers) iv.emplace_back(dataset->point(i)[0] - radius, dataset->point(i)[0] + radius);
    std::sort(iv.begin(), iv.end());
    double total = 0.0, lo = iv[0].first, hi = iv[0].second;
    for (const auto& [a, b] : iv) {
        if (a > hi) {
            total += hi - lo;
            lo = a;
            hi = b;
        } else {
            hi = std::max(hi, b);
        }
    }
    return total + (hi - lo);
}

BallUnionRegion::BallUnionRegion(const Dataset& ds, std::vector<int> centers, double h)
    : centers_([&] {
          std::vector<double> coords;
          coords.reserve(centers.size() * ds.dim());
          for (int i : centers) {
              auto p = ds.point(i);
              coords.insert(coords.end(), p.begin(), p.end());
          }
          if (coords.empty()) coords.assign(ds.dim(), 0.0);  // placeholder, index stays empty
          return Dataset(std::move(coords), ds.dim());
      }()),
      h_(h) {
    if (!centers.empty()) index_.emplace(centers_, h);
}

bool BallUnionRegion::contains(std::span<const double> x) const {
    if (!index_) return false;
    std::vector<int> buf;
    index_->within(x, buf);
    return !buf.empty();
}

GapInputs gap_inputs(int n, int d, double h, double lambda_star_low, double lambda_star_high,
                     const ErrorBudget& budget, double C1) {
    double eps = lambda_star_high - lambda_star_low;
    if (!(eps > 0.0)) throw std::invalid_argument("gap_inputs: lambda^* must exceed lambda_*");
    double a_n = budget.a_n();
    if (!(eps > 2.0 * a_n))
        throw std::domain_error("gap_inputs: admissible interval is empty (gap <= 2 a_n)");
    GapInputs out;
    out.a_n = a_n;
    out.lambda = 0.5 * ((lambda_star_low + a_n) + (lambda_star_high - a_n));
    out.k = k_of_lambda(out.lambda, n, h, d);
    out.min_h = C1 * std::pow(std::log(static_cast<double>(n)) / (n * eps * eps), 1.0 / d);
    out.h_ok = h >= out.min_h;
    return out;
}

double symmetric_difference_measure(const std::function<bool(std::span<const double>)>& a,
                                    const std::function<bool(std::span<const double>)>& b,
                                    const GridGeometry& geom) {
    if (geom.dim() > 2)
        throw std::invalid_argument("symmetric_difference_measure: use the Monte Carlo variant for d >= 3");
    std::size_t differ = 0;
    for (std::size_t f = 0; f < geom.size(); ++f) {
        auto c = geom.center(f);
        if (a(c) != b(c)) ++differ;
    }
    return static_cast<double>(differ) * geom.cell_volume();
}

MonteCarloMeasure symmetric_difference_monte_carlo(
    const std::function<bool(std::span<const double>)>& a,
    const std::function<bool(std::span<const double>)>& b, const std::vector<double>& lo,
    const std::vector<double>& hi, std::size_t draws, std::uint64_t seed) {
    if (lo.size() != hi.size() || lo.empty())
        throw std::invalid_argument("symmetric_difference_monte_carlo: bad box");
    const int d = static_cast<int>(lo.size());
    double volume = 1.0;
    for (int ax = 0; ax < d; ++ax) volume *= hi[ax] - lo[ax];

    constexpr std::size_t kBatches = 64;
    std::vector<std::size_t> hits(kBatches, 0);
    std::vector<std::size_t> counts(kBatches, draws / kBatches);
    counts[0] += draws % kBatches;

    parallel_for(kBatches, [&](std::size_t batch) {
        Rng rng(seed * 0x9E3779B97F4A7C15ull + batch + 1);
        std::vector<double> x(d);
        std::size_t h = 0;
        for (std::size_t t = 0; t < counts[batch]; ++t) {
            for (int ax = 0; ax < d; ++ax) x[ax] = rng.uniform(lo[ax], hi[ax]);
            if (a(x) != b(x)) ++h;
        }
        hits[batch] = h;
    });

    std::size_t hit = 0;
    for (std::size_t h : hits) hit += h;
    double p = static_cast<double>(hit) / static_cast<double>(draws);
    MonteCarloMeasure out;
    out.measure = p * volume;
    out.standard_error = volume * std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
    out.draws = draws;
    return out;
}

GridLevelClusters grid_levelset_components(const GriddedDensity& gd, double lambda,
                                           const Dataset* points) {
    if (gd.dim() > 2)
        throw std::invalid_argument("grid_levelset_components: only d <= 2 is supported");
    GridLevelClusters out;
    out.lambda = lambda;
    out.component_count = gd.components_at(lambda, out.cell_labels);
    if (points) {
        out.point_labels.assign(points->size(), -1);
        for (int i = 0; i < points->size(); ++i) {
            auto f = gd.geometry().cell_of(points->point(i));
            if (f) out.point_labels[i] = out.cell_labels[*f];
        }
    }
    return out;
}

GapClusterReport gap_cluster_check(const std::vector<std::vector<int>>& estimated_components,
                                   const Dataset& ds, const GriddedDensity& truth,
                                   double lambda_star_high, double h) {
    GapClusterReport report;

    std::vector<int> comp_of(ds.size(), -1);
    for (std::size_t c = 0; c < estimated_components.size(); ++c)
        for (int i : estimated_components[c]) comp_of[i] = static_cast<int>(c);

    std::vector<int> truth_labels;
    int truth_components = truth.components_at(lambda_star_high, truth_labels);

    // test sets: 2h-erosions of each true component
    std::vector<int> rep_component(truth_components, -2);  // -2 empty, else estimated comp id (-1 = failure)
    for (int t = 0; t < truth_components; ++t) {
        GridMask comp = label_mask(truth.geometry(), truth_labels, t);
        auto [dil, ero] = dilate_erode(comp, 2.0 * h);
        bool nonempty = false;
        for (int i = 0; i < ds.size(); ++i) {
            if (!ero.contains(ds.point(i))) continue;
            nonempty = true;
            if (comp_of[i] < 0) {
                report.connectivity_pass = false;
                report.failures.push_back("point " + std::to_string(i) + " in eroded component " +
                                          std::to_string(t) + " is not clustered");
            } else if (rep_component[t] == -2) {
                rep_component[t] = comp_of[i];
            } else if (rep_component[t] != comp_of[i]) {
                report.connectivity_pass = false;
                report.failures.push_back("eroded component " + std::to_string(t) +
                                          " spans clusters (witness point " + std::to_string(i) + ")");
            }
        }
        if (nonempty) ++report.nonempty_test_sets;
    }

    for (int s = 0; s < truth_components; ++s)
        for (int t = s + 1; t < truth_components; ++t) {
            if (rep_component[s] < 0 || rep_component[t] < 0) continue;
            if (rep_component[s] == rep_component[t]) {
                report.separation_pass = false;
                report.failures.push_back("true components " + std::to_string(s) + " and " +
                                          std::to_string(t) + " share estimated cluster " +
                                          std::to_string(rep_component[s]));
            }
        }
    return report;
}

}  // namespace treeclust
