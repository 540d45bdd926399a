#include "treeclust/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treeclust/util.hpp"

namespace treeclust {

namespace {

// components of {p > level}: threshold at the next distinct value above
std::optional<double> strictly_above(const GriddedDensity& gd, double level) {
    const auto& vals = gd.sorted_distinct_values();
    auto it = std::upper_bound(vals.begin(), vals.end(), level);
    if (it == vals.end()) return std::nullopt;
    return *it;
}

std::vector<std::size_t> component_cells(const std::vector<int>& labels, int which) {
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < labels.size(); ++f)
        if (labels[f] == which) out.push_back(f);
    return out;
}

}  // namespace

std::vector<SeparatedPair> make_separated_pairs(const GriddedDensity& gd, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("make_separated_pairs: delta must be positive");
    std::vector<SeparatedPair> pairs;
    const double maxp = gd.max_value();

    for (const GridSplit& split : true_split_levels(gd)) {
        if (split.level + delta > maxp) continue;

        std::vector<int> labels_at_delta;
        gd.components_at(split.level + delta, labels_at_delta);

        // the side regions: components of {p >= level+delta} holding each peak
        struct Side {
            std::vector<std::size_t> cells;
            std::size_t peak;
            double min_value;
        };
        std::vector<Side> sides;
        for (const auto& child : split.children) {
            if (child.peak_value < split.level + delta) continue;
            int label = labels_at_delta[child.peak_cell];
            Side side{component_cells(labels_at_delta, label), child.peak_cell, 0.0};
            double mv = child.peak_value;
            for (std::size_t f : side.cells) mv = std::min(mv, gd.value(f));
            side.min_value = mv;
            sides.push_back(std::move(side));
        }

        for (std::size_t a = 0; a + 1 < sides.size(); ++a)
            for (std::size_t b = a + 1; b < sides.size(); ++b) {
                if (sides[a].cells == sides[b].cells) continue;  // rejoined above the split
                SeparatedPair pair;
                pair.cells_a = sides[a].cells;
                pair.cells_b = sides[b].cells;
                pair.delta = delta;
                pair.split_level = split.level;
                pair.lambda = std::min(sides[a].min_value, sides[b].min_value);

                auto cert_level = strictly_above(gd, pair.lambda - delta);
                if (!cert_level) continue;
                std::vector<int> cert_labels;
                gd.components_at(*cert_level, cert_labels);
                pair.certificate_a = cert_labels[sides[a].peak];
                pair.certificate_b = cert_labels[sides[b].peak];
                if (pair.certificate_a == pair.certificate_b) continue;  // not separated at delta
                pairs.push_back(std::move(pair));
            }
    }
    return pairs;
}

ConsistencyReport check_delta_consistency(const ClusterHierarchy& hier,
                                          const std::vector<SeparatedPair>& pairs,
                                          const Dataset& ds, const GriddedDensity& gd) {
    ConsistencyReport report;
    report.outcomes.reserve(pairs.size());

    // sample index -> grid cell, computed once
    std::vector<std::optional<std::size_t>> cell(ds.size());
    for (int i = 0; i < ds.size(); ++i) cell[i] = gd.geometry().cell_of(ds.point(i));

    for (const SeparatedPair& pair : pairs) {
        std::vector<int> in_a, in_b;
        for (int i = 0; i < ds.size(); ++i) {
            if (!cell[i]) continue;
            if (std::binary_search(pair.cells_a.begin(), pair.cells_a.end(), *cell[i]))
                in_a.push_back(i);
            else if (std::binary_search(pair.cells_b.begin(), pair.cells_b.end(), *cell[i]))
                in_b.push_back(i);
        }
        if (in_a.empty() || in_b.empty()) {
            report.outcomes.push_back(PairOutcome::EmptyIntersection);
            ++report.empty_pairs;
            continue;
        }

        // smallest containing clusters are disjoint iff the groups join
        // strictly below both within-group connection levels
        auto group_level = [&](const std::vector<int>& group) -> std::optional<double> {
            double level = hier.top_activation(group.front());
            for (int i : group) {
                auto m = hier.merge_height(group.front(), i);
                if (!m) return std::nullopt;
                level = std::min(level, *m);
            }
            return level;
        };
        auto la = group_level(in_a);
        auto lb = group_level(in_b);
        auto cross = hier.merge_height(in_a.front(), in_b.front());

        bool separated;
        if (!la || !lb) {
            separated = false;  // a side has no containing cluster at all
        } else if (!cross) {
            separated = true;  // never share a cluster
        } else {
            separated = *cross < std::min(*la, *lb);
        }
        report.outcomes.push_back(separated ? PairOutcome::CorrectlySeparated
                                            : PairOutcome::IncorrectlyMerged);
        if (separated)
            ++report.separated_pairs;
        else
            report.success = false;
    }
    return report;
}

std::uint64_t experiment_seed(std::uint64_t base, int n, int seed_index) {
    std::uint64_t x = base;
    x = x * 1000003ull + static_cast<std::uint64_t>(n);
    x = x * 1000003ull + static_cast<std::uint64_t>(seed_index);
    return x;
}

RateResult rate_experiment(const DensitySpec& spec, HierarchyAlgorithm algorithm,
                           const std::vector<int>& n_grid, const RateConfig& cfg) {
    if (spec.dim > 2) throw std::invalid_argument("rate_experiment: grid truth needs d <= 2");
    GriddedDensity gd = grid(spec, cfg.grid_step);
    auto splits = true_split_levels(gd);
    if (splits.empty()) throw std::invalid_argument("rate_experiment: spec has no split");

    double min_split = splits.front().level;
    double range = gd.max_value() - min_split;
    double delta_lo = cfg.delta_lo > 0.0 ? cfg.delta_lo : 1e-3 * range;
    double delta_hi = cfg.delta_hi > 0.0 ? cfg.delta_hi : 0.9 * range;

    std::optional<Kernel> kernel;
    if (algorithm == HierarchyAlgorithm::ModifiedDbscan)
        kernel = Kernel::valid_order(cfg.kernel_order > 0 ? cfg.kernel_order
                                                          : static_cast<int>(std::ceil(cfg.alpha)),
                                     spec.dim);

    RateResult result;
    result.monotone = true;
    std::vector<std::pair<double, double>> trace;  // (delta, rate) across all n

    for (int n : n_grid) {
        double h = cfg.log_bandwidth
                       ? optimal_bandwidth(n, spec.dim, cfg.alpha, cfg.bandwidth_C)
                       : cfg.bandwidth_C * std::pow(static_cast<double>(n),
                                                    -1.0 / (2.0 * cfg.alpha + spec.dim));

        std::vector<ClusterHierarchy> hierarchies(cfg.seeds);
        std::vector<Dataset> samples;
        samples.reserve(cfg.seeds);
        for (int s = 0; s < cfg.seeds; ++s)
            samples.push_back(sample(spec, n, experiment_seed(cfg.seed_base, n, s)));
        parallel_for(static_cast<std::size_t>(cfg.seeds), [&](std::size_t s) {
            hierarchies[s] = algorithm == HierarchyAlgorithm::Dbscan
                                 ? dbscan_hierarchy(samples[s], h)
                                 : modified_dbscan_hierarchy(samples[s], *kernel, h);
        });

        auto success_rate = [&](double delta) {
            auto pairs = make_separated_pairs(gd, delta);
            int good = 0;
            for (int s = 0; s < cfg.seeds; ++s) {
                auto rep = check_delta_consistency(hierarchies[s], pairs, samples[s], gd);
                good += rep.success ? 1 : 0;
            }
            double rate = static_cast<double>(good) / cfg.seeds;
            trace.emplace_back(delta, rate);
            return rate;
        };

        RatePoint point{n, delta_hi, 0.0, true};
        double lo = delta_lo, hi = delta_hi;
        double rate_hi = success_rate(hi);
        if (rate_hi < cfg.success_target) {
            point.bracket_ok = false;
            point.delta_min = hi;
            point.success_rate = rate_hi;
        } else if (double rate_lo = success_rate(lo); rate_lo >= cfg.success_target) {
            point.delta_min = lo;
            point.success_rate = rate_lo;
        } else {
            double rate_at_min = rate_hi;
            for (int it = 0; it < cfg.search_steps; ++it) {
                double mid = std::sqrt(lo * hi);  // log-scale bisection
                double r = success_rate(mid);
                if (r >= cfg.success_target) {
                    hi = mid;
                    rate_at_min = r;
                } else {
                    lo = mid;
                }
            }
            point.delta_min = hi;
            point.success_rate = rate_at_min;
        }
        result.points.push_back(point);

        // success must not decrease as delta grows (one seed flip tolerated)
        std::sort(trace.begin(), trace.end());
        for (std::size_t t = 0; t + 1 < trace.size(); ++t)
            if (trace[t].second > trace[t + 1].second + 1.0 / cfg.seeds + 1e-12)
                result.monotone = false;
        trace.clear();
    }

    // least-squares slope of log(delta_min) on log(n)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& p : result.points) {
        if (!p.bracket_ok || !(p.delta_min > 0.0)) continue;
        double x = std::log(static_cast<double>(p.n));
        double y = std::log(p.delta_min);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    result.slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return result;
}

}  // namespace treeclust
