#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "treeclust/geometry.hpp"
#include "treeclust/levelset.hpp"

namespace treeclust {

struct KnownSplit {
    double level;
    int child_count;  // minimum number of children at the split
};

struct GapFacts {
    double lambda_low;   // sup of p outside S
    double lambda_high;  // inf of p on S
    double sigma;        // min distance between components of S (inf for one component)
    double C0_perimeter; // V_{d-1} * total boundary length of S
    double mass_S;       // P(S)
    std::function<bool(std::span<const double>)> in_S;
};

struct SplineFacts {
    int alpha;
    double normalizer;               // integral of the unnormalized G
    std::function<double(double)> radial;  // f(r) before normalization
};

struct LowerBoundFacts {
    double lambda;     // plateau height
    double b;          // flat radius of the perturbation
    double K;          // scale constant chosen so g meets the smoothness budget
    double delta;
    double bump_halfwidth;  // (delta / K)^{1/alpha}
    int perturbed_index;
    std::vector<std::vector<double>> centers;  // x_0 .. x_8
    std::function<double(double)> g;           // radial perturbation profile
    int components_at_lambda;                  // clusters of {f_i >= lambda}
};

/// A registered ground-truth density: analytic evaluator plus the facts the
/// harness checks estimates against.
struct DensitySpec {
    std::string name;
    int dim = 1;
    std::vector<double> lo, hi;  // sampling / gridding box
    double sup = 0.0;            // envelope for rejection sampling (>= max p)
    std::function<double(std::span<const double>)> pdf;

    double alpha = 1.0;      // declared smoothness degree
    double holder_L = 0.0;   // declared constant for that degree
    double lipschitz_L = 0.0;  // max |grad p| over the box (degree-1 certificate)

    std::vector<KnownSplit> known_splits;  // ascending by level
    std::optional<GapFacts> gap;
    std::optional<SplineFacts> spline;
    std::optional<LowerBoundFacts> lower;

    double operator()(std::span<const double> x) const { return pdf(x); }
};

/// Mixture of 1-d gaussians truncated to [lo, hi] (tail mass must be
/// negligible; registration validation checks the integral).
DensitySpec gaussian_mixture_1d(std::string name, std::vector<double> weights,
                                std::vector<double> means, std::vector<double> sigmas, double lo,
                                double hi);

/// Two radial bumps G(x) = F(x - x0) + F(x + x0), x0 = (2, 0, ...), where
/// F(x) = f(||x||) and f is the piecewise-polynomial profile with a zero of
/// order alpha at r = 2, matched to order alpha-1 at the knot r = 1, and with
/// derivatives 1..alpha-1 vanishing at r = 0. Normalized to integrate to 1.
/// The unnormalized superlevel sets {G >= delta}, 0 < delta <= 1, are the two
/// balls B(+-x0, 2 - delta^{1/alpha}).
DensitySpec spline_pair_density(int alpha, int d);

struct GapShape {
    enum class Kind { Disk, Rect } kind;
    std::vector<double> a;  // Disk: center; Rect: lower corner
    std::vector<double> b;  // Disk: {radius}; Rect: upper corner

    static GapShape disk(std::vector<double> center, double radius);
    static GapShape rect(std::vector<double> lo, std::vector<double> hi);
    bool contains(std::span<const double> x) const;
    double area() const;
    double perimeter() const;
    double distance_to(const GapShape& other) const;
};

/// Piecewise-constant density: lambda_star + eps on the shapes, lambda_star on
/// the background box, 0 outside, scaled to integrate to 1 (exact areas).
/// Shapes must be disjoint with positive pairwise distance.
DensitySpec gap_density(std::vector<GapShape> shapes, double lambda_star, double eps,
                        std::vector<double> box_lo = {-3.0, -3.0},
                        std::vector<double> box_hi = {3.0, 3.0});

/// Member i of the eight-density family used for worst-case constructions:
/// a plateau f = lambda on a box, with a radial bump of height <= delta
/// subtracted around x_i and added back around x_0. Throws
/// std::invalid_argument when delta or n leaves no room for the construction.
DensitySpec lower_bound_density(double alpha, double delta, int n, int i);

DensitySpec uniform_density(int d);

/// Named registry used by the CLI and the test bench. Specs are validated
/// against the grid oracle on first access. Throws std::out_of_range for
/// unknown names.
const DensitySpec& density_registry(const std::string& name);
std::vector<std::string> density_registry_names();

/// n i.i.d. draws by rejection sampling against the uniform envelope on the
/// box; identical (spec, seed) pairs produce identical datasets. Throws
/// std::runtime_error when the acceptance rate collapses below 1e-4.
Dataset sample(const DensitySpec& spec, int n, std::uint64_t seed);

/// Cell-center evaluation over the spec's box (d <= 2).
GriddedDensity grid(const DensitySpec& spec, double step);

struct ValidationReport {
    double integral;
    double min_value;
    bool splits_match;
    std::vector<std::string> issues;
    bool pass() const { return issues.empty(); }
};

/// Registration checks: normalization, nonnegativity, declared split levels
/// against the grid sweep (tolerance one value gap plus grid resolution error).
ValidationReport validate_spec(const DensitySpec& spec, double step);

}  // namespace treeclust
