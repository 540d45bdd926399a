#include "treeclust/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "treeclust/cluster_tree.hpp"
#include "treeclust/kde.hpp"
#include "treeclust/util.hpp"

namespace treeclust {

namespace {

double normal_pdf(double x, double mean, double sigma) {
    double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// max |p'| by central differences over a fine 1-d grid (certificate only)
double max_abs_slope_1d(const std::function<double(std::span<const double>)>& pdf, double lo,
                        double hi, int cells = 20000) {
    double step = (hi - lo) / cells;
    double best = 0.0;
    double prev = 0.0;
    for (int i = 0; i <= cells; ++i) {
        double x = lo + i * step;
        double v = pdf({&x, 1});
        if (i > 0) best = std::max(best, std::abs(v - prev) / step);
        prev = v;
    }
    return best;
}

}  // namespace

DensitySpec gaussian_mixture_1d(std::string name, std::vector<double> weights,
                                std::vector<double> means, std::vector<double> sigmas, double lo,
                                double hi) {
    if (weights.size() != means.size() || weights.size() != sigmas.size() || weights.empty())
        throw std::invalid_argument("gaussian_mixture_1d: component arrays must match");
    DensitySpec spec;
    spec.name = std::move(name);
    spec.dim = 1;
    spec.lo = {lo};
    spec.hi = {hi};
    spec.pdf = [weights, means, sigmas](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t c = 0; c < weights.size(); ++c) v += weights[c] * normal_pdf(x[0], means[c], sigmas[c]);
        return v;
    };
    double peak = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        double m = means[c];
        peak = std::max(peak, spec.pdf({&m, 1}));
    }
    {  // coarse scan in case the mixture peaks between component means
        int cells = 4000;
        for (int i = 0; i <= cells; ++i) {
            double x = lo + (hi - lo) * i / cells;
            peak = std::max(peak, spec.pdf({&x, 1}));
        }
    }
    spec.sup = peak * (1.0 + 1e-9);
    spec.alpha = 1.0;
    spec.lipschitz_L = max_abs_slope_1d(spec.pdf, lo, hi);
    spec.holder_L = spec.lipschitz_L;
    return spec;
}

namespace {

// Profile coefficients for the two-bump radial density: f2 on [0,1] over the
// basis {1, x^alpha, ..., x^{2 alpha - 2}}, matched to (2-x)^alpha at x = 1 up
// to order alpha-1. The basis keeps derivatives 1..alpha-1 zero at the origin.
std::vector<double> spline_inner_coefficients(int alpha) {
    int m = alpha;  // unknowns: a0 plus alpha-1 powers
    std::vector<int> exps{0};
    for (int e = alpha; e <= 2 * alpha - 2; ++e) exps.push_back(e);
    std::vector<std::vector<double>> M(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    auto dpow = [](int e, int s) {  // d^s/dx^s x^e at x = 1
        double v = 1.0;
        for (int t = 0; t < s; ++t) v *= e - t;
        return e >= s ? v : 0.0;
    };
    for (int s = 0; s < m; ++s) {
        for (int j = 0; j < m; ++j) M[s][j] = dpow(exps[j], s);
        // d^s/dx^s (2-x)^alpha at x=1 is (-1)^s alpha!/(alpha-s)!
        double v = 1.0;
        for (int t = 0; t < s; ++t) v *= alpha - t;
        rhs[s] = (s % 2 == 0 ? 1.0 : -1.0) * v;
    }
    // gaussian elimination with partial pivoting
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        std::swap(M[col], M[piv]);
        std::swap(rhs[col], rhs[piv]);
        if (std::abs(M[col][col]) < 1e-12) throw std::runtime_error("spline profile: singular system");
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            double f = M[r][col] / M[col][col];
            for (int c = col; c < m; ++c) M[r][c] -= f * M[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> coeff(m);
    for (int j = 0; j < m; ++j) coeff[j] = rhs[j] / M[j][j];
    return coeff;
}

}  // namespace

DensitySpec spline_pair_density(int alpha, int d) {
    if (alpha < 2) throw std::invalid_argument("spline_pair_density: alpha must be an integer >= 2");
    if (d < 1 || d > 2) throw std::invalid_argument("spline_pair_density: d must be 1 or 2");

    auto coeff = spline_inner_coefficients(alpha);
    std::vector<int> exps{0};
    for (int e = alpha; e <= 2 * alpha - 2; ++e) exps.push_back(e);

    auto inner = [coeff, exps](double r) {
        double v = 0.0;
        for (std::size_t j = 0; j < coeff.size(); ++j) v += coeff[j] * std::pow(r, exps[j]);
        return v;
    };
    auto radial = [inner, alpha](double r) {
        if (r < 0.0 || r > 2.0) return 0.0;
        if (r <= 1.0) return inner(r);
        return std::pow(2.0 - r, alpha);
    };

    // the ball level-set fact needs the inner profile to stay >= 1 and decrease
    for (int i = 0; i < 1000; ++i) {
        double r0 = i / 1000.0, r1 = (i + 1) / 1000.0;
        if (radial(r1) > radial(r0) + 1e-12 || radial(r1) < 1.0 - 1e-9)
            throw std::runtime_error("spline profile: inner branch is not a decreasing cap");
    }

    // normalizer: integral of F(x - x0) + F(x + x0) = 2 d V_d int f(r) r^{d-1} dr
    double integral = 0.0;
    {
        int steps = 200000;
        for (int i = 0; i < steps; ++i) {
            double r = 2.0 * (i + 0.5) / steps;
            integral += radial(r) * std::pow(r, d - 1) * (2.0 / steps);
        }
        integral *= 2.0 * d * unit_ball_volume(d);
    }

    DensitySpec spec;
    spec.name = "spline_pair_a" + std::to_string(alpha) + (d == 2 ? "_d2" : "");
    spec.dim = d;
    spec.lo.assign(d, -4.5);
    spec.hi.assign(d, 4.5);
    const double Z = integral;
    spec.pdf = [radial, Z, d](std::span<const double> x) {
        double ra = 0.0, rb = 0.0;
        for (int a = 0; a < d; ++a) {
            double xa = x[a] - (a == 0 ? 2.0 : 0.0);
            double xb = x[a] + (a == 0 ? 2.0 : 0.0);
            ra += xa * xa;
            rb += xb * xb;
        }
        return (radial(std::sqrt(ra)) + radial(std::sqrt(rb))) / Z;
    };
    spec.sup = inner(0.0) / Z * (1.0 + 1e-9);
    spec.alpha = alpha;
    spec.lipschitz_L = max_abs_slope_1d(spec.pdf, spec.lo[0], spec.hi[0]);
    spec.holder_L = spec.lipschitz_L;
    spec.known_splits = {KnownSplit{0.0, 2}};
    spec.spline = SplineFacts{alpha, Z, radial};
    return spec;
}

GapShape GapShape::disk(std::vector<double> center, double radius) {
    return GapShape{Kind::Disk, std::move(center), {radius}};
}

GapShape GapShape::rect(std::vector<double> lo, std::vector<double> hi) {
    return GapShape{Kind::Rect, std::move(lo), std::move(hi)};
}

bool GapShape::contains(std::span<const double> x) const {
    if (kind == Kind::Disk) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d2 += (x[i] - a[i]) * (x[i] - a[i]);
        return d2 <= b[0] * b[0];
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (x[i] < a[i] || x[i] > b[i]) return false;
    return true;
}

double GapShape::area() const {
    if (kind == Kind::Disk) return std::numbers::pi * b[0] * b[0];
    double v = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) v *= b[i] - a[i];
    return v;
}

double GapShape::perimeter() const {
    if (kind == Kind::Disk) return 2.0 * std::numbers::pi * b[0];
    return 2.0 * ((b[0] - a[0]) + (b[1] - a[1]));
}

namespace {

double point_rect_distance(std::span<const double> x, const GapShape& rect) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < rect.a.size(); ++i) {
        double gap = std::max({rect.a[i] - x[i], 0.0, x[i] - rect.b[i]});
        d2 += gap * gap;
    }
    return std::sqrt(d2);
}

}  // namespace

double GapShape::distance_to(const GapShape& other) const {
    if (kind == Kind::Disk && other.kind == Kind::Disk) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - other.a[i]) * (a[i] - other.a[i]);
        return std::max(0.0, std::sqrt(d2) - b[0] - other.b[0]);
    }
    if (kind == Kind::Disk) return std::max(0.0, point_rect_distance(a, other) - b[0]);
    if (other.kind == Kind::Disk) return other.distance_to(*this);
    // rect-rect: per-axis gaps
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double gap = std::max({other.a[i] - b[i], 0.0, a[i] - other.b[i]});
        d2 += gap * gap;
    }
    return std::sqrt(d2);
}

DensitySpec gap_density(std::vector<GapShape> shapes, double lambda_star, double eps,
                        std::vector<double> box_lo, std::vector<double> box_hi) {
    if (shapes.empty()) throw std::invalid_argument("gap_density: need at least one shape");
    if (!(eps > 0.0)) throw std::invalid_argument("gap_density: eps must be positive");
    if (lambda_star < 0.0) throw std::invalid_argument("gap_density: lambda_star must be >= 0");

    double sigma = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < shapes.size(); ++i)
        for (std::size_t j = i + 1; j < shapes.size(); ++j) {
            double dist = shapes[i].distance_to(shapes[j]);
            if (!(dist > 0.0)) throw std::invalid_argument("gap_density: shapes must be disjoint");
            sigma = std::min(sigma, dist);
        }

    double box_area = 1.0;
    for (std::size_t i = 0; i < box_lo.size(); ++i) box_area *= box_hi[i] - box_lo[i];
    double shape_area = 0.0, perimeter = 0.0;
    for (const auto& s : shapes) {
        shape_area += s.area();
        perimeter += s.perimeter();
    }
    double Z = 1.0 / (lambda_star * (box_area - shape_area) + (lambda_star + eps) * shape_area);

    DensitySpec spec;
    spec.name = "gap_density";
    spec.dim = static_cast<int>(box_lo.size());
    spec.lo = box_lo;
    spec.hi = box_hi;
    auto shapes_copy = shapes;
    auto in_box = [box_lo, box_hi](std::span<const double> x) {
        for (std::size_t i = 0; i < box_lo.size(); ++i)
            if (x[i] < box_lo[i] || x[i] > box_hi[i]) return false;
        return true;
    };
    spec.pdf = [shapes_copy, Z, lambda_star, eps, in_box](std::span<const double> x) {
        if (!in_box(x)) return 0.0;
        for (const auto& s : shapes_copy)
            if (s.contains(x)) return Z * (lambda_star + eps);
        return Z * lambda_star;
    };
    spec.sup = Z * (lambda_star + eps) * (1.0 + 1e-12);
    spec.alpha = 1.0;
    spec.lipschitz_L = 0.0;  // discontinuous; no certificate declared

    GapFacts facts;
    facts.lambda_low = Z * lambda_star;
    facts.lambda_high = Z * (lambda_star + eps);
    facts.sigma = sigma;
    facts.C0_perimeter = unit_ball_volume(spec.dim - 1 >= 1 ? spec.dim - 1 : 1) * perimeter;
    facts.mass_S = Z * (lambda_star + eps) * shape_area;
    facts.in_S = [shapes_copy](std::span<const double> x) {
        for (const auto& s : shapes_copy)
            if (s.contains(x)) return true;
        return false;
    };
    if (shapes.size() >= 2) spec.known_splits = {KnownSplit{facts.lambda_low, 2}};
    spec.gap = std::move(facts);
    return spec;
}

DensitySpec lower_bound_density(double alpha, double delta, int n, int i) {
    if (i < 1 || i > 8) throw std::invalid_argument("lower_bound_density: i must be in 1..8");
    if (!(alpha > 0.0)) throw std::invalid_argument("lower_bound_density: alpha must be positive");
    const int d = 1;  // family is used as a 1-d fixture; the construction generalizes
    const double lambda = 1.0;
    // 56 lambda 8^{d-1} a^d = 1
    const double a_len = 1.0 / (56.0 * lambda);
    const double b = std::pow(std::log(32.0) / (n * lambda * unit_ball_volume(d)), 1.0 / d);

    if (!(delta > 0.0 && delta < lambda))
        throw std::invalid_argument("lower_bound_density: delta must lie in (0, lambda)");

    // K <= 1 chosen so the profile meets the degree-alpha budget with constant
    // 1; for the tent branch the quotient equals K, shrunk for safety.
    double K = 0.9;
    double t = std::pow(delta / K, 1.0 / alpha);

    auto g = [K, t, b, alpha, delta](double r) {
        double c = b + t;
        if (r <= b) return 0.0;
        double off = std::abs(r - c);
        if (off > t) return 0.0;
        if (alpha < 1.0) return K * std::pow(t - off, alpha);
        if (off <= 0.5 * t) return std::pow(2.0, 1.0 - alpha) * delta - K * std::pow(off, alpha);
        return std::pow(std::pow(delta, 1.0 / alpha) - std::pow(K, 1.0 / alpha) * off, alpha);
    };

    double radius = b + 2.0 * t;
    if (radius > 3.0 * a_len)
        throw std::invalid_argument("lower_bound_density: delta (or n) leaves no room for the bumps");

    std::vector<std::vector<double>> centers;
    for (int j = 0; j <= 8; ++j) centers.push_back({(6.0 * j + 3.0) * a_len});

    const double domain_hi = 56.0 * a_len;
    auto center_i = centers[i][0];
    auto center_0 = centers[0][0];
    DensitySpec spec;
    spec.name = "lower_bound_a" + std::to_string(alpha).substr(0, 4) + "_i" + std::to_string(i);
    spec.dim = d;
    spec.lo = {0.0};
    spec.hi = {domain_hi};
    spec.pdf = [g, center_i, center_0, domain_hi, lambda](std::span<const double> x) {
        if (x[0] < 0.0 || x[0] > domain_hi) return 0.0;
        return lambda - g(std::abs(x[0] - center_i)) + g(std::abs(x[0] - center_0));
    };
    double sup_g = alpha < 1.0 ? delta : std::pow(2.0, 1.0 - alpha) * delta;
    spec.sup = lambda + sup_g;
    spec.alpha = alpha;
    spec.holder_L = 1.0;
    spec.lipschitz_L = alpha >= 1.0 ? std::max(1.0, K * alpha * std::pow(t, alpha - 1.0)) : 0.0;

    // split structure in d = 1: the dip barrier at lambda - sup g, and the
    // plateau level lambda where the bump's two flanks meet the rest
    spec.known_splits = {KnownSplit{lambda - sup_g, 2}, KnownSplit{lambda, 2}};
    LowerBoundFacts facts;
    facts.lambda = lambda;
    facts.b = b;
    facts.K = K;
    facts.delta = delta;
    facts.bump_halfwidth = t;
    facts.perturbed_index = i;
    facts.centers = centers;
    facts.g = g;
    facts.components_at_lambda = 3;  // ball, left remainder, right remainder
    spec.lower = std::move(facts);
    return spec;
}

DensitySpec uniform_density(int d) {
    DensitySpec spec;
    spec.name = "uniform_" + std::to_string(d) + "d";
    spec.dim = d;
    spec.lo.assign(d, 0.0);
    spec.hi.assign(d, 1.0);
    spec.pdf = [d](std::span<const double> x) {
        for (int a = 0; a < d; ++a)
            if (x[a] < 0.0 || x[a] > 1.0) return 0.0;
        return 1.0;
    };
    spec.sup = 1.0;
    spec.alpha = 1.0;
    spec.lipschitz_L = 0.0;
    return spec;
}

namespace {

std::map<std::string, DensitySpec> build_registry() {
    std::map<std::string, DensitySpec> reg;
    {
        auto spec = gaussian_mixture_1d("two_bump", {0.5, 0.5}, {-1.0, 1.0}, {0.5, 0.5}, -4.0, 4.0);
        double zero = 0.0;
        spec.known_splits = {KnownSplit{spec.pdf({&zero, 1}), 2}};
        reg.emplace(spec.name, std::move(spec));
    }
    {
        auto spec = gaussian_mixture_1d("two_bump_wide", {0.5, 0.5}, {-2.0, 2.0}, {0.5, 0.5}, -5.0, 5.0);
        double zero = 0.0;
        spec.known_splits = {KnownSplit{spec.pdf({&zero, 1}), 2}};
        reg.emplace(spec.name, std::move(spec));
    }
    {
        auto spec = spline_pair_density(2, 1);
        reg.emplace(spec.name, std::move(spec));
    }
    {
        auto spec = spline_pair_density(3, 1);
        reg.emplace(spec.name, std::move(spec));
    }
    {
        auto spec = gap_density({GapShape::disk({-1.0, -1.0}, 0.7),
                                 GapShape::rect({0.5, 0.5}, {1.5, 1.5})},
                                0.05, 0.5);
        spec.name = "gap_disk_square";
        reg.emplace(spec.name, std::move(spec));
    }
    {
        auto spec = uniform_density(1);
        reg.emplace(spec.name, std::move(spec));
    }
    {
        auto spec = uniform_density(2);
        reg.emplace(spec.name, std::move(spec));
    }
    return reg;
}

}  // namespace

const DensitySpec& density_registry(const std::string& name) {
    static std::map<std::string, DensitySpec> reg = build_registry();
    static std::map<std::string, bool> validated;
    static std::mutex mu;
    auto it = reg.find(name);
    if (it == reg.end()) throw std::out_of_range("density_registry: unknown spec " + name);
    std::lock_guard<std::mutex> lock(mu);
    if (!validated[name]) {
        double step = it->second.dim == 1 ? 0.002 : 0.02;
        auto report = validate_spec(it->second, step);
        if (!report.pass())
            throw std::runtime_error("density_registry: validation failed for " + name + ": " +
                                     report.issues.front());
        validated[name] = true;
    }
    return it->second;
}

std::vector<std::string> density_registry_names() {
    return {"two_bump", "two_bump_wide", "spline_pair_a2", "spline_pair_a3",
            "gap_disk_square", "uniform_1d", "uniform_2d"};
}

Dataset sample(const DensitySpec& spec, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    Rng rng(seed);
    std::vector<double> coords;
    coords.reserve(static_cast<std::size_t>(n) * spec.dim);
    std::vector<double> x(spec.dim);
    std::size_t attempts = 0;
    const std::size_t limit = std::max<std::size_t>(static_cast<std::size_t>(n) * 10000, 100000);
    int accepted = 0;
    while (accepted < n) {
        if (++attempts > limit)
            throw std::runtime_error("sample: acceptance rate below 1e-4, envelope unusable");
        for (int a = 0; a < spec.dim; ++a) x[a] = rng.uniform(spec.lo[a], spec.hi[a]);
        double u = rng.uniform(0.0, spec.sup);
        if (u <= spec.pdf(x)) {
            coords.insert(coords.end(), x.begin(), x.end());
            ++accepted;
        }
    }
    return Dataset(std::move(coords), spec.dim);
}

GriddedDensity grid(const DensitySpec& spec, double step) {
    if (spec.dim > 2) throw std::invalid_argument("grid: only d <= 2 is supported");
    GridGeometry geom = GridGeometry::regular(spec.lo, spec.hi, step);
    std::vector<double> values(geom.size());
    parallel_for(geom.size(), [&](std::size_t f) {
        auto c = geom.center(f);
        values[f] = spec.pdf(c);
    });
    return GriddedDensity(std::move(geom), std::move(values));
}

ValidationReport validate_spec(const DensitySpec& spec, double step) {
    ValidationReport report{0.0, 0.0, true, {}};
    GriddedDensity gd = grid(spec, step);
    report.integral = gd.integral();
    report.min_value = *std::min_element(gd.values().begin(), gd.values().end());

    // piecewise-constant families integrate exactly by construction
    // (closed-form areas); smooth ones must quadrature to 1
    if (spec.gap) {
        double box_area = 1.0;
        for (std::size_t i = 0; i < spec.lo.size(); ++i) box_area *= spec.hi[i] - spec.lo[i];
        double shape_area = spec.gap->mass_S / spec.gap->lambda_high;
        double exact = spec.gap->lambda_low * (box_area - shape_area) + spec.gap->mass_S;
        if (std::abs(exact - 1.0) > 1e-9)
            report.issues.push_back("closed-form integral differs from 1 by " +
                                    std::to_string(std::abs(exact - 1.0)));
    } else if (std::abs(report.integral - 1.0) > 1e-6) {
        report.issues.push_back("grid integral " + std::to_string(report.integral) + " is off 1");
    }
    if (report.min_value < 0.0) report.issues.push_back("negative density value on the grid");

    if (!spec.known_splits.empty()) {
        auto found = true_split_levels(gd);
        // level tolerance: one value gap plus the grid's resolution error for
        // the declared smoothness degree
        double resolution = spec.holder_L * std::pow(step, std::min(spec.alpha, 1.0)) +
                            spec.lipschitz_L * step + 1e-9;
        for (const auto& ks : spec.known_splits) {
            bool matched = false;
            for (const auto& gs : found) {
                if (std::abs(gs.level - ks.level) <= gs.value_gap + resolution &&
                    static_cast<int>(gs.children.size()) >= ks.child_count) {
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                report.splits_match = false;
                report.issues.push_back("declared split at " + std::to_string(ks.level) +
                                        " not found on the grid");
            }
        }
    }
    return report;
}

}  // namespace treeclust
