#pragma once

// Radius-weights on (0, inf) and the library of nonnegative test functions,
// both with enough metadata (masses, support bounds, tail bounds, norms) for
// the operators and the verification harness to produce certified numbers.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hlmax/quadrature.hpp"
#include "hlmax/spaces.hpp"

namespace hlmax {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Radius weights

struct RadiusWeight {
    std::string name;
    std::function<double(double)> density;          // w(r), r > 0
    double support_bound = kInf;                    // density vanishes beyond this
    std::optional<double> closed_form_mass;         // exact total mass when known
    std::function<double(double)> tail_bound;       // R -> upper bound of mass beyond R

    double operator()(double r) const { return density(r); }
};

inline RadiusWeight scaled_weight(const RadiusWeight& w, double c) {
    if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("scaled_weight: factor must be positive");
    RadiusWeight out;
    out.name = "scale:" + shortest_double(c) + ":" + w.name;
    auto base = w.density;
    out.density = [base, c](double r) { return c * base(r); };
    out.support_bound = w.support_bound;
    if (w.closed_form_mass) out.closed_form_mass = c * *w.closed_form_mass;
    if (w.tail_bound) {
        auto tail = w.tail_bound;
        out.tail_bound = [tail, c](double R) { return c * tail(R); };
    }
    return out;
}

namespace detail {

// two-column CSV "r,w" with strictly increasing r; linear interpolation,
// zero outside the listed range.
struct WeightTable {
    std::vector<double> r, w;

    double eval(double x) const {
        if (x <= r.front() || x >= r.back()) {
            if (x == r.front()) return w.front();
            if (x == r.back()) return w.back();
            return 0.0;
        }
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - r.begin());
        const double t = (x - r[i - 1]) / (r[i] - r[i - 1]);
        return w[i - 1] + t * (w[i] - w[i - 1]);
    }

    double mass_beyond(double R) const {
        double total = 0.0;
        for (std::size_t i = 1; i < r.size(); ++i) {
            double a = r[i - 1], b = r[i];
            double wa = w[i - 1], wb = w[i];
            if (b <= R) continue;
            if (a < R) {
                wa = eval(R);
                a = R;
            }
            total += 0.5 * (wa + wb) * (b - a);
        }
        return total;
    }
};

inline WeightTable load_weight_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("weight table: cannot open '" + path + "'");
    WeightTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line == "r,w") continue;  // optional header
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b))
            throw std::invalid_argument("weight table: bad line '" + line + "'");
        double rv = 0, wv = 0;
        try {
            rv = std::stod(a);
            wv = std::stod(b);
        } catch (const std::exception&) {
            throw std::invalid_argument("weight table: bad number in '" + line + "'");
        }
        if (wv < 0) throw std::invalid_argument("weight table: negative density at r=" + a);
        if (!t.r.empty() && rv <= t.r.back())
            throw std::invalid_argument("weight table: radii must be strictly increasing");
        t.r.push_back(rv);
        t.w.push_back(wv);
    }
    if (t.r.size() < 2) throw std::invalid_argument("weight table: need at least two rows");
    if (t.r.front() < 0) throw std::invalid_argument("weight table: radii must be >= 0");
    return t;
}

}  // namespace detail

// Descriptors: exp | gauss | uniform:<R> | table:<path>
inline RadiusWeight make_weight(const std::string& spec) {
    RadiusWeight w;
    w.name = spec;
    if (spec == "exp") {
        w.density = [](double r) { return std::exp(-r); };
        w.closed_form_mass = 1.0;
        w.tail_bound = [](double R) { return std::exp(-R); };
        return w;
    }
    if (spec == "gauss") {
        w.density = [](double r) { return std::exp(-r * r); };
        w.closed_form_mass = 0.5 * std::sqrt(std::numbers::pi);
        w.tail_bound = [](double R) { return 0.5 * std::sqrt(std::numbers::pi) * std::erfc(R); };
        return w;
    }
    if (spec.rfind("uniform:", 0) == 0) {
        double R = 0;
        try {
            R = std::stod(spec.substr(8));
        } catch (const std::exception&) {
            throw std::invalid_argument("weight: bad radius in '" + spec + "'");
        }
        if (!(R > 0) || !std::isfinite(R)) throw std::invalid_argument("weight: uniform radius must be positive");
        w.density = [R](double r) { return r <= R ? 1.0 : 0.0; };
        w.support_bound = R;
        w.closed_form_mass = R;
        w.tail_bound = [R](double x) { return std::max(0.0, R - std::max(x, 0.0)); };
        return w;
    }
    if (spec.rfind("table:", 0) == 0) {
        auto table = detail::load_weight_table(spec.substr(6));
        w.support_bound = table.r.back();
        w.closed_form_mass = table.mass_beyond(0.0);
        w.density = [table](double r) { return table.eval(r); };
        w.tail_bound = [table](double R) { return table.mass_beyond(R); };
        return w;
    }
    throw std::invalid_argument("weight: unknown descriptor '" + spec + "'");
}

// Numerical total mass (the weight's norm); agrees with closed_form_mass
// within cfg.rel_tol for the built-in weights.
inline Estimate total_mass(const RadiusWeight& w, const QuadratureConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(w.support_bound) && !w.tail_bound)
        throw std::invalid_argument("total_mass: weight has neither finite support nor a tail bound");
    const double R = truncation_radius(w, 1.0, cfg);
    Estimate est = integrate_radial(w.density, 0.0, R, cfg);
    if (!std::isfinite(est.value) || est.value < 0) throw numeric_error("total_mass: divergent integral");
    if (!std::isfinite(w.support_bound) && w.tail_bound) {
        const double tail = w.tail_bound(R);
        est.value += tail;
        est.error_bound += tail;
    }
    return est;
}

// Sampled sanity checks on a weight: nonnegative density, almost-everywhere
// nonzero on its support, finite mass consistent with the closed form.
inline void validate_weight(const RadiusWeight& w, const QuadratureConfig& cfg) {
    cfg.validate();
    const double cap = std::isfinite(w.support_bound) ? w.support_bound : truncation_radius(w, 1.0, cfg);
    Rng rng(substream_seed(cfg.master_seed, StreamKey().mix("validate_weight").mix(w.name).h));
    int zeros = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double r = rng.open_uniform() * cap;
        const double v = w.density(r);
        if (!(v >= 0) || !std::isfinite(v))
            throw std::invalid_argument("weight '" + w.name + "': density must be finite and >= 0");
        if (v == 0.0) ++zeros;
    }
    if (zeros > n / 100)
        throw std::invalid_argument("weight '" + w.name + "': density vanishes on too much of its support");
    const Estimate mass = total_mass(w, cfg);
    if (w.closed_form_mass) {
        const double want = *w.closed_form_mass;
        if (std::fabs(mass.value - want) > std::max(cfg.abs_tol, cfg.rel_tol * want) + mass.error_bound)
            throw std::invalid_argument("weight '" + w.name + "': numeric mass disagrees with closed form");
    }
}

// Ball average of Delta(y^{-1}) over B(e, r) under the left Haar measure,
// estimated by Monte Carlo. This is the modular factor entering the G-norm.
inline Estimate modular_ball_average(const Space& space, double r, const QuadratureConfig& cfg,
                                     std::uint64_t stream_tag = 0) {
    if (space.unimodular()) return Estimate{1.0, 0.0, EstimateKind::deterministic, 0};
    const Point e = space.identity();
    auto h = [&space](const Point& y) { return space.modular(space.inverse(y)); };
    Estimate integral = mc_integrate_ball(space, h, e, r, cfg, StreamKey().mix("modavg").mix(stream_tag).h);
    const double vol = space.ball_volume(e, r);
    integral.value /= vol;
    integral.error_bound /= vol;
    return integral;
}

// G-norm of a radius-weight: the weight's mass reweighted per radius by the
// ball-averaged modular factor. Equals the plain mass on unimodular kinds.
inline Estimate g_norm(const Space& space, const RadiusWeight& w, const QuadratureConfig& cfg) {
    cfg.validate();
    if (space.kind() == SpaceKind::affine_right)
        throw std::invalid_argument("g_norm: defined for left-Haar group kinds only");
    if (space.unimodular()) return total_mass(w, cfg);

    const double R = truncation_radius(w, 1.0, cfg);
    const long n_inner = std::max<long>(2048, cfg.mc_samples / 16);
    QuadratureConfig inner_cfg = cfg;
    inner_cfg.mc_samples = n_inner;

    // probe the integrand noise so adaptive bisection does not chase it
    double noise = 0.0;
    for (double rp : {0.25, 1.0, 2.0, std::min(4.0, 0.5 * R)}) {
        const Estimate phi = modular_ball_average(space, rp, inner_cfg, 0);
        noise = std::max(noise, w.density(rp) * phi.error_bound / 3.0);
    }

    RadialOptions opt;
    opt.noise_floor = noise;
    opt.max_depth = 14;
    opt.rel_tol = std::max(cfg.rel_tol, 0.5 / std::sqrt(static_cast<double>(n_inner)));

    const int replicates = 4;
    double vals[replicates];
    double quad_err = 0.0;
    for (int k = 0; k < replicates; ++k) {
        auto integrand = [&](double r) {
            const Estimate phi = modular_ball_average(space, r, inner_cfg,
                                                      StreamKey().mix("gnorm").mix(k).mix(r).h);
            return w.density(r) * phi.value;
        };
        const Estimate part = integrate_radial(integrand, 0.0, R, cfg, opt);
        vals[k] = part.value;
        quad_err = std::max(quad_err, part.error_bound);
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= replicates;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= (replicates - 1);
    const double se = std::sqrt(var / replicates);

    Estimate out;
    out.value = mean;
    out.error_bound = 3.0 * se + quad_err + (w.tail_bound ? w.tail_bound(R) : 0.0);
    out.kind = EstimateKind::monte_carlo;
    out.samples_used = replicates * n_inner;
    return out;
}

// Tabulated two-branch weight: gaussian density, divided per radius by the
// ball-averaged modular factor wherever that factor exceeds one. Its G-norm
// is finite on every group kind by construction.
struct AdaptiveWeightTable {
    std::vector<double> radius;
    std::vector<double> factor;  // min(1, 1/phi(r)) at each node

    double factor_at(double r) const {
        if (r <= radius.front()) return factor.front();
        if (r >= radius.back()) return factor.back();
        const auto it = std::upper_bound(radius.begin(), radius.end(), r);
        const std::size_t i = static_cast<std::size_t>(it - radius.begin());
        const double t = (r - radius[i - 1]) / (radius[i] - radius[i - 1]);
        return factor[i - 1] + t * (factor[i] - factor[i - 1]);
    }
};

inline AdaptiveWeightTable adaptive_weight_table(const Space& space, const QuadratureConfig& cfg) {
    cfg.validate();
    if (space.kind() == SpaceKind::affine_right)
        throw std::invalid_argument("adaptive_weight: defined for left-Haar group kinds only");
    AdaptiveWeightTable t;
    const int nodes = 512;
    const double r_lo = 1e-3, r_hi = 6.0;
    QuadratureConfig inner_cfg = cfg;
    inner_cfg.mc_samples = std::max<long>(2048, cfg.mc_samples / 64);
    for (int i = 0; i < nodes; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (nodes - 1));
        t.radius.push_back(r);
        if (space.unimodular()) {
            t.factor.push_back(1.0);
            continue;
        }
        const Estimate phi = modular_ball_average(space, r, inner_cfg,
                                                  StreamKey().mix("adaptive").mix(i).h);
        t.factor.push_back(phi.value > 1.0 ? 1.0 / phi.value : 1.0);
    }
    return t;
}

inline RadiusWeight adaptive_weight(const Space& space, const QuadratureConfig& cfg) {
    RadiusWeight w;
    w.name = "adaptive[" + space.descriptor() + "]";
    if (space.unimodular()) {
        w.density = [](double r) { return std::exp(-r * r); };
        w.closed_form_mass = 0.5 * std::sqrt(std::numbers::pi);
        w.tail_bound = [](double R) { return 0.5 * std::sqrt(std::numbers::pi) * std::erfc(R); };
        return w;
    }
    auto table = adaptive_weight_table(space, cfg);
    const double r_hi = table.radius.back();
    w.support_bound = r_hi;
    w.density = [table, r_hi](double r) {
        if (r > r_hi) return 0.0;
        return std::exp(-r * r) * table.factor_at(r);
    };
    // density <= exp(-r^2), so the gaussian tail bounds the truncated mass
    w.tail_bound = [r_hi](double R) {
        if (R >= r_hi) return 0.0;
        return 0.5 * std::sqrt(std::numbers::pi) * std::erfc(R);
    };
    return w;
}

// ---------------------------------------------------------------------------
// Test functions

// piecewise-constant profile on the line: values[i] on (breaks[i], breaks[i+1]),
// zero outside [breaks.front(), breaks.back()]; drives the exact real-line path.
struct PiecewiseConst {
    std::vector<double> breaks;
    std::vector<double> values;

    double eval(double x) const {
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
            if (x >= breaks[i] && x < breaks[i + 1]) return values[i];
        return 0.0;
    }

    double integral_over(double lo, double hi) const {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double a = std::max(lo, breaks[i]);
            const double b = std::min(hi, breaks[i + 1]);
            if (b > a) total += values[i] * (b - a);
        }
        return total;
    }
};

struct TestFunction {
    std::string name;
    std::function<double(const Point&)> eval;
    Point anchor;                         // support / decay reference point
    double support_radius = kInf;         // f = 0 beyond this metric distance from anchor
    double global_bound = kInf;           // sup of f over the space
    std::function<double(const Point&)> local_bound;  // ess-sup of f near a point
    std::function<double(double)> lq_norm_closed;     // q -> ||f||_q when known
    std::optional<PiecewiseConst> interval_profile;   // exact path on the line
    bool is_const = false;
    double const_value = 0.0;
    double l1_upper = kInf;               // certified upper bound on the f-mass
    double envelope_radius = kInf;        // radius beyond which f is negligible

    double operator()(const Point& p) const { return eval(p); }
};

inline TestFunction sum_functions(const Space& space, const TestFunction& f, const TestFunction& g) {
    TestFunction out;
    out.name = f.name + "+" + g.name;
    auto fe = f.eval, ge = g.eval;
    out.eval = [fe, ge](const Point& p) { return fe(p) + ge(p); };
    out.anchor = f.anchor;
    if (std::isfinite(f.support_radius) && std::isfinite(g.support_radius))
        out.support_radius = std::max(f.support_radius,
                                      space.distance(f.anchor, g.anchor) + g.support_radius);
    out.global_bound = f.global_bound + g.global_bound;
    auto flb = f.local_bound, glb = g.local_bound;
    out.local_bound = [flb, glb](const Point& p) { return flb(p) + glb(p); };
    if (f.interval_profile && g.interval_profile) {
        PiecewiseConst merged;
        std::vector<double> cuts = f.interval_profile->breaks;
        cuts.insert(cuts.end(), g.interval_profile->breaks.begin(), g.interval_profile->breaks.end());
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double m = 0.5 * (cuts[i] + cuts[i + 1]);
            merged.values.push_back(f.interval_profile->eval(m) + g.interval_profile->eval(m));
        }
        merged.breaks = std::move(cuts);
        out.interval_profile = std::move(merged);
    }
    out.is_const = f.is_const && g.is_const;
    out.const_value = f.const_value + g.const_value;
    out.l1_upper = f.l1_upper + g.l1_upper;
    out.envelope_radius = std::max(f.envelope_radius,
                                   (std::isfinite(g.envelope_radius) && std::isfinite(f.envelope_radius))
                                       ? space.distance(f.anchor, g.anchor) + g.envelope_radius
                                       : kInf);
    return out;
}

inline TestFunction scale_function(const TestFunction& f, double c) {
    if (!(c >= 0) || !std::isfinite(c)) throw std::invalid_argument("scale_function: factor must be >= 0");
    TestFunction out = f;
    out.name = "scale:" + shortest_double(c) + ":" + f.name;
    auto fe = f.eval;
    out.eval = [fe, c](const Point& p) { return c * fe(p); };
    out.global_bound = c * f.global_bound;
    auto flb = f.local_bound;
    out.local_bound = [flb, c](const Point& p) { return c * flb(p); };
    if (f.lq_norm_closed) {
        auto fn = f.lq_norm_closed;
        out.lq_norm_closed = [fn, c](double q) { return c * fn(q); };
    }
    if (f.interval_profile) {
        for (auto& v : out.interval_profile->values) v *= c;
    }
    out.const_value = c * f.const_value;
    out.l1_upper = c * f.l1_upper;
    return out;
}

namespace detail {

inline std::vector<std::string> split_descriptor(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t colon = spec.find(':', start);
        if (colon == std::string::npos) colon = spec.size();
        parts.push_back(spec.substr(start, colon - start));
        start = colon + 1;
        if (colon == spec.size()) break;
    }
    return parts;
}

inline double parse_positive(const std::string& tok, const char* what) {
    double v = 0;
    try {
        v = std::stod(tok);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("function: bad ") + what + " '" + tok + "'");
    }
    if (!(v > 0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("function: ") + what + " must be positive");
    return v;
}

}  // namespace detail

// Descriptors:
//   const:<c>
//   indicator-ball:<center>:<R>
//   gauss:<center>:<sigma>          (euclidean kinds)
//   bump:<center>:<R>               (smooth, compact support)
//   power:<s>:<R>                   (affine kinds; f(a,b) = b^s on the ball of
//                                    radius R about the identity, 0 outside)
inline TestFunction make_function(const Space& space, const std::string& spec) {
    const auto parts = detail::split_descriptor(spec);
    TestFunction f;
    f.name = spec;
    f.anchor = space.identity();

    if (parts[0] == "const") {
        if (parts.size() != 2) throw std::invalid_argument("function: const:<c>");
        double c = 0;
        try {
            c = std::stod(parts[1]);
        } catch (const std::exception&) {
            throw std::invalid_argument("function: bad constant '" + parts[1] + "'");
        }
        c = std::fabs(c);  // the operators only ever see |f|
        f.eval = [c](const Point&) { return c; };
        f.global_bound = c;
        f.local_bound = [c](const Point&) { return c; };
        f.is_const = true;
        f.const_value = c;
        f.envelope_radius = 16.0;
        if (c == 0.0) {
            f.lq_norm_closed = [](double) { return 0.0; };
            f.l1_upper = 0.0;
        }
        return f;
    }

    if (parts[0] == "indicator-ball") {
        if (parts.size() != 3) throw std::invalid_argument("function: indicator-ball:<center>:<R>");
        const Point center = space.parse_point(parts[1]);
        const double R = detail::parse_positive(parts[2], "radius");
        f.anchor = center;
        f.support_radius = R;
        f.envelope_radius = R;
        f.global_bound = 1.0;
        f.eval = [space, center, R](const Point& p) { return space.distance(center, p) < R ? 1.0 : 0.0; };
        f.local_bound = [](const Point&) { return 1.0; };
        const double mass = space.ball_volume(center, R);
        f.l1_upper = mass;
        f.lq_norm_closed = [mass](double q) { return std::pow(mass, 1.0 / q); };
        if (space.kind() == SpaceKind::real_line || (space.kind() == SpaceKind::euclidean && space.dim() == 1)) {
            PiecewiseConst pc;
            pc.breaks = {center[0] - R, center[0] + R};
            pc.values = {1.0};
            f.interval_profile = std::move(pc);
        }
        return f;
    }

    if (parts[0] == "gauss") {
        if (parts.size() != 3) throw std::invalid_argument("function: gauss:<center>:<sigma>");
        if (space.is_affine()) throw std::invalid_argument("function: gauss needs a euclidean kind");
        const Point center = space.parse_point(parts[1]);
        const double sigma = detail::parse_positive(parts[2], "sigma");
        const int n = space.dim();
        f.anchor = center;
        f.global_bound = 1.0;
        f.eval = [space, center, sigma](const Point& p) {
            const double d = space.distance(center, p);
            return std::exp(-0.5 * d * d / (sigma * sigma));
        };
        f.local_bound = [space, center, sigma](const Point& p) {
            const double d = std::max(0.0, space.distance(center, p) - 0.25);
            return std::exp(-0.5 * d * d / (sigma * sigma));
        };
        f.l1_upper = std::pow(2.0 * std::numbers::pi * sigma * sigma, 0.5 * n);
        f.lq_norm_closed = [sigma, n](double q) {
            return std::pow(std::pow(2.0 * std::numbers::pi * sigma * sigma / q, 0.5 * n), 1.0 / q);
        };
        f.envelope_radius = sigma * 8.6;  // exp(-d^2/(2 s^2)) < 1e-16 beyond
        return f;
    }

    if (parts[0] == "bump") {
        if (parts.size() != 3) throw std::invalid_argument("function: bump:<center>:<R>");
        const Point center = space.parse_point(parts[1]);
        const double R = detail::parse_positive(parts[2], "radius");
        f.anchor = center;
        f.support_radius = R;
        f.envelope_radius = R;
        f.global_bound = 1.0;
        f.eval = [space, center, R](const Point& p) {
            const double t = space.distance(center, p) / R;
            if (t >= 1.0) return 0.0;
            return std::exp(1.0 - 1.0 / (1.0 - t * t));
        };
        f.local_bound = [](const Point&) { return 1.0; };
        f.l1_upper = space.ball_volume(center, R);  // bump <= indicator of the same ball
        return f;
    }

    if (parts[0] == "power") {
        if (parts.size() != 3) throw std::invalid_argument("function: power:<s>:<R>");
        if (!space.is_affine()) throw std::invalid_argument("function: power needs an affine kind");
        double s = 0;
        try {
            s = std::stod(parts[1]);
        } catch (const std::exception&) {
            throw std::invalid_argument("function: bad exponent '" + parts[1] + "'");
        }
        const double R = detail::parse_positive(parts[2], "radius");
        const Point e = space.identity();
        f.anchor = e;
        f.support_radius = R;
        f.envelope_radius = R;
        // within the ball, |log b| <= d((a,b), e) < R
        f.global_bound = std::exp(std::fabs(s) * R);
        f.eval = [space, e, s, R](const Point& p) {
            if (space.distance(e, p) >= R) return 0.0;
            return std::pow(p[1], s);
        };
        const double bound = f.global_bound;
        f.local_bound = [bound](const Point&) { return bound; };
        f.l1_upper = bound * space.ball_volume(e, R);
        return f;
    }

    throw std::invalid_argument("function: unknown descriptor '" + spec + "'");
}

}  // namespace hlmax
