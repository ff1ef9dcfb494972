#pragma once

// Numerical integration engines: adaptive Gauss-Kronrod quadrature over the
// radius parameter, Monte Carlo ball integration, and truncation control for
// integrals over (0, infinity).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hlmax/rng.hpp"
#include "hlmax/spaces.hpp"

namespace hlmax {

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_depth = 40;
    long mc_samples = 100000;
    std::uint64_t master_seed = 42;
    double tail_tol = 1e-10;

    void validate() const {
        if (!(rel_tol > 0) || !(abs_tol > 0) || !(tail_tol > 0))
            throw std::invalid_argument("config: tolerances must be positive");
        if (mc_samples < 1000) throw std::invalid_argument("config: mc_samples must be >= 1000");
        if (max_depth < 10) throw std::invalid_argument("config: max_depth must be >= 10");
    }
};

enum class EstimateKind { deterministic, monte_carlo };

struct Estimate {
    double value = 0.0;
    double error_bound = 0.0;  // 3 standard errors on Monte Carlo paths
    EstimateKind kind = EstimateKind::deterministic;
    long samples_used = 0;
};

namespace detail {

// (G7, K15) node/weight table on [0, 1]: abscissa, Gauss weight, Kronrod weight.
inline constexpr double gk15[8][3] = {
    {0.000000000000000000, 0.417959183673469388, 0.209482141084727828},
    {0.405845151377397167, 0.381830050505118945, 0.190350578064785410},
    {0.741531185599394440, 0.279705391489276668, 0.140653259715525919},
    {0.949107912342758525, 0.129484966168869693, 0.063092092629978554},
    {0.207784955007898468, 0.0, 0.204432940075298892},
    {0.586087235467691130, 0.0, 0.169004726639267903},
    {0.864864423359769073, 0.0, 0.104790010322250184},
    {0.991455371120812639, 0.0, 0.022935322010529225},
};

template <class F>
inline void gk15_panel(F& g, double a, double b, double& value, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double y0 = g(mid);
    double g7 = gk15[0][1] * y0;
    double k15 = gk15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * gk15[i][0];
        const double yi = g(mid + dx) + g(mid - dx);
        g7 += gk15[i][1] * yi;
        k15 += gk15[i][2] * yi;
    }
    g7 *= half;
    k15 *= half;
    if (!std::isfinite(k15)) throw numeric_error("integrate_radial: non-finite integrand value");
    value = k15;
    const double diff = 200.0 * std::fabs(g7 - k15);
    err = std::max(diff * std::sqrt(diff), 4e-16 * std::fabs(k15));
}

}  // namespace detail

struct RadialOptions {
    // Absolute per-unit-width noise level of the integrand. Panels whose
    // Kronrod error estimate is below 3x this floor are accepted, which keeps
    // adaptive bisection from chasing Monte Carlo noise.
    double noise_floor = 0.0;
    int max_depth = -1;          // override cfg.max_depth when >= 0
    double rel_tol = -1.0;       // override cfg.rel_tol when > 0
    int initial_log_panels = 0;  // seed the stack with log-spaced panels
};

// Adaptive bisection with a 15-point Kronrod rule per panel. Handles
// piecewise-smooth integrands with a few kinks through refinement alone.
template <class F>
Estimate integrate_radial(F&& g, double r_lo, double r_hi, const QuadratureConfig& cfg,
                          const RadialOptions& opt = {}) {
    if (!(r_lo >= 0) || !(r_hi > r_lo) || !std::isfinite(r_hi))
        throw std::invalid_argument("integrate_radial: need 0 <= r_lo < r_hi < inf");
    cfg.validate();

    const int max_depth = opt.max_depth >= 0 ? opt.max_depth : cfg.max_depth;
    const double rel_tol = opt.rel_tol > 0 ? opt.rel_tol : cfg.rel_tol;

    double rough = 0, rough_err = 0;
    detail::gk15_panel(g, r_lo, r_hi, rough, rough_err);
    const double scale_tol = std::max(cfg.abs_tol, rel_tol * std::fabs(rough));

    double sum = 0.0, err_sum = 0.0;
    bool depth_exhausted = false;

    struct Panel {
        double a, b, tol;
        int depth;
    };
    std::vector<Panel> stack;
    if (opt.initial_log_panels > 1) {
        const int k = opt.initial_log_panels;
        const double lo_pos = std::max(r_lo, r_hi * 1e-8);
        std::vector<double> cuts;
        cuts.push_back(r_lo);
        if (lo_pos > r_lo) cuts.push_back(lo_pos);
        for (int i = 1; i <= k; ++i)
            cuts.push_back(lo_pos * std::pow(r_hi / lo_pos, static_cast<double>(i) / k));
        cuts.back() = r_hi;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double frac = (cuts[i + 1] - cuts[i]) / (r_hi - r_lo);
            stack.push_back({cuts[i], cuts[i + 1], std::max(scale_tol * frac, cfg.abs_tol), 0});
        }
    } else {
        stack.push_back({r_lo, r_hi, scale_tol, 0});
    }
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        double v = 0, e = 0;
        detail::gk15_panel(g, p.a, p.b, v, e);
        const double width = p.b - p.a;
        const double noise_ok = 3.0 * opt.noise_floor * width;
        if (e <= std::max(p.tol, noise_ok) || width < 1e-14 * (r_hi - r_lo)) {
            sum += v;
            err_sum += e;
            continue;
        }
        if (p.depth >= max_depth) {
            sum += v;
            err_sum += 10.0 * e;  // unresolved panel: enlarge the reported bound
            depth_exhausted = true;
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        stack.push_back({p.a, mid, 0.5 * p.tol, p.depth + 1});
        stack.push_back({mid, p.b, 0.5 * p.tol, p.depth + 1});
    }

    Estimate out;
    out.value = sum;
    // the refinement loop only guarantees the requested tolerance, so never
    // report a smaller bound than that
    out.error_bound = std::max(err_sum, std::max(cfg.abs_tol, rel_tol * std::fabs(sum)));
    out.kind = EstimateKind::deterministic;
    out.samples_used = 0;
    if (depth_exhausted) out.error_bound = std::max(out.error_bound, 10.0 * scale_tol);
    return out;
}

// Monte Carlo estimate of the integral of h over the metric ball B(x, r).
// Deterministic given (cfg.master_seed, stream_tag, x, r); the error bound is
// three standard errors of the mean.
template <class H>
Estimate mc_integrate_ball(const Space& space, H&& h, const Point& x, double r,
                           const QuadratureConfig& cfg, std::uint64_t stream_tag = 0) {
    cfg.validate();
    if (!(r > 0)) throw std::domain_error("mc_integrate_ball: radius must be positive");
    const long n = cfg.mc_samples;
    if (n <= 0) throw std::invalid_argument("mc_integrate_ball: zero samples");

    StreamKey key;
    key.mix("mc_ball").mix(stream_tag).mix(r);
    x.mix_into(key);
    Rng rng(substream_seed(cfg.master_seed, key.h));

    const double volume = space.ball_volume(x, r);
    double sum = 0.0, sum_sq = 0.0;
    for (long i = 0; i < n; ++i) {
        const BallSample s = space.sample_ball(x, r, rng);
        const double v = s.weight * h(s.point);
        if (!std::isfinite(v)) throw numeric_error("mc_integrate_ball: non-finite integrand value");
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
    const double se = std::sqrt(var / static_cast<double>(n));

    Estimate out;
    out.value = volume * mean;
    out.error_bound = 3.0 * volume * se;
    out.kind = EstimateKind::monte_carlo;
    out.samples_used = n;
    return out;
}

// Smallest R with integrand_sup * tail(R) <= cfg.tail_tol, where tail(R) is
// the weight's certified bound on its mass beyond R. Requires a tail bound or
// finite support. W must expose support_bound and tail_bound(double).
template <class W>
double truncation_radius(const W& w, double integrand_sup, const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(integrand_sup >= 0) || !std::isfinite(integrand_sup))
        throw std::invalid_argument("truncation_radius: integrand_sup must be finite and >= 0");
    if (std::isfinite(w.support_bound)) return w.support_bound;
    if (integrand_sup == 0.0) return 1.0;
    if (!w.tail_bound)
        throw std::invalid_argument("truncation_radius: weight has neither finite support nor a tail bound");

    const double target = cfg.tail_tol / integrand_sup;
    double hi = 1.0;
    int guard = 0;
    while (w.tail_bound(hi) > target) {
        hi *= 2.0;
        if (++guard > 60) throw numeric_error("truncation_radius: tail does not decay");
    }
    double lo = hi > 1.0 ? hi * 0.5 : 0.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (w.tail_bound(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return std::max(hi, 1.0);
}

}  // namespace hlmax
