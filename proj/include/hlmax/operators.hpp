#pragma once

// The three operators: averaging A f(x, r), maximal M f(x) = sup_r A f(x, r),
// and the integral-function I_{p,w} f(x) = || r -> A f(x,r) ||_{L_p(w dr)},
// plus L_q norms over a region and p-sweeps. The real line evaluates averages
// exactly (interval arithmetic / 1-D quadrature); everything else runs on a
// sorted Monte Carlo radial profile so that one sample set serves all radii.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlmax/catalog.hpp"
#include "hlmax/quadrature.hpp"
#include "hlmax/spaces.hpp"

namespace hlmax {

struct PExponent {
    double value = 1.0;

    static PExponent finite(double v) {
        if (!(v >= 1.0) || !std::isfinite(v)) throw std::domain_error("p must be in [1, inf)");
        return PExponent{v};
    }
    static PExponent infinity() { return PExponent{std::numeric_limits<double>::infinity()}; }
    static PExponent parse(const std::string& s) {
        if (s == "inf" || s == "infinity") return infinity();
        double v = 0;
        try {
            v = std::stod(s);
        } catch (const std::exception&) {
            throw std::invalid_argument("p: bad value '" + s + "'");
        }
        if (!(v >= 1.0)) throw std::invalid_argument("p: must be >= 1 or 'inf'");
        return finite(v);
    }

    bool is_inf() const { return std::isinf(value); }
    std::string str() const { return is_inf() ? "inf" : shortest_double(value); }
};

// 1/p - 1/q with the convention 1/inf = 0; equals (q-p)/(qp) for finite p, q
inline double holder_exponent(const PExponent& p, const PExponent& q) {
    const double ip = p.is_inf() ? 0.0 : 1.0 / p.value;
    const double iq = q.is_inf() ? 0.0 : 1.0 / q.value;
    return ip - iq;
}

struct SweepRow {
    PExponent p;
    Estimate i_value;
    double normalized = 0.0;   // i_value / mass^{1/p}
    double gap_to_max = 0.0;   // maximal - i_value
};

namespace detail {

// Monte Carlo radial profile around a fixed center: a stratified ladder of
// geometric shells, each sampled mu-uniformly with its own substream, sorted
// by distance with mass-weighted per-batch prefix sums. One profile serves
// A f(x, r) for every radius with uniformly bounded relative error; a single
// uniform ball sample set cannot do that, because volume concentrates at the
// boundary (dramatically so on the hyperbolic kinds).
class RadialProfile {
public:
    static constexpr int kBatches = 4;

    RadialProfile(const Space& space, const TestFunction& f, const Point& x, double r_max,
                  long n, std::uint64_t seed)
        : space_(space), x_(x), r_max_(r_max), cap_(f.global_bound) {
        // shell boundaries: r_max shrinking by 3/4 down to ~1e-6 of r_max
        std::vector<double> bounds;
        double b = r_max;
        while (b > 1.5e-6 * r_max) {
            bounds.push_back(b);
            b *= 0.75;
        }
        std::reverse(bounds.begin(), bounds.end());  // ascending, innermost first
        const long shells = static_cast<long>(bounds.size());
        const long per_shell =
            std::max<long>(32, 4 * (std::max<long>(n, 64) / (4 * shells)));

        struct Entry {
            double d, mv;  // distance and mass-weighted value
            int batch;
        };
        std::vector<Entry> entries;
        entries.reserve(static_cast<std::size_t>(per_shell * shells));
        for (long j = 0; j < shells; ++j) {
            const double lo = j == 0 ? 0.0 : bounds[static_cast<std::size_t>(j - 1)];
            const double hi = bounds[static_cast<std::size_t>(j)];
            const double mass = space.shell_volume(x, lo, hi);
            const double mw = mass / static_cast<double>(per_shell);
            Rng rng(substream_seed(seed, static_cast<std::uint64_t>(j)));
            for (long i = 0; i < per_shell; ++i) {
                const BallSample s = space.sample_shell(x, lo, hi, rng);
                const double v = s.weight * f.eval(s.point);
                if (!std::isfinite(v))
                    throw numeric_error("radial profile: non-finite function value");
                entries.push_back({space.distance(x, s.point), v * mw, static_cast<int>(i % kBatches)});
            }
        }
        n_ = static_cast<long>(entries.size());
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b2) { return a.d < b2.d; });
        dist_.resize(entries.size());
        cum_.resize(entries.size());
        std::array<double, kBatches> run{};
        for (std::size_t i = 0; i < entries.size(); ++i) {
            dist_[i] = entries[i].d;
            run[static_cast<std::size_t>(entries[i].batch)] += entries[i].mv;
            cum_[i] = run;
        }
    }

    double r_max() const { return r_max_; }
    long samples() const { return n_; }

    // smallest radius whose ball already holds k samples
    double reliable_radius(long k) const {
        if (static_cast<std::size_t>(k) >= dist_.size()) return r_max_;
        return dist_[static_cast<std::size_t>(k)];
    }

    // estimates are clamped at sup f, a true bound for every ball average;
    // without it the sparsely sampled small-r region spikes like 1/V(r)
    double average(double r) const {
        const long idx = index_of(r);
        if (idx == 0) return 0.0;
        double s = 0;
        for (int bb = 0; bb < kBatches; ++bb)
            s += cum_[static_cast<std::size_t>(idx - 1)][static_cast<std::size_t>(bb)];
        return std::min(cap_, s / space_.ball_volume(x_, r));
    }

    double average_batch(double r, int bb) const {
        const long idx = index_of(r);
        if (idx == 0) return 0.0;
        const double s = cum_[static_cast<std::size_t>(idx - 1)][static_cast<std::size_t>(bb)];
        return std::min(cap_, kBatches * s / space_.ball_volume(x_, r));
    }

    // batch-means standard error of average(r)
    double sigma(double r) const {
        const double pooled = average(r);
        double var = 0;
        for (int bb = 0; bb < kBatches; ++bb) {
            const double d = average_batch(r, bb) - pooled;
            var += d * d;
        }
        var /= (kBatches - 1);
        return std::sqrt(var / kBatches);
    }

private:
    long index_of(double r) const {
        return static_cast<long>(std::upper_bound(dist_.begin(), dist_.end(), r) - dist_.begin());
    }

    Space space_;
    Point x_;
    double r_max_;
    double cap_;
    long n_;
    std::vector<double> dist_;
    std::vector<std::array<double, kBatches>> cum_;
};

inline bool exact_line_path(const Space& space) {
    return space.kind() == SpaceKind::real_line ||
           (space.kind() == SpaceKind::euclidean && space.dim() == 1);
}

// deterministic A f(x, r) on the line: closed-form interval overlap for
// piecewise-constant f, adaptive quadrature otherwise
inline double exact_line_average(const Space& space, const TestFunction& f, const Point& x, double r,
                                 const QuadratureConfig& cfg) {
    if (f.is_const) return f.const_value;
    const double x0 = x[0];
    if (f.interval_profile) return f.interval_profile->integral_over(x0 - r, x0 + r) / (2.0 * r);
    auto g = [&](double t) {
        Point p = x;
        p.c[0] = x0 - r + t;
        return f.eval(p);
    };
    const Estimate est = integrate_radial(g, 0.0, 2.0 * r, cfg);
    return est.value / (2.0 * r);
}

// Uniform radial evaluator: exact closure on the line, profile elsewhere.
struct RadialAverager {
    std::function<double(double)> value;
    std::function<double(double, int)> batch_value;  // per-batch estimate (MC only)
    std::function<double(double)> sigma;             // standard error, 0 when exact
    bool exact = true;
    double r_reliable = 0.0;  // below this the MC estimate rests on < 32 samples
    long samples = 0;
};

inline RadialAverager make_averager(const Space& space, const TestFunction& f, const Point& x,
                                    double r_max, const QuadratureConfig& cfg,
                                    std::uint64_t stream_tag) {
    RadialAverager a;
    if (exact_line_path(space)) {
        const Space sp = space;
        a.exact = true;
        a.value = [sp, f, x, cfg](double r) { return exact_line_average(sp, f, x, r, cfg); };
        a.batch_value = [](double, int) { return 0.0; };
        a.sigma = [](double) { return 0.0; };
        return a;
    }
    StreamKey key;
    key.mix("profile").mix(stream_tag).mix(r_max);
    x.mix_into(key);
    auto profile = std::make_shared<RadialProfile>(space, f, x, r_max, cfg.mc_samples,
                                                   substream_seed(cfg.master_seed, key.h));
    a.exact = false;
    a.samples = profile->samples();
    a.r_reliable = profile->reliable_radius(32);
    a.value = [profile](double r) { return profile->average(r); };
    a.batch_value = [profile](double r, int b) { return profile->average_batch(r, b); };
    a.sigma = [profile](double r) { return profile->sigma(r); };
    return a;
}

struct GridMax {
    double r = 0.0;
    double value = 0.0;
    double resolution_err = 0.0;
};

// Three-stage search for sup_r A(r): 256-node log grid, then two refinement
// rounds at 16x resolution around the best node. Ties resolve to the smallest
// radius. cand0 is the r -> 0 limit candidate (f evaluated at the center).
inline GridMax grid_supremum(const std::function<double(double)>& value, double r_min, double r_max,
                             double cand0) {
    r_min = std::min(r_min, 0.5 * r_max);
    const auto log_nodes = [](double lo, double hi, int n, std::vector<double>& out) {
        out.clear();
        const double ratio = hi / lo;
        for (int i = 0; i < n; ++i)
            out.push_back(lo * std::pow(ratio, static_cast<double>(i) / (n - 1)));
    };

    std::vector<double> nodes, vals;
    log_nodes(r_min, r_max, 256, nodes);
    vals.resize(nodes.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        vals[i] = value(nodes[i]);
        if (vals[i] > vals[best]) best = i;
    }

    double lo = nodes[best > 0 ? best - 1 : 0];
    double hi = nodes[std::min(best + 1, nodes.size() - 1)];
    double best_r = nodes[best], best_v = vals[best];
    for (int round = 0; round < 2; ++round) {
        log_nodes(lo, hi, 33, nodes);
        vals.resize(nodes.size());
        best = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            vals[i] = value(nodes[i]);
            if (vals[i] > vals[best]) best = i;
        }
        best_r = nodes[best];
        best_v = vals[best];
        lo = nodes[best > 0 ? best - 1 : 0];
        hi = nodes[std::min(best + 1, nodes.size() - 1)];
    }

    GridMax out;
    double span = 0.0;
    if (best > 0) span = std::max(span, best_v - vals[best - 1]);
    if (best + 1 < vals.size()) span = std::max(span, best_v - vals[best + 1]);
    out.resolution_err = span;
    if (cand0 > best_v) {
        out.r = 0.0;
        out.value = cand0;
        out.resolution_err = std::max(span, cand0 - best_v);
    } else {
        out.r = best_r;
        out.value = best_v;
    }
    return out;
}

inline double envelope_r_max(const Space& space, const TestFunction& f, const Point& x) {
    const double reach = std::isfinite(f.support_radius) ? f.support_radius : f.envelope_radius;
    if (!std::isfinite(reach))
        throw std::invalid_argument("maximal: function without a finite support or decay envelope");
    return space.distance(x, f.anchor) + reach + 1.0;
}

inline Estimate maximal_on(const TestFunction& f, const Point& x, const RadialAverager& avg,
                           double r_max) {
    if (f.is_const) return Estimate{f.const_value, 0.0, EstimateKind::deterministic, 0};
    const double cand0 = f.eval(x);
    double r_min = 1e-4;
    if (!avg.exact) r_min = std::max(r_min, avg.r_reliable);
    const GridMax gm = grid_supremum(avg.value, r_min, r_max, cand0);

    Estimate out;
    out.value = gm.value;
    out.kind = avg.exact ? EstimateKind::deterministic : EstimateKind::monte_carlo;
    out.samples_used = avg.samples;
    double err = gm.resolution_err;
    if (!avg.exact && gm.r > 0) err += 3.0 * avg.sigma(gm.r);
    out.error_bound = err + 1e-15 * (1.0 + std::fabs(gm.value));
    return out;
}

struct LpPieces {
    double value = 0.0;
    double quad_err = 0.0;
};

// J^{1/p} for J = int w(r) A(r)^p dr over [r_lo, r_hi]. For moderate and
// large p the integrand is a narrow spike near the maximizing radius, far
// below the resolution of a panel rule on the whole interval, so the
// exponent log w + p log A is scanned first: integration is restricted to
// the region within e^-60 of the peak and split at the peak itself. For
// p >= 128 the integrand is additionally evaluated as exp(log w + p log A - C)
// so that A^p never underflows.
inline LpPieces radial_lp(const std::function<double(double)>& A, const RadiusWeight& w, double p,
                          double r_lo, double r_hi, const QuadratureConfig& cfg,
                          const RadialOptions& opt) {
    LpPieces out;

    auto from_J = [&](double Jv, double Jerr, double log_shift) {
        Jv = std::max(Jv, 0.0);
        if (Jv > 0) {
            out.value = std::exp((log_shift + std::log(Jv)) / p);
            out.quad_err = out.value * (Jerr / Jv) / p;
        } else {
            out.value = 0.0;
            out.quad_err = std::exp(log_shift / p) * std::pow(Jerr, 1.0 / p);
        }
    };

    if (p < 8.0) {
        auto g = [&](double r) {
            const double a = A(r);
            return a > 0 ? w.density(r) * std::pow(a, p) : 0.0;
        };
        const Estimate J = integrate_radial(g, r_lo, r_hi, cfg, opt);
        from_J(J.value, J.error_bound, 0.0);
        return out;
    }

    // scan the exponent on a uniform grid, then refine around the best node
    const int scan = 512;
    const double step = (r_hi - r_lo) / (scan + 1);
    auto exponent = [&](double r) {
        const double a = A(r);
        const double wd = w.density(r);
        if (!(a > 0) || !(wd > 0)) return -std::numeric_limits<double>::infinity();
        return std::log(wd) + p * std::log(a);
    };
    double C = -std::numeric_limits<double>::infinity();
    double r_peak = r_lo;
    std::vector<double> ell(static_cast<std::size_t>(scan) + 1);
    for (int i = 0; i <= scan; ++i) {
        const double r = r_lo + step * (static_cast<double>(i) + 0.5);
        ell[static_cast<std::size_t>(i)] = exponent(r);
        if (ell[static_cast<std::size_t>(i)] > C) {
            C = ell[static_cast<std::size_t>(i)];
            r_peak = r;
        }
    }
    if (!std::isfinite(C)) return out;  // integrand vanishes everywhere: I = 0
    for (int i = 0; i < 32; ++i) {
        const double r = r_peak - step + 2.0 * step * (static_cast<double>(i) + 0.5) / 32.0;
        if (r <= r_lo || r >= r_hi) continue;
        const double e = exponent(r);
        if (e > C) C = e;
    }

    // numerical support: nodes within e^-60 of the peak, padded by one step
    double region_lo = r_hi, region_hi = r_lo;
    for (int i = 0; i <= scan; ++i) {
        if (ell[static_cast<std::size_t>(i)] > C - 60.0) {
            const double r = r_lo + step * (static_cast<double>(i) + 0.5);
            region_lo = std::min(region_lo, r - step);
            region_hi = std::max(region_hi, r + step);
        }
    }
    region_lo = std::max(region_lo, r_lo);
    region_hi = std::min(region_hi, r_hi);
    const double split = std::min(std::max(r_peak, region_lo * (1 + 1e-12)), region_hi);

    const bool log_space = p >= 128.0 || C > 600.0;
    const double shift = log_space ? C : 0.0;
    auto g = [&](double r) {
        const double e = exponent(r);
        if (!std::isfinite(e)) return 0.0;
        return std::exp(e - shift);
    };
    double Jv = 0, Jerr = 0;
    if (split > region_lo) {
        const Estimate J1 = integrate_radial(g, region_lo, split, cfg, opt);
        Jv += J1.value;
        Jerr += J1.error_bound;
    }
    if (region_hi > split) {
        const Estimate J2 = integrate_radial(g, split, region_hi, cfg, opt);
        Jv += J2.value;
        Jerr += J2.error_bound;
    }
    // mass outside the detected region
    Jerr += (r_hi - r_lo) * std::exp(C - shift - 60.0);
    from_J(Jv, Jerr, shift);
    return out;
}

inline RadialOptions profile_quadrature_options(const RadialAverager& avg) {
    RadialOptions opt;
    if (!avg.exact) {
        opt.rel_tol = 1e-4;
        opt.max_depth = 8;
        opt.initial_log_panels = 48;
    }
    return opt;
}

// pooled and per-batch values of I_{p,w} on a shared averager; the batch
// spread drives error bars, and correlated batch differences drive the
// common-random-number continuity probe
struct LpBatchValues {
    double pooled = 0.0;
    std::array<double, RadialProfile::kBatches> batch{};
    double quad_err = 0.0;
    bool exact = true;
};

inline LpBatchValues lp_batches(const RadialAverager& avg, const RadiusWeight& w, double p,
                                double r_lo, double r_hi, const QuadratureConfig& cfg) {
    const RadialOptions opt = profile_quadrature_options(avg);
    LpBatchValues out;
    const LpPieces pooled = radial_lp(avg.value, w, p, r_lo, r_hi, cfg, opt);
    out.pooled = pooled.value;
    out.quad_err = pooled.quad_err;
    out.exact = avg.exact;
    if (!avg.exact) {
        for (int b = 0; b < RadialProfile::kBatches; ++b) {
            auto Ab = [&avg, b](double r) { return avg.batch_value(r, b); };
            out.batch[static_cast<std::size_t>(b)] = radial_lp(Ab, w, p, r_lo, r_hi, cfg, opt).value;
        }
    }
    return out;
}

// pooled value plus batch-means error bars for I_{p,w} on a shared averager
inline Estimate lp_with_error(const RadialAverager& avg, const RadiusWeight& w, double p,
                              double r_lo, double r_hi, const QuadratureConfig& cfg) {
    const LpBatchValues pieces = lp_batches(avg, w, p, r_lo, r_hi, cfg);
    Estimate out;
    out.value = pieces.pooled;
    out.kind = avg.exact ? EstimateKind::deterministic : EstimateKind::monte_carlo;
    out.samples_used = avg.samples;
    double err = pieces.quad_err;
    if (!avg.exact) {
        constexpr int B = RadialProfile::kBatches;
        double mean = 0;
        for (double v : pieces.batch) mean += v;
        mean /= B;
        double var = 0;
        for (double v : pieces.batch) var += (v - mean) * (v - mean);
        var /= (B - 1);
        err += 3.0 * std::sqrt(var / B);
    }
    out.error_bound = err + 1e-15 * (1.0 + out.value);
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// averaging function

inline Estimate average(const Space& space, const TestFunction& f, const Point& x, double r,
                        const QuadratureConfig& cfg) {
    cfg.validate();
    space.require_point(x);
    if (!(r > 0) || !std::isfinite(r)) throw std::domain_error("average: radius must be positive");
    if (detail::exact_line_path(space)) {
        Estimate out;
        out.value = detail::exact_line_average(space, f, x, r, cfg);
        out.error_bound = (f.is_const || f.interval_profile)
                              ? 1e-15 * (1.0 + std::fabs(out.value))
                              : std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(out.value));
        out.kind = EstimateKind::deterministic;
        return out;
    }
    Estimate est = mc_integrate_ball(space, f.eval, x, r, cfg, StreamKey().mix("average").h);
    const double vol = space.ball_volume(x, r);
    est.value /= vol;
    est.error_bound /= vol;
    return est;
}

// ---------------------------------------------------------------------------
// maximal function

inline Estimate maximal(const Space& space, const TestFunction& f, const Point& x,
                        const QuadratureConfig& cfg) {
    cfg.validate();
    space.require_point(x);
    if (f.is_const) return Estimate{f.const_value, 0.0, EstimateKind::deterministic, 0};
    const double local = f.local_bound ? f.local_bound(x) : f.global_bound;
    if (!std::isfinite(local) && !std::isfinite(f.support_radius))
        throw std::invalid_argument("maximal: unbounded function with unbounded support");
    const double r_max = detail::envelope_r_max(space, f, x);
    const auto avg = detail::make_averager(space, f, x, r_max, cfg, 0);
    return detail::maximal_on(f, x, avg, r_max);
}

// ---------------------------------------------------------------------------
// integral function

// optional knobs shared by an evaluation batch: a fixed radial cutoff and a
// fixed stream tag give common random numbers across nearby centers
struct EvalPolicy {
    std::uint64_t stream_tag = 0;
    double r_max_override = 0.0;
};

inline Estimate integral_function(const Space& space, const TestFunction& f, const RadiusWeight& w,
                                  const PExponent& p, const Point& x, const QuadratureConfig& cfg,
                                  const EvalPolicy& policy = {}) {
    cfg.validate();
    space.require_point(x);
    if (!(p.value >= 1.0)) throw std::domain_error("integral_function: p must be >= 1");
    if (p.is_inf()) return maximal(space, f, x, cfg);

    // cutoff: beyond the support envelope A decays, so the unit-scale weight
    // tail keeps the relative truncation error below tail_tol for every p
    const double r_env = detail::envelope_r_max(space, f, x);
    double r_hi = std::max(r_env, truncation_radius(w, 1.0, cfg));
    if (policy.r_max_override > 0) r_hi = policy.r_max_override;
    if (std::isfinite(w.support_bound)) r_hi = std::min(r_hi, std::max(w.support_bound, 1e-3));
    const double local = f.local_bound ? f.local_bound(x) : f.global_bound;
    const double r_lo = std::isfinite(local) ? 0.0 : 1e-6;

    const auto avg = detail::make_averager(space, f, x, r_hi, cfg, policy.stream_tag);
    return detail::lp_with_error(avg, w, p.value, r_lo, r_hi, cfg);
}

// ---------------------------------------------------------------------------
// L_q norm of a field over a ball-shaped region

struct LqOptions {
    long total_samples = 0;   // 0: derive from cfg.mc_samples
    int shells = 24;
    double rel_tol = -1.0;    // deterministic-path region integral tolerance
};

inline Estimate lq_norm(const Space& space, const std::function<Estimate(const Point&)>& field,
                        const PExponent& q, const BallSpec& region,
                        std::optional<double> tail_mass, const QuadratureConfig& cfg,
                        const LqOptions& opt = {}) {
    cfg.validate();
    space.require_point(region.center);
    if (!(region.radius > 0)) throw std::domain_error("lq_norm: region radius must be positive");
    if (!tail_mass.has_value())
        throw std::invalid_argument("lq_norm: a tail certificate is required for region truncation");
    if (!(*tail_mass >= 0)) throw std::invalid_argument("lq_norm: tail certificate must be >= 0");

    if (q.is_inf()) {
        // max over a sample grid; a lower bound for the essential supremum
        StreamKey key;
        key.mix("lq_inf").mix(region.radius);
        region.center.mix_into(key);
        Rng rng(substream_seed(cfg.master_seed, key.h));
        double best = field(region.center).value;
        double best_err = field(region.center).error_bound;
        const int n = 512;
        for (int i = 0; i < n; ++i) {
            const BallSample s = space.sample_ball(region.center, region.radius, rng);
            const Estimate v = field(s.point);
            if (v.value > best) {
                best = v.value;
                best_err = v.error_bound;
            }
        }
        return Estimate{best, best_err, EstimateKind::monte_carlo, n};
    }

    const double qf = q.value;
    if (detail::exact_line_path(space)) {
        const double c = region.center[0], R = region.radius;
        double max_field_err = 0, max_v = 0;
        auto g = [&](double t) {
            Point p = region.center;
            p.c[0] = c - R + t;
            const Estimate v = field(p);
            max_field_err = std::max(max_field_err, v.error_bound);
            max_v = std::max(max_v, v.value);
            return std::pow(std::max(v.value, 0.0), qf);
        };
        RadialOptions ropt;
        if (opt.rel_tol > 0) ropt.rel_tol = opt.rel_tol;
        const Estimate S = integrate_radial(g, 0.0, 2.0 * R, cfg, ropt);
        const double base = std::max(S.value, 0.0);
        const double field_term =
            qf * std::pow(std::max(max_v, 1e-300), qf - 1.0) * max_field_err * 2.0 * R;
        Estimate out;
        out.value = std::pow(base, 1.0 / qf);
        const double up = std::pow(base + S.error_bound + field_term + *tail_mass, 1.0 / qf);
        const double down = std::pow(std::max(base - S.error_bound - field_term, 0.0), 1.0 / qf);
        out.error_bound = std::max(up - out.value, out.value - down);
        out.kind = EstimateKind::deterministic;
        return out;
    }

    // stratified Monte Carlo over geodesic shells with pilot-based allocation
    const long total =
        opt.total_samples > 0 ? opt.total_samples : std::max<long>(4096, cfg.mc_samples / 16);
    const int K = std::max(2, std::min(opt.shells, static_cast<int>(region.radius / 0.25)));
    const long pilot = std::max<long>(8, total / (4 * K));

    struct Shell {
        double lo, hi, measure;
        double sum = 0, sum_sq = 0;
        long n = 0;
    };
    std::vector<Shell> shells;
    for (int j = 0; j < K; ++j) {
        Shell s;
        s.lo = region.radius * j / K;
        s.hi = region.radius * (j + 1) / K;
        s.measure = space.shell_volume(region.center, s.lo, s.hi);
        shells.push_back(s);
    }

    auto draw_into = [&](Shell& s, long count, std::uint64_t phase) {
        StreamKey key;
        key.mix("lq_shell").mix(s.lo).mix(s.hi).mix(phase).mix(region.radius);
        region.center.mix_into(key);
        Rng rng(substream_seed(cfg.master_seed, key.h));
        for (long i = 0; i < count; ++i) {
            const BallSample smp = space.sample_shell(region.center, s.lo, s.hi, rng);
            const Estimate v = field(smp.point);
            const double y = std::pow(std::max(v.value, 0.0), qf) * smp.weight;
            if (!std::isfinite(y)) throw numeric_error("lq_norm: non-finite field value");
            s.sum += y;
            s.sum_sq += y * y;
            ++s.n;
        }
    };

    for (auto& s : shells) draw_into(s, pilot, 1);

    double alloc_total = 0;
    std::vector<double> score(shells.size());
    for (std::size_t j = 0; j < shells.size(); ++j) {
        const auto& s = shells[j];
        const double mean = s.sum / static_cast<double>(s.n);
        const double var = std::max(0.0, s.sum_sq / static_cast<double>(s.n) - mean * mean);
        score[j] = s.measure * std::sqrt(var + 1e-300);
        alloc_total += score[j];
    }
    const long remaining = std::max<long>(0, total - pilot * K);
    for (std::size_t j = 0; j < shells.size(); ++j) {
        const long extra = alloc_total > 0
                               ? static_cast<long>(std::floor(remaining * score[j] / alloc_total))
                               : remaining / static_cast<long>(shells.size());
        if (extra > 0) draw_into(shells[j], extra, 2);
    }

    double S = 0, var_S = 0;
    long used = 0;
    for (const auto& s : shells) {
        const double mean = s.sum / static_cast<double>(s.n);
        const double var = std::max(0.0, s.sum_sq / static_cast<double>(s.n) - mean * mean);
        S += s.measure * mean;
        var_S += s.measure * s.measure * var / static_cast<double>(s.n);
        used += s.n;
    }
    const double sigma3 = 3.0 * std::sqrt(var_S);
    const double base = std::max(S, 0.0);
    Estimate out;
    out.value = std::pow(base, 1.0 / qf);
    const double up = std::pow(base + sigma3 + *tail_mass, 1.0 / qf);
    const double down = std::pow(std::max(base - sigma3, 0.0), 1.0 / qf);
    out.error_bound = std::max(up - out.value, out.value - down);
    out.kind = EstimateKind::monte_carlo;
    out.samples_used = used;
    return out;
}

// ---------------------------------------------------------------------------
// p-sweep

inline std::vector<SweepRow> p_sweep(const Space& space, const TestFunction& f, const RadiusWeight& w,
                                     const Point& x, const std::vector<PExponent>& p_list,
                                     const QuadratureConfig& cfg) {
    cfg.validate();
    if (p_list.size() < 2) throw std::invalid_argument("p_sweep: need at least two p values");
    for (std::size_t i = 1; i < p_list.size(); ++i)
        if (!(p_list[i].value > p_list[i - 1].value))
            throw std::invalid_argument("p_sweep: p values must be ascending");

    const double mass = w.closed_form_mass ? *w.closed_form_mass : total_mass(w, cfg).value;

    // one radial evaluator shared by the maximal and every p
    const double r_env = detail::envelope_r_max(space, f, x);
    const double r_hi = std::max(r_env, truncation_radius(w, 1.0, cfg));
    const auto avg = detail::make_averager(space, f, x, r_hi, cfg, 0);
    const Estimate M = detail::maximal_on(f, x, avg, r_env);

    const double local = f.local_bound ? f.local_bound(x) : f.global_bound;
    const double r_lo = std::isfinite(local) ? 0.0 : 1e-6;
    const double r_top =
        std::isfinite(w.support_bound) ? std::min(r_hi, std::max(w.support_bound, 1e-3)) : r_hi;

    std::vector<SweepRow> rows;
    for (const PExponent& p : p_list) {
        SweepRow row;
        row.p = p;
        if (p.is_inf()) {
            row.i_value = M;
            row.normalized = M.value;
            row.gap_to_max = 0.0;
        } else {
            row.i_value = detail::lp_with_error(avg, w, p.value, r_lo, r_top, cfg);
            row.normalized = row.i_value.value / std::pow(mass, 1.0 / p.value);
            row.gap_to_max = M.value - row.i_value.value;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace hlmax
