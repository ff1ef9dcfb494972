#pragma once

// Metric measure spaces the library operates on: the real line, Euclidean
// R^n (n <= 3), and the ax+b group carrying its left-invariant hyperbolic
// metric with either left or right Haar measure. Distances, translations,
// ball measures, the modular function and exact ball samplers all live here.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hlmax/rng.hpp"

namespace hlmax {

enum class SpaceKind { real_line, euclidean, affine_left, affine_right };
enum class MeasureKind { lebesgue, left_haar, right_haar };
enum class PointTag { real1, realn, affine };

// log(1+t) + sqrt(2t+t^2) form of acosh(1+t); stable for small t.
inline double acosh1p(double t) {
    if (t < 0) t = 0;
    return std::log1p(t + std::sqrt(t * (t + 2.0)));
}

// cosh(r) - 1 without cancellation near r = 0.
inline double coshm1(double r) {
    const double s = std::sinh(0.5 * r);
    return 2.0 * s * s;
}

// shortest decimal string that round-trips through binary
inline std::string shortest_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

struct Point {
    PointTag tag = PointTag::real1;
    int dim = 1;
    std::array<double, 3> c{0.0, 0.0, 0.0};

    static Point real1(double x) {
        check_finite(x);
        Point p;
        p.tag = PointTag::real1;
        p.dim = 1;
        p.c[0] = x;
        return p;
    }
    static Point realn(std::span<const double> xs) {
        if (xs.empty() || xs.size() > 3)
            throw std::invalid_argument("point: dimension must be 1..3");
        Point p;
        p.tag = PointTag::realn;
        p.dim = static_cast<int>(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            check_finite(xs[i]);
            p.c[i] = xs[i];
        }
        return p;
    }
    static Point affine(double a, double b) {
        check_finite(a);
        check_finite(b);
        if (!(b > 0.0)) throw std::domain_error("affine point: b must be > 0");
        Point p;
        p.tag = PointTag::affine;
        p.dim = 2;
        p.c[0] = a;
        p.c[1] = b;
        return p;
    }

    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    StreamKey& mix_into(StreamKey& key) const {
        key.mix(static_cast<int>(tag)).mix(dim);
        for (int i = 0; i < dim; ++i) key.mix(c[static_cast<std::size_t>(i)]);
        return key;
    }

private:
    static void check_finite(double v) {
        if (!std::isfinite(v)) throw std::domain_error("point coordinate must be finite");
    }
};

struct BallSpec {
    Point center;
    double radius = 1.0;
};

struct BallSample {
    Point point;
    double weight = 1.0;  // importance weight; E[weight * h] = ball average of h
};

class Space {
public:
    static Space real_line() { return Space(SpaceKind::real_line, 1); }
    static Space euclidean(int n) {
        if (n < 1 || n > 3) throw std::invalid_argument("euclidean: dim must be 1..3");
        return Space(SpaceKind::euclidean, n);
    }
    static Space affine_left() { return Space(SpaceKind::affine_left, 2); }
    static Space affine_right() { return Space(SpaceKind::affine_right, 2); }

    // Descriptors: real-line | euclidean:<dim> | affine-left | affine-right
    static Space parse(std::string_view desc) {
        if (desc == "real-line") return real_line();
        if (desc == "affine-left") return affine_left();
        if (desc == "affine-right") return affine_right();
        if (desc.rfind("euclidean:", 0) == 0) {
            const std::string tail(desc.substr(10));
            std::size_t used = 0;
            int n = 0;
            try {
                n = std::stoi(tail, &used);
            } catch (const std::exception&) {
                throw std::invalid_argument("space: bad dimension in '" + std::string(desc) + "'");
            }
            if (used != tail.size()) throw std::invalid_argument("space: bad dimension in '" + std::string(desc) + "'");
            return euclidean(n);
        }
        throw std::invalid_argument("space: unknown descriptor '" + std::string(desc) + "'");
    }

    std::string descriptor() const {
        switch (kind_) {
            case SpaceKind::real_line: return "real-line";
            case SpaceKind::euclidean: return "euclidean:" + std::to_string(dim_);
            case SpaceKind::affine_left: return "affine-left";
            case SpaceKind::affine_right: return "affine-right";
        }
        return {};
    }

    SpaceKind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_affine() const { return kind_ == SpaceKind::affine_left || kind_ == SpaceKind::affine_right; }
    bool unimodular() const { return !is_affine(); }

    MeasureKind measure_kind() const {
        switch (kind_) {
            case SpaceKind::affine_left: return MeasureKind::left_haar;
            case SpaceKind::affine_right: return MeasureKind::right_haar;
            default: return MeasureKind::lebesgue;
        }
    }

    Point identity() const {
        if (is_affine()) return Point::affine(0.0, 1.0);
        if (kind_ == SpaceKind::real_line) return Point::real1(0.0);
        std::array<double, 3> z{0.0, 0.0, 0.0};
        return Point::realn(std::span<const double>(z.data(), static_cast<std::size_t>(dim_)));
    }

    void require_point(const Point& p) const {
        const PointTag want = expected_tag();
        if (p.tag != want || p.dim != dim_)
            throw std::invalid_argument("point does not belong to space " + descriptor());
    }

    // "e" names the identity; otherwise comma-separated decimals.
    Point parse_point(std::string_view text) const {
        if (text == "e") return identity();
        std::vector<double> xs;
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t comma = text.find(',', start);
            if (comma == std::string_view::npos) comma = text.size();
            const std::string tok(text.substr(start, comma - start));
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                throw std::invalid_argument("point: bad coordinate '" + tok + "'");
            }
            if (used != tok.size()) throw std::invalid_argument("point: bad coordinate '" + tok + "'");
            xs.push_back(v);
            start = comma + 1;
            if (comma == text.size()) break;
        }
        if (static_cast<int>(xs.size()) != dim_)
            throw std::invalid_argument("point: expected " + std::to_string(dim_) + " coordinates");
        switch (kind_) {
            case SpaceKind::real_line: return Point::real1(xs[0]);
            case SpaceKind::euclidean: return Point::realn(xs);
            default: return Point::affine(xs[0], xs[1]);
        }
    }

    std::string format_point(const Point& p) const {
        require_point(p);
        std::string out = shortest_double(p[0]);
        for (int i = 1; i < dim_; ++i) {
            out += ',';
            out += shortest_double(p[i]);
        }
        return out;
    }

    double distance(const Point& x, const Point& y) const {
        require_point(x);
        require_point(y);
        switch (kind_) {
            case SpaceKind::real_line:
                return std::fabs(x[0] - y[0]);
            case SpaceKind::euclidean: {
                double s = 0;
                for (int i = 0; i < dim_; ++i) {
                    const double d = x[i] - y[i];
                    s += d * d;
                }
                return std::sqrt(s);
            }
            default: {
                // hyperbolic half-plane: acosh(1 + ((a1-a2)^2 + (b1-b2)^2) / (2 b1 b2))
                const double da = x[0] - y[0];
                const double db = x[1] - y[1];
                return acosh1p((da * da + db * db) / (2.0 * x[1] * y[1]));
            }
        }
    }

    // Left group action g.x; the real line acts as euclidean-1.
    Point translate(const Point& g, const Point& x) const {
        require_point(g);
        require_point(x);
        if (is_affine()) return Point::affine(g[0] + g[1] * x[0], g[1] * x[1]);
        Point r = x;
        for (int i = 0; i < dim_; ++i) r.c[static_cast<std::size_t>(i)] = g[i] + x[i];
        return r;
    }

    Point inverse(const Point& g) const {
        require_point(g);
        if (is_affine()) return Point::affine(-g[0] / g[1], 1.0 / g[1]);
        Point r = g;
        for (int i = 0; i < dim_; ++i) r.c[static_cast<std::size_t>(i)] = -g[i];
        return r;
    }

    // Modular function: Delta(a,b) = 1/b on the affine group, 1 elsewhere.
    double modular(const Point& x) const {
        require_point(x);
        if (is_affine()) return 1.0 / x[1];
        return 1.0;
    }

    double ball_volume(const Point& x, double r) const {
        require_point(x);
        require_radius(r);
        switch (kind_) {
            case SpaceKind::real_line:
                return 2.0 * r;
            case SpaceKind::euclidean:
                return unit_ball_volume(dim_) * std::pow(r, dim_);
            case SpaceKind::affine_left:
                return 2.0 * std::numbers::pi * coshm1(r);
            case SpaceKind::affine_right:
                // rho(x B_e) = Delta(x^{-1}) rho(B_e), Delta(x^{-1}) = b
                return x[1] * 2.0 * std::numbers::pi * coshm1(r);
        }
        return 0;
    }

    // measure of the annulus r_lo <= d(x,.) < r_hi
    double shell_volume(const Point& x, double r_lo, double r_hi) const {
        require_point(x);
        if (!(r_hi > r_lo) || r_lo < 0) throw std::domain_error("shell: need 0 <= r_lo < r_hi");
        switch (kind_) {
            case SpaceKind::real_line:
                return 2.0 * (r_hi - r_lo);
            case SpaceKind::euclidean:
                return unit_ball_volume(dim_) * (std::pow(r_hi, dim_) - std::pow(r_lo, dim_));
            case SpaceKind::affine_left:
                return 2.0 * std::numbers::pi * (coshm1(r_hi) - coshm1(r_lo));
            case SpaceKind::affine_right:
                return x[1] * 2.0 * std::numbers::pi * (coshm1(r_hi) - coshm1(r_lo));
        }
        return 0;
    }

    struct Shadow {
        Point center;
        double radius;
    };

    // Euclidean picture of a hyperbolic ball: disk with center (a, b cosh r)
    // and radius b sinh r. Only meaningful on the affine kinds.
    Shadow ball_shadow(const Point& x, double r) const {
        if (!is_affine()) throw std::invalid_argument("ball_shadow: affine spaces only");
        require_point(x);
        require_radius(r);
        return Shadow{Point::affine(x[0], x[1] * std::cosh(r)), x[1] * std::sinh(r)};
    }

    BallSample sample_ball(const Point& x, double r, Rng& rng) const {
        return sample_shell(x, 0.0, r, rng);
    }

    // mu-uniform sample from the annulus {r_lo <= d(x,.) < r_hi}; weight 1.
    BallSample sample_shell(const Point& x, double r_lo, double r_hi, Rng& rng) const {
        require_point(x);
        if (!(r_hi > 0) || !std::isfinite(r_hi)) throw std::domain_error("sample: radius must be positive and finite");
        switch (kind_) {
            case SpaceKind::real_line: {
                const double s = shell_radius_real(r_lo, r_hi, rng.uniform());
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                return {Point::real1(x[0] + sign * s), 1.0};
            }
            case SpaceKind::euclidean: {
                const double u = rng.uniform();
                const double lo_n = std::pow(r_lo, dim_), hi_n = std::pow(r_hi, dim_);
                const double s = std::pow(lo_n + u * (hi_n - lo_n), 1.0 / dim_);
                Point p = x;
                if (dim_ == 1) {
                    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                    p.c[0] = x[0] + sign * s;
                } else if (dim_ == 2) {
                    const double phi = 2.0 * std::numbers::pi * rng.uniform();
                    p.c[0] = x[0] + s * std::cos(phi);
                    p.c[1] = x[1] + s * std::sin(phi);
                } else {
                    const double z = 2.0 * rng.uniform() - 1.0;
                    const double phi = 2.0 * std::numbers::pi * rng.uniform();
                    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                    p.c[0] = x[0] + s * rho * std::cos(phi);
                    p.c[1] = x[1] + s * rho * std::sin(phi);
                    p.c[2] = x[2] + s * z;
                }
                return {p, 1.0};
            }
            default: {
                // geodesic polar sampling about the identity, then translate by x.
                // Radial CDF is proportional to cosh(s) - 1 for both Haar measures.
                const double u = rng.uniform();
                const double t = coshm1(r_lo) + u * (coshm1(r_hi) - coshm1(r_lo));
                const double s = acosh1p(t);
                const double phi = angle_on_circle(s, rng);
                const double sinh_s = std::sinh(s);
                const double a = sinh_s * std::cos(phi);
                // cosh s + sinh s * sin(phi), written so the bottom of the
                // circle (sin(phi) -> -1) cannot cancel to b <= 0
                const double sh = std::sin(0.5 * phi + 0.25 * std::numbers::pi);
                const double b = std::exp(-s) + 2.0 * sinh_s * sh * sh;
                return {translate(x, Point::affine(a, b)), 1.0};
            }
        }
    }

    static double unit_ball_volume(int n) {
        switch (n) {
            case 1: return 2.0;
            case 2: return std::numbers::pi;
            default: return 4.0 * std::numbers::pi / 3.0;
        }
    }

private:
    Space(SpaceKind k, int n) : kind_(k), dim_(n) {}

    PointTag expected_tag() const {
        switch (kind_) {
            case SpaceKind::real_line: return PointTag::real1;
            case SpaceKind::euclidean: return PointTag::realn;
            default: return PointTag::affine;
        }
    }

    static void require_radius(double r) {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("radius must be positive and finite");
    }

    static double shell_radius_real(double r_lo, double r_hi, double u) {
        return r_lo + u * (r_hi - r_lo);
    }

    // Angle on the distance-s circle about the identity, distributed according
    // to the measure of this space. Under the right Haar measure the Euclidean
    // angle is uniform; under the left Haar measure its density is 1/b, which
    // has the closed-form inverse CDF below (using cosh^2 s - sinh^2 s = 1).
    double angle_on_circle(double s, Rng& rng) const {
        if (kind_ == SpaceKind::affine_right)
            return 2.0 * std::numbers::pi * rng.uniform();
        const double theta = (2.0 * rng.open_uniform() - 1.0) * std::numbers::pi;
        const double c = std::cosh(s), rr = std::sinh(s);
        return 2.0 * std::atan((std::tan(0.5 * theta) - rr) / c);
    }

    SpaceKind kind_;
    int dim_;
};

}  // namespace hlmax
