#pragma once

#include <cmath>
#include <vector>

#include "hlmax/catalog.hpp"
#include "hlmax/operators.hpp"
#include "hlmax/spaces.hpp"

namespace testutil {

using namespace hlmax;

inline Point random_point(const Space& space, Rng& rng, double scale = 3.0) {
    switch (space.kind()) {
        case SpaceKind::real_line:
            return Point::real1(rng.uniform(-scale, scale));
        case SpaceKind::euclidean: {
            std::vector<double> xs;
            for (int i = 0; i < space.dim(); ++i) xs.push_back(rng.uniform(-scale, scale));
            return Point::realn(xs);
        }
        default:
            return Point::affine(rng.uniform(-scale, scale), std::exp(rng.uniform(-1.5, 1.5)));
    }
}

// Shadow-disk importance oracle for hyperbolic ball integrals: sample the
// Euclidean shadow uniformly and weight by the Haar density. Independent of
// the library's polar sampler.
struct DiskOracle {
    double integral;  // estimate of the mu-integral of h over the ball
    double std_err;
};

template <class H>
DiskOracle disk_oracle(const Space& space, const Point& center, double r, long n, std::uint64_t seed,
                       H&& h) {
    const auto shadow = space.ball_shadow(center, r);
    const double area = std::numbers::pi * shadow.radius * shadow.radius;
    Rng rng(seed);
    double sum = 0, sum_sq = 0;
    for (long i = 0; i < n; ++i) {
        double a, b;
        while (true) {
            a = rng.uniform(-1.0, 1.0);
            b = rng.uniform(-1.0, 1.0);
            if (a * a + b * b <= 1.0) break;
        }
        const double px = shadow.center[0] + shadow.radius * a;
        const double py = shadow.center[1] + shadow.radius * b;
        const double density =
            space.measure_kind() == MeasureKind::left_haar ? 1.0 / (py * py) : 1.0 / py;
        const double v = h(Point::affine(px, py)) * density;
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
    return DiskOracle{area * mean, area * std::sqrt(var / static_cast<double>(n))};
}

// midpoint Riemann sum, the brute-force oracle for radial integrals
template <class F>
double riemann(F&& f, double lo, double hi, long n) {
    double sum = 0;
    const double h = (hi - lo) / static_cast<double>(n);
    for (long i = 0; i < n; ++i) sum += f(lo + (static_cast<double>(i) + 0.5) * h);
    return sum * h;
}

}  // namespace testutil
