#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "hlmax/spaces.hpp"

using namespace hlmax;
using testutil::disk_oracle;
using testutil::random_point;

namespace {
const std::vector<Space> all_spaces = {Space::real_line(), Space::euclidean(1), Space::euclidean(2),
                                       Space::euclidean(3), Space::affine_left(),
                                       Space::affine_right()};
}

TEST_CASE("descriptor round trip") {
    for (const auto& s : all_spaces) {
        CHECK(Space::parse(s.descriptor()).kind() == s.kind());
        CHECK(Space::parse(s.descriptor()).dim() == s.dim());
    }
    CHECK_THROWS_AS(Space::parse("euclidean:4"), std::invalid_argument);
    CHECK_THROWS_AS(Space::parse("klein-bottle"), std::invalid_argument);
}

TEST_CASE("point parsing and validation") {
    const Space aff = Space::affine_left();
    const Point p = aff.parse_point("0.5,2.0");
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 2.0);
    CHECK(aff.parse_point("e")[1] == 1.0);
    CHECK_THROWS_AS(aff.parse_point("1.0"), std::invalid_argument);
    CHECK_THROWS_AS(aff.parse_point("1.0,zebra"), std::invalid_argument);
    CHECK_THROWS_AS(Point::affine(0.0, -1.0), std::domain_error);
    CHECK_THROWS_AS(Point::real1(std::numeric_limits<double>::infinity()), std::domain_error);
    // variant mismatch
    CHECK_THROWS_AS(aff.distance(Point::real1(0.0), aff.identity()), std::invalid_argument);
    const Space line = Space::real_line();
    CHECK(line.format_point(line.parse_point("-1.25")) == "-1.25");
    const Point q = aff.parse_point(aff.format_point(p));
    CHECK(q[0] == p[0]);
    CHECK(q[1] == p[1]);
}

TEST_CASE("distance examples") {
    const Space line = Space::real_line();
    CHECK(line.distance(Point::real1(-1.0), Point::real1(3.0)) == 4.0);
    for (const auto& s : all_spaces) {
        Rng rng(7);
        const Point x = random_point(s, rng);
        CHECK(s.distance(x, x) == 0.0);
    }
    // arcosh((b^2+1)/(2b)) = log b for b > 1
    const Space aff = Space::affine_left();
    const double d = aff.distance(Point::affine(0.0, 1.0), Point::affine(0.0, std::numbers::e));
    CHECK(std::fabs(d - 1.0) <= 1e-12);
    for (double b : {1.5, 2.0, 7.25, 40.0}) {
        const double got = aff.distance(Point::affine(0.0, 1.0), Point::affine(0.0, b));
        CHECK(std::fabs(got - std::log(b)) <= 1e-12 * (1.0 + std::log(b)));
    }
}

TEST_CASE("distance is a metric on sampled triples") {
    for (const auto& s : all_spaces) {
        Rng rng(11);
        for (int i = 0; i < 200; ++i) {
            const Point x = random_point(s, rng), y = random_point(s, rng), z = random_point(s, rng);
            const double dxy = s.distance(x, y);
            CHECK(dxy >= 0.0);
            CHECK(std::fabs(dxy - s.distance(y, x)) <= 1e-12);
            CHECK(s.distance(x, z) <= dxy + s.distance(y, z) + 1e-12);
        }
    }
}

TEST_CASE("distance is unbounded") {
    for (const auto& s : all_spaces) {
        for (double R : {10.0, 100.0, 500.0}) {
            Point far = s.is_affine() ? Point::affine(0.0, std::exp(R + 1.0))
                                      : (s.kind() == SpaceKind::real_line
                                             ? Point::real1(R + 1.0)
                                             : [&] {
                                                   std::vector<double> xs(static_cast<std::size_t>(s.dim()), 0.0);
                                                   xs[0] = R + 1.0;
                                                   return Point::realn(xs);
                                               }());
            CHECK(s.distance(s.identity(), far) > R);
        }
    }
}

TEST_CASE("left invariance of the distance") {
    for (const auto& s : all_spaces) {
        Rng rng(13);
        for (int i = 0; i < 100; ++i) {
            const Point g = random_point(s, rng), x = random_point(s, rng), y = random_point(s, rng);
            const double before = s.distance(x, y);
            const double after = s.distance(s.translate(g, x), s.translate(g, y));
            CHECK(std::fabs(before - after) <= 1e-9);
        }
    }
}

TEST_CASE("translate examples") {
    const Space e2 = Space::euclidean(2);
    const Point t = e2.translate(e2.parse_point("1,2"), e2.parse_point("3,4"));
    CHECK(t[0] == 4.0);
    CHECK(t[1] == 6.0);

    const Space aff = Space::affine_left();
    const Point idt = aff.translate(aff.identity(), Point::affine(3.0, 4.0));
    CHECK(idt[0] == 3.0);
    CHECK(idt[1] == 4.0);

    // composition of t -> 2t+1 with t -> 4t+3 is t -> 8t+7
    const Point comp = aff.translate(Point::affine(1.0, 2.0), Point::affine(3.0, 4.0));
    CHECK(comp[0] == 7.0);
    CHECK(comp[1] == 8.0);

    // group inverse: g * g^{-1} = e
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        const Point g = random_point(aff, rng);
        const Point prod = aff.translate(g, aff.inverse(g));
        CHECK(std::fabs(prod[0]) <= 1e-12);
        CHECK(std::fabs(prod[1] - 1.0) <= 1e-12);
    }
}

TEST_CASE("ball volume closed forms") {
    const Space line = Space::real_line();
    CHECK(line.ball_volume(Point::real1(3.0), 1.0) == 2.0);
    const Space e2 = Space::euclidean(2);
    CHECK(std::fabs(e2.ball_volume(e2.identity(), 1.0) - std::numbers::pi) <= 1e-15);
    const Space e3 = Space::euclidean(3);
    CHECK(std::fabs(e3.ball_volume(e3.identity(), 2.0) - 4.0 * std::numbers::pi / 3.0 * 8.0) <= 1e-12);

    CHECK_THROWS_AS(line.ball_volume(Point::real1(0.0), 0.0), std::domain_error);
    CHECK_THROWS_AS(line.ball_volume(Point::real1(0.0), -1.0), std::domain_error);
}

TEST_CASE("hyperbolic ball volume against the disk oracle") {
    const Space aff = Space::affine_left();
    const Point e = aff.identity();
    const double closed = aff.ball_volume(e, 1.0);
    CHECK(std::fabs(closed - 2.0 * std::numbers::pi * (std::cosh(1.0) - 1.0)) <= 1e-12);

    const auto oracle = disk_oracle(aff, e, 1.0, 1'000'000, 99, [](const Point&) { return 1.0; });
    CHECK(std::fabs(oracle.integral - closed) <= 3.0 * oracle.std_err);
    CHECK(oracle.std_err < 0.01 * closed);
}

TEST_CASE("ball volume is strictly increasing and continuous in r") {
    for (const auto& s : all_spaces) {
        Rng rng(23);
        const Point x = random_point(s, rng);
        double prev = 0.0;
        for (int i = 0; i <= 40; ++i) {
            const double r = 0.1 + (10.0 - 0.1) * i / 40.0;
            const double v = s.ball_volume(x, r);
            CHECK(v > prev);
            prev = v;
        }
        for (double r : {0.5, 2.0, 7.0}) {
            const double h0 = 1e-6;
            const double deriv = (s.ball_volume(x, r + h0) - s.ball_volume(x, r)) / h0;
            const double C = 2.0 * deriv;
            for (double eps : {1e-3, 1e-4, 1e-5}) {
                CHECK(std::fabs(s.ball_volume(x, r + eps) - s.ball_volume(x, r)) <= C * eps);
            }
        }
    }
}

TEST_CASE("affine-left volume does not depend on the center") {
    const Space aff = Space::affine_left();
    Rng rng(29);
    for (int i = 0; i < 20; ++i) {
        const Point x = random_point(aff, rng);
        for (double r : {0.25, 1.0, 3.0}) {
            CHECK(aff.ball_volume(x, r) == aff.ball_volume(aff.identity(), r));
        }
    }
    // Monte Carlo cross-check at an off-center point
    const Point x = Point::affine(2.0, 3.0);
    const auto oracle = disk_oracle(aff, x, 1.5, 400'000, 101, [](const Point&) { return 1.0; });
    const double closed = aff.ball_volume(x, 1.5);
    CHECK(std::fabs(oracle.integral - closed) <= 3.0 * oracle.std_err);
}

TEST_CASE("affine-right volume translates by the modular factor") {
    const Space ar = Space::affine_right();
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        const Point x = random_point(ar, rng);
        for (double r : {0.5, 1.0, 2.0}) {
            const double lhs = ar.ball_volume(x, r);
            const double rhs = ar.modular(ar.inverse(x)) * ar.ball_volume(ar.identity(), r);
            CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
        }
    }
    // and the closed form matches the disk oracle for the right Haar density
    const Point x = Point::affine(-1.0, 2.0);
    const auto oracle = disk_oracle(ar, x, 1.0, 400'000, 103, [](const Point&) { return 1.0; });
    CHECK(std::fabs(oracle.integral - ar.ball_volume(x, 1.0)) <= 3.0 * oracle.std_err);
}

TEST_CASE("modular function") {
    const Space e2 = Space::euclidean(2);
    Rng rng(37);
    CHECK(e2.modular(random_point(e2, rng)) == 1.0);

    const Space aff = Space::affine_left();
    CHECK(aff.modular(aff.identity()) == 1.0);
    CHECK(aff.modular(Point::affine(0.0, 2.0)) == 0.5);

    // homomorphism on random pairs
    for (int i = 0; i < 100; ++i) {
        const Point g = random_point(aff, rng), h = random_point(aff, rng);
        const double lhs = aff.modular(aff.translate(g, h));
        const double rhs = aff.modular(g) * aff.modular(h);
        CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::fabs(rhs));
    }
}

TEST_CASE("modular factor matches the translated-ball oracle") {
    // lambda(B x) = Delta(x) lambda(B). The right translate B x is not a
    // metric ball, so integrate its indicator over an enclosing ball:
    // z in B x  <=>  z x^{-1} in B, and B x sits inside B(e, r + d(e, x)).
    const Space aff = Space::affine_left();
    const Point e = aff.identity();
    const Point x = Point::affine(0.0, 2.0);
    const double r = 1.0;

    const double enclose_r = r + aff.distance(e, x) + 0.1;
    const auto oracle = disk_oracle(aff, e, enclose_r, 600'000, 107, [&](const Point& z) {
        const Point zi = aff.translate(z, aff.inverse(x));
        return aff.distance(e, zi) < r ? 1.0 : 0.0;
    });
    const double lambda_B = aff.ball_volume(e, r);
    const double delta = aff.modular(x);
    CHECK(std::fabs(oracle.integral - delta * lambda_B) <= 3.0 * oracle.std_err + 1e-9);
    CHECK(oracle.std_err < 0.05 * lambda_B);
}

TEST_CASE("ball shadow") {
    const Space aff = Space::affine_left();
    const auto sh = aff.ball_shadow(Point::affine(0.0, 1.0), 1.0);
    CHECK(std::fabs(sh.center[0] - 0.0) <= 1e-15);
    CHECK(std::fabs(sh.center[1] - std::cosh(1.0)) <= 1e-15);
    CHECK(std::fabs(sh.radius - std::sinh(1.0)) <= 1e-15);

    // degenerate limit
    const auto tiny = aff.ball_shadow(Point::affine(0.0, 1.0), 1e-9);
    CHECK(std::fabs(tiny.center[1] - 1.0) <= 1e-12);
    CHECK(tiny.radius <= 2e-9);

    // membership: uniform samples of the open disk lie in the metric ball,
    // points just outside do not
    for (const Point x : {Point::affine(0.0, 1.0), Point::affine(2.0, 3.0)}) {
        const auto s = aff.ball_shadow(x, 1.0);
        Rng rng(41);
        for (int i = 0; i < 1000; ++i) {
            double a, b;
            do {
                a = rng.uniform(-1.0, 1.0);
                b = rng.uniform(-1.0, 1.0);
            } while (a * a + b * b > 1.0);
            const double shrink = 1.0 - 1e-9;
            const Point inside =
                Point::affine(s.center[0] + shrink * s.radius * a, s.center[1] + shrink * s.radius * b);
            CHECK(aff.distance(x, inside) <= 1.0 + 1e-9);

            const double norm = std::sqrt(a * a + b * b);
            if (norm > 1e-6) {
                const double grow = 1.0 + 1e-6;
                const Point outside = Point::affine(s.center[0] + grow * s.radius * a / norm,
                                                    s.center[1] + grow * s.radius * b / norm);
                CHECK(aff.distance(x, outside) > 1.0);
            }
        }
        CHECK_THROWS_AS(Space::euclidean(2).ball_shadow(Space::euclidean(2).identity(), 1.0),
                        std::invalid_argument);
    }

    // left-invariance: the shadow of the translated ball is the translated shadow
    const Point g = Point::affine(2.0, 3.0);
    const auto base = aff.ball_shadow(Point::affine(0.0, 1.0), 1.0);
    const auto moved = aff.ball_shadow(g, 1.0);
    CHECK(std::fabs(moved.center[1] - 3.0 * std::cosh(1.0)) <= 1e-12);
    CHECK(std::fabs(moved.radius - 3.0 * std::sinh(1.0)) <= 1e-12);
    CHECK(std::fabs(moved.center[0] - 2.0) <= 1e-12);
    (void)base;
}

TEST_CASE("sample_ball is uniform for the space measure") {
    // weights are identically 1 and the empirical mean of h matches the
    // shadow-disk importance oracle
    for (const auto& s : all_spaces) {
        Rng rng(43);
        const Point x = s.is_affine() ? Point::affine(0.0, 1.0) : s.identity();
        const long n = 100'000;
        double wsum = 0, wsq = 0;
        for (long i = 0; i < n; ++i) {
            const BallSample smp = s.sample_ball(x, 1.0, rng);
            CHECK(s.distance(x, smp.point) <= 1.0 + 1e-12);
            wsum += smp.weight;
            wsq += smp.weight * smp.weight;
        }
        const double mean = wsum / n;
        const double se = std::sqrt(std::max(0.0, wsq / n - mean * mean) / n);
        CHECK(std::fabs(mean - 1.0) <= 3.0 * se + 1e-12);
        CHECK(se <= 2.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("real line sampling is uniform on the interval") {
    const Space line = Space::real_line();
    Rng rng(47);
    const Point x = Point::real1(2.0);
    const double r = 3.0;
    long below = 0;
    const long n = 200'000;
    for (long i = 0; i < n; ++i) {
        const BallSample s = line.sample_ball(x, r, rng);
        CHECK(s.weight == 1.0);
        CHECK(std::fabs(s.point[0] - 2.0) <= r);
        if (s.point[0] < 2.0) ++below;
    }
    const double frac = static_cast<double>(below) / n;
    CHECK(std::fabs(frac - 0.5) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("affine samplers agree with the disk oracle on test integrands") {
    for (const auto& s : {Space::affine_left(), Space::affine_right()}) {
        const Point x = Point::affine(0.5, 2.0);
        const double r = 1.5;
        auto h = [](const Point& p) { return p[1]; };  // integrate the height

        Rng rng(53);
        const long n = 200'000;
        double sum = 0, sq = 0;
        for (long i = 0; i < n; ++i) {
            const BallSample smp = s.sample_ball(x, r, rng);
            const double v = smp.weight * h(smp.point);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n;
        const double se = std::sqrt(std::max(0.0, sq / n - mean * mean) / n);

        const auto oracle = disk_oracle(s, x, r, 400'000, 59, h);
        const double oracle_avg = oracle.integral / s.ball_volume(x, r);
        const double oracle_se = oracle.std_err / s.ball_volume(x, r);
        CHECK(std::fabs(mean - oracle_avg) <= 3.0 * (se + oracle_se));
    }
}

TEST_CASE("sampling determinism") {
    const Space aff = Space::affine_left();
    Rng a(12345), b(12345);
    for (int i = 0; i < 100; ++i) {
        const BallSample sa = aff.sample_ball(Point::affine(0.0, 1.0), 2.0, a);
        const BallSample sb = aff.sample_ball(Point::affine(0.0, 1.0), 2.0, b);
        CHECK(sa.point[0] == sb.point[0]);
        CHECK(sa.point[1] == sb.point[1]);
    }
}
