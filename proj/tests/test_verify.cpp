#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "hlmax/verify.hpp"

using namespace hlmax;

namespace {
QuadratureConfig verify_cfg(long mc = 30000) {
    QuadratureConfig cfg;
    cfg.mc_samples = mc;
    return cfg;
}
}  // namespace

TEST_CASE("convergence check") {
    const QuadratureConfig cfg = verify_cfg();
    const Space line = Space::real_line();
    const RadiusWeight w = make_weight("exp");

    const CheckReport c = check_convergence(line, make_function(line, "const:2"), w,
                                            Point::real1(0.3), cfg);
    CHECK(c.status == CheckStatus::pass);

    const CheckReport z = check_convergence(line, make_function(line, "const:0"), w,
                                            Point::real1(0.0), cfg);
    CHECK(z.status == CheckStatus::pass);

    const CheckReport ind = check_convergence(line, make_function(line, "indicator-ball:0:1"), w,
                                              Point::real1(2.0), cfg);
    CHECK(ind.status == CheckStatus::pass);
    CHECK(ind.rhs >= 0.3167);  // final normalized value
    CHECK(ind.lhs <= ind.rhs + ind.slack);
}

TEST_CASE("domination check") {
    const QuadratureConfig cfg = verify_cfg();
    const Space line = Space::real_line();
    const std::vector<PExponent> ps = {PExponent::finite(1), PExponent::finite(2),
                                       PExponent::finite(4)};
    const std::vector<Point> xs = {Point::real1(0.0), Point::real1(1.0), Point::real1(3.0)};
    const CheckReport rep = check_domination(line, make_function(line, "indicator-ball:0:1"),
                                             make_weight("exp"), ps, xs, cfg);
    CHECK(rep.status == CheckStatus::pass);
    CHECK(rep.lhs > 0.0);
}

TEST_CASE("global bound check on the line") {
    const QuadratureConfig cfg = verify_cfg();
    const Space e1 = Space::euclidean(1);
    const CheckReport rep =
        check_global_bound(e1, make_function(e1, "indicator-ball:0:1"), make_weight("exp"),
                           PExponent::finite(2), PExponent::finite(2), cfg);
    CHECK(rep.status == CheckStatus::pass);
    CHECK(rep.lhs > 0.5);          // a real quantity was measured
    CHECK(rep.rhs <= 1.5);         // constant ~ ||w||_G^{1/2} ||f||_2 = sqrt(2)

    const CheckReport zero =
        check_global_bound(e1, make_function(e1, "const:0"), make_weight("exp"),
                           PExponent::finite(1), PExponent::finite(2), cfg);
    CHECK(zero.status == CheckStatus::pass);

    CHECK_THROWS_AS(check_global_bound(e1, make_function(e1, "indicator-ball:0:1"),
                                       make_weight("exp"), PExponent::finite(4),
                                       PExponent::finite(2), cfg),
                    std::invalid_argument);
}

TEST_CASE("global bound check on affine-right") {
    const QuadratureConfig cfg = verify_cfg(20000);
    const Space ar = Space::affine_right();
    const CheckReport rep =
        check_global_bound(ar, make_function(ar, "indicator-ball:e:1"), make_weight("exp"),
                           PExponent::finite(1), PExponent::finite(2), cfg);
    CHECK(rep.status != CheckStatus::fail);
    CHECK(rep.lhs > 0.0);
}

TEST_CASE("radius bound check") {
    const QuadratureConfig cfg = verify_cfg(20000);
    const Space e1 = Space::euclidean(1);
    const CheckReport rep = check_radius_bound(e1, make_function(e1, "indicator-ball:0:1"),
                                               {0.5, 1.0, 2.0}, {1.0, 2.0}, cfg);
    CHECK(rep.status == CheckStatus::pass);

    // a scaled indicator plays the role of a constant on a bounded region
    const TestFunction c3 = scale_function(make_function(e1, "indicator-ball:0:2"), 3.0);
    const CheckReport crep = check_radius_bound(e1, c3, {0.5}, {1.0, 2.0}, cfg);
    CHECK(crep.status == CheckStatus::pass);
    CHECK(crep.lhs > 0.0);
}

TEST_CASE("continuity check") {
    const QuadratureConfig cfg = verify_cfg();
    const Space line = Space::real_line();
    const std::vector<double> deltas = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125,
                                        0.00390625};

    const CheckReport c = check_continuity(line, make_function(line, "const:2"),
                                           make_weight("exp"), PExponent::finite(2),
                                           Point::real1(0.1), deltas, cfg);
    CHECK(c.status == CheckStatus::pass);
    CHECK(c.lhs <= 1e-9);

    const CheckReport ind = check_continuity(line, make_function(line, "indicator-ball:0:1"),
                                             make_weight("exp"), PExponent::finite(2),
                                             Point::real1(0.5), deltas, cfg);
    CHECK(ind.status == CheckStatus::pass);
}

TEST_CASE("geometry checks") {
    const QuadratureConfig cfg = verify_cfg();
    const CheckReport vol = check_ball_volume_mc(Space::affine_left(), 2.0, 600000, cfg);
    CHECK(vol.status == CheckStatus::pass);
    CHECK(vol.lhs <= 0.01 * 17.355387381771433);

    const CheckReport haar = check_haar_identities(cfg);
    CHECK(haar.status == CheckStatus::pass);
}

TEST_CASE("suite determinism") {
    QuadratureConfig cfg = verify_cfg(10000);
    cfg.master_seed = 7;
    const auto a = run_suite(Suite::convergence, cfg);
    const auto b = run_suite(Suite::convergence, cfg);
    CHECK(reports_to_json(a) == reports_to_json(b));
    CHECK(a.size() >= 4);

    // names are sorted canonically
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].name < a[i].name);

    QuadratureConfig other = cfg;
    other.master_seed = 8;
    const auto c = run_suite(Suite::convergence, other);
    CHECK(reports_to_json(a) != reports_to_json(c));
}

TEST_CASE("euclidean suite passes") {
    QuadratureConfig cfg = verify_cfg(30000);
    const auto reports = run_suite(Suite::euclidean, cfg);
    for (const auto& r : reports) {
        INFO(r.name << " lhs=" << r.lhs << " rhs=" << r.rhs << " slack=" << r.slack << " "
                    << r.details);
        CHECK(r.status == CheckStatus::pass);
    }
    // vacuity guards exist and pass
    bool found_guard = false;
    for (const auto& r : reports)
        if (r.name.rfind("vacuity/", 0) == 0) found_guard = true;
    CHECK(found_guard);
}

TEST_CASE("json serialization") {
    CheckReport r;
    r.name = "demo/check";
    r.paper_anchor = "quote with \"marks\"";
    r.status = CheckStatus::inconclusive;
    r.lhs = 1.0 / 3.0;
    r.rhs = 2.0;
    r.slack = 0.25;
    r.seed = 7;
    r.config_digest = "00ff";
    r.details = "line1\nline2";
    const std::string json = reports_to_json({r});
    CHECK(json.find("\"name\":\"demo/check\"") != std::string::npos);
    CHECK(json.find("\"status\":\"inconclusive\"") != std::string::npos);
    CHECK(json.find("0.33333333333333331") != std::string::npos);  // 17 significant digits
    CHECK(json.find("\\\"marks\\\"") != std::string::npos);
    CHECK(json.find("\\n") != std::string::npos);
    CHECK(json.find("\"seed\":7") != std::string::npos);
}
