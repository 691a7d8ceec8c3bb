#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "tiebreak/errors.hpp"
#include "tiebreak/solve.hpp"

using namespace tiebreak;
using Catch::Approx;

namespace {

void check_feasible(const Distribution& f, const DesignFunction& d,
                    const Constraints& c, double tol = 1e-10) {
    MomentTriple t = moments(d, f);
    CHECK(std::fabs(t.ez - c.z_tilde) <= tol);
    CHECK(std::fabs(t.exz - c.xz) <= tol * std::max(1.0, f.second_moment()));
}

}  // namespace

TEST_CASE("xz_max for the uniform") {
    Distribution f = Distribution::uniform();
    CHECK(xz_max(f, 0.0) == Approx(0.5).margin(1e-13));
    CHECK(xz_max(f, -0.7) == Approx(0.255).margin(1e-13));
    CHECK(xz_max(f, 1.0) == 0.0);
    CHECK(xz_max(f, -1.0) == 0.0);
    // symmetric in z
    CHECK(xz_max(f, 0.4) == Approx(xz_max(f, -0.4)).margin(1e-13));
}

TEST_CASE("extremal solves for the Table 2 setting") {
    Distribution f = Distribution::uniform();
    Constraints c{-0.7, 0.25};

    ExtremalSolution mx = solve_extremal_detail(f, c, ExtremalKind::max_monotone);
    CHECK(mx.c1 == Approx(0.0034482758620689655).margin(1e-8));
    CHECK(mx.c2 == Approx(0.7058823529411765).margin(1e-8));
    check_feasible(f, mx.design, c);
    CHECK(mx.design.is_monotone());

    ExtremalSolution mn = solve_extremal_detail(f, c, ExtremalKind::min_monotone);
    CHECK(mn.c1 == Approx(0.9).margin(1e-8));
    CHECK(mn.c2 == Approx(2.0 / 3.0).margin(1e-8));
    check_feasible(f, mn.design, c);

    ExtremalSolution wmax = solve_extremal_detail(f, c, ExtremalKind::max);
    CHECK(wmax.c1 == Approx(-0.9970588235294118).margin(1e-8));
    CHECK(wmax.c2 == Approx(0.7029411764705882).margin(1e-8));
    check_feasible(f, wmax.design, c);
    CHECK_FALSE(wmax.design.is_monotone());

    ExtremalSolution wmin = solve_extremal_detail(f, c, ExtremalKind::min);
    CHECK(wmin.c1 == Approx(0.6833333333333333).margin(1e-8));
    CHECK(wmin.c2 == Approx(0.9833333333333333).margin(1e-8));
    check_feasible(f, wmin.design, c);
}

TEST_CASE("extremal boundary behavior") {
    Distribution f = Distribution::uniform();

    // gain at its maximum: every kind returns the generalized RDD
    Constraints top{-0.7, xz_max(f, -0.7)};
    for (auto kind : {ExtremalKind::max, ExtremalKind::min,
                      ExtremalKind::max_monotone, ExtremalKind::min_monotone}) {
        DesignFunction d = solve_extremal(f, top, kind);
        CHECK(equivalent(d, DesignFunction::generalized_rdd(f, -0.7), f, 1e-9));
    }

    // zero gain with a monotone kind: the fully randomized design
    Constraints rct{0.4, 0.0};
    for (auto kind : {ExtremalKind::max_monotone, ExtremalKind::min_monotone}) {
        DesignFunction d = solve_extremal(f, rct, kind);
        REQUIRE(d.breakpoints().empty());
        CHECK(d.levels()[0] == Approx(0.7).margin(1e-14));
    }

    CHECK_THROWS_AS(solve_extremal(f, Constraints{-0.7, 0.26}, ExtremalKind::max),
                    infeasible_error);
    CHECK_THROWS_AS(solve_extremal(f, Constraints{-0.7, -0.01}, ExtremalKind::max),
                    infeasible_error);
    CHECK_THROWS_AS(solve_extremal(f, Constraints{1.0, 0.0}, ExtremalKind::max),
                    infeasible_error);
    try {
        solve_extremal(f, Constraints{-0.7, 0.3}, ExtremalKind::max);
        FAIL("expected infeasible_error");
    } catch (const infeasible_error& e) {
        CHECK(e.context().at("xz_max") == Approx(0.255).margin(1e-12));
    }
}

TEST_CASE("uniform closed forms match Table 1") {
    Constraints c{-0.7, 0.25};
    ClosedFormParams mx = uniform_closed_form(c, ExtremalKind::max_monotone);
    CHECK(mx.first == Approx(0.0034482758620689655).margin(1e-14));
    CHECK(mx.second == Approx(0.7058823529411765).margin(1e-14));

    ClosedFormParams mn = uniform_closed_form(c, ExtremalKind::min);
    CHECK(mn.first == Approx(0.6833333333333333).margin(1e-14));
    CHECK(mn.second == Approx(0.9833333333333333).margin(1e-14));

    ClosedFormParams wm = uniform_closed_form(c, ExtremalKind::max);
    CHECK(wm.first == Approx(-0.9970588235294118).margin(1e-14));
    CHECK(wm.second == Approx(0.7029411764705882).margin(1e-14));

    ClosedFormParams mnm = uniform_closed_form(c, ExtremalKind::min_monotone);
    CHECK(mnm.first == Approx(0.9).margin(1e-14));
    CHECK(mnm.second == Approx(2.0 / 3.0).margin(1e-14));

    CHECK(uniform_three_level_delta(c) == Approx(0.05).margin(1e-12));
    CHECK_THROWS_AS(uniform_three_level_delta(Constraints{-0.7, 0.1}),
                    infeasible_error);
}

TEST_CASE("closed forms agree with the generic bisection on a lattice") {
    Distribution f = Distribution::uniform();
    for (double z : {-0.8, -0.55, -0.3, -0.05, 0.2, 0.45, 0.6, 0.75, 0.9, 0.0}) {
        double xzm = xz_max(f, z);
        for (double delta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            Constraints c{z, delta * xzm};
            for (auto kind : {ExtremalKind::max, ExtremalKind::min,
                              ExtremalKind::max_monotone, ExtremalKind::min_monotone}) {
                ClosedFormParams p = uniform_closed_form(c, kind);
                ExtremalSolution s = solve_extremal_detail(f, c, kind);
                CHECK(s.c1 == Approx(p.first).margin(1e-8));
                CHECK(s.c2 == Approx(p.second).margin(1e-8));
            }
            // generic three-level inversion matches the closed form
            double d_closed = uniform_three_level_delta(c);
            bool feasible =
                d_closed <= std::min((1.0 - z) / 2.0, (1.0 + z) / 2.0) + 1e-12;
            if (feasible) {
                CHECK(three_level_delta_for_gain(f, z, c.xz) ==
                      Approx(d_closed).margin(1e-8));
            }
        }
    }
}

TEST_CASE("optimal designs reproduce Table 2") {
    Distribution f = Distribution::uniform();
    Constraints c{-0.7, 0.25};
    CriterionSpec eff = CriterionSpec::eff();

    OptimalDesignResult mono = optimal_design(f, c, eff, true);
    CHECK(mono.eff_inv == Approx(54.90).epsilon(0.005));
    CHECK(mono.form == OptimalDesignResult::Form::extremal);
    CHECK(mono.design.is_monotone());
    CHECK(mono.residual_ez <= 1e-10);
    CHECK(mono.residual_exz <= 1e-10);
    // p_opt-dagger is p_max-dagger: a two-level design with upper level 1
    REQUIRE(mono.design.breakpoints().size() == 1);
    CHECK(mono.design.levels()[0] == Approx(0.0034482758620689655).margin(1e-8));
    CHECK(mono.design.levels()[1] == 1.0);

    OptimalDesignResult full = optimal_design(f, c, eff, false);
    CHECK(full.eff_inv == Approx(42.37).epsilon(0.005));
    CHECK(full.form == OptimalDesignResult::Form::extremal);
    CHECK_FALSE(full.design.is_monotone());

    // three-level and sharp RDD land in between
    MomentTriple t3 = moments(DesignFunction::three_level(f, -0.7, 0.05), f);
    CHECK(eff_inverse(t3, f.second_moment()) == Approx(137.56).epsilon(0.005));
    MomentTriple trdd = moments(DesignFunction::generalized_rdd(f, -0.7), f);
    CHECK(eff_inverse(trdd, f.second_moment()) == Approx(223.44).epsilon(0.005));
}

TEST_CASE("balanced-budget optima coincide with the three-level design") {
    Distribution f = Distribution::uniform();
    CriterionSpec eff = CriterionSpec::eff();
    for (double delta : {0.15, 0.5, 0.85}) {
        Constraints c{0.0, delta * xz_max(f, 0.0)};
        double tl_delta = three_level_delta_for_gain(f, 0.0, c.xz);
        MomentTriple t3 = moments(DesignFunction::three_level(f, 0.0, tl_delta), f);
        double eff3 = eff.value(t3, f.second_moment());
        for (bool monotone : {false, true}) {
            OptimalDesignResult r = optimal_design(f, c, eff, monotone);
            CHECK(r.criterion_value == Approx(eff3).margin(1e-9));
        }
    }
}

TEST_CASE("blend form when the apex is interior") {
    // z > 0 pushes a* negative, into the interior of the attainable interval
    Distribution f = Distribution::uniform();
    Constraints c{0.5, 0.1};
    CriterionSpec eff = CriterionSpec::eff();
    OptimalDesignResult r = optimal_design(f, c, eff, false);
    CHECK(r.form == OptimalDesignResult::Form::blend);
    CHECK(r.lambda > 0.0);
    CHECK(r.lambda < 1.0);
    CHECK(r.selected_x2z == Approx(a_star(0.5, 0.1)).margin(1e-12));
    MomentTriple t = moments(r.design, f);
    CHECK(t.ex2z == Approx(r.selected_x2z).margin(1e-10));
    CHECK(r.interval_lo < r.selected_x2z);
    CHECK(r.interval_hi > r.selected_x2z);
}

TEST_CASE("canonical forms match all three moments") {
    CriterionSpec eff = CriterionSpec::eff();

    // endpoint target returns the extremal design itself
    {
        Distribution f = Distribution::uniform();
        Constraints c{-0.7, 0.25};
        ExtremalSolution pmax = solve_extremal_detail(f, c, ExtremalKind::max_monotone);
        double imax = moments(pmax.design, f).ex2z;
        DesignFunction d = canonical_form(f, c, imax, true);
        CHECK(equivalent(d, pmax.design, f, 1e-9));
    }

    // skew distribution, interior target, monotone: a two-level design
    {
        Distribution f = Distribution::weibull(0.5, 1.0);
        Constraints c{0.0, 0.5 * xz_max(f, 0.0)};
        OptimalDesignResult r = optimal_design(f, c, eff, true);
        DesignFunction d = canonical_form(f, c, r.selected_x2z, true);
        MomentTriple t = moments(d, f);
        CHECK(std::fabs(t.ez - c.z_tilde) <= 1e-8);
        CHECK(std::fabs(t.exz - c.xz) <= 1e-8 * f.second_moment());
        CHECK(std::fabs(t.ex2z - r.selected_x2z) <= 1e-8 * f.second_moment());
        CHECK(d.is_monotone());
        CHECK(d.breakpoints().size() == 1);
        CHECK(eff.value(t, f.second_moment()) ==
              Approx(r.criterion_value).margin(1e-9));
    }

    // interior target, unconstrained: a three-strata design with equal Eff
    {
        Distribution f = Distribution::uniform();
        Constraints c{-0.5, 0.1};
        OptimalDesignResult r = optimal_design(f, c, eff, false);
        double target = 0.5 * (r.interval_lo + r.interval_hi);
        DesignFunction d = canonical_form(f, c, target, false);
        MomentTriple t = moments(d, f);
        CHECK(std::fabs(t.ez - c.z_tilde) <= 1e-8);
        CHECK(std::fabs(t.exz - c.xz) <= 1e-8);
        CHECK(std::fabs(t.ex2z - target) <= 1e-8);
        // blended design with the same moments has the same efficiency
        double lambda = (r.interval_hi - target) / (r.interval_hi - r.interval_lo);
        DesignFunction blend = convex_combination(
            lambda, solve_extremal(f, c, ExtremalKind::min),
            solve_extremal(f, c, ExtremalKind::max));
        CHECK(eff.value(t, f.second_moment()) ==
              Approx(eff.value(moments(blend, f), f.second_moment())).margin(1e-9));
    }

    Distribution f = Distribution::uniform();
    CHECK_THROWS_AS(canonical_form(f, Constraints{-0.5, 0.1}, 0.32, false),
                    infeasible_error);
}

TEST_CASE("tradeoff sweep reproduces the published efficiency points") {
    Distribution f = Distribution::uniform();
    CriterionSpec eff = CriterionSpec::eff();
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
    auto records = tradeoff_sweep(f, -0.5, grid, eff);
    REQUIRE(records.size() == 101);

    double xzm = xz_max(f, -0.5);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].delta == Approx(grid[i]).margin(1e-15));
        CHECK(records[i].xz == Approx(grid[i] * xzm).margin(1e-12));
    }

    // delta = 0: monotone optimum is the RCT at Eff = 0.25, unconstrained 1/3
    CHECK(1.0 / records[0].mon_eff_inv == Approx(0.25).margin(1e-9));
    CHECK(1.0 / records[0].opt_eff_inv == Approx(1.0 / 3.0).margin(1e-9));

    // xz = 0.1 (delta ~ 0.267): monotone optimum improves to ~0.28
    Constraints c{-0.5, 0.1};
    OptimalDesignResult r = optimal_design(f, c, eff, true);
    CHECK(0.1 / xzm == Approx(0.267).margin(5e-4));
    CHECK(1.0 / r.eff_inv == Approx(0.28).margin(0.005));

    // dominance: Eff(opt) >= Eff(mon) >= Eff(three-level)
    for (const auto& rec : records) {
        CHECK(rec.opt_eff_inv <= rec.mon_eff_inv + 1e-9);
        if (rec.three_level_present) {
            CHECK(rec.mon_eff_inv <= rec.three_level_eff_inv + 1e-9);
        }
    }
}

TEST_CASE("sweep gain monotonicity and RCT inadmissibility") {
    Distribution f = Distribution::uniform();
    CriterionSpec eff = CriterionSpec::eff();
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(i / 40.0);

    for (double z : {0.0, -0.5}) {
        auto records = tradeoff_sweep(f, z, grid, eff);
        // unconstrained optimal efficiency decreases along the gain grid
        for (std::size_t i = 1; i < records.size(); ++i) {
            CHECK(records[i].opt_eff_inv > records[i - 1].opt_eff_inv);
        }
        if (z != 0.0) {
            // some positive gain beats the RCT under the monotonicity constraint
            double base = records[0].mon_eff_inv;
            bool improved = false;
            for (const auto& rec : records) {
                if (rec.mon_eff_inv < base - 1e-9) improved = true;
            }
            CHECK(improved);
        }
    }
}

TEST_CASE("sweeps are symmetric under sign flip of z") {
    Distribution f = Distribution::uniform();
    CriterionSpec eff = CriterionSpec::eff();
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    auto plus = tradeoff_sweep(f, 0.35, grid, eff);
    auto minus = tradeoff_sweep(f, -0.35, grid, eff);
    for (std::size_t i = 0; i < plus.size(); ++i) {
        CHECK(plus[i].opt_eff_inv == Approx(minus[i].opt_eff_inv).epsilon(1e-9));
        CHECK(plus[i].mon_eff_inv == Approx(minus[i].mon_eff_inv).epsilon(1e-9));
        CHECK(plus[i].three_level_present == minus[i].three_level_present);
        if (plus[i].three_level_present) {
            CHECK(plus[i].three_level_eff_inv ==
                  Approx(minus[i].three_level_eff_inv).epsilon(1e-9));
        }
    }
}

TEST_CASE("sweep CSV schema") {
    Distribution f = Distribution::uniform();
    CriterionSpec eff = CriterionSpec::eff();
    std::vector<double> grid{0.0, 0.5, 0.9, 1.0};
    std::string csv = sweep_csv(tradeoff_sweep(f, -0.7, grid, eff));

    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "delta,xz,x2z_star_opt,x2z_star_mon,eff_inv_three_level,"
          "eff_inv_opt_monotone,eff_inv_opt,three_level_delta,"
          "opt_a1,opt_a2,opt_b1,opt_b2,opt_lambda,"
          "mon_l,mon_t,mon_u,mon_s,mon_lambda");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
        // three-level infeasible below delta ~ 0.82 for z = -0.7: empty cells
        if (rows == 1) {
            std::size_t first = line.find(",,");
            CHECK(first != std::string::npos);
        }
    }
    CHECK(rows == 4);
}

TEST_CASE("weibull solves satisfy the constraints across the grid") {
    Distribution f = Distribution::weibull(0.5, 1.0);
    CriterionSpec eff = CriterionSpec::eff();
    for (double z : {-0.6, 0.0, 0.4}) {
        double xzm = xz_max(f, z);
        for (double delta : {0.0, 0.25, 0.6, 0.95, 1.0}) {
            Constraints c{z, delta * xzm};
            for (bool monotone : {false, true}) {
                OptimalDesignResult r = optimal_design(f, c, eff, monotone);
                CHECK(r.residual_ez <= 1e-8);
                CHECK(r.residual_exz <= 1e-8 * f.second_moment());
                if (monotone) CHECK(r.design.is_monotone());
            }
        }
    }
}
