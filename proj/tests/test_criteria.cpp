#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tiebreak/criteria.hpp"
#include "tiebreak/errors.hpp"
#include "tiebreak/solve.hpp"

using namespace tiebreak;
using Catch::Approx;

namespace {

double det_m_assembled(double z, double xz, double x2z, double ex2) {
    double m11v = 1.0 - z * z - xz * xz / ex2;
    double m12 = -xz * z - x2z * xz / ex2;
    double m22 = ex2 - xz * xz - x2z * x2z / ex2;
    return m11v * m22 - m12 * m12;
}

struct TripleGen {
    std::mt19937_64 rng{101};
    std::uniform_real_distribution<double> ud{0.0, 1.0};

    // random in-J pair plus an x2z inside [-ex2, ex2]
    std::array<double, 3> next(const Distribution& f) {
        double z = -0.95 + 1.9 * ud(rng);
        double xz = ud(rng) * xz_max(f, z);
        double x2z = (2.0 * ud(rng) - 1.0) * f.second_moment();
        return {z, xz, x2z};
    }
};

}  // namespace

TEST_CASE("info matrix assembly") {
    MomentTriple rct{0.0, 0.0, 0.0};
    InfoMatrix m = info_matrix(rct, 1.0 / 3.0);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double expect = 0.0;
            if (i == j) expect = (i == 1 || i == 3) ? 1.0 / 3.0 : 1.0;
            CHECK(m.at(i, j) == Approx(expect).margin(1e-15));
        }
    }
    CHECK_THROWS_AS(info_matrix(rct, 0.0), validation_error);
}

TEST_CASE("M11 closed form") {
    CHECK(m11(0.0, 0.0, 5.0) == Approx(1.0));
    CHECK(m11(-0.7, 0.25, 1.0 / 3.0) == Approx(0.3225).margin(1e-14));
    CHECK(m11(-0.7, 0.255, 1.0 / 3.0) == Approx(0.314925).margin(1e-14));
    CHECK(m11(-0.7, 0.255, 1.0 / 3.0) > 0.0);
}

TEST_CASE("det(M) closed form and Table 2 values") {
    double ex2 = 1.0 / 3.0;
    CHECK(det_m(0.0, 0.0, 0.0, ex2) == Approx(ex2).margin(1e-15));

    double d3 = det_m(-0.7, 0.25, -0.12133333333333333, ex2);
    CHECK(d3 == Approx(0.0023444).margin(2e-7));
    CHECK(m11(-0.7, 0.25, ex2) / d3 == Approx(137.56).epsilon(0.005));

    double drdd = det_m(-0.7, 0.255, -0.11433333333333334, ex2);
    CHECK(m11(-0.7, 0.255, ex2) / drdd == Approx(223.44).epsilon(0.005));
}

TEST_CASE("det(M) identities on random points") {
    TripleGen gen;
    for (const Distribution& f :
         {Distribution::uniform(), Distribution::weibull(0.5, 1.0),
          Distribution::gaussian(1.3)}) {
        double ex2 = f.second_moment();
        for (int rep = 0; rep < 1000; ++rep) {
            auto [z, xz, x2z] = gen.next(f);
            double closed = det_m(z, xz, x2z, ex2);
            double assembled = det_m_assembled(z, xz, x2z, ex2);
            double scale = std::max(std::fabs(closed), 1e-6 * ex2 * ex2);
            CHECK(std::fabs(closed - assembled) <= 1e-10 * std::max(scale, 1.0));

            // det of the 4x4 information matrix factors as ex2 * det(M)
            InfoMatrix mi = info_matrix(MomentTriple{z, xz, x2z}, ex2);
            double d4 = oracle::det4(mi.m);
            CHECK(d4 == Approx(ex2 * closed)
                            .margin(1e-10 * std::max(1.0, std::fabs(d4)))
                            .epsilon(1e-10));

            // M11 is the (1,1) entry of D - C D^-1 C
            CHECK(m11(z, xz, ex2) ==
                  Approx(1.0 - z * z - xz * xz / ex2).margin(1e-14));
            CHECK(m11(z, xz, ex2) > 0.0);

            // concavity in x2z: nonpositive second difference
            double h = 0.01 * ex2;
            double second = det_m(z, xz, x2z + h, ex2) - 2.0 * closed +
                            det_m(z, xz, x2z - h, ex2);
            CHECK(second <= 1e-10 * std::max(1.0, ex2 * ex2));
        }
    }
}

TEST_CASE("information matrix of a design is positive semi-definite") {
    Distribution f = Distribution::uniform();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        double t = -0.9 + 1.8 * ud(rng);
        DesignFunction p = DesignFunction::two_level(ud(rng), ud(rng), t);
        InfoMatrix m = info_matrix(moments(p, f), f.second_moment());
        auto ev = oracle::sym_eigenvalues4(m.m);
        CHECK(ev[0] >= -1e-10);
    }
}

TEST_CASE("criterion values") {
    CriterionSpec eff = CriterionSpec::eff();
    double ex2 = 1.0 / 3.0;

    // fully randomized designs
    CHECK(eff.value(0.0, 0.0, 0.0, ex2) == Approx(1.0 / 3.0).margin(1e-14));
    CHECK(eff.value(-0.5, 0.0, -0.5 * ex2, ex2) == Approx(0.25).margin(1e-14));

    CHECK_THROWS_AS(eff.value(0.999999, 0.5, 0.0, ex2), infeasible_error);

    CriterionSpec d = CriterionSpec::d_optimality();
    CHECK(d.value(0.0, 0.0, 0.0, ex2) == Approx(std::log(ex2 * ex2)).margin(1e-12));
    CHECK(d.value(1.0, 0.0, ex2, ex2) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("a_star closed form") {
    CHECK(a_star(0.0, 0.123) == 0.0);
    CHECK(a_star(-0.7, 0.25) == Approx(0.0857843137254902).margin(1e-15));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(0.01, 0.95);
    for (int rep = 0; rep < 100; ++rep) {
        double z = ud(rng) * (rep % 2 ? 1.0 : -1.0);
        double xz = ud(rng);
        if (z != 0.0) {
            CHECK(a_star(z, xz) * z <= 0.0);
        }
    }
    CHECK_THROWS_AS(a_star(1.0, 0.1), validation_error);
}

TEST_CASE("select_x2z clamps the quadratic apex") {
    CriterionSpec eff = CriterionSpec::eff();
    double ex2 = 1.0 / 3.0;
    // interval endpoints from the extremal designs at (-0.7, 0.25)
    CHECK(select_x2z(eff, -0.7, 0.25, -0.12273, -0.11285, ex2) == -0.11285);
    // a* = 0 interior at z = 0
    CHECK(select_x2z(eff, 0.0, 0.3, -0.2, 0.2, ex2) == 0.0);
    // moving the interval to contain a* returns a* exactly
    double a = a_star(-0.7, 0.25);
    CHECK(select_x2z(eff, -0.7, 0.25, a - 0.05, a + 0.05, ex2) == a);
    CHECK_THROWS_AS(select_x2z(eff, 0.0, 0.1, 0.2, 0.1, ex2), infeasible_error);
}

TEST_CASE("Eff and D select the same maximizer") {
    CriterionSpec eff = CriterionSpec::eff();
    CriterionSpec d = CriterionSpec::d_optimality();
    TripleGen gen;
    Distribution f = Distribution::uniform();
    double ex2 = f.second_moment();
    for (int rep = 0; rep < 100; ++rep) {
        auto [z, xz, x2z] = gen.next(f);
        double lo = std::min(x2z, 0.9 * ex2 * (2.0 * gen.ud(gen.rng) - 1.0));
        double hi = std::max(x2z, lo + 0.05);
        double se = select_x2z(eff, z, xz, lo, hi, ex2);
        double sd = select_x2z(d, z, xz, lo, hi, ex2);
        CHECK(se == sd);
        // grid-search oracle on det(M)
        double sg = oracle::grid_argmax(
            [&](double a) { return det_m(z, xz, a, ex2); }, lo, hi);
        CHECK(det_m(z, xz, se, ex2) >= det_m(z, xz, sg, ex2) - 1e-9);
    }
}

TEST_CASE("custom criterion path matches the closed form") {
    // Eff spelled out as an expression over (z, xz, x2z, ex2)
    CriterionSpec custom = CriterionSpec::parse(
        "custom:(ex2*(1-z^2)+xz^2*(xz^2/ex2-2)-(1-z^2)*x2z^2/ex2"
        "-2*z*xz^2*x2z/ex2)/(1-z^2-xz^2/ex2)");
    CriterionSpec eff = CriterionSpec::eff();
    TripleGen gen;
    Distribution f = Distribution::uniform();
    double ex2 = f.second_moment();
    for (int rep = 0; rep < 100; ++rep) {
        auto [z, xz, x2z] = gen.next(f);
        CHECK(custom.value(z, xz, x2z, ex2) ==
              Approx(eff.value(z, xz, x2z, ex2)).margin(1e-12));
        double lo = -0.8 * ex2, hi = 0.8 * ex2;
        double sc = select_x2z(custom, z, xz, lo, hi, ex2);
        double se = select_x2z(eff, z, xz, lo, hi, ex2);
        CHECK(eff.value(z, xz, sc, ex2) ==
              Approx(eff.value(z, xz, se, ex2)).margin(1e-9));
    }
}

TEST_CASE("criterion expression parser") {
    CriterionSpec c1 = CriterionSpec::parse("custom:-x2z^2 + min(z, xz)*2");
    CHECK(c1.value(0.5, 0.2, 0.3, 1.0) == Approx(-0.09 + 0.4).margin(1e-15));
    CriterionSpec c2 = CriterionSpec::parse("custom:log(exp(1.5)) + sqrt(abs(-4))");
    CHECK(c2.value(0, 0, 0, 1) == Approx(3.5).margin(1e-12));
    CriterionSpec c3 = CriterionSpec::parse("custom:pow(x2z, 2)");
    CHECK(c3.value(0, 0, -3.0, 1) == Approx(9.0));
    CHECK_THROWS_AS(CriterionSpec::parse("custom:bogus_symbol"), validation_error);
    CHECK_THROWS_AS(CriterionSpec::parse("custom:1+"), validation_error);
    CHECK_THROWS_AS(CriterionSpec::parse("custom:(1"), validation_error);
    CHECK_THROWS_AS(CriterionSpec::parse("a-optimality"), validation_error);
    CHECK(CriterionSpec::parse("eff").kind() == CriterionSpec::Kind::eff);
    CHECK(CriterionSpec::parse("d").kind() == CriterionSpec::Kind::d_opt);
}

TEST_CASE("matrix-level criterion adapter") {
    // trace of the information matrix, written against the matrix itself
    CriterionSpec tr = CriterionSpec::custom_matrix(
        [](const InfoMatrix& m) { return m.at(0, 0) + m.at(1, 1) + m.at(2, 2) + m.at(3, 3); });
    CHECK(tr.value(0.1, 0.2, 0.05, 0.5) == Approx(3.0).margin(1e-14));
}
