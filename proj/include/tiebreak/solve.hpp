#pragma once

#include <string>
#include <vector>

#include "tiebreak/criteria.hpp"
#include "tiebreak/design.hpp"

namespace tiebreak {

// Extremal designs: feasible designs maximizing / minimizing E_p(x^2 z),
// with or without the monotonicity constraint. Their values bound the
// attainable E_p(x^2 z) interval.
enum class ExtremalKind { max, min, max_monotone, min_monotone };

// Largest short-term gain E_p(xz) attainable under E_p(z) = z_tilde; the
// gain of the generalized RDD treating the top (1 + z_tilde)/2 of F.
double xz_max(const Distribution& f, double z_tilde);

// Validates (z_tilde, xz) against the feasible input space; returns xz_max
// and clamps c.xz onto [0, xz_max] when within rounding of the bounds.
double require_feasible(const Distribution& f, Constraints& c);

struct ExtremalSolution {
    DesignFunction design;
    ExtremalKind kind;
    // max/min: window endpoints (a1, a2) / (b1, b2) on the x scale;
    // max_monotone: (l, t); min_monotone: (u, s).
    double c1 = 0.0;
    double c2 = 0.0;
    // quantile positions of the window / jump, NaN when degenerate
    double q1 = 0.0;
    double q2 = 0.0;
};

ExtremalSolution solve_extremal_detail(const Distribution& f, const Constraints& c,
                                       ExtremalKind kind);
DesignFunction solve_extremal(const Distribution& f, const Constraints& c,
                              ExtremalKind kind);

// Closed-form design parameters for F ~ U(-1,1); each result is checked by
// feasibility residual before it is returned.
struct ClosedFormParams {
    double first;   // a1 / b1 / l / u
    double second;  // a2 / b2 / t / s
};
ClosedFormParams uniform_closed_form(const Constraints& c, ExtremalKind kind);
// Randomization half-width in quantile units for the uniform three-level
// design with gain c.xz; infeasible when the band would leave [0,1].
double uniform_three_level_delta(const Constraints& c);

// Half-width solving -[G1(q - delta) + G1(q + delta)] = xz for any F,
// q = (1 - z_tilde)/2; throws infeasible_error when no delta in
// [0, min((1-z)/2, (1+z)/2)] attains the gain.
double three_level_delta_for_gain(const Distribution& f, double z_tilde, double xz);

struct OptimalDesignResult {
    enum class Form { extremal, blend, two_level, three_strata };

    DesignFunction design;
    Form form = Form::blend;
    double lambda = 0.0;  // weight on the min-side extremal when form == blend
    double selected_x2z = 0.0;
    double criterion_value = 0.0;
    double eff_inv = 0.0;  // M11/det(M) at the design's moments
    double residual_ez = 0.0;
    double residual_exz = 0.0;
    double interval_lo = 0.0;
    double interval_hi = 0.0;
};

const char* form_name(OptimalDesignResult::Form form);

// Solves the constrained design problem by the two-step reduction: compute
// the attainable E_p(x^2 z) interval from the extremal pair, pick the
// criterion argmax over it, and blend the extremals to attain it.
OptimalDesignResult optimal_design(const Distribution& f, const Constraints& c,
                                   const CriterionSpec& spec, bool monotone);

// Canonical optimal forms: a single-jump two-level design (monotone) or a
// 1/0/1/0 three-strata design (unconstrained) matching all three moment
// targets. Requires E(|x|^3) < infinity.
DesignFunction canonical_form(const Distribution& f, const Constraints& c,
                              double target_x2z, bool monotone);

struct TradeoffRecord {
    double delta = 0.0;
    double xz = 0.0;

    bool three_level_present = false;
    double three_level_delta = 0.0;
    double three_level_x2z = 0.0;
    double three_level_eff_inv = 0.0;
    double three_level_criterion = 0.0;

    double opt_a1 = 0.0, opt_a2 = 0.0;  // p_max window
    double opt_b1 = 0.0, opt_b2 = 0.0;  // p_min window
    double opt_lambda = 0.0;
    double opt_x2z = 0.0, opt_eff_inv = 0.0, opt_criterion = 0.0;

    double mon_l = 0.0, mon_t = 0.0;  // p_max-dagger
    double mon_u = 0.0, mon_s = 0.0;  // p_min-dagger
    double mon_lambda = 0.0;
    double mon_x2z = 0.0, mon_eff_inv = 0.0, mon_criterion = 0.0;
};

std::vector<TradeoffRecord> tradeoff_sweep(const Distribution& f, double z_tilde,
                                           const std::vector<double>& deltas,
                                           const CriterionSpec& spec);

// CSV with columns delta, xz, x2z_star_opt, x2z_star_mon,
// eff_inv_three_level, eff_inv_opt_monotone, eff_inv_opt and the design
// parameter columns; absent three-level entries emit empty fields.
std::string sweep_csv(const std::vector<TradeoffRecord>& records);

// M11/det(M) at the design's own moments; +inf when det(M) <= 0.
double eff_inverse(const MomentTriple& t, double ex2);

}  // namespace tiebreak
