#include "tiebreak/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "internal.hpp"
#include "tiebreak/errors.hpp"
#include "tiebreak/format.hpp"
#include "tiebreak/root_finding.hpp"

namespace tiebreak {

namespace {

constexpr double kQuantileEps = 1e-12;
constexpr double kBisectTol = 1e-13;
constexpr double kEndpointTol = 1e-12;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double gain_tol(const Distribution& f) {
    return 1e-11 * std::max(1.0, std::sqrt(f.second_moment()));
}

// Bisection that accepts an endpoint whose function value sits within ftol;
// bracketing can be off by rounding when the target is an interval endpoint.
double bisect_or_edge(const std::function<double(double)>& f, double lo, double hi,
                      double xtol, double ftol) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        double alo = std::fabs(flo), ahi = std::fabs(fhi);
        if (alo <= ftol && alo <= ahi) return lo;
        if (ahi <= ftol) return hi;
        throw internal_error("bisection bracket failure",
                             {{"lo", lo}, {"hi", hi}, {"f_lo", flo}, {"f_hi", fhi}});
    }
    for (int i = 0; i < 200 && hi - lo > xtol; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void check_constraint_residuals(const DesignFunction& d, const Distribution& f,
                                const Constraints& c, const char* where) {
    MomentTriple t = moments(d, f);
    double scale = std::max(1.0, std::sqrt(f.second_moment()));
    double rez = std::fabs(t.ez - c.z_tilde);
    double rexz = std::fabs(t.exz - c.xz);
    if (rez > 1e-8 || rexz > 1e-8 * scale) {
        throw internal_error(std::string(where) + ": feasibility residuals too large",
                             {{"residual_ez", rez},
                              {"residual_exz", rexz},
                              {"z_tilde", c.z_tilde},
                              {"xz", c.xz}});
    }
}

ExtremalSolution window_extremal(const Distribution& f, const Constraints& c,
                                 bool maximize) {
    // p_max concentrates the *untreated* mass on one quantile window, p_min
    // the treated mass; the window mean pins the gain constraint and is
    // nondecreasing in the window position.
    double mass = maximize ? (1.0 - c.z_tilde) / 2.0 : (1.0 + c.z_tilde) / 2.0;
    double target = maximize ? -c.xz / 2.0 : c.xz / 2.0;
    auto resid = [&](double q) {
        return f.window_moment(1, q, std::min(q + mass, 1.0)) - target;
    };
    double q = bisect_or_edge(resid, 0.0, 1.0 - mass, kBisectTol, gain_tol(f));
    double q2 = std::min(q + mass, 1.0);
    std::vector<double> levels = maximize ? std::vector<double>{1.0, 0.0, 1.0}
                                          : std::vector<double>{0.0, 1.0, 0.0};
    ExtremalSolution sol{design_from_quantile_bands(f, {0.0, q, q2, 1.0}, levels),
                         maximize ? ExtremalKind::max : ExtremalKind::min,
                         f.quantile(q),
                         f.quantile(q2),
                         q,
                         q2};
    return sol;
}

ExtremalSolution continuous_monotone_extremal(const Distribution& f,
                                              const Constraints& c, bool maximize) {
    double z = c.z_tilde;
    if (maximize) {
        // p_max-dagger = l below t, 1 above; l is pinned by the budget, so the
        // gain is a decreasing function of the jump quantile u.
        double q0 = (1.0 - z) / 2.0;
        auto resid = [&](double u) {
            return -(1.0 - z) * f.window_moment(1, 0.0, u) / u - c.xz;
        };
        double u = bisect_or_edge(resid, q0, 1.0 - kQuantileEps, kBisectTol, gain_tol(f));
        double t = f.quantile(u);
        double l = std::clamp(1.0 - (1.0 - z) / (2.0 * u), 0.0, 1.0);
        return {DesignFunction::two_level(l, 1.0, t), ExtremalKind::max_monotone,
                l, t, u, u};
    }
    // p_min-dagger = 0 below s, u above.
    double q1 = (1.0 - z) / 2.0;
    auto resid = [&](double v) {
        return -(1.0 + z) * f.window_moment(1, 0.0, v) / (1.0 - v) - c.xz;
    };
    double v = bisect_or_edge(resid, kQuantileEps, q1, kBisectTol, gain_tol(f));
    double s = f.quantile(v);
    double u = std::clamp((1.0 + z) / (2.0 * (1.0 - v)), 0.0, 1.0);
    return {DesignFunction::two_level(0.0, u, s), ExtremalKind::min_monotone,
            u, s, v, v};
}

}  // namespace

double xz_max(const Distribution& f, double z_tilde) {
    if (!(z_tilde >= -1.0 && z_tilde <= 1.0)) {
        throw validation_error("z_tilde must lie in [-1,1]", {{"z_tilde", z_tilde}});
    }
    if (z_tilde == -1.0 || z_tilde == 1.0) return 0.0;
    return moments(DesignFunction::generalized_rdd(f, z_tilde), f).exz;
}

double require_feasible(const Distribution& f, Constraints& c) {
    if (!(c.z_tilde > -1.0 && c.z_tilde < 1.0)) {
        throw infeasible_error(
            "constraints outside the feasible input space: z_tilde must lie in (-1,1)",
            {{"z_tilde", c.z_tilde}});
    }
    if (!std::isfinite(c.xz)) throw validation_error("xz must be finite");
    double xzm = xz_max(f, c.z_tilde);
    double tol = 1e-12 * std::max(1.0, xzm);
    if (c.xz < -tol) {
        throw infeasible_error(
            "constraints outside the feasible input space: short-term gain xz must be "
            ">= 0",
            {{"z_tilde", c.z_tilde}, {"xz", c.xz}, {"xz_min", 0.0}, {"xz_max", xzm}});
    }
    if (c.xz > xzm + tol) {
        throw infeasible_error(
            "constraints outside the feasible input space: xz exceeds xz_max(z_tilde)",
            {{"z_tilde", c.z_tilde}, {"xz", c.xz}, {"xz_min", 0.0}, {"xz_max", xzm}});
    }
    c.xz = std::clamp(c.xz, 0.0, xzm);
    return xzm;
}

ExtremalSolution solve_extremal_detail(const Distribution& f, const Constraints& c_in,
                                       ExtremalKind kind) {
    Constraints c = c_in;
    double xzm = require_feasible(f, c);
    bool monotone =
        kind == ExtremalKind::max_monotone || kind == ExtremalKind::min_monotone;

    double tol = 1e-12 * std::max(1.0, xzm);
    if (c.xz >= xzm - tol) {
        // Gain at its maximum: the generalized RDD is the unique feasible
        // design for every kind, no search needed.
        DesignFunction rdd = DesignFunction::generalized_rdd(f, c.z_tilde);
        double q = (1.0 - c.z_tilde) / 2.0;
        double t = f.quantile(q);
        ExtremalSolution sol{std::move(rdd), kind, 0.0, 0.0, q, q};
        switch (kind) {
            case ExtremalKind::max:
                sol.c1 = f.support_lo();
                sol.c2 = t;
                sol.q1 = 0.0;
                break;
            case ExtremalKind::min:
                sol.c1 = t;
                sol.c2 = f.support_hi();
                sol.q2 = 1.0;
                break;
            case ExtremalKind::max_monotone:
                sol.c1 = 0.0;
                sol.c2 = t;
                break;
            case ExtremalKind::min_monotone:
                sol.c1 = 1.0;
                sol.c2 = t;
                break;
        }
        return sol;
    }

    if (monotone && c.xz == 0.0) {
        // The fully randomized design is the only feasible monotone design.
        double theta = (1.0 + c.z_tilde) / 2.0;
        return {DesignFunction::constant(theta), kind, theta, kNan, kNan, kNan};
    }

    ExtremalSolution sol = [&] {
        switch (kind) {
            case ExtremalKind::max:
                return window_extremal(f, c, true);
            case ExtremalKind::min:
                return window_extremal(f, c, false);
            case ExtremalKind::max_monotone:
                return f.discrete() ? detail::discrete_monotone_extremal(f, c, true)
                                    : continuous_monotone_extremal(f, c, true);
            case ExtremalKind::min_monotone:
            default:
                return f.discrete() ? detail::discrete_monotone_extremal(f, c, false)
                                    : continuous_monotone_extremal(f, c, false);
        }
    }();
    check_constraint_residuals(sol.design, f, c, "solve_extremal");
    return sol;
}

DesignFunction solve_extremal(const Distribution& f, const Constraints& c,
                              ExtremalKind kind) {
    return solve_extremal_detail(f, c, kind).design;
}

ClosedFormParams uniform_closed_form(const Constraints& c_in, ExtremalKind kind) {
    Distribution f = Distribution::uniform();
    Constraints c = c_in;
    require_feasible(f, c);
    double z = c.z_tilde, xz = c.xz;
    ClosedFormParams p{};
    DesignFunction d = DesignFunction::constant(0.0);
    switch (kind) {
        case ExtremalKind::max: {
            p.first = -xz / (1.0 - z) - (1.0 - z) / 2.0;
            p.second = -xz / (1.0 - z) + (1.0 - z) / 2.0;
            d = DesignFunction::complement_interval(p.first, p.second);
            break;
        }
        case ExtremalKind::min: {
            p.first = xz / (1.0 + z) - (1.0 + z) / 2.0;
            p.second = xz / (1.0 + z) + (1.0 + z) / 2.0;
            d = DesignFunction::interval_indicator(p.first, p.second);
            break;
        }
        case ExtremalKind::max_monotone: {
            p.first = 0.5 * (1.0 - z * z - 2.0 * xz) / (1.0 - z - xz);
            p.second = 1.0 - 2.0 * xz / (1.0 - z);
            d = DesignFunction::two_level(p.first, 1.0, p.second);
            break;
        }
        case ExtremalKind::min_monotone: {
            p.first = 0.5 * (1.0 + z) * (1.0 + z) / (1.0 + z - xz);
            p.second = 2.0 * xz / (1.0 + z) - 1.0;
            d = DesignFunction::two_level(0.0, p.first, p.second);
            break;
        }
    }
    MomentTriple t = moments(d, f);
    if (std::fabs(t.ez - z) > 1e-10 || std::fabs(t.exz - xz) > 1e-10) {
        throw internal_error("uniform closed form failed feasibility validation",
                             {{"residual_ez", std::fabs(t.ez - z)},
                              {"residual_exz", std::fabs(t.exz - xz)}});
    }
    return p;
}

double uniform_three_level_delta(const Constraints& c_in) {
    Distribution f = Distribution::uniform();
    Constraints c = c_in;
    require_feasible(f, c);
    double z = c.z_tilde;
    double disc = 1.0 - z * z - 2.0 * c.xz;
    double dmax = std::min((1.0 - z) / 2.0, (1.0 + z) / 2.0);
    if (disc < -1e-12) {
        throw infeasible_error("no feasible three level tie-breaker design",
                               {{"z_tilde", z}, {"xz", c.xz}});
    }
    double delta = 0.5 * std::sqrt(std::max(disc, 0.0));
    if (delta > dmax + 1e-12) {
        throw infeasible_error(
            "no feasible three level tie-breaker design: randomization band exceeds "
            "the support",
            {{"delta", delta}, {"delta_max", dmax}, {"z_tilde", z}, {"xz", c.xz}});
    }
    delta = std::min(delta, dmax);
    DesignFunction d = DesignFunction::three_level(f, z, delta);
    MomentTriple t = moments(d, f);
    if (std::fabs(t.ez - z) > 1e-10 || std::fabs(t.exz - c.xz) > 1e-10) {
        throw internal_error("uniform three-level closed form failed validation",
                             {{"residual_ez", std::fabs(t.ez - z)},
                              {"residual_exz", std::fabs(t.exz - c.xz)}});
    }
    return delta;
}

double three_level_delta_for_gain(const Distribution& f, double z_tilde, double xz) {
    Constraints c{z_tilde, xz};
    double xzm = require_feasible(f, c);
    double q = (1.0 - z_tilde) / 2.0;
    double dmax = std::min((1.0 - z_tilde) / 2.0, (1.0 + z_tilde) / 2.0);
    auto gain = [&](double d) {
        return -(f.window_moment(1, 0.0, q - d) + f.window_moment(1, 0.0, q + d));
    };
    double tol = std::max(1e-12 * std::max(1.0, xzm), gain_tol(f));
    double gmin = gain(dmax);
    if (c.xz < gmin - tol) {
        throw infeasible_error(
            "no feasible three level tie-breaker design attains this gain",
            {{"xz", c.xz}, {"min_gain", gmin}, {"delta_max", dmax}, {"z_tilde", z_tilde}});
    }
    if (c.xz >= xzm - 1e-15) return 0.0;
    if (c.xz <= gmin) return dmax;
    return bisect_or_edge([&](double d) { return gain(d) - c.xz; }, 0.0, dmax,
                          kBisectTol, tol);
}

double eff_inverse(const MomentTriple& t, double ex2) {
    double m = m11(t.ez, t.exz, ex2);
    double d = det_m(t.ez, t.exz, t.ex2z, ex2);
    if (!(d > 0.0)) return kInf;
    return m / d;
}

const char* form_name(OptimalDesignResult::Form form) {
    switch (form) {
        case OptimalDesignResult::Form::extremal: return "extremal";
        case OptimalDesignResult::Form::blend: return "blend";
        case OptimalDesignResult::Form::two_level: return "two_level";
        case OptimalDesignResult::Form::three_strata: return "three_strata";
    }
    return "unknown";
}

namespace detail {

BlendDetail blend_optimal(const Distribution& f, Constraints c, const CriterionSpec& spec,
                          bool monotone) {
    require_feasible(f, c);
    ExtremalSolution lo = solve_extremal_detail(
        f, c, monotone ? ExtremalKind::min_monotone : ExtremalKind::min);
    ExtremalSolution hi = solve_extremal_detail(
        f, c, monotone ? ExtremalKind::max_monotone : ExtremalKind::max);
    double ex2 = f.second_moment();
    double ilo = moments(lo.design, f).ex2z;
    double ihi = moments(hi.design, f).ex2z;
    if (ihi < ilo) {
        if (ihi < ilo - 1e-9 * std::max(1.0, ex2)) {
            throw internal_error("attainable x2z interval inverted",
                                 {{"lo", ilo}, {"hi", ihi}});
        }
        ihi = ilo;
    }

    OptimalDesignResult res{lo.design};
    if (ihi - ilo <= kEndpointTol) {
        // All feasible designs share the same efficiency.
        res.form = OptimalDesignResult::Form::extremal;
        res.lambda = 1.0;
        res.selected_x2z = ilo;
    } else {
        double star = select_x2z(spec, c.z_tilde, c.xz, ilo, ihi, ex2);
        if (star <= ilo + kEndpointTol) {
            res.design = lo.design;
            res.form = OptimalDesignResult::Form::extremal;
            res.lambda = 1.0;
            res.selected_x2z = ilo;
        } else if (star >= ihi - kEndpointTol) {
            res.design = hi.design;
            res.form = OptimalDesignResult::Form::extremal;
            res.lambda = 0.0;
            res.selected_x2z = ihi;
        } else {
            double lambda = (ihi - star) / (ihi - ilo);
            res.design = convex_combination(lambda, lo.design, hi.design);
            res.form = OptimalDesignResult::Form::blend;
            res.lambda = lambda;
            res.selected_x2z = star;
        }
    }

    MomentTriple t = moments(res.design, f);
    res.criterion_value = spec.value(t, ex2);
    res.eff_inv = eff_inverse(t, ex2);
    res.residual_ez = std::fabs(t.ez - c.z_tilde);
    res.residual_exz = std::fabs(t.exz - c.xz);
    res.interval_lo = ilo;
    res.interval_hi = ihi;
    double scale = std::max(1.0, std::sqrt(ex2));
    if (res.residual_ez > 1e-8 || res.residual_exz > 1e-8 * scale) {
        throw internal_error("optimal design residuals too large",
                             {{"residual_ez", res.residual_ez},
                              {"residual_exz", res.residual_exz}});
    }
    return BlendDetail{std::move(res), std::move(lo), std::move(hi)};
}

DesignFunction canonical_three_strata(const Distribution& f, const Constraints& c,
                                      double target_x2z) {
    // Treated set = bottom stratum [0, w] plus a quantile window of the
    // remaining budget; w sweeps between p_min (w = 0) and p_max (window at
    // the top), bracketing the target.
    double ex2 = f.second_moment();
    double mass_total = (1.0 + c.z_tilde) / 2.0;
    ExtremalSolution pmax = solve_extremal_detail(f, c, ExtremalKind::max);
    double wmax = pmax.q1;
    double ftol = gain_tol(f);

    struct Split {
        double q = 0.0;
        double mw = 0.0;
    };
    auto split_at = [&](double w) {
        Split s;
        s.mw = mass_total - w;
        double tgain = c.xz / 2.0 - f.window_moment(1, 0.0, w);
        s.q = bisect_or_edge(
            [&](double q) {
                return f.window_moment(1, q, std::min(q + s.mw, 1.0)) - tgain;
            },
            w, 1.0 - s.mw, kBisectTol, ftol);
        return s;
    };
    auto x2z_at = [&](double w) {
        Split s = split_at(w);
        return 2.0 * (f.window_moment(2, 0.0, w) +
                      f.window_moment(2, s.q, std::min(s.q + s.mw, 1.0))) -
               ex2;
    };
    double w = bisect_or_edge([&](double w_) { return x2z_at(w_) - target_x2z; }, 0.0,
                              wmax, kBisectTol, 1e-9 * std::max(1.0, ex2));
    Split s = split_at(w);
    return design_from_quantile_bands(
        f, {0.0, w, s.q, std::min(s.q + s.mw, 1.0), 1.0}, {1.0, 0.0, 1.0, 0.0});
}

}  // namespace detail

namespace {

DesignFunction continuous_canonical_monotone(const Distribution& f, const Constraints& c,
                                             double target_x2z,
                                             const ExtremalSolution& lo,
                                             const ExtremalSolution& hi) {
    double ex2 = f.second_moment();
    auto solve_levels = [&](double tp, double& l, double& u) {
        double ft = f.cdf(tp);
        double t1 = f.truncated_moment(1, tp);
        double diff = c.xz / (2.0 * t1);  // l - u, nonpositive since t1 < 0
        u = (1.0 + c.z_tilde) / 2.0 - ft * diff;
        l = u + diff;
    };
    auto x2z_at = [&](double tp) {
        double l, u;
        solve_levels(tp, l, u);
        double t2 = f.truncated_moment(2, tp);
        return 2.0 * (l * t2 + u * (ex2 - t2)) - ex2;
    };
    double ta = lo.c2, tb = hi.c2;  // jump locations of the monotone extremals
    double blo = std::min(ta, tb), bhi = std::max(ta, tb);
    double xtol = kBisectTol * std::max({1.0, std::fabs(blo), std::fabs(bhi)});
    double tp = bisect_or_edge([&](double t) { return x2z_at(t) - target_x2z; }, blo,
                               bhi, xtol, 1e-9 * std::max(1.0, ex2));
    double l, u;
    solve_levels(tp, l, u);
    if (l < -1e-9 || u > 1.0 + 1e-9 || l > u + 1e-9) {
        throw internal_error("canonical two-level solve left [0,1]",
                             {{"l", l}, {"u", u}, {"t", tp}});
    }
    return DesignFunction::two_level(std::clamp(l, 0.0, 1.0), std::clamp(u, 0.0, 1.0),
                                     tp);
}

}  // namespace

DesignFunction canonical_form(const Distribution& f, const Constraints& c_in,
                              double target_x2z, bool monotone) {
    Constraints c = c_in;
    require_feasible(f, c);
    if (!f.has_third_moment()) {
        throw validation_error("canonical forms require E(|x|^3) < infinity");
    }
    ExtremalSolution lo = solve_extremal_detail(
        f, c, monotone ? ExtremalKind::min_monotone : ExtremalKind::min);
    ExtremalSolution hi = solve_extremal_detail(
        f, c, monotone ? ExtremalKind::max_monotone : ExtremalKind::max);
    double ilo = moments(lo.design, f).ex2z;
    double ihi = moments(hi.design, f).ex2z;
    double ex2 = f.second_moment();
    if (target_x2z < ilo - 1e-9 * std::max(1.0, ex2) ||
        target_x2z > ihi + 1e-9 * std::max(1.0, ex2)) {
        throw infeasible_error(
            "target x2z outside the attainable interval",
            {{"target", target_x2z}, {"interval_lo", ilo}, {"interval_hi", ihi}});
    }
    DesignFunction out = [&] {
        if (target_x2z <= ilo + kEndpointTol) return lo.design;
        if (target_x2z >= ihi - kEndpointTol) return hi.design;
        if (!monotone) return detail::canonical_three_strata(f, c, target_x2z);
        if (f.discrete()) return detail::discrete_canonical_monotone(f, c, target_x2z);
        return continuous_canonical_monotone(f, c, target_x2z, lo, hi);
    }();

    MomentTriple t = moments(out, f);
    double scale = std::max(1.0, std::sqrt(ex2));
    if (std::fabs(t.ez - c.z_tilde) > 1e-8 || std::fabs(t.exz - c.xz) > 1e-8 * scale ||
        std::fabs(t.ex2z - target_x2z) > 1e-8 * std::max(1.0, ex2)) {
        throw internal_error("canonical form residuals too large",
                             {{"residual_ez", std::fabs(t.ez - c.z_tilde)},
                              {"residual_exz", std::fabs(t.exz - c.xz)},
                              {"residual_ex2z", std::fabs(t.ex2z - target_x2z)}});
    }
    return out;
}

OptimalDesignResult optimal_design(const Distribution& f, const Constraints& c,
                                   const CriterionSpec& spec, bool monotone) {
    return detail::blend_optimal(f, c, spec, monotone).result;
}

std::vector<TradeoffRecord> tradeoff_sweep(const Distribution& f, double z_tilde,
                                           const std::vector<double>& deltas,
                                           const CriterionSpec& spec) {
    for (double d : deltas) {
        if (!(d >= 0.0 && d <= 1.0)) {
            throw validation_error("sweep grid entries must lie in [0,1]",
                                   {{"delta", d}});
        }
    }
    double xzm = xz_max(f, z_tilde);
    double ex2 = f.second_moment();
    std::vector<TradeoffRecord> records(deltas.size());
    detail::parallel_for(deltas.size(), [&](std::size_t i) {
        TradeoffRecord& r = records[i];
        r.delta = deltas[i];
        r.xz = deltas[i] * xzm;
        Constraints c{z_tilde, r.xz};

        detail::BlendDetail opt = detail::blend_optimal(f, c, spec, false);
        MomentTriple t = moments(opt.result.design, f);
        r.opt_a1 = opt.hi.c1;
        r.opt_a2 = opt.hi.c2;
        r.opt_b1 = opt.lo.c1;
        r.opt_b2 = opt.lo.c2;
        r.opt_lambda = opt.result.lambda;
        r.opt_x2z = opt.result.selected_x2z;
        r.opt_eff_inv = eff_inverse(t, ex2);
        r.opt_criterion = opt.result.criterion_value;

        detail::BlendDetail mon = detail::blend_optimal(f, c, spec, true);
        MomentTriple tm = moments(mon.result.design, f);
        r.mon_l = mon.hi.c1;
        r.mon_t = mon.hi.c2;
        r.mon_u = mon.lo.c1;
        r.mon_s = mon.lo.c2;
        r.mon_lambda = mon.result.lambda;
        r.mon_x2z = mon.result.selected_x2z;
        r.mon_eff_inv = eff_inverse(tm, ex2);
        r.mon_criterion = mon.result.criterion_value;

        try {
            double delta_q = three_level_delta_for_gain(f, z_tilde, r.xz);
            DesignFunction d3 = DesignFunction::three_level(f, z_tilde, delta_q);
            MomentTriple t3 = moments(d3, f);
            r.three_level_present = true;
            r.three_level_delta = delta_q;
            r.three_level_x2z = t3.ex2z;
            r.three_level_eff_inv = eff_inverse(t3, ex2);
            r.three_level_criterion = spec.value(t3, ex2);
        } catch (const infeasible_error&) {
            r.three_level_present = false;
        }
    });
    return records;
}

std::string sweep_csv(const std::vector<TradeoffRecord>& records) {
    std::ostringstream out;
    out << "delta,xz,x2z_star_opt,x2z_star_mon,eff_inv_three_level,"
           "eff_inv_opt_monotone,eff_inv_opt,three_level_delta,"
           "opt_a1,opt_a2,opt_b1,opt_b2,opt_lambda,"
           "mon_l,mon_t,mon_u,mon_s,mon_lambda\n";
    auto cell = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    for (const TradeoffRecord& r : records) {
        out << cell(r.delta) << ',' << cell(r.xz) << ',' << cell(r.opt_x2z) << ','
            << cell(r.mon_x2z) << ',';
        out << (r.three_level_present ? cell(r.three_level_eff_inv) : std::string())
            << ',';
        out << cell(r.mon_eff_inv) << ',' << cell(r.opt_eff_inv) << ',';
        out << (r.three_level_present ? cell(r.three_level_delta) : std::string())
            << ',';
        out << cell(r.opt_a1) << ',' << cell(r.opt_a2) << ',' << cell(r.opt_b1) << ','
            << cell(r.opt_b2) << ',' << cell(r.opt_lambda) << ',';
        out << cell(r.mon_l) << ',' << cell(r.mon_t) << ',' << cell(r.mon_u) << ','
            << cell(r.mon_s) << ',' << cell(r.mon_lambda) << '\n';
    }
    return out.str();
}

}  // namespace tiebreak
