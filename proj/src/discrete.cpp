#include "tiebreak/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "internal.hpp"
#include "tiebreak/errors.hpp"
#include "tiebreak/format.hpp"

namespace tiebreak {

namespace {

constexpr double kBoxTol = 1e-9;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct BelowSums {
    double p = 0.0;   // Pr(x < v_i)
    double s1 = 0.0;  // E(x 1(x < v_i))
    double s2 = 0.0;  // E(x^2 1(x < v_i))
};

BelowSums below(const Distribution& f, std::size_t i) {
    BelowSums b;
    if (i > 0) {
        b.p = f.prefix_sum(0, i - 1);
        b.s1 = f.prefix_sum(1, i - 1);
        b.s2 = f.prefix_sum(2, i - 1);
    }
    return b;
}

}  // namespace

DiscreteInstance::DiscreteInstance(Distribution dist) : dist_(std::move(dist)) {
    if (!dist_.discrete()) {
        throw validation_error("DiscreteInstance requires an empirical distribution");
    }
}

DiscreteInstance DiscreteInstance::from_values(std::vector<double> values) {
    return DiscreteInstance(Distribution::empirical(std::move(values)));
}

namespace detail {

// Single-jump designs l 1(x < t) + eps 1(x = t) + 1(x > t) (maximize) and
// 0 1(x < s) + eps 1(x = s) + u 1(x > s) (minimize). The jump atom is found
// by binary search on the gain at the extreme atom value, then both free
// parameters come from the 2x2 linear system of the equality constraints.
ExtremalSolution discrete_monotone_extremal(const Distribution& f, const Constraints& c,
                                            bool maximize) {
    const auto& vals = f.values();
    const auto& ms = f.masses();
    const std::size_t n = vals.size();
    const double budget = (1.0 + c.z_tilde) / 2.0;  // treated fraction
    const double q_rdd = (1.0 - c.z_tilde) / 2.0;
    const double half_gain = c.xz / 2.0;

    std::size_t jump = n;  // selected jump index
    double lvl_lo = 0.0, lvl_hi = 0.0, eps = 0.0;

    auto solve_max_at = [&](std::size_t i, double& l, double& e) {
        BelowSums b = below(f, i);
        double m = ms[i], v = vals[i];
        double above0 = 1.0 - b.p - m;
        double above1 = -b.s1 - v * m;  // first moments sum to zero
        double rhs0 = budget - above0;
        double rhs1 = half_gain - above1;
        double det = b.p * v * m - b.s1 * m;
        if (std::fabs(det) < 1e-300) return false;
        l = (rhs0 * v * m - rhs1 * m) / det;
        e = (b.p * rhs1 - b.s1 * rhs0) / det;
        return true;
    };
    auto solve_min_at = [&](std::size_t i, double& e, double& u) {
        BelowSums b = below(f, i);
        double m = ms[i], v = vals[i];
        double above0 = 1.0 - b.p - m;
        double above1 = -b.s1 - v * m;
        double det = m * (above1 - v * above0);
        if (std::fabs(det) < 1e-300) return false;
        e = (budget * above1 - half_gain * above0) / det;
        u = (half_gain * m - budget * v * m) / det;
        return true;
    };

    if (maximize) {
        // gain of the jump-at-i design with eps = 1 (feasible for P(i) >= q_rdd)
        auto gain1 = [&](std::size_t i) {
            BelowSums b = below(f, i);
            double l = 1.0 - q_rdd / b.p;
            return 2.0 * (l - 1.0) * b.s1;
        };
        // first index with cumulative mass >= q_rdd (the generalized-RDD atom)
        std::size_t i_rdd = 0;
        {
            std::size_t lo = 0, hi = n;
            while (lo < hi) {
                std::size_t mid = (lo + hi) / 2;
                if (f.prefix_sum(0, mid) >= q_rdd) hi = mid; else lo = mid + 1;
            }
            i_rdd = std::min(lo, n - 1);
        }
        std::size_t i_strict = i_rdd + 1;
        std::size_t pick = i_rdd;
        if (i_strict <= n - 1 && gain1(i_strict) >= c.xz) {
            std::size_t lo = i_strict, hi = n - 1;
            while (lo < hi) {  // last index with gain1 >= xz
                std::size_t mid = (lo + hi + 1) / 2;
                if (gain1(mid) >= c.xz) lo = mid; else hi = mid - 1;
            }
            pick = lo;
        }
        double l, e;
        bool ok = solve_max_at(pick, l, e) && l >= -kBoxTol && e >= l - kBoxTol &&
                  e <= 1.0 + kBoxTol;
        if (!ok) {
            for (std::size_t i = 0; i < n && !ok; ++i) {
                if (solve_max_at(i, l, e) && l >= -kBoxTol && e >= l - kBoxTol &&
                    e <= 1.0 + kBoxTol) {
                    pick = i;
                    ok = true;
                }
            }
        }
        if (!ok) {
            throw internal_error("discrete monotone search found no feasible jump",
                                 {{"z_tilde", c.z_tilde}, {"xz", c.xz}});
        }
        jump = pick;
        lvl_lo = std::clamp(l, 0.0, 1.0);
        lvl_hi = 1.0;
        eps = std::clamp(e, lvl_lo, 1.0);
    } else {
        // gain of the constant-u-from-atom-i design (eps = u)
        auto gain_u = [&](std::size_t i) {
            BelowSums b = below(f, i);
            return -(1.0 + c.z_tilde) * b.s1 / (1.0 - b.p);
        };
        // largest index with P(i) <= q_rdd keeps u <= 1
        std::size_t i_max = 0;
        {
            std::size_t lo = 0, hi = n - 1;
            while (lo < hi) {
                std::size_t mid = (lo + hi + 1) / 2;
                if (below(f, mid).p <= q_rdd) lo = mid; else hi = mid - 1;
            }
            i_max = lo;
        }
        std::size_t pick = 0;
        if (gain_u(i_max) <= c.xz) {
            pick = i_max;
        } else {
            std::size_t lo = 0, hi = i_max;
            while (lo < hi) {  // last index with gain_u <= xz
                std::size_t mid = (lo + hi + 1) / 2;
                if (gain_u(mid) <= c.xz) lo = mid; else hi = mid - 1;
            }
            pick = lo;
        }
        double e, u;
        bool ok = solve_min_at(pick, e, u) && e >= -kBoxTol && u >= e - kBoxTol &&
                  u <= 1.0 + kBoxTol;
        if (!ok) {
            for (std::size_t i = 0; i < n && !ok; ++i) {
                if (solve_min_at(i, e, u) && e >= -kBoxTol && u >= e - kBoxTol &&
                    u <= 1.0 + kBoxTol) {
                    pick = i;
                    ok = true;
                }
            }
        }
        if (!ok) {
            throw internal_error("discrete monotone search found no feasible jump",
                                 {{"z_tilde", c.z_tilde}, {"xz", c.xz}});
        }
        jump = pick;
        lvl_lo = 0.0;
        eps = std::clamp(e, 0.0, 1.0);
        lvl_hi = std::clamp(u, eps, 1.0);
    }

    BelowSums b = below(f, jump);
    double lo_q = b.p, hi_q = b.p + ms[jump];
    DesignFunction d = design_from_quantile_bands(
        f, {0.0, lo_q, std::min(hi_q, 1.0), 1.0},
        {maximize ? lvl_lo : 0.0, eps, maximize ? 1.0 : lvl_hi});
    ExtremalSolution sol{std::move(d),
                         maximize ? ExtremalKind::max_monotone
                                  : ExtremalKind::min_monotone,
                         maximize ? lvl_lo : lvl_hi, vals[jump], lo_q, hi_q};
    return sol;
}

// Four-parameter search for the single-jump design matching all three
// moments: loop over jump atoms t', solve (l', eps', u') from the 3x3
// linear system, accept the first solution inside the probability box.
DesignFunction discrete_canonical_monotone(const Distribution& f, const Constraints& c,
                                           double target_x2z) {
    const auto& vals = f.values();
    const auto& ms = f.masses();
    const std::size_t n = vals.size();
    const double ex2 = f.second_moment();
    const double rhs0 = (1.0 + c.z_tilde) / 2.0;
    const double rhs1 = c.xz / 2.0;
    const double rhs2 = (target_x2z + ex2) / 2.0;
    const double scale = std::max(1.0, ex2);

    double best_violation = std::numeric_limits<double>::infinity();
    double best[4] = {0, 0, 0, 0};  // l, eps, u, jump index

    for (std::size_t i = 0; i < n; ++i) {
        BelowSums b = below(f, i);
        double m = ms[i], v = vals[i];
        double a0 = 1.0 - b.p - m;
        double a1 = -b.s1 - v * m;
        double a2 = ex2 - b.s2 - v * v * m;
        // rows: (P, m, a0 | rhs0), (S1, vm, a1 | rhs1), (S2, v^2 m, a2 | rhs2)
        double c00 = b.p, c01 = m, c02 = a0;
        double c10 = b.s1, c11 = v * m, c12 = a1;
        double c20 = b.s2, c21 = v * v * m, c22 = a2;
        double det = c00 * (c11 * c22 - c12 * c21) - c01 * (c10 * c22 - c12 * c20) +
                     c02 * (c10 * c21 - c11 * c20);
        double l, e, u;
        if (std::fabs(det) > 1e-14 * scale * scale) {
            l = (rhs0 * (c11 * c22 - c12 * c21) - c01 * (rhs1 * c22 - c12 * rhs2) +
                 c02 * (rhs1 * c21 - c11 * rhs2)) /
                det;
            e = (c00 * (rhs1 * c22 - c12 * rhs2) - rhs0 * (c10 * c22 - c12 * c20) +
                 c02 * (c10 * rhs2 - rhs1 * c20)) /
                det;
            u = (c00 * (c11 * rhs2 - rhs1 * c21) - c01 * (c10 * rhs2 - rhs1 * c20) +
                 rhs0 * (c10 * c21 - c11 * c20)) /
                det;
        } else if (i == 0) {
            // no mass below the jump: l is free, tie it to eps
            double det2 = c01 * c12 - c02 * c11;
            if (std::fabs(det2) < 1e-14 * scale) continue;
            e = (rhs0 * c12 - c02 * rhs1) / det2;
            u = (c01 * rhs1 - rhs0 * c11) / det2;
            l = e;
            if (std::fabs(c21 * e + c22 * u - rhs2) > 1e-9 * scale) continue;
        } else if (i + 1 == n) {
            // no mass above: u is free, tie it to 1
            double det2 = c00 * c11 - c01 * c10;
            if (std::fabs(det2) < 1e-14 * scale) continue;
            l = (rhs0 * c11 - c01 * rhs1) / det2;
            e = (c00 * rhs1 - rhs0 * c10) / det2;
            u = 1.0;
            if (std::fabs(c20 * l + c21 * e - rhs2) > 1e-9 * scale) continue;
        } else {
            continue;
        }
        double violation = std::max({-l, l - e, e - u, u - 1.0, 0.0});
        if (violation < best_violation) {
            best_violation = violation;
            best[0] = l;
            best[1] = e;
            best[2] = u;
            best[3] = (double)i;
        }
        if (violation <= kBoxTol) break;
    }
    if (best_violation > 1e-7) {
        throw internal_error(
            "four-parameter canonical search found no admissible jump",
            {{"best_violation", best_violation},
             {"target_x2z", target_x2z},
             {"z_tilde", c.z_tilde},
             {"xz", c.xz}});
    }
    std::size_t i = (std::size_t)best[3];
    double l = std::clamp(best[0], 0.0, 1.0);
    double e = std::clamp(best[1], l, 1.0);
    double u = std::clamp(best[2], e, 1.0);
    BelowSums b = below(f, i);
    return design_from_quantile_bands(
        f, {0.0, b.p, std::min(b.p + ms[i], 1.0), 1.0}, {l, e, u});
}

}  // namespace detail

DesignFunction solve_extremal_discrete(const DiscreteInstance& inst, const Constraints& c,
                                       ExtremalKind kind) {
    return solve_extremal_detail(inst.dist(), c, kind).design;
}

OptimalDesignResult optimal_design_discrete(const DiscreteInstance& inst,
                                            const Constraints& c,
                                            const CriterionSpec& spec, bool monotone,
                                            bool canonical) {
    detail::BlendDetail bd = detail::blend_optimal(inst.dist(), c, spec, monotone);
    if (!canonical) return bd.result;

    const Distribution& f = inst.dist();
    double ex2 = f.second_moment();
    OptimalDesignResult res = bd.result;
    res.design = canonical_form(f, c, bd.result.selected_x2z, monotone);
    res.form = monotone ? OptimalDesignResult::Form::two_level
                        : OptimalDesignResult::Form::three_strata;
    res.lambda = kNan;
    MomentTriple t = moments(res.design, f);
    res.criterion_value = spec.value(t, ex2);
    res.eff_inv = eff_inverse(t, ex2);
    res.residual_ez = std::fabs(t.ez - c.z_tilde);
    res.residual_exz = std::fabs(t.exz - c.xz);
    return res;
}

namespace {

// Dense two-phase tableau simplex, minimizing c.x subject to Ax = b, x >= 0
// with b >= 0. Bland's rule throughout, so no cycling.
struct Simplex {
    std::size_t m, n;                // rows, structural+artificial columns
    std::vector<std::vector<double>> tab;  // m rows of n+1 (rhs last)
    std::vector<double> cost;              // reduced-cost row, n+1 wide
    std::vector<std::size_t> basis;
    std::vector<bool> blocked;  // artificial columns barred from entering

    static constexpr double kPivTol = 1e-9;

    void pivot(std::size_t r, std::size_t col) {
        double piv = tab[r][col];
        for (double& v : tab[r]) v /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            double factor = tab[i][col];
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j <= n; ++j) tab[i][j] -= factor * tab[r][j];
        }
        double factor = cost[col];
        if (factor != 0.0) {
            for (std::size_t j = 0; j <= n; ++j) cost[j] -= factor * tab[r][j];
        }
        basis[r] = col;
    }

    bool iterate() {
        for (std::size_t iter = 0; iter < 200000; ++iter) {
            std::size_t enter = n;
            for (std::size_t j = 0; j < n; ++j) {  // Bland: first improving column
                if (!blocked[j] && cost[j] < -kPivTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == n) return true;  // optimal
            std::size_t leave = m;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (tab[i][enter] <= kPivTol) continue;
                double ratio = tab[i][n] / tab[i][enter];
                if (leave == m || ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m) {
                throw internal_error("LP oracle: unbounded direction");
            }
            pivot(leave, enter);
        }
        throw internal_error("LP oracle: iteration limit reached");
    }
};

}  // namespace

LpSolution lp_oracle_discrete(const DiscreteInstance& inst, const Constraints& c,
                              bool maximize, bool monotone) {
    const std::size_t n = inst.size();
    if (n > 200) {
        throw validation_error("lp_oracle_discrete is limited to 200 support points",
                               {{"n", (double)n}});
    }
    const auto& vals = inst.values();
    const auto& ms = inst.masses();
    const double ex2 = inst.dist().second_moment();
    const double dn = (double)n;

    std::size_t rows = 2 + n + (monotone ? n - 1 : 0);
    std::size_t n_struct = n + n + (monotone ? n - 1 : 0);
    std::size_t total = n_struct + rows;  // one artificial per row

    Simplex sx;
    sx.m = rows;
    sx.n = total;
    sx.tab.assign(rows, std::vector<double>(total + 1, 0.0));
    sx.basis.assign(rows, 0);
    sx.blocked.assign(total, false);

    // equality rows scaled by n for conditioning
    for (std::size_t j = 0; j < n; ++j) {
        sx.tab[0][j] = ms[j] * dn;
        sx.tab[1][j] = ms[j] * vals[j] * dn;
    }
    sx.tab[0][total] = (1.0 + c.z_tilde) / 2.0 * dn;
    sx.tab[1][total] = c.xz / 2.0 * dn;
    if (sx.tab[1][total] < 0.0) {  // keep b >= 0
        for (std::size_t j = 0; j <= total; ++j) sx.tab[1][j] = -sx.tab[1][j];
    }
    for (std::size_t j = 0; j < n; ++j) {  // p_j + s_j = 1
        sx.tab[2 + j][j] = 1.0;
        sx.tab[2 + j][n + j] = 1.0;
        sx.tab[2 + j][total] = 1.0;
    }
    if (monotone) {
        for (std::size_t j = 0; j + 1 < n; ++j) {  // p_{j+1} - p_j - w_j = 0
            sx.tab[2 + n + j][j + 1] = 1.0;
            sx.tab[2 + n + j][j] = -1.0;
            sx.tab[2 + n + j][2 * n + j] = -1.0;
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        sx.tab[i][n_struct + i] = 1.0;
        sx.basis[i] = n_struct + i;
    }

    // phase 1: minimize the artificial sum
    sx.cost.assign(total + 1, 0.0);
    for (std::size_t i = 0; i < rows; ++i) sx.cost[n_struct + i] = 1.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j <= total; ++j) sx.cost[j] -= sx.tab[i][j];
    }
    sx.iterate();
    if (-sx.cost[total] > 1e-8) {
        throw infeasible_error("LP oracle: constraints outside the feasible input space",
                               {{"z_tilde", c.z_tilde},
                                {"xz", c.xz},
                                {"phase1_gap", -sx.cost[total]}});
    }
    // bar artificials; pivot out any still basic at zero
    for (std::size_t j = n_struct; j < total; ++j) sx.blocked[j] = true;
    for (std::size_t i = 0; i < rows; ++i) {
        if (sx.basis[i] < n_struct) continue;
        std::size_t col = n_struct;
        for (std::size_t j = 0; j < n_struct; ++j) {
            if (std::fabs(sx.tab[i][j]) > Simplex::kPivTol) {
                col = j;
                break;
            }
        }
        if (col < n_struct) sx.pivot(i, col);
    }

    // phase 2: objective sum 2 m_j v_j^2 p_j, negated when maximizing
    sx.cost.assign(total + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double cj = 2.0 * ms[j] * vals[j] * vals[j];
        sx.cost[j] = maximize ? -cj : cj;
    }
    for (std::size_t i = 0; i < rows; ++i) {
        double factor = sx.cost[sx.basis[i]];
        if (factor == 0.0) continue;
        for (std::size_t j = 0; j <= total; ++j) sx.cost[j] -= factor * sx.tab[i][j];
    }
    sx.iterate();

    LpSolution out;
    out.p.assign(n, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        if (sx.basis[i] < n) out.p[sx.basis[i]] = std::clamp(sx.tab[i][total], 0.0, 1.0);
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        obj += 2.0 * ms[j] * vals[j] * vals[j] * out.p[j];
    }
    out.objective = obj - ex2;
    return out;
}

std::string assignment_csv(const DiscreteInstance& inst, const DesignFunction& p) {
    std::ostringstream out;
    out << "x,p\n";
    for (double v : inst.values()) {
        out << format_double(v) << ',' << format_double(p(v)) << '\n';
    }
    return out.str();
}

}  // namespace tiebreak
