#include "tiebreak.h"

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>

#include "tiebreak/criteria.hpp"
#include "tiebreak/design.hpp"
#include "tiebreak/discrete.hpp"
#include "tiebreak/distribution.hpp"
#include "tiebreak/errors.hpp"
#include "tiebreak/format.hpp"
#include "tiebreak/solve.hpp"
#include "tiebreak/verify.hpp"

using namespace tiebreak;

struct tb_dist {
    Distribution d;
};
struct tb_design {
    DesignFunction p;
};
struct tb_criterion {
    CriterionSpec c;
};
struct tb_solution {
    OptimalDesignResult res;
    double z_tilde, xz, delta, xzmax;
    std::string form;
};

namespace {

thread_local std::string g_last_message;
thread_local std::string g_last_context;

void record_error(const std::string& message, const std::string& context_json) {
    g_last_message = message;
    g_last_context = context_json;
}

std::string context_json(const std::map<std::string, double>& ctx) {
    std::ostringstream out;
    out << "{";
    bool first = true;
    for (const auto& [k, v] : ctx) {
        if (!first) out << ",";
        first = false;
        out << "\"" << k << "\":";
        if (std::isfinite(v)) {
            out << format_double(v);
        } else {
            out << "null";
        }
    }
    out << "}";
    return out.str();
}

tb_status map_error(const error& e) {
    record_error(e.what(), context_json(e.context()));
    const std::string& code = e.code();
    if (code == "invalid_argument") return TB_ERR_INVALID;
    if (code == "infeasible") return TB_ERR_INFEASIBLE;
    if (code == "io") return TB_ERR_IO;
    if (code == "singular") return TB_ERR_SINGULAR;
    return TB_ERR_INTERNAL;
}

template <typename Fn>
tb_status guarded(Fn&& fn) {
    try {
        fn();
        return TB_OK;
    } catch (const error& e) {
        return map_error(e);
    } catch (const std::exception& e) {
        record_error(e.what(), "{}");
        return TB_ERR_INTERNAL;
    } catch (...) {
        record_error("unknown error", "{}");
        return TB_ERR_INTERNAL;
    }
}

tb_status require(const void* p, const char* what) {
    if (p) return TB_OK;
    record_error(std::string("null ") + what, "{}");
    return TB_ERR_INVALID;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* tb_status_name(tb_status s) {
    switch (s) {
        case TB_OK: return "ok";
        case TB_ERR_INVALID: return "invalid_argument";
        case TB_ERR_INFEASIBLE: return "infeasible";
        case TB_ERR_IO: return "io";
        case TB_ERR_SINGULAR: return "singular";
        case TB_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* tb_last_error_message(void) { return g_last_message.c_str(); }
const char* tb_last_error_context_json(void) {
    if (g_last_context.empty()) g_last_context = "{}";
    return g_last_context.c_str();
}

void tb_string_free(char* s) { delete[] s; }

/* ---- distributions ---- */

tb_status tb_dist_uniform(tb_dist** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = new tb_dist{Distribution::uniform()}; });
}

tb_status tb_dist_weibull(double shape, double scale, tb_dist** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = new tb_dist{Distribution::weibull(shape, scale)}; });
}

tb_status tb_dist_gaussian(double sd, tb_dist** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = new tb_dist{Distribution::gaussian(sd)}; });
}

tb_status tb_dist_empirical(const double* values, size_t n, tb_dist** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    if (tb_status s = require(values, "values")) return s;
    return guarded([&] {
        *out = new tb_dist{Distribution::empirical(std::vector<double>(values, values + n))};
    });
}

tb_status tb_dist_empirical_file(const char* path, tb_dist** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    if (tb_status s = require(path, "path")) return s;
    return guarded([&] {
        *out = new tb_dist{Distribution::empirical(read_values_file(path))};
    });
}

void tb_dist_free(tb_dist* d) { delete d; }

tb_status tb_dist_second_moment(const tb_dist* d, double* out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = d->d.second_moment(); });
}

tb_status tb_dist_centering_shift(const tb_dist* d, double* out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = d->d.centering_shift(); });
}

tb_status tb_dist_atom_count(const tb_dist* d, size_t* out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = d->d.atom_count(); });
}

tb_status tb_dist_cdf(const tb_dist* d, double x, double* out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = d->d.cdf(x); });
}

tb_status tb_dist_quantile(const tb_dist* d, double q, double* out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = d->d.quantile(q); });
}

tb_status tb_dist_truncated_moment(const tb_dist* d, int a, double t, int include_t,
                                   double* out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = d->d.truncated_moment(a, t, include_t != 0); });
}

tb_status tb_dist_xz_max(const tb_dist* d, double z_tilde, double* out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = xz_max(d->d, z_tilde); });
}

/* ---- designs ---- */

void tb_design_free(tb_design* p) { delete p; }

tb_status tb_design_constant(double theta, tb_design** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = new tb_design{DesignFunction::constant(theta)}; });
}

tb_status tb_design_two_level(double lo_level, double hi_level, double threshold,
                              tb_design** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] {
        *out = new tb_design{DesignFunction::two_level(lo_level, hi_level, threshold)};
    });
}

tb_status tb_design_interval(double lo, double hi, tb_design** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] {
        *out = new tb_design{DesignFunction::interval_indicator(lo, hi)};
    });
}

tb_status tb_design_complement_interval(double lo, double hi, tb_design** out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] {
        *out = new tb_design{DesignFunction::complement_interval(lo, hi)};
    });
}

tb_status tb_design_three_level(const tb_dist* d, double z_tilde, double delta,
                                tb_design** out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] {
        *out = new tb_design{DesignFunction::three_level(d->d, z_tilde, delta)};
    });
}

tb_status tb_design_generalized_rdd(const tb_dist* d, double z_tilde, tb_design** out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] {
        *out = new tb_design{DesignFunction::generalized_rdd(d->d, z_tilde)};
    });
}

tb_status tb_design_from_json(const char* json, tb_design** out) {
    if (tb_status s = require(json, "json")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = new tb_design{DesignFunction::from_json(json)}; });
}

tb_status tb_design_to_json(const tb_design* p, char** out) {
    if (tb_status s = require(p, "design")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = dup_string(p->p.to_json()); });
}

tb_status tb_design_value(const tb_design* p, double x, double* out) {
    if (tb_status s = require(p, "design")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = p->p(x); });
}

tb_status tb_design_is_monotone(const tb_design* p, int* out) {
    if (tb_status s = require(p, "design")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = p->p.is_monotone() ? 1 : 0; });
}

tb_status tb_design_moments(const tb_design* p, const tb_dist* d, double out3[3]) {
    if (tb_status s = require(p, "design")) return s;
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out3, "output pointer")) return s;
    return guarded([&] {
        MomentTriple t = moments(p->p, d->d);
        out3[0] = t.ez;
        out3[1] = t.exz;
        out3[2] = t.ex2z;
    });
}

tb_status tb_design_blend(double lambda, const tb_design* p, const tb_design* q,
                          tb_design** out) {
    if (tb_status s = require(p, "design")) return s;
    if (tb_status s = require(q, "design")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] {
        *out = new tb_design{convex_combination(lambda, p->p, q->p)};
    });
}

/* ---- criteria ---- */

tb_status tb_criterion_parse(const char* name, tb_criterion** out) {
    if (tb_status s = require(name, "name")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = new tb_criterion{CriterionSpec::parse(name)}; });
}

void tb_criterion_free(tb_criterion* c) { delete c; }

tb_status tb_criterion_value(const tb_criterion* c, double z_tilde, double xz,
                             double x2z, double ex2, double* out) {
    if (tb_status s = require(c, "criterion")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = c->c.value(z_tilde, xz, x2z, ex2); });
}

tb_status tb_m11(double z_tilde, double xz, double ex2, double* out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = m11(z_tilde, xz, ex2); });
}

tb_status tb_det_m(double z_tilde, double xz, double x2z, double ex2, double* out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = det_m(z_tilde, xz, x2z, ex2); });
}

tb_status tb_a_star(double z_tilde, double xz, double* out) {
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = a_star(z_tilde, xz); });
}

tb_status tb_select_x2z(const tb_criterion* c, double z_tilde, double xz, double lo,
                        double hi, double ex2, double* out) {
    if (tb_status s = require(c, "criterion")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = select_x2z(c->c, z_tilde, xz, lo, hi, ex2); });
}

tb_status tb_info_matrix(double ez, double exz, double ex2z, double ex2,
                         double out16[16]) {
    if (tb_status s = require(out16, "output pointer")) return s;
    return guarded([&] {
        InfoMatrix m = info_matrix(MomentTriple{ez, exz, ex2z}, ex2);
        for (int i = 0; i < 16; ++i) out16[i] = m.m[i];
    });
}

/* ---- solvers ---- */

tb_status tb_solve_extremal(const tb_dist* d, double z_tilde, double xz, int kind,
                            tb_design** out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    if (kind < 0 || kind > 3) {
        record_error("extremal kind must be 0..3", "{}");
        return TB_ERR_INVALID;
    }
    return guarded([&] {
        Constraints c{z_tilde, xz};
        *out = new tb_design{
            solve_extremal(d->d, c, static_cast<ExtremalKind>(kind))};
    });
}

tb_status tb_solve_optimal(const tb_dist* d, double z_tilde, double xz,
                           const tb_criterion* c, int monotone, int canonical,
                           tb_solution** out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(c, "criterion")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] {
        Constraints cons{z_tilde, xz};
        OptimalDesignResult res = optimal_design(d->d, cons, c->c, monotone != 0);
        if (canonical) {
            res.design = canonical_form(d->d, cons, res.selected_x2z, monotone != 0);
            res.form = monotone ? OptimalDesignResult::Form::two_level
                                : OptimalDesignResult::Form::three_strata;
            res.lambda = std::numeric_limits<double>::quiet_NaN();
            MomentTriple t = moments(res.design, d->d);
            double ex2 = d->d.second_moment();
            res.criterion_value = c->c.value(t, ex2);
            res.eff_inv = eff_inverse(t, ex2);
            res.residual_ez = std::fabs(t.ez - z_tilde);
            res.residual_exz = std::fabs(t.exz - xz);
        }
        double xzm = xz_max(d->d, z_tilde);
        auto* sol = new tb_solution{std::move(res), z_tilde, xz,
                                    xzm > 0.0 ? xz / xzm : 0.0, xzm,
                                    ""};
        sol->form = form_name(sol->res.form);
        *out = sol;
    });
}

void tb_solution_free(tb_solution* s) { delete s; }

tb_status tb_solution_design(const tb_solution* s, tb_design** out) {
    if (tb_status st = require(s, "solution")) return st;
    if (tb_status st = require(out, "output pointer")) return st;
    return guarded([&] { *out = new tb_design{s->res.design}; });
}

const char* tb_solution_form(const tb_solution* s) {
    return s ? s->form.c_str() : "";
}

tb_status tb_solution_stats(const tb_solution* s, double* lambda, double* selected_x2z,
                            double* criterion_value, double* eff_inv,
                            double* residual_ez, double* residual_exz) {
    if (tb_status st = require(s, "solution")) return st;
    if (lambda) *lambda = s->res.lambda;
    if (selected_x2z) *selected_x2z = s->res.selected_x2z;
    if (criterion_value) *criterion_value = s->res.criterion_value;
    if (eff_inv) *eff_inv = s->res.eff_inv;
    if (residual_ez) *residual_ez = s->res.residual_ez;
    if (residual_exz) *residual_exz = s->res.residual_exz;
    return TB_OK;
}

tb_status tb_solution_constraints(const tb_solution* s, double* z_tilde, double* xz,
                                  double* delta, double* xz_max) {
    if (tb_status st = require(s, "solution")) return st;
    if (z_tilde) *z_tilde = s->z_tilde;
    if (xz) *xz = s->xz;
    if (delta) *delta = s->delta;
    if (xz_max) *xz_max = s->xzmax;
    return TB_OK;
}

tb_status tb_three_level_delta(const tb_dist* d, double z_tilde, double xz,
                               double* out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(out, "output pointer")) return s;
    return guarded([&] { *out = three_level_delta_for_gain(d->d, z_tilde, xz); });
}

tb_status tb_sweep_csv(const tb_dist* d, double z_tilde, const double* deltas,
                       size_t n_deltas, const tb_criterion* c, char** csv_out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(deltas, "deltas")) return s;
    if (tb_status s = require(c, "criterion")) return s;
    if (tb_status s = require(csv_out, "output pointer")) return s;
    return guarded([&] {
        std::vector<double> grid(deltas, deltas + n_deltas);
        auto records = tradeoff_sweep(d->d, z_tilde, grid, c->c);
        *csv_out = dup_string(sweep_csv(records));
    });
}

tb_status tb_assignment_csv(const tb_dist* d, const tb_design* p, char** csv_out) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(p, "design")) return s;
    if (tb_status s = require(csv_out, "output pointer")) return s;
    return guarded([&] {
        DiscreteInstance inst(d->d);
        *csv_out = dup_string(assignment_csv(inst, p->p));
    });
}

/* ---- verification ---- */

tb_status tb_fit_two_line(const double* x, const double* z, const double* y, size_t n,
                          double beta_out[4]) {
    if (tb_status s = require(x, "x")) return s;
    if (tb_status s = require(z, "z")) return s;
    if (tb_status s = require(y, "y")) return s;
    if (tb_status s = require(beta_out, "output pointer")) return s;
    return guarded([&] {
        auto beta = fit_two_line({x, n}, {z, n}, {y, n});
        for (int i = 0; i < 4; ++i) beta_out[i] = beta[i];
    });
}

tb_status tb_simulate_variance(const tb_dist* d, const tb_design* p, size_t n,
                               size_t reps, uint64_t seed, const double beta[4],
                               double noise_sd, double* empirical, double* predicted,
                               size_t* rejected, char** report_json) {
    if (tb_status s = require(d, "distribution")) return s;
    if (tb_status s = require(p, "design")) return s;
    return guarded([&] {
        SimConfig cfg;
        cfg.n = n;
        cfg.reps = reps;
        cfg.seed = seed;
        if (beta) {
            for (int i = 0; i < 4; ++i) cfg.beta[i] = beta[i];
        }
        cfg.noise_sd = noise_sd;
        SimResult res = simulate_variance(d->d, p->p, cfg);
        if (empirical) *empirical = res.empirical;
        if (predicted) *predicted = res.predicted;
        if (rejected) *rejected = res.rejected_replicates;
        if (report_json) {
            *report_json = dup_string(verification_report_json(p->p, cfg, res));
        }
    });
}

}  // extern "C"
