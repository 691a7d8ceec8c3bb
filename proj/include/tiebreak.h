/*
 * tiebreak: optimal tie-breaker experimental designs.
 *
 * C interface to the solver core. All functions return a tb_status; on
 * failure tb_last_error_message() / tb_last_error_context_json() describe
 * the error for the calling thread. Handles are opaque and freed with the
 * matching *_free function. Strings returned through char** are released
 * with tb_string_free.
 */
#ifndef TIEBREAK_H
#define TIEBREAK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TB_API __declspec(dllexport)
#else
#define TB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tb_status {
    TB_OK = 0,
    TB_ERR_INVALID = 1,
    TB_ERR_INFEASIBLE = 2,
    TB_ERR_IO = 3,
    TB_ERR_SINGULAR = 4,
    TB_ERR_INTERNAL = 5
} tb_status;

typedef struct tb_dist tb_dist;
typedef struct tb_design tb_design;
typedef struct tb_criterion tb_criterion;
typedef struct tb_solution tb_solution;

TB_API const char* tb_status_name(tb_status s);
TB_API const char* tb_last_error_message(void);
TB_API const char* tb_last_error_context_json(void);
TB_API void tb_string_free(char* s);

/* ---- running-variable distributions ---- */

TB_API tb_status tb_dist_uniform(tb_dist** out);
TB_API tb_status tb_dist_weibull(double shape, double scale, tb_dist** out);
TB_API tb_status tb_dist_gaussian(double sd, tb_dist** out);
TB_API tb_status tb_dist_empirical(const double* values, size_t n, tb_dist** out);
/* one value per line, or a single-column CSV with an optional header */
TB_API tb_status tb_dist_empirical_file(const char* path, tb_dist** out);
TB_API void tb_dist_free(tb_dist* d);

TB_API tb_status tb_dist_second_moment(const tb_dist* d, double* out);
TB_API tb_status tb_dist_centering_shift(const tb_dist* d, double* out);
TB_API tb_status tb_dist_atom_count(const tb_dist* d, size_t* out);
TB_API tb_status tb_dist_cdf(const tb_dist* d, double x, double* out);
TB_API tb_status tb_dist_quantile(const tb_dist* d, double q, double* out);
/* E(x^a 1(x < t)), or with <= when include_t is nonzero; a in {0,1,2} */
TB_API tb_status tb_dist_truncated_moment(const tb_dist* d, int a, double t,
                                          int include_t, double* out);
TB_API tb_status tb_dist_xz_max(const tb_dist* d, double z_tilde, double* out);

/* ---- design functions ---- */

TB_API void tb_design_free(tb_design* p);
TB_API tb_status tb_design_constant(double theta, tb_design** out);
TB_API tb_status tb_design_two_level(double lo_level, double hi_level,
                                     double threshold, tb_design** out);
TB_API tb_status tb_design_interval(double lo, double hi, tb_design** out);
TB_API tb_status tb_design_complement_interval(double lo, double hi, tb_design** out);
TB_API tb_status tb_design_three_level(const tb_dist* d, double z_tilde, double delta,
                                       tb_design** out);
TB_API tb_status tb_design_generalized_rdd(const tb_dist* d, double z_tilde,
                                           tb_design** out);
TB_API tb_status tb_design_from_json(const char* json, tb_design** out);
TB_API tb_status tb_design_to_json(const tb_design* p, char** out);
TB_API tb_status tb_design_value(const tb_design* p, double x, double* out);
TB_API tb_status tb_design_is_monotone(const tb_design* p, int* out);
/* out3 = (E_p z, E_p xz, E_p x^2 z) */
TB_API tb_status tb_design_moments(const tb_design* p, const tb_dist* d,
                                   double out3[3]);
TB_API tb_status tb_design_blend(double lambda, const tb_design* p, const tb_design* q,
                                 tb_design** out);

/* ---- efficiency criteria ---- */

/* "eff", "d", or "custom:<expr>" over symbols z, xz, x2z, ex2 */
TB_API tb_status tb_criterion_parse(const char* name, tb_criterion** out);
TB_API void tb_criterion_free(tb_criterion* c);
TB_API tb_status tb_criterion_value(const tb_criterion* c, double z_tilde, double xz,
                                    double x2z, double ex2, double* out);
TB_API tb_status tb_m11(double z_tilde, double xz, double ex2, double* out);
TB_API tb_status tb_det_m(double z_tilde, double xz, double x2z, double ex2,
                          double* out);
TB_API tb_status tb_a_star(double z_tilde, double xz, double* out);
TB_API tb_status tb_select_x2z(const tb_criterion* c, double z_tilde, double xz,
                               double lo, double hi, double ex2, double* out);
/* row-major 4x4 in the coordinate order (1, x, z, xz), sigma^2 = 1 */
TB_API tb_status tb_info_matrix(double ez, double exz, double ex2z, double ex2,
                                double out16[16]);

/* ---- solvers ---- */

enum {
    TB_EXTREMAL_MAX = 0,
    TB_EXTREMAL_MIN = 1,
    TB_EXTREMAL_MAX_MONOTONE = 2,
    TB_EXTREMAL_MIN_MONOTONE = 3
};

TB_API tb_status tb_solve_extremal(const tb_dist* d, double z_tilde, double xz,
                                   int kind, tb_design** out);
TB_API tb_status tb_solve_optimal(const tb_dist* d, double z_tilde, double xz,
                                  const tb_criterion* c, int monotone, int canonical,
                                  tb_solution** out);
TB_API void tb_solution_free(tb_solution* s);
TB_API tb_status tb_solution_design(const tb_solution* s, tb_design** out);
/* "extremal", "blend", "two_level", or "three_strata" */
TB_API const char* tb_solution_form(const tb_solution* s);
/* any output pointer may be NULL */
TB_API tb_status tb_solution_stats(const tb_solution* s, double* lambda,
                                   double* selected_x2z, double* criterion_value,
                                   double* eff_inv, double* residual_ez,
                                   double* residual_exz);
TB_API tb_status tb_solution_constraints(const tb_solution* s, double* z_tilde,
                                         double* xz, double* delta, double* xz_max);

/* randomization band half-width (quantile units) attaining gain xz */
TB_API tb_status tb_three_level_delta(const tb_dist* d, double z_tilde, double xz,
                                      double* out);
TB_API tb_status tb_sweep_csv(const tb_dist* d, double z_tilde, const double* deltas,
                              size_t n_deltas, const tb_criterion* c, char** csv_out);
/* per-subject "x,p" rows; requires an empirical distribution */
TB_API tb_status tb_assignment_csv(const tb_dist* d, const tb_design* p,
                                   char** csv_out);

/* ---- Monte Carlo verification ---- */

TB_API tb_status tb_fit_two_line(const double* x, const double* z, const double* y,
                                 size_t n, double beta_out[4]);
/* beta may be NULL for (0,0,0,0); any scalar output may be NULL */
TB_API tb_status tb_simulate_variance(const tb_dist* d, const tb_design* p, size_t n,
                                      size_t reps, uint64_t seed, const double beta[4],
                                      double noise_sd, double* empirical,
                                      double* predicted, size_t* rejected,
                                      char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* TIEBREAK_H */
