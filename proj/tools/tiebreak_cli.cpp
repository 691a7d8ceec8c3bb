// Command-line front end for the tiebreak solver library. Talks to the
// solver exclusively through the C API in tiebreak.h.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tiebreak.h"

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ExitError {
    int code;
    std::string payload;
};

[[noreturn]] void fail_status(tb_status status) {
    int code = 1;
    if (status == TB_ERR_INFEASIBLE) code = 2;
    if (status == TB_ERR_IO) code = 3;
    std::ostringstream out;
    out << "{\"code\":\"" << tb_status_name(status) << "\",\"message\":\""
        << tb_last_error_message() << "\",\"context\":" << tb_last_error_context_json()
        << "}";
    throw ExitError{code, out.str()};
}

[[noreturn]] void fail_invalid(const std::string& message) {
    throw ExitError{1, "{\"code\":\"invalid_argument\",\"message\":\"" + message +
                           "\",\"context\":{}}"};
}

void check(tb_status status) {
    if (status != TB_OK) fail_status(status);
}

struct StringOut {
    char* s = nullptr;
    ~StringOut() { tb_string_free(s); }
};

// Options shared by every subcommand that needs a running-variable
// distribution.
struct DistOptions {
    std::string kind = "uniform";
    double shape = 0.5;
    double scale = 1.0;
    double sd = 1.0;
    std::string data_path;

    void attach(CLI::App* cmd, bool data_only = false) {
        if (!data_only) {
            cmd->add_option("--dist", kind,
                            "running-variable distribution: uniform, weibull, "
                            "gaussian, or empirical")
                ->check(CLI::IsMember({"uniform", "weibull", "gaussian", "empirical"}));
            cmd->add_option("--shape", shape, "weibull shape parameter");
            cmd->add_option("--scale", scale, "weibull scale parameter");
            cmd->add_option("--sd", sd, "gaussian standard deviation");
        }
        cmd->add_option("--data", data_path,
                        "data file for an empirical distribution (one value per "
                        "line or single-column CSV)");
    }

    tb_dist* make() const {
        tb_dist* d = nullptr;
        if (!data_path.empty() || kind == "empirical") {
            if (data_path.empty()) {
                fail_invalid("empirical distribution needs --data <file>");
            }
            check(tb_dist_empirical_file(data_path.c_str(), &d));
        } else if (kind == "uniform") {
            check(tb_dist_uniform(&d));
        } else if (kind == "weibull") {
            check(tb_dist_weibull(shape, scale, &d));
        } else if (kind == "gaussian") {
            check(tb_dist_gaussian(sd, &d));
        } else {
            fail_invalid("unknown distribution kind: " + kind);
        }
        return d;
    }

    std::string echo_json(tb_dist* d) const {
        std::ostringstream out;
        bool empirical = !data_path.empty() || kind == "empirical";
        out << "{\"kind\":\"" << (empirical ? "empirical" : kind) << "\"";
        if (!empirical && kind == "weibull") {
            out << ",\"shape\":" << fmt(shape) << ",\"scale\":" << fmt(scale);
        }
        if (!empirical && kind == "gaussian") out << ",\"sd\":" << fmt(sd);
        if (empirical) {
            size_t atoms = 0;
            check(tb_dist_atom_count(d, &atoms));
            double shift = 0.0;
            check(tb_dist_centering_shift(d, &shift));
            out << ",\"data\":\"" << data_path << "\",\"atoms\":" << atoms
                << ",\"centering_shift\":" << fmt(shift);
        }
        double ex2 = 0.0;
        check(tb_dist_second_moment(d, &ex2));
        out << ",\"second_moment\":" << fmt(ex2) << "}";
        return out.str();
    }
};

struct GainOptions {
    double delta = 0.0;
    double xz = 0.0;
    bool has_delta = false;
    bool has_xz = false;

    void attach(CLI::App* cmd) {
        auto* od = cmd->add_option("--delta", delta,
                                   "normalized short-term gain in [0,1]");
        auto* ox = cmd->add_option("--xz", xz, "raw short-term gain E_p(xz)");
        od->excludes(ox);
        ox->excludes(od);
        cmd->callback([this, od, ox]() {
            has_delta = od->count() > 0;
            has_xz = ox->count() > 0;
        });
    }

    double resolve(tb_dist* d, double z_tilde) const {
        if (has_delta == has_xz) {
            fail_invalid("provide exactly one of --delta or --xz");
        }
        if (has_xz) return xz;
        if (delta < 0.0 || delta > 1.0) fail_invalid("--delta must lie in [0,1]");
        double xzm = 0.0;
        check(tb_dist_xz_max(d, z_tilde, &xzm));
        return delta * xzm;
    }
};

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ExitError{3, "{\"code\":\"io\",\"message\":\"cannot write " + path +
                               "\",\"context\":{}}"};
    }
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string solution_json(const char* command, const DistOptions& dist_opts,
                          tb_dist* dist, tb_solution* sol, tb_design* design,
                          const std::string& criterion, bool monotone, bool canonical) {
    double z = 0, xz = 0, delta = 0, xzm = 0;
    check(tb_solution_constraints(sol, &z, &xz, &delta, &xzm));
    double lambda = 0, x2z = 0, crit = 0, eff_inv = 0, rez = 0, rexz = 0;
    check(tb_solution_stats(sol, &lambda, &x2z, &crit, &eff_inv, &rez, &rexz));
    double mom[3] = {0, 0, 0};
    check(tb_design_moments(design, dist, mom));
    StringOut dj;
    check(tb_design_to_json(design, &dj.s));

    std::ostringstream out;
    out << "{\"command\":\"" << command << "\"";
    out << ",\"distribution\":" << dist_opts.echo_json(dist);
    out << ",\"criterion\":\"" << criterion << "\"";
    out << ",\"monotone\":" << (monotone ? "true" : "false");
    out << ",\"canonical\":" << (canonical ? "true" : "false");
    out << ",\"constraints\":{\"z_tilde\":" << fmt(z) << ",\"xz\":" << fmt(xz)
        << ",\"delta\":" << fmt(delta) << ",\"xz_max\":" << fmt(xzm) << "}";
    out << ",\"form\":\"" << tb_solution_form(sol) << "\"";
    if (std::isfinite(lambda)) out << ",\"lambda\":" << fmt(lambda);
    out << ",\"selected_x2z\":" << fmt(x2z);
    out << ",\"criterion_value\":" << fmt(crit);
    out << ",\"eff_inv\":" << fmt(eff_inv);
    out << ",\"moments\":{\"ez\":" << fmt(mom[0]) << ",\"exz\":" << fmt(mom[1])
        << ",\"ex2z\":" << fmt(mom[2]) << "}";
    out << ",\"residuals\":{\"ez\":" << fmt(rez) << ",\"exz\":" << fmt(rexz) << "}";
    out << ",\"design\":" << dj.s << "}";
    return out.str();
}

std::vector<double> parse_beta(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0') {
            fail_invalid("--beta expects four comma-separated numbers");
        }
        out.push_back(v);
    }
    if (out.size() != 4) fail_invalid("--beta expects four comma-separated numbers");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "tiebreak: optimal tie-breaker experimental designs.\n"
        "Computes treatment-probability functions of a scalar running variable\n"
        "under equality constraints on treatment fraction and short-term gain."};
    app.require_subcommand(1);

    // ---- bounds ----
    auto* bounds = app.add_subcommand(
        "bounds", "feasible short-term gain range for a treatment fraction");
    DistOptions bounds_dist;
    bounds_dist.attach(bounds);
    double bounds_z = 0.0;
    bounds->add_option("--z", bounds_z, "treatment fraction parameter E_p(z)")
        ->required();
    std::string bounds_out;
    bounds->add_option("-o,--output", bounds_out, "output path (default stdout)");

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "solve for an optimal design");
    DistOptions solve_dist;
    solve_dist.attach(solve);
    double solve_z = 0.0;
    solve->add_option("--z", solve_z, "treatment fraction parameter E_p(z)")
        ->required();
    GainOptions solve_gain;
    solve_gain.attach(solve);
    std::string solve_criterion = "eff";
    solve->add_option("--criterion", solve_criterion,
                      "eff, d, or custom:<expr over z,xz,x2z,ex2>");
    bool solve_monotone = false;
    solve->add_flag("--monotone", solve_monotone, "restrict to monotone designs");
    bool solve_canonical = false;
    solve->add_flag("--canonical", solve_canonical,
                    "return the canonical two-level / three-strata form");
    std::string solve_out;
    solve->add_option("-o,--output", solve_out, "output path (default stdout)");

    // ---- sweep ----
    auto* sweep = app.add_subcommand(
        "sweep", "trade-off curve over a grid of normalized gains");
    DistOptions sweep_dist;
    sweep_dist.attach(sweep);
    double sweep_z = 0.0;
    sweep->add_option("--z", sweep_z, "treatment fraction parameter E_p(z)")
        ->required();
    std::size_t sweep_grid = 101;
    sweep->add_option("--grid", sweep_grid, "number of delta grid points (>= 2)")
        ->check(CLI::Range((std::size_t)2, (std::size_t)1000000));
    std::string sweep_criterion = "eff";
    sweep->add_option("--criterion", sweep_criterion,
                      "eff, d, or custom:<expr over z,xz,x2z,ex2>");
    std::string sweep_out;
    sweep->add_option("-o,--output", sweep_out, "output path (default stdout)");

    // ---- discrete ----
    auto* discrete = app.add_subcommand(
        "discrete", "solve the fixed-x problem on an empirical sample");
    DistOptions discrete_dist;
    discrete_dist.attach(discrete, /*data_only=*/true);
    double discrete_z = 0.0;
    discrete->add_option("--z", discrete_z, "treatment fraction parameter E_p(z)")
        ->required();
    GainOptions discrete_gain;
    discrete_gain.attach(discrete);
    std::string discrete_criterion = "eff";
    discrete->add_option("--criterion", discrete_criterion,
                         "eff, d, or custom:<expr over z,xz,x2z,ex2>");
    bool discrete_monotone = false;
    discrete->add_flag("--monotone", discrete_monotone,
                       "restrict to monotone designs");
    bool discrete_canonical = false;
    discrete->add_flag("--canonical", discrete_canonical,
                       "return the four-parameter single-jump form");
    std::string discrete_out;
    discrete->add_option("-o,--output", discrete_out, "output path (default stdout)");
    std::string discrete_assign;
    discrete->add_option("--assign", discrete_assign,
                         "also write per-subject probabilities (x,p) CSV here");

    // ---- verify ----
    auto* verify = app.add_subcommand(
        "verify", "Monte Carlo check of the predicted asymptotic variance");
    DistOptions verify_dist;
    verify_dist.attach(verify);
    double verify_z = 0.0;
    verify->add_option("--z", verify_z, "treatment fraction parameter E_p(z)")
        ->required();
    GainOptions verify_gain;
    verify_gain.attach(verify);
    std::string verify_criterion = "eff";
    verify->add_option("--criterion", verify_criterion,
                       "eff, d, or custom:<expr over z,xz,x2z,ex2>");
    bool verify_monotone = false;
    verify->add_flag("--monotone", verify_monotone, "restrict to monotone designs");
    std::size_t verify_n = 10000;
    verify->add_option("--n", verify_n, "subjects per replicate");
    std::size_t verify_reps = 2000;
    verify->add_option("--reps", verify_reps, "replicate count");
    std::uint64_t verify_seed = 1;
    verify->add_option("--seed", verify_seed, "RNG seed");
    double verify_sd = 1.0;
    verify->add_option("--noise-sd", verify_sd, "noise standard deviation");
    std::string verify_beta = "0,0,0,0";
    verify->add_option("--beta", verify_beta, "model coefficients b0,b1,b2,b3");
    std::string verify_out;
    verify->add_option("-o,--output", verify_out, "output path (default stdout)");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e);  // --help
            std::ostringstream msg;
            msg << "{\"code\":\"invalid_argument\",\"message\":\"" << e.what()
                << "\",\"context\":{}}";
            std::cerr << msg.str() << std::endl;
            return 1;
        }

        if (bounds->parsed()) {
            tb_dist* d = bounds_dist.make();
            double xzm = 0.0;
            tb_status s = tb_dist_xz_max(d, bounds_z, &xzm);
            if (s != TB_OK) {
                tb_dist_free(d);
                fail_status(s);
            }
            double ex2 = 0.0;
            check(tb_dist_second_moment(d, &ex2));
            std::ostringstream out;
            out << "{\"z_tilde\":" << fmt(bounds_z) << ",\"xz_max\":" << fmt(xzm)
                << ",\"second_moment\":" << fmt(ex2) << "}";
            tb_dist_free(d);
            emit(out.str(), bounds_out);
            return 0;
        }

        auto run_solve = [&](const char* command, const DistOptions& dopts,
                             double z, const GainOptions& gain,
                             const std::string& criterion, bool monotone,
                             bool canonical, const std::string& out_path,
                             const std::string& assign_path) {
            tb_dist* d = dopts.make();
            tb_criterion* crit = nullptr;
            tb_solution* sol = nullptr;
            tb_design* design = nullptr;
            auto cleanup = [&]() {
                tb_design_free(design);
                tb_solution_free(sol);
                tb_criterion_free(crit);
                tb_dist_free(d);
            };
            try {
                double xz = gain.resolve(d, z);
                check(tb_criterion_parse(criterion.c_str(), &crit));
                check(tb_solve_optimal(d, z, xz, crit, monotone ? 1 : 0,
                                       canonical ? 1 : 0, &sol));
                check(tb_solution_design(sol, &design));
                std::string json = solution_json(command, dopts, d, sol, design,
                                                 criterion, monotone, canonical);
                if (!assign_path.empty()) {
                    StringOut csv;
                    check(tb_assignment_csv(d, design, &csv.s));
                    emit(csv.s, assign_path);
                }
                emit(json, out_path);
            } catch (...) {
                cleanup();
                throw;
            }
            cleanup();
        };

        if (solve->parsed()) {
            run_solve("solve", solve_dist, solve_z, solve_gain, solve_criterion,
                      solve_monotone, solve_canonical, solve_out, "");
            return 0;
        }

        if (discrete->parsed()) {
            if (discrete_dist.data_path.empty()) {
                fail_invalid("discrete requires --data <file>");
            }
            run_solve("discrete", discrete_dist, discrete_z, discrete_gain,
                      discrete_criterion, discrete_monotone, discrete_canonical,
                      discrete_out, discrete_assign);
            return 0;
        }

        if (sweep->parsed()) {
            tb_dist* d = sweep_dist.make();
            tb_criterion* crit = nullptr;
            StringOut csv;
            try {
                check(tb_criterion_parse(sweep_criterion.c_str(), &crit));
                std::vector<double> deltas(sweep_grid);
                for (std::size_t i = 0; i < sweep_grid; ++i) {
                    deltas[i] = (double)i / (double)(sweep_grid - 1);
                }
                check(tb_sweep_csv(d, sweep_z, deltas.data(), deltas.size(), crit,
                                   &csv.s));
                emit(csv.s, sweep_out);
            } catch (...) {
                tb_criterion_free(crit);
                tb_dist_free(d);
                throw;
            }
            tb_criterion_free(crit);
            tb_dist_free(d);
            return 0;
        }

        if (verify->parsed()) {
            std::vector<double> beta = parse_beta(verify_beta);
            tb_dist* d = verify_dist.make();
            tb_criterion* crit = nullptr;
            tb_solution* sol = nullptr;
            tb_design* design = nullptr;
            StringOut report;
            auto cleanup = [&]() {
                tb_design_free(design);
                tb_solution_free(sol);
                tb_criterion_free(crit);
                tb_dist_free(d);
            };
            try {
                double xz = verify_gain.resolve(d, verify_z);
                check(tb_criterion_parse(verify_criterion.c_str(), &crit));
                check(tb_solve_optimal(d, verify_z, xz, crit,
                                       verify_monotone ? 1 : 0, 0, &sol));
                check(tb_solution_design(sol, &design));
                check(tb_simulate_variance(d, design, verify_n, verify_reps,
                                           verify_seed, beta.data(), verify_sd,
                                           nullptr, nullptr, nullptr, &report.s));
                emit(report.s, verify_out);
            } catch (...) {
                cleanup();
                throw;
            }
            cleanup();
            return 0;
        }

        fail_invalid("no subcommand given");
    } catch (const ExitError& e) {
        std::cerr << e.payload << std::endl;
        return e.code;
    }
    return 0;
}
