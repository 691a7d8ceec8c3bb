#include "tiebreak/verify.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "internal.hpp"
#include "tiebreak/criteria.hpp"
#include "tiebreak/errors.hpp"
#include "tiebreak/format.hpp"

namespace tiebreak {

namespace {

// splitmix64: counter-based 64-bit stream, one independent instance per
// (seed, replicate, attempt).
struct Splitmix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on (0,1): bin centers of a 2^53 grid
    double uniform01() { return ((next() >> 11) + 0.5) * 0x1.0p-53; }
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    Splitmix64 g{a ^ (b * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL)};
    return g.next();
}

struct GramSystem {
    double g[4][4] = {};
    double h[4] = {};

    void add(const double row[4], double y) {
        for (int i = 0; i < 4; ++i) {
            for (int j = i; j < 4; ++j) g[i][j] += row[i] * row[j];
            h[i] += row[i] * y;
        }
    }

    // Cholesky solve of the symmetric system; false when rank deficient.
    bool solve(double out[4]) const {
        double l[4][4] = {};
        double scale = std::max({g[0][0], g[1][1], g[2][2], g[3][3], 1.0});
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j <= i; ++j) {
                double sum = (j < i) ? g[j][i] : g[i][i];
                for (int k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
                if (i == j) {
                    if (sum <= 1e-12 * scale) return false;
                    l[i][i] = std::sqrt(sum);
                } else {
                    l[i][j] = sum / l[j][j];
                }
            }
        }
        double y[4];
        for (int i = 0; i < 4; ++i) {
            double sum = h[i];
            for (int k = 0; k < i; ++k) sum -= l[i][k] * y[k];
            y[i] = sum / l[i][i];
        }
        for (int i = 3; i >= 0; --i) {
            double sum = y[i];
            for (int k = i + 1; k < 4; ++k) sum -= l[k][i] * out[k];
            out[i] = sum / l[i][i];
        }
        return true;
    }
};

}  // namespace

std::array<double, 4> fit_two_line(std::span<const double> xs,
                                   std::span<const double> zs,
                                   std::span<const double> ys) {
    if (xs.size() != zs.size() || xs.size() != ys.size()) {
        throw validation_error("fit_two_line: input lengths differ");
    }
    if (xs.size() < 4) throw validation_error("fit_two_line: need at least 4 rows");
    GramSystem sys;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double row[4] = {1.0, xs[i], zs[i], xs[i] * zs[i]};
        sys.add(row, ys[i]);
    }
    std::array<double, 4> beta{};
    if (!sys.solve(beta.data())) {
        throw singular_error("fit_two_line: design matrix is rank deficient");
    }
    return beta;
}

SimResult simulate_variance(const Distribution& f, const DesignFunction& p,
                            const SimConfig& cfg) {
    if (cfg.n < 8) throw validation_error("simulate_variance: n must be >= 8");
    if (cfg.reps < 2) throw validation_error("simulate_variance: reps must be >= 2");
    if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) {
        throw validation_error("simulate_variance: noise_sd must be >= 0");
    }
    for (double b : cfg.beta) {
        if (!std::isfinite(b)) throw validation_error("simulate_variance: beta not finite");
    }

    double ex2 = f.second_moment();
    MomentTriple t = moments(p, f);
    double m = m11(t.ez, t.exz, ex2);
    if (!(m > 0.0)) {
        throw infeasible_error("simulate_variance: design is not input-feasible (M11 <= 0)",
                               {{"m11", m}});
    }
    double d = det_m(t.ez, t.exz, t.ex2z, ex2);
    if (!(d > 0.0)) {
        throw singular_error("simulate_variance: expected information matrix is singular",
                             {{"det_m", d}});
    }

    std::vector<double> beta3(cfg.reps);
    std::vector<std::size_t> rejects(cfg.reps, 0);

    detail::parallel_for(cfg.reps, [&](std::size_t r) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt > 100) {
                throw internal_error(
                    "simulate_variance: replicate kept drawing singular designs",
                    {{"replicate", (double)r}});
            }
            Splitmix64 rng{mix(mix(cfg.seed, r), attempt)};
            GramSystem sys;
            std::size_t i = 0;
            while (i < cfg.n) {
                double x1 = f.quantile(rng.uniform01());
                double z1 = rng.uniform01() < p(x1) ? 1.0 : -1.0;
                double x2 = f.quantile(rng.uniform01());
                double z2 = rng.uniform01() < p(x2) ? 1.0 : -1.0;
                // Box-Muller pair
                double u1 = rng.uniform01(), u2 = rng.uniform01();
                double rad = std::sqrt(-2.0 * std::log(u1));
                double e1 = rad * std::cos(2.0 * M_PI * u2);
                double e2 = rad * std::sin(2.0 * M_PI * u2);

                double pair_x[2] = {x1, x2}, pair_z[2] = {z1, z2}, pair_e[2] = {e1, e2};
                for (int k = 0; k < 2 && i < cfg.n; ++k, ++i) {
                    double row[4] = {1.0, pair_x[k], pair_z[k], pair_x[k] * pair_z[k]};
                    double y = cfg.beta[0] + cfg.beta[1] * pair_x[k] +
                               cfg.beta[2] * pair_z[k] + cfg.beta[3] * row[3] +
                               cfg.noise_sd * pair_e[k];
                    sys.add(row, y);
                }
            }
            double beta_hat[4];
            if (sys.solve(beta_hat)) {
                beta3[r] = beta_hat[3];
                break;
            }
            ++rejects[r];
        }
    });

    double mean = 0.0;
    for (double b : beta3) mean += b;
    mean /= (double)cfg.reps;
    double ss = 0.0;
    for (double b : beta3) ss += (b - mean) * (b - mean);
    double var = ss / (double)(cfg.reps - 1);

    SimResult res;
    res.empirical = (double)cfg.n * var;
    res.predicted = cfg.noise_sd * cfg.noise_sd * m / d;
    if (res.predicted != 0.0) {
        res.rel_error = std::fabs(res.empirical - res.predicted) / res.predicted;
    } else {
        res.rel_error = res.empirical == 0.0 ? 0.0 : INFINITY;
    }
    for (std::size_t r : rejects) res.rejected_replicates += r;
    res.rejection_warning =
        res.rejected_replicates * 100 > cfg.reps;  // more than 1% redrawn
    return res;
}

std::string verification_report_json(const DesignFunction& p, const SimConfig& cfg,
                                     const SimResult& result) {
    std::ostringstream out;
    out << "{\"design\":" << p.to_json() << ",\"n\":" << cfg.n
        << ",\"reps\":" << cfg.reps << ",\"seed\":" << cfg.seed
        << ",\"empirical\":" << format_double(result.empirical)
        << ",\"predicted\":" << format_double(result.predicted)
        << ",\"rel_error\":" << format_double(result.rel_error)
        << ",\"rejected_replicates\":" << result.rejected_replicates << "}";
    return out.str();
}

}  // namespace tiebreak
