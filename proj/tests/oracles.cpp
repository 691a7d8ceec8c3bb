#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa, double m,
             double fm, double b, double fb, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, flm, m, fm);
    double right = simpson(m, fm, frm, b, fb);
    if (depth > 48 || std::fabs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adapt(f, a, fa, lm, flm, m, fm, left, tol / 2.0, depth + 1) +
           adapt(f, m, fm, rm, frm, b, fb, right, tol / 2.0, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
    if (a >= b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    return adapt(f, a, fa, m, fm, b, fb, simpson(a, fa, fm, b, fb), tol, 0);
}

namespace {

// integral of quantile(u)^a over [q1, q2]; used for kinds whose quantile is
// bounded near u = 0 (uniform, centered Weibull)
double quantile_domain_moment(const tiebreak::Distribution& f, int a, double q1,
                              double q2, double tol) {
    return integrate([&](double u) { return std::pow(f.quantile(u), a); }, q1, q2,
                     tol);
}

double gaussian_density_moment(double sd, int a, double lo, double hi, double tol) {
    const double c = 1.0 / (sd * std::sqrt(2.0 * M_PI));
    return integrate(
        [&](double x) {
            return std::pow(x, a) * c * std::exp(-0.5 * x * x / (sd * sd));
        },
        lo, hi, tol);
}

}  // namespace

double truncated_moment_quad(const tiebreak::Distribution& f, int a, double t,
                             double tol) {
    using Kind = tiebreak::Distribution::Kind;
    switch (f.kind()) {
        case Kind::uniform:
        case Kind::weibull: {
            double qhi = f.cdf(t);
            return quantile_domain_moment(f, a, 0.0, qhi, tol);
        }
        case Kind::gaussian: {
            double sd = f.param1();
            double lo = -42.0 * sd;
            if (t <= lo) return 0.0;
            return gaussian_density_moment(sd, a, lo, std::min(t, 42.0 * sd), tol);
        }
        case Kind::empirical: {
            double sum = 0.0;
            const auto& vals = f.values();
            const auto& ms = f.masses();
            for (std::size_t i = 0; i < vals.size(); ++i) {
                if (vals[i] < t) sum += ms[i] * std::pow(vals[i], a);
            }
            return sum;
        }
    }
    return 0.0;
}

double design_moment(const tiebreak::Distribution& f, const tiebreak::DesignFunction& p,
                     int a) {
    using Kind = tiebreak::Distribution::Kind;
    if (f.kind() == Kind::empirical) {
        double sum = 0.0;
        const auto& vals = f.values();
        const auto& ms = f.masses();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            sum += ms[i] * std::pow(vals[i], a) * p(vals[i]);
        }
        return sum;
    }

    const auto& bps = p.breakpoints();
    const auto& levels = p.levels();
    double total = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == 0.0) continue;
        double lo_q = (i == 0) ? 0.0 : f.cdf(bps[i - 1]);
        double hi_q = (i == bps.size()) ? 1.0 : f.cdf(bps[i]);
        if (hi_q <= lo_q) continue;
        double piece;
        if (f.kind() == Kind::gaussian) {
            double sd = f.param1();
            double lo_x = (i == 0) ? -42.0 * sd : std::max(bps[i - 1], -42.0 * sd);
            double hi_x = (i == bps.size()) ? 42.0 * sd : std::min(bps[i], 42.0 * sd);
            piece = gaussian_density_moment(sd, a, lo_x, hi_x, 1e-13);
        } else {
            piece = quantile_domain_moment(f, a, lo_q, hi_q, 1e-13);
        }
        total += levels[i] * piece;
    }
    return total;
}

double det4(const std::array<double, 16>& m) {
    double a[4][4];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) a[i][j] = m[i * 4 + j];
    }
    double det = 1.0;
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        }
        if (a[piv][col] == 0.0) return 0.0;
        if (piv != col) {
            for (int j = 0; j < 4; ++j) std::swap(a[piv][j], a[col][j]);
            det = -det;
        }
        det *= a[col][col];
        for (int r = col + 1; r < 4; ++r) {
            double factor = a[r][col] / a[col][col];
            for (int j = col; j < 4; ++j) a[r][j] -= factor * a[col][j];
        }
    }
    return det;
}

std::array<double, 4> sym_eigenvalues4(const std::array<double, 16>& m) {
    double a[4][4];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) a[i][j] = m[i * 4 + j];
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) off += a[i][j] * a[i][j];
        }
        if (off < 1e-30) break;
        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < 4; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::array<double, 4> ev{a[0][0], a[1][1], a[2][2], a[3][3]};
    std::sort(ev.begin(), ev.end());
    return ev;
}

std::array<double, 4> qr_solve_two_line(const std::vector<double>& x,
                                        const std::vector<double>& z,
                                        const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> a(n * 4);
    std::vector<double> rhs = y;
    for (std::size_t i = 0; i < n; ++i) {
        a[i * 4 + 0] = 1.0;
        a[i * 4 + 1] = x[i];
        a[i * 4 + 2] = z[i];
        a[i * 4 + 3] = x[i] * z[i];
    }
    // Householder QR, applied to rhs as we go.
    for (int col = 0; col < 4; ++col) {
        double norm = 0.0;
        for (std::size_t i = col; i < n; ++i) norm += a[i * 4 + col] * a[i * 4 + col];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw std::runtime_error("qr: rank deficient");
        double alpha = a[col * 4 + col] > 0 ? -norm : norm;
        std::vector<double> v(n, 0.0);
        v[col] = a[col * 4 + col] - alpha;
        for (std::size_t i = col + 1; i < n; ++i) v[i] = a[i * 4 + col];
        double vtv = 0.0;
        for (std::size_t i = col; i < n; ++i) vtv += v[i] * v[i];
        if (vtv == 0.0) continue;
        for (int j = col; j < 4; ++j) {
            double dot = 0.0;
            for (std::size_t i = col; i < n; ++i) dot += v[i] * a[i * 4 + j];
            double factor = 2.0 * dot / vtv;
            for (std::size_t i = col; i < n; ++i) a[i * 4 + j] -= factor * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = col; i < n; ++i) dot += v[i] * rhs[i];
        double factor = 2.0 * dot / vtv;
        for (std::size_t i = col; i < n; ++i) rhs[i] -= factor * v[i];
    }
    std::array<double, 4> beta{};
    for (int i = 3; i >= 0; --i) {
        double sum = rhs[i];
        for (int j = i + 1; j < 4; ++j) sum -= a[i * 4 + j] * beta[j];
        beta[i] = sum / a[i * 4 + i];
    }
    return beta;
}

double grid_argmax(const std::function<double(double)>& f, double lo, double hi,
                   int points) {
    double best_x = lo, best_v = f(lo);
    for (int i = 1; i < points; ++i) {
        double x = lo + (hi - lo) * i / (points - 1);
        double v = f(x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return best_x;
}

}  // namespace oracle
