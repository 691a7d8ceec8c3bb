#include "tiebreak/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>

#include "tiebreak/errors.hpp"
#include "tiebreak/special_functions.hpp"

namespace tiebreak {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw validation_error(std::string(name) + " must be finite");
    }
}
}  // namespace

struct Distribution::Impl {
    Kind kind = Kind::uniform;
    double p1 = 0.0, p2 = 0.0;  // (lo,hi) / (shape,scale) / (sd,-)
    double ex2 = 0.0;
    double lo = -kInf, hi = kInf;
    double shift = 0.0;   // amount subtracted to center
    double wb_mean = 0.0; // weibull raw mean scale*Gamma(1+1/shape)

    // empirical data: sorted distinct values, positive masses, inclusive
    // prefix sums of m, m*x, m*x^2
    std::vector<double> values, masses;
    std::vector<double> cum0, cum1, cum2;

    double trunc_uniform(int a, double t) const {
        if (t <= -1.0) return 0.0;
        double s = std::min(t, 1.0);
        switch (a) {
            case 0: return (s + 1.0) / 2.0;
            case 1: return (s * s - 1.0) / 4.0;
            default: return (s * s * s + 1.0) / 6.0;
        }
    }

    double trunc_gaussian(int a, double t) const {
        double sd = p1;
        if (t == kInf) return a == 0 ? 1.0 : (a == 1 ? 0.0 : sd * sd);
        if (t == -kInf) return 0.0;
        double u = t / sd;
        switch (a) {
            case 0: return normal_cdf(u);
            case 1: return -sd * normal_pdf(u);
            default: return sd * sd * (normal_cdf(u) - u * normal_pdf(u));
        }
    }

    // Raw Weibull moment E(X^m 1(X < s)) = scale^m Gamma(1+m/k) P(1+m/k, (s/scale)^k).
    double trunc_weibull_raw(int m, double s_raw) const {
        double k = p1, scale = p2;
        double full = std::pow(scale, m) * std::tgamma(1.0 + m / k);
        if (s_raw <= 0.0) return 0.0;
        if (s_raw == kInf) return full;
        double y = std::pow(s_raw / scale, k);
        return full * gamma_p(1.0 + m / k, y);
    }

    double trunc_weibull(int a, double t) const {
        double mu = wb_mean;
        double s_raw = (t == kInf) ? kInf : t + mu;
        double t0 = trunc_weibull_raw(0, s_raw);
        if (a == 0) return t0;
        double t1 = trunc_weibull_raw(1, s_raw);
        if (a == 1) return t1 - mu * t0;
        double t2 = trunc_weibull_raw(2, s_raw);
        return t2 - 2.0 * mu * t1 + mu * mu * t0;
    }

    // index of first value >= t
    std::size_t lower_idx(double t) const {
        return std::lower_bound(values.begin(), values.end(), t) - values.begin();
    }

    double cum(int a, std::size_t count) const {
        if (count == 0) return 0.0;
        const auto& c = (a == 0) ? cum0 : (a == 1 ? cum1 : cum2);
        return c[count - 1];
    }

    double trunc_empirical(int a, double t, bool include_t) const {
        if (t == kInf) return cum(a, values.size());
        std::size_t idx = lower_idx(t);
        double s = cum(a, idx);
        if (include_t && idx < values.size() && values[idx] == t) {
            s += masses[idx] * std::pow(t, a);
        }
        return s;
    }

    // integral of quantile(u)^a over [0, q]
    double lorenz(int a, double q) const {
        if (q <= 0.0) return 0.0;
        if (q >= 1.0) return cum(a, values.size());
        std::size_t k = std::lower_bound(cum0.begin(), cum0.end(), q) - cum0.begin();
        double below = k > 0 ? cum0[k - 1] : 0.0;
        return cum(a, k) + (q - below) * std::pow(values[k], a);
    }
};

Distribution::Distribution(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Distribution Distribution::uniform() {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::uniform;
    impl->p1 = -1.0;
    impl->p2 = 1.0;
    impl->lo = -1.0;
    impl->hi = 1.0;
    impl->ex2 = 1.0 / 3.0;
    return Distribution(std::move(impl));
}

Distribution Distribution::weibull(double shape, double scale) {
    require_finite(shape, "shape");
    require_finite(scale, "scale");
    if (shape <= 0.0 || scale <= 0.0) {
        throw validation_error("weibull requires shape > 0 and scale > 0");
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::weibull;
    impl->p1 = shape;
    impl->p2 = scale;
    double g1 = std::tgamma(1.0 + 1.0 / shape);
    double g2 = std::tgamma(1.0 + 2.0 / shape);
    if (!std::isfinite(g2)) {
        throw validation_error("weibull shape too small: second moment overflows");
    }
    impl->wb_mean = scale * g1;
    impl->shift = impl->wb_mean;
    impl->lo = -impl->wb_mean;
    impl->hi = kInf;
    impl->ex2 = scale * scale * (g2 - g1 * g1);
    return Distribution(std::move(impl));
}

Distribution Distribution::gaussian(double sd) {
    require_finite(sd, "sd");
    if (sd <= 0.0) throw validation_error("gaussian requires sd > 0");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::gaussian;
    impl->p1 = sd;
    impl->ex2 = sd * sd;
    return Distribution(std::move(impl));
}

namespace {

std::shared_ptr<Distribution::Impl> make_empirical_impl(
    std::vector<double> values, std::vector<double> weights) {
    if (values.size() < 2) {
        throw validation_error("empirical sample needs at least 2 values");
    }
    for (double v : values) require_finite(v, "sample value");

    const std::size_t n = values.size();
    bool weighted = !weights.empty();
    if (weighted) {
        if (weights.size() != n) {
            throw validation_error("values and masses differ in length");
        }
        long double total = 0.0L;
        for (double w : weights) {
            require_finite(w, "mass");
            if (w <= 0.0) throw validation_error("masses must be positive");
            total += w;
        }
        if (std::fabs((double)(total - 1.0L)) > 1e-9) {
            throw validation_error("masses must sum to 1");
        }
        for (double& w : weights) w = (double)(w / total);
    } else {
        weights.assign(n, 1.0 / (double)n);
    }

    // Two-pass weighted centering.
    double shift = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        long double mean = 0.0L;
        for (std::size_t i = 0; i < n; ++i) mean += (long double)weights[i] * values[i];
        for (double& v : values) v -= (double)mean;
        shift += (double)mean;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    auto impl = std::make_shared<Distribution::Impl>();
    impl->kind = Distribution::Kind::empirical;
    for (std::size_t i : order) {
        double v = values[i], w = weights[i];
        if (!impl->values.empty() && impl->values.back() == v) {
            impl->masses.back() += w;  // ties merged into atoms
        } else {
            impl->values.push_back(v);
            impl->masses.push_back(w);
        }
    }
    if (impl->values.size() < 2) {
        throw validation_error("all sample values equal: Var(x) = 0 is not allowed");
    }

    long double c0 = 0.0L, c1 = 0.0L, c2 = 0.0L;
    for (std::size_t i = 0; i < impl->values.size(); ++i) {
        double v = impl->values[i], m = impl->masses[i];
        c0 += m;
        c1 += (long double)m * v;
        c2 += (long double)m * v * v;
        impl->cum0.push_back((double)c0);
        impl->cum1.push_back((double)c1);
        impl->cum2.push_back((double)c2);
    }
    impl->cum0.back() = 1.0;
    impl->lo = impl->values.front();
    impl->hi = impl->values.back();
    impl->shift = shift;
    impl->ex2 = impl->cum2.back();
    impl->p1 = (double)impl->values.size();
    if (!(impl->ex2 > 0.0)) {
        throw validation_error("sample variance is zero");
    }
    return impl;
}

}  // namespace

Distribution Distribution::empirical(std::vector<double> values) {
    return Distribution(make_empirical_impl(std::move(values), {}));
}

Distribution Distribution::empirical_weighted(std::vector<double> values,
                                              std::vector<double> masses) {
    if (masses.empty()) throw validation_error("masses must be nonempty");
    return Distribution(make_empirical_impl(std::move(values), std::move(masses)));
}

Distribution::Kind Distribution::kind() const { return impl_->kind; }
double Distribution::second_moment() const { return impl_->ex2; }
double Distribution::support_lo() const { return impl_->lo; }
double Distribution::support_hi() const { return impl_->hi; }
double Distribution::centering_shift() const { return impl_->shift; }
double Distribution::param1() const { return impl_->p1; }
double Distribution::param2() const { return impl_->p2; }

double Distribution::cdf(double s) const {
    if (std::isnan(s)) throw validation_error("cdf: s is NaN");
    return truncated_moment(0, s, true);
}

double Distribution::cdf_strict(double s) const {
    if (std::isnan(s)) throw validation_error("cdf: s is NaN");
    return truncated_moment(0, s, false);
}

double Distribution::atom_mass(double s) const {
    const Impl& im = *impl_;
    if (im.kind != Kind::empirical) return 0.0;
    std::size_t idx = im.lower_idx(s);
    if (idx < im.values.size() && im.values[idx] == s) return im.masses[idx];
    return 0.0;
}

double Distribution::quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw validation_error("quantile: q outside [0,1]", {{"q", q}});
    }
    const Impl& im = *impl_;
    if (q == 0.0) return im.lo;
    if (q == 1.0) return im.hi;
    switch (im.kind) {
        case Kind::uniform:
            return 2.0 * q - 1.0;
        case Kind::gaussian:
            return im.p1 * normal_quantile(q);
        case Kind::weibull: {
            double k = im.p1, scale = im.p2;
            return scale * std::pow(-std::log1p(-q), 1.0 / k) - im.wb_mean;
        }
        case Kind::empirical: {
            std::size_t i =
                std::lower_bound(im.cum0.begin(), im.cum0.end(), q) - im.cum0.begin();
            return im.values[std::min(i, im.values.size() - 1)];
        }
    }
    return 0.0;
}

double Distribution::truncated_moment(int a, double t, bool include_t) const {
    if (a < 0 || a > 2) throw validation_error("truncated_moment: a must be 0, 1, or 2");
    if (std::isnan(t)) throw validation_error("truncated_moment: t is NaN");
    const Impl& im = *impl_;
    switch (im.kind) {
        case Kind::uniform:
            return im.trunc_uniform(a, t);
        case Kind::gaussian:
            return im.trunc_gaussian(a, t);
        case Kind::weibull:
            return im.trunc_weibull(a, t);
        case Kind::empirical:
            return im.trunc_empirical(a, t, include_t);
    }
    return 0.0;
}

double Distribution::window_moment(int a, double q1, double q2) const {
    if (a < 0 || a > 2) throw validation_error("window_moment: a must be 0, 1, or 2");
    q1 = std::clamp(q1, 0.0, 1.0);
    q2 = std::clamp(q2, 0.0, 1.0);
    if (q2 <= q1) return 0.0;
    const Impl& im = *impl_;
    if (im.kind == Kind::empirical) return im.lorenz(a, q2) - im.lorenz(a, q1);
    return truncated_moment(a, quantile(q2)) - truncated_moment(a, quantile(q1));
}

const std::vector<double>& Distribution::values() const {
    if (!discrete()) throw validation_error("values(): distribution is not empirical");
    return impl_->values;
}

const std::vector<double>& Distribution::masses() const {
    if (!discrete()) throw validation_error("masses(): distribution is not empirical");
    return impl_->masses;
}

std::size_t Distribution::atom_count() const {
    return discrete() ? impl_->values.size() : 0;
}

double Distribution::prefix_sum(int a, std::size_t i) const {
    if (!discrete()) throw validation_error("prefix_sum(): distribution is not empirical");
    if (a < 0 || a > 2 || i >= impl_->values.size()) {
        throw validation_error("prefix_sum: index out of range");
    }
    return impl_->cum(a, i + 1);
}

std::vector<double> read_values_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open data file: " + path);
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        std::string field = line.substr(start);
        if (field.find(',') != std::string::npos) {
            throw io_error("expected a single numeric column at line " +
                               std::to_string(lineno),
                           {{"line", (double)lineno}});
        }
        if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
            field = field.substr(1, field.size() - 2);
        }
        const char* s = field.c_str();
        char* end = nullptr;
        double v = std::strtod(s, &end);
        if (end == s || *end != '\0' || !std::isfinite(v)) {
            if (lineno == 1 && out.empty()) continue;  // optional CSV header
            throw io_error("non-numeric value at line " + std::to_string(lineno),
                           {{"line", (double)lineno}});
        }
        out.push_back(v);
    }
    if (out.empty()) throw io_error("no numeric values found in " + path);
    return out;
}

}  // namespace tiebreak
