#pragma once

#include <memory>
#include <string>
#include <vector>

namespace tiebreak {

// Running-variable distribution F. All built-ins are mean-centered so that
// E(x) = 0; empirical samples are centered at construction and the applied
// shift is recorded. Immutable after construction and cheap to copy.
class Distribution {
public:
    enum class Kind { uniform, weibull, gaussian, empirical };

    // U(-1, 1).
    static Distribution uniform();
    // Weibull(shape, scale) shifted left by its mean scale*Gamma(1 + 1/shape).
    static Distribution weibull(double shape, double scale);
    // Normal(0, sd^2).
    static Distribution gaussian(double sd);
    // Empirical sample; values are mean-centered, duplicates merged into
    // atoms with mass k/n. Requires n >= 2 and at least two distinct values.
    static Distribution empirical(std::vector<double> values);
    // Empirical with explicit masses (must be positive and sum to 1);
    // centered by subtracting the weighted mean.
    static Distribution empirical_weighted(std::vector<double> values,
                                           std::vector<double> masses);

    Kind kind() const;
    bool discrete() const { return kind() == Kind::empirical; }

    double second_moment() const;
    double support_lo() const;  // may be -inf
    double support_hi() const;  // may be +inf
    double centering_shift() const;
    // E(|x|^3) < infinity; holds for every built-in kind. Canonical-form
    // solvers require it.
    bool has_third_moment() const { return true; }

    double cdf(double s) const;         // Pr(x <= s), right-continuous
    double cdf_strict(double s) const;  // Pr(x < s)
    double atom_mass(double s) const;   // Pr(x = s), zero for continuous kinds
    // inf{s : F(s) >= q}; q=0 gives support_lo, q=1 gives support_hi.
    double quantile(double q) const;

    // E(x^a * 1(x < t)) for a in {0,1,2}, or with <= when include_t is set.
    // t = +inf yields the full moment.
    double truncated_moment(int a, double t, bool include_t = false) const;

    // Integral of quantile(u)^a over u in [q1, q2]. For continuous kinds this
    // equals the truncated-moment difference between the two quantiles; for
    // empirical kinds boundary atoms contribute fractionally. Nondecreasing
    // in q2 for a = 1 windows, the workhorse of the interval solvers.
    double window_moment(int a, double q1, double q2) const;

    // Empirical accessors (validation error for continuous kinds).
    const std::vector<double>& values() const;
    const std::vector<double>& masses() const;
    std::size_t atom_count() const;
    // Inclusive prefix sum of m_j * v_j^a over j <= i.
    double prefix_sum(int a, std::size_t i) const;

    // Distribution parameters for reporting (shape/scale, sd).
    double param1() const;
    double param2() const;

    struct Impl;  // opaque; defined in distribution.cpp

private:
    explicit Distribution(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

// Reads one numeric value per line, or a single-column CSV with an optional
// header row. Rejects other content with the offending line number.
std::vector<double> read_values_file(const std::string& path);

}  // namespace tiebreak
