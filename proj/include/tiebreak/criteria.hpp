#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>

#include "tiebreak/design.hpp"

namespace tiebreak {

// Equality constraints of the design problem: treatment fraction parameter
// z_tilde = E_p(z) and short-term gain xz = E_p(xz) >= 0.
struct Constraints {
    double z_tilde = 0.0;
    double xz = 0.0;
};

// Expected information matrix of the two-line model, sigma^2 = 1, in the
// coordinate order (1, x, z, xz).
struct InfoMatrix {
    std::array<double, 16> m{};
    double at(int r, int c) const { return m[r * 4 + c]; }
};

InfoMatrix info_matrix(const MomentTriple& t, double ex2);

// M = D - C D^-1 C entries as closed forms of the moment triple.
double m11(double z_tilde, double xz, double ex2);
double det_m(double z_tilde, double xz, double x2z, double ex2);

// Unconstrained maximizer of det(M) over E_p(x^2 z):
// a* = -z_tilde * xz^2 / (1 - z_tilde^2).
double a_star(double z_tilde, double xz);

// Efficiency criterion: Eff = det(M)/M11 (c-optimality for the interaction
// coefficient), D = log det(information matrix), or a custom continuous
// function of (z, xz, x2z, ex2).
class CriterionSpec {
public:
    enum class Kind { eff, d_opt, custom };

    static CriterionSpec eff();
    static CriterionSpec d_optimality();
    static CriterionSpec custom(std::function<double(double, double, double, double)> fn,
                                std::string label = "custom");
    // Adapter for criteria written directly against the information matrix.
    static CriterionSpec custom_matrix(std::function<double(const InfoMatrix&)> fn,
                                       std::string label = "custom_matrix");
    // "eff", "d", or "custom:<expr>" where <expr> is an arithmetic expression
    // over z, xz, x2z, ex2 with + - * / ^, parentheses and the functions
    // log, exp, sqrt, abs, pow, min, max.
    static CriterionSpec parse(const std::string& name);

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    double value(double z_tilde, double xz, double x2z, double ex2) const;
    double value(const MomentTriple& t, double ex2) const;

private:
    CriterionSpec(Kind kind, std::string label,
                  std::function<double(double, double, double, double)> fn);
    Kind kind_;
    std::string label_;
    std::function<double(double, double, double, double)> fn_;
};

// argmax of the criterion over x2z in [lo, hi]. For Eff and D this is the
// clamp of a* to the interval; custom criteria get a 1024-point grid scan
// refined by Brent's method.
double select_x2z(const CriterionSpec& spec, double z_tilde, double xz, double lo,
                  double hi, double ex2);

}  // namespace tiebreak
