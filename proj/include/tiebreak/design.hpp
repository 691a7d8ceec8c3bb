#pragma once

#include <map>
#include <string>
#include <vector>

#include "tiebreak/distribution.hpp"

namespace tiebreak {

// The three functionals of a design that any efficiency criterion depends
// on: (E_p z, E_p xz, E_p x^2 z).
struct MomentTriple {
    double ez = 0.0;
    double exz = 0.0;
    double ex2z = 0.0;
};

// Piecewise-constant treatment-probability function x -> p(x) in [0,1].
// `levels[i]` holds on the open interval between breakpoints i-1 and i;
// the value exactly at a breakpoint defaults to the level on its left and
// can be overridden per breakpoint (needed when F has an atom there).
class DesignFunction {
public:
    DesignFunction(std::vector<double> breakpoints, std::vector<double> levels,
                   std::map<double, double> atom_values = {});

    static DesignFunction constant(double theta);
    static DesignFunction two_level(double lo_level, double hi_level, double threshold);
    static DesignFunction interval_indicator(double lo, double hi);    // 1 inside
    static DesignFunction complement_interval(double lo, double hi);   // 1 outside
    // Randomization band of width 2*delta in quantile units around the
    // budget quantile (1 - z_tilde)/2, levels 0 / 0.5 / 1. On atomic F the
    // two edge atoms get fractional values so both equality constraints
    // hold exactly.
    static DesignFunction three_level(const Distribution& f, double z_tilde,
                                      double delta);
    // Treats exactly the top (1+z_tilde)/2 of F; a fractional atom value is
    // placed at the threshold when F has an atom there.
    static DesignFunction generalized_rdd(const Distribution& f, double z_tilde);

    double operator()(double x) const;
    bool is_monotone() const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& levels() const { return levels_; }
    const std::map<double, double>& atom_values() const { return atom_values_; }

    // {"breakpoints":[...], "levels":[...], "atoms":{"<x>":v}, "monotone":b}
    // with 17-significant-digit numbers; round-trips bit-exactly.
    std::string to_json() const;
    static DesignFunction from_json(const std::string& text);

private:
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
    std::map<double, double> atom_values_;
};

// Builds the design taking `levels[j]` on the quantile band
// (cuts[j], cuts[j+1]); cuts must start at 0 and end at 1. Cuts through an
// atom of F yield mass-weighted fractional atom values. This is the common
// construction path for every solver output.
DesignFunction design_from_quantile_bands(const Distribution& f,
                                          const std::vector<double>& cuts,
                                          const std::vector<double>& levels);

// Exact moments by truncated-moment sums: E_p(x^a z) = 2 E(x^a p(x)) - E(x^a).
MomentTriple moments(const DesignFunction& p, const Distribution& f);

// lambda * p + (1 - lambda) * q, merged breakpoints.
DesignFunction convex_combination(double lambda, const DesignFunction& p,
                                  const DesignFunction& q);

// F-almost-everywhere equality: moments agree and values agree at F's atoms
// (empirical) or at band midpoints (continuous).
bool equivalent(const DesignFunction& p, const DesignFunction& q,
                const Distribution& f, double tol = 1e-9);

}  // namespace tiebreak
