#pragma once

#include <string>
#include <vector>

#include "tiebreak/solve.hpp"

namespace tiebreak {

// Fixed-x problem instance: an empirical running-variable distribution
// (sorted distinct values, positive masses, mean zero) with cached prefix
// sums for constant-time moment evaluation of candidate designs.
class DiscreteInstance {
public:
    explicit DiscreteInstance(Distribution dist);
    static DiscreteInstance from_values(std::vector<double> values);

    const Distribution& dist() const { return dist_; }
    std::size_t size() const { return dist_.atom_count(); }
    const std::vector<double>& values() const { return dist_.values(); }
    const std::vector<double>& masses() const { return dist_.masses(); }
    // inclusive prefix sum of m_j * v_j^a over j <= i
    double prefix(int a, std::size_t i) const { return dist_.prefix_sum(a, i); }

private:
    Distribution dist_;
};

// Single-jump search on the sorted support: binary search for the jump
// atom, then a closed-form solve of the level and atom value from the two
// equality constraints. O(n) given the prefix sums. Non-monotone kinds use
// the quantile-window scheme with fractional boundary atoms.
DesignFunction solve_extremal_discrete(const DiscreteInstance& inst,
                                       const Constraints& c, ExtremalKind kind);

// Blend of the discrete extremal pair; with `canonical` set, instead
// returns the four-parameter single-jump design (l', u', t', eps') found by
// looping over candidate jump atoms (monotone) or the three-strata
// quantile-window design (unconstrained).
OptimalDesignResult optimal_design_discrete(const DiscreteInstance& inst,
                                            const Constraints& c,
                                            const CriterionSpec& spec, bool monotone,
                                            bool canonical = false);

struct LpSolution {
    double objective;  // optimal E_p(x^2 z)
    std::vector<double> p;
};

// Test oracle: dense two-phase simplex with Bland's rule over p in [0,1]^n
// (plus chain constraints p_i <= p_{i+1} when monotone), optimizing
// E_p(x^2 z) subject to the two equality constraints. Instances are capped
// at 200 support points.
LpSolution lp_oracle_discrete(const DiscreteInstance& inst, const Constraints& c,
                              bool maximize, bool monotone);

// Per-subject assignment probabilities as "x,p" CSV rows (centered scale).
std::string assignment_csv(const DiscreteInstance& inst, const DesignFunction& p);

}  // namespace tiebreak
