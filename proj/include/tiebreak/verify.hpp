#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "tiebreak/design.hpp"

namespace tiebreak {

struct SimConfig {
    std::size_t n = 10000;
    std::size_t reps = 2000;
    std::uint64_t seed = 1;
    std::array<double, 4> beta{0.0, 0.0, 0.0, 0.0};
    double noise_sd = 1.0;
};

// OLS fit of y = b0 + b1 x + b2 z + b3 x z via the 4x4 normal equations.
// Throws singular_error on rank deficiency (e.g. all z equal).
std::array<double, 4> fit_two_line(std::span<const double> xs,
                                   std::span<const double> zs,
                                   std::span<const double> ys);

struct SimResult {
    double empirical = 0.0;   // n * sample variance of beta3_hat across replicates
    double predicted = 0.0;   // noise_sd^2 * M11 / det(M)
    double rel_error = 0.0;
    std::size_t rejected_replicates = 0;
    bool rejection_warning = false;  // more than 1% of replicates redrawn
};

// Simulates the two-line model under design p: x ~ F, z = +1 with
// probability p(x), eps ~ N(0, noise_sd^2). Deterministic for a fixed seed;
// replicate r draws from an independent stream derived from (seed, r), so
// parallel runs reproduce serial results exactly. Singular replicates are
// redrawn and counted.
SimResult simulate_variance(const Distribution& f, const DesignFunction& p,
                            const SimConfig& cfg);

// {"design":..., "n":..., "reps":..., "seed":..., "empirical":...,
//  "predicted":..., "rel_error":..., "rejected_replicates":...}
std::string verification_report_json(const DesignFunction& p, const SimConfig& cfg,
                                     const SimResult& result);

}  // namespace tiebreak
