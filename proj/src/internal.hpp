#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "tiebreak/solve.hpp"

namespace tiebreak::detail {

// Implemented in discrete.cpp: the O(n) single-jump search on atomic F and
// the four-parameter canonical loop.
ExtremalSolution discrete_monotone_extremal(const Distribution& f, const Constraints& c,
                                            bool maximize);
DesignFunction discrete_canonical_monotone(const Distribution& f, const Constraints& c,
                                           double target_x2z);

// Implemented in solve.cpp and shared with the discrete module.
struct BlendDetail {
    OptimalDesignResult result;
    ExtremalSolution lo;
    ExtremalSolution hi;
};
BlendDetail blend_optimal(const Distribution& f, Constraints c, const CriterionSpec& spec,
                          bool monotone);
DesignFunction canonical_three_strata(const Distribution& f, const Constraints& c,
                                      double target_x2z);

inline int default_thread_count() {
    if (const char* env = std::getenv("TIEBREAK_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, 256);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? (int)hw : 1;
}

// Deterministic regardless of thread count: workers write only to their own
// indices.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    int threads = std::min<std::size_t>(default_thread_count(), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += threads) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace tiebreak::detail
