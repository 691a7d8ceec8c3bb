#include "tiebreak/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "tiebreak/errors.hpp"
#include "tiebreak/format.hpp"

namespace tiebreak {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbTol = 1e-12;

double clamp_prob(double v, const char* what) {
    if (std::isnan(v) || v < -kProbTol || v > 1.0 + kProbTol) {
        throw validation_error(std::string(what) + " must lie in [0,1]", {{"value", v}});
    }
    return std::clamp(v, 0.0, 1.0);
}
}  // namespace

DesignFunction::DesignFunction(std::vector<double> breakpoints,
                               std::vector<double> levels,
                               std::map<double, double> atom_values)
    : breakpoints_(std::move(breakpoints)),
      levels_(std::move(levels)),
      atom_values_(std::move(atom_values)) {
    if (levels_.size() != breakpoints_.size() + 1) {
        throw validation_error("levels must have one more entry than breakpoints");
    }
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (!std::isfinite(breakpoints_[i])) {
            throw validation_error("breakpoints must be finite");
        }
        if (i > 0 && !(breakpoints_[i - 1] < breakpoints_[i])) {
            throw validation_error("breakpoints must be strictly increasing");
        }
    }
    for (double& l : levels_) l = clamp_prob(l, "level");
    for (auto& [x, v] : atom_values_) {
        if (!std::binary_search(breakpoints_.begin(), breakpoints_.end(), x)) {
            throw validation_error("atom value at a non-breakpoint");
        }
        v = clamp_prob(v, "atom value");
    }
}

DesignFunction DesignFunction::constant(double theta) {
    return DesignFunction({}, {theta});
}

DesignFunction DesignFunction::two_level(double lo_level, double hi_level,
                                         double threshold) {
    return DesignFunction({threshold}, {lo_level, hi_level});
}

DesignFunction DesignFunction::interval_indicator(double lo, double hi) {
    if (!(lo < hi)) throw validation_error("interval requires lo < hi");
    return DesignFunction({lo, hi}, {0.0, 1.0, 0.0});
}

DesignFunction DesignFunction::complement_interval(double lo, double hi) {
    if (!(lo < hi)) throw validation_error("interval requires lo < hi");
    return DesignFunction({lo, hi}, {1.0, 0.0, 1.0});
}

DesignFunction DesignFunction::three_level(const Distribution& f, double z_tilde,
                                           double delta) {
    if (!(z_tilde > -1.0 && z_tilde < 1.0)) {
        throw validation_error("three_level requires z_tilde in (-1,1)");
    }
    double dmax = std::min((1.0 - z_tilde) / 2.0, (1.0 + z_tilde) / 2.0);
    if (!(delta >= 0.0 && delta <= dmax + 1e-12)) {
        throw infeasible_error(
            "no feasible three level tie-breaker design: delta must lie in "
            "[0, min((1-z)/2, (1+z)/2)]",
            {{"delta", delta}, {"delta_max", dmax}, {"z_tilde", z_tilde}});
    }
    delta = std::min(delta, dmax);
    double q = (1.0 - z_tilde) / 2.0;
    return design_from_quantile_bands(f, {0.0, q - delta, q + delta, 1.0},
                                      {0.0, 0.5, 1.0});
}

DesignFunction DesignFunction::generalized_rdd(const Distribution& f, double z_tilde) {
    if (!(z_tilde >= -1.0 && z_tilde <= 1.0)) {
        throw validation_error("generalized_rdd requires z_tilde in [-1,1]");
    }
    if (z_tilde == 1.0) return constant(1.0);
    if (z_tilde == -1.0) return constant(0.0);
    double q = (1.0 - z_tilde) / 2.0;
    return design_from_quantile_bands(f, {0.0, q, 1.0}, {0.0, 1.0});
}

double DesignFunction::operator()(double x) const {
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t i = it - breakpoints_.begin();
    if (it != breakpoints_.end() && *it == x) {
        auto a = atom_values_.find(x);
        if (a != atom_values_.end()) return a->second;
    }
    return levels_[i];
}

bool DesignFunction::is_monotone() const {
    for (std::size_t i = 1; i < levels_.size(); ++i) {
        if (levels_[i] < levels_[i - 1] - kProbTol) return false;
    }
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        auto a = atom_values_.find(breakpoints_[i]);
        if (a == atom_values_.end()) continue;
        if (a->second < levels_[i] - kProbTol || a->second > levels_[i + 1] + kProbTol) {
            return false;
        }
    }
    return true;
}

std::string DesignFunction::to_json() const {
    std::ostringstream out;
    out << "{\"breakpoints\":[";
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (i) out << ",";
        out << format_double(breakpoints_[i]);
    }
    out << "],\"levels\":[";
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (i) out << ",";
        out << format_double(levels_[i]);
    }
    out << "],\"atoms\":{";
    bool first = true;
    for (const auto& [x, v] : atom_values_) {
        if (!first) out << ",";
        first = false;
        out << "\"" << format_double(x) << "\":" << format_double(v);
    }
    out << "},\"monotone\":" << (is_monotone() ? "true" : "false") << "}";
    return out.str();
}

DesignFunction DesignFunction::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("design JSON parse error: ") + e.what());
    }
    if (!j.contains("breakpoints") || !j.contains("levels")) {
        throw validation_error("design JSON needs breakpoints and levels");
    }
    std::vector<double> bps = j["breakpoints"].get<std::vector<double>>();
    std::vector<double> lvls = j["levels"].get<std::vector<double>>();
    std::map<double, double> atoms;
    if (j.contains("atoms")) {
        for (auto& [key, val] : j["atoms"].items()) {
            atoms[std::strtod(key.c_str(), nullptr)] = val.get<double>();
        }
    }
    return DesignFunction(std::move(bps), std::move(lvls), std::move(atoms));
}

DesignFunction design_from_quantile_bands(const Distribution& f,
                                          const std::vector<double>& cuts,
                                          const std::vector<double>& levels) {
    if (cuts.size() != levels.size() + 1 || cuts.size() < 2) {
        throw validation_error("quantile bands: need one more cut than levels");
    }
    if (cuts.front() != 0.0 || cuts.back() != 1.0) {
        throw validation_error("quantile bands: cuts must span [0,1]");
    }
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        if (cuts[i] < cuts[i - 1] - 1e-15) {
            throw validation_error("quantile bands: cuts must be nondecreasing");
        }
    }

    if (!f.discrete()) {
        std::vector<double> bps, lvls;
        lvls.push_back(levels.front());
        for (std::size_t j = 1; j + 1 < cuts.size(); ++j) {
            if (cuts[j + 1] <= cuts[j]) continue;  // empty band
            double x = f.quantile(std::max(cuts[j], 0.0));
            if (!bps.empty() && x <= bps.back()) {
                lvls.back() = levels[j];  // zero-probability gap, merge
                continue;
            }
            if (bps.empty() && x <= f.support_lo()) {
                lvls.back() = levels[j];
                continue;
            }
            bps.push_back(x);
            lvls.push_back(levels[j]);
        }
        // collapse equal neighbouring levels
        std::vector<double> cb, cl;
        cl.push_back(lvls[0]);
        for (std::size_t i = 0; i < bps.size(); ++i) {
            if (lvls[i + 1] == cl.back()) continue;
            cb.push_back(bps[i]);
            cl.push_back(lvls[i + 1]);
        }
        return DesignFunction(std::move(cb), std::move(cl));
    }

    // Atomic F: mass-weighted band overlap per atom.
    const auto& vals = f.values();
    const auto& ms = f.masses();
    std::vector<double> pk(vals.size(), 0.0);
    double lo = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        double hi = f.prefix_sum(0, k);
        double acc = 0.0;
        for (std::size_t j = 0; j < levels.size(); ++j) {
            double ov = std::min(hi, cuts[j + 1]) - std::max(lo, cuts[j]);
            if (ov > 0.0) acc += levels[j] * ov;
        }
        pk[k] = std::clamp(acc / ms[k], 0.0, 1.0);
        lo = hi;
    }

    std::vector<double> bps, lvls;
    std::map<double, double> atoms;
    lvls.push_back(pk[0]);
    for (std::size_t k = 1; k < vals.size(); ++k) {
        if (pk[k] == pk[k - 1]) continue;
        bps.push_back(vals[k]);
        lvls.push_back(pk[k]);
        atoms[vals[k]] = pk[k];
    }
    // drop overrides equal to the left level
    for (std::size_t i = 0; i < bps.size(); ++i) {
        auto it = atoms.find(bps[i]);
        if (it != atoms.end() && it->second == lvls[i]) atoms.erase(it);
    }
    return DesignFunction(std::move(bps), std::move(lvls), std::move(atoms));
}

MomentTriple moments(const DesignFunction& p, const Distribution& f) {
    const auto& bps = p.breakpoints();
    const auto& lvls = p.levels();
    double ep[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a <= 2; ++a) {
        double total = 0.0;
        for (std::size_t i = 0; i < lvls.size(); ++i) {
            if (lvls[i] == 0.0) continue;
            double t_lo = (i == 0) ? 0.0 : f.truncated_moment(a, bps[i - 1], true);
            double t_hi = (i == bps.size()) ? f.truncated_moment(a, kInf)
                                            : f.truncated_moment(a, bps[i], false);
            total += lvls[i] * (t_hi - t_lo);
        }
        for (double b : bps) {
            double m = f.atom_mass(b);
            if (m > 0.0) total += p(b) * std::pow(b, a) * m;
        }
        ep[a] = total;
    }
    MomentTriple t;
    t.ez = 2.0 * ep[0] - 1.0;
    t.exz = 2.0 * ep[1];
    t.ex2z = 2.0 * ep[2] - f.second_moment();
    return t;
}

DesignFunction convex_combination(double lambda, const DesignFunction& p,
                                  const DesignFunction& q) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw validation_error("convex_combination requires lambda in [0,1]",
                               {{"lambda", lambda}});
    }
    if (lambda == 1.0) return p;
    if (lambda == 0.0) return q;

    std::vector<double> bps;
    std::merge(p.breakpoints().begin(), p.breakpoints().end(),
               q.breakpoints().begin(), q.breakpoints().end(),
               std::back_inserter(bps));
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    auto blend = [&](double x) { return lambda * p(x) + (1.0 - lambda) * q(x); };

    std::vector<double> lvls;
    std::map<double, double> atoms;
    for (std::size_t i = 0; i <= bps.size(); ++i) {
        double probe;
        if (bps.empty()) {
            probe = 0.0;
        } else if (i == 0) {
            probe = bps[0] - 1.0;
        } else if (i == bps.size()) {
            probe = bps.back() + 1.0;
        } else {
            probe = 0.5 * (bps[i - 1] + bps[i]);
        }
        lvls.push_back(blend(probe));
    }
    for (std::size_t i = 0; i < bps.size(); ++i) {
        double v = blend(bps[i]);
        if (v != lvls[i]) atoms[bps[i]] = v;
    }
    return DesignFunction(std::move(bps), std::move(lvls), std::move(atoms));
}

bool equivalent(const DesignFunction& p, const DesignFunction& q,
                const Distribution& f, double tol) {
    MomentTriple mp = moments(p, f), mq = moments(q, f);
    if (std::fabs(mp.ez - mq.ez) > tol || std::fabs(mp.exz - mq.exz) > tol ||
        std::fabs(mp.ex2z - mq.ex2z) > tol) {
        return false;
    }
    if (f.discrete()) {
        for (double v : f.values()) {
            if (std::fabs(p(v) - q(v)) > tol) return false;
        }
        return true;
    }
    std::vector<double> probes;
    probes.push_back(f.quantile(1e-6));
    probes.push_back(f.quantile(1.0 - 1e-6));
    auto add_bps = [&](const DesignFunction& d) {
        for (double b : d.breakpoints()) {
            if (b > f.support_lo() && b < f.support_hi()) probes.push_back(b);
        }
    };
    add_bps(p);
    add_bps(q);
    std::sort(probes.begin(), probes.end());
    std::vector<double> pts;
    for (std::size_t i = 0; i + 1 < probes.size(); ++i) {
        pts.push_back(0.5 * (probes[i] + probes[i + 1]));
    }
    pts.push_back(probes.front());
    pts.push_back(probes.back());
    for (double x : pts) {
        if (std::fabs(p(x) - q(x)) > tol) return false;
    }
    return true;
}

}  // namespace tiebreak
