#include "tiebreak/criteria.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <vector>

#include "tiebreak/errors.hpp"
#include "tiebreak/root_finding.hpp"

namespace tiebreak {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

InfoMatrix info_matrix(const MomentTriple& t, double ex2) {
    if (!(ex2 > 0.0)) throw validation_error("info_matrix requires E(x^2) > 0");
    InfoMatrix out;
    auto set = [&](int r, int c, double v) {
        out.m[r * 4 + c] = v;
        out.m[c * 4 + r] = v;
    };
    set(0, 0, 1.0);
    set(1, 1, ex2);
    set(2, 2, 1.0);
    set(3, 3, ex2);
    set(0, 1, 0.0);
    set(2, 3, 0.0);
    set(0, 2, t.ez);
    set(0, 3, t.exz);
    set(1, 2, t.exz);
    set(1, 3, t.ex2z);
    return out;
}

double m11(double z_tilde, double xz, double ex2) {
    return 1.0 - z_tilde * z_tilde - xz * xz / ex2;
}

double det_m(double z_tilde, double xz, double x2z, double ex2) {
    if (!(ex2 > 0.0)) throw validation_error("det_m requires E(x^2) > 0");
    double one_mz2 = 1.0 - z_tilde * z_tilde;
    double xz2 = xz * xz;
    return -one_mz2 * x2z * x2z / ex2 - 2.0 * z_tilde * xz2 * x2z / ex2 +
           ex2 * one_mz2 + xz2 * (xz2 / ex2 - 2.0);
}

double a_star(double z_tilde, double xz) {
    if (!(std::fabs(z_tilde) < 1.0)) {
        throw validation_error("a_star requires |z_tilde| < 1");
    }
    return -z_tilde * xz * xz / (1.0 - z_tilde * z_tilde);
}

CriterionSpec::CriterionSpec(Kind kind, std::string label,
                             std::function<double(double, double, double, double)> fn)
    : kind_(kind), label_(std::move(label)), fn_(std::move(fn)) {}

CriterionSpec CriterionSpec::eff() { return CriterionSpec(Kind::eff, "eff", {}); }

CriterionSpec CriterionSpec::d_optimality() {
    return CriterionSpec(Kind::d_opt, "d", {});
}

CriterionSpec CriterionSpec::custom(
    std::function<double(double, double, double, double)> fn, std::string label) {
    if (!fn) throw validation_error("custom criterion needs a function");
    return CriterionSpec(Kind::custom, std::move(label), std::move(fn));
}

CriterionSpec CriterionSpec::custom_matrix(std::function<double(const InfoMatrix&)> fn,
                                           std::string label) {
    if (!fn) throw validation_error("custom criterion needs a function");
    auto wrapped = [fn = std::move(fn)](double z, double xz, double x2z, double ex2) {
        MomentTriple t{z, xz, x2z};
        return fn(info_matrix(t, ex2));
    };
    return CriterionSpec(Kind::custom, std::move(label), std::move(wrapped));
}

double CriterionSpec::value(double z_tilde, double xz, double x2z, double ex2) const {
    switch (kind_) {
        case Kind::eff: {
            double m = m11(z_tilde, xz, ex2);
            if (!(m > 0.0)) {
                throw infeasible_error(
                    "Eff undefined: M11 <= 0 means the constraints lie outside the "
                    "feasible input space",
                    {{"m11", m}, {"z_tilde", z_tilde}, {"xz", xz}});
            }
            return det_m(z_tilde, xz, x2z, ex2) / m;
        }
        case Kind::d_opt: {
            double d = ex2 * det_m(z_tilde, xz, x2z, ex2);
            return d > 0.0 ? std::log(d) : kNegInf;
        }
        case Kind::custom:
            return fn_(z_tilde, xz, x2z, ex2);
    }
    return 0.0;
}

double CriterionSpec::value(const MomentTriple& t, double ex2) const {
    return value(t.ez, t.exz, t.ex2z, ex2);
}

double select_x2z(const CriterionSpec& spec, double z_tilde, double xz, double lo,
                  double hi, double ex2) {
    if (lo > hi) {
        throw infeasible_error("empty attainable interval for E_p(x^2 z)",
                               {{"lo", lo}, {"hi", hi}});
    }
    if (lo == hi) return lo;
    if (spec.kind() != CriterionSpec::Kind::custom) {
        // det(M) is a concave quadratic in x2z, so both Eff and D peak at the
        // clamped a*.
        return std::clamp(a_star(z_tilde, xz), lo, hi);
    }
    const int grid_n = 1024;
    double best_x = lo, best_v = kNegInf;
    for (int i = 0; i <= grid_n; ++i) {
        double x = lo + (hi - lo) * i / grid_n;
        double v = spec.value(z_tilde, xz, x, ex2);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    double step = (hi - lo) / grid_n;
    double a = std::max(lo, best_x - step);
    double b = std::min(hi, best_x + step);
    double refined = brent_minimize(
        [&](double x) { return -spec.value(z_tilde, xz, x, ex2); }, a, b, 1e-12);
    if (spec.value(z_tilde, xz, refined, ex2) >= best_v) return refined;
    return best_x;
}

namespace {

// Recursive-descent evaluator for "custom:<expr>" criterion strings.
class ExprParser {
public:
    explicit ExprParser(std::string text) : text_(std::move(text)) {}

    std::function<double(double, double, double, double)> parse() {
        pos_ = 0;
        auto node = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) {
            throw validation_error("criterion expression: trailing input at position " +
                                   std::to_string(pos_));
        }
        return node;
    }

private:
    using Node = std::function<double(double, double, double, double)>;

    std::string text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_])) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Node parse_sum() {
        Node left = parse_product();
        for (;;) {
            if (eat('+')) {
                Node right = parse_product();
                left = [left, right](double z, double xz, double x2z, double e) {
                    return left(z, xz, x2z, e) + right(z, xz, x2z, e);
                };
            } else if (eat('-')) {
                Node right = parse_product();
                left = [left, right](double z, double xz, double x2z, double e) {
                    return left(z, xz, x2z, e) - right(z, xz, x2z, e);
                };
            } else {
                return left;
            }
        }
    }

    Node parse_product() {
        Node left = parse_power();
        for (;;) {
            if (eat('*')) {
                Node right = parse_power();
                left = [left, right](double z, double xz, double x2z, double e) {
                    return left(z, xz, x2z, e) * right(z, xz, x2z, e);
                };
            } else if (eat('/')) {
                Node right = parse_power();
                left = [left, right](double z, double xz, double x2z, double e) {
                    return left(z, xz, x2z, e) / right(z, xz, x2z, e);
                };
            } else {
                return left;
            }
        }
    }

    Node parse_power() {
        Node base = parse_unary();
        if (eat('^')) {
            Node exp = parse_power();  // right-associative
            return [base, exp](double z, double xz, double x2z, double e) {
                return std::pow(base(z, xz, x2z, e), exp(z, xz, x2z, e));
            };
        }
        return base;
    }

    Node parse_unary() {
        if (eat('-')) {
            Node inner = parse_unary();
            return [inner](double z, double xz, double x2z, double e) {
                return -inner(z, xz, x2z, e);
            };
        }
        eat('+');
        return parse_atom();
    }

    Node parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) {
            throw validation_error("criterion expression: unexpected end of input");
        }
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Node inner = parse_sum();
            if (!eat(')')) throw validation_error("criterion expression: missing ')'");
            return inner;
        }
        if (std::isdigit((unsigned char)c) || c == '.') {
            const char* start = text_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            pos_ += end - start;
            return [v](double, double, double, double) { return v; };
        }
        if (std::isalpha((unsigned char)c)) {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_')) {
                ++pos_;
            }
            std::string name = text_.substr(start, pos_ - start);
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == '(') return parse_call(name);
            if (name == "z") return [](double z, double, double, double) { return z; };
            if (name == "xz") return [](double, double xz, double, double) { return xz; };
            if (name == "x2z") {
                return [](double, double, double x2z, double) { return x2z; };
            }
            if (name == "ex2") return [](double, double, double, double e) { return e; };
            throw validation_error("criterion expression: unknown symbol '" + name + "'");
        }
        throw validation_error(std::string("criterion expression: unexpected '") + c +
                               "'");
    }

    Node parse_call(const std::string& name) {
        if (!eat('(')) throw validation_error("criterion expression: expected '('");
        std::vector<Node> args;
        if (!eat(')')) {
            do {
                args.push_back(parse_sum());
            } while (eat(','));
            if (!eat(')')) throw validation_error("criterion expression: missing ')'");
        }
        auto need = [&](std::size_t n) {
            if (args.size() != n) {
                throw validation_error("criterion expression: " + name + " takes " +
                                       std::to_string(n) + " argument(s)");
            }
        };
        if (name == "log") {
            need(1);
            auto a = args[0];
            return [a](double z, double xz, double x2z, double e) {
                return std::log(a(z, xz, x2z, e));
            };
        }
        if (name == "exp") {
            need(1);
            auto a = args[0];
            return [a](double z, double xz, double x2z, double e) {
                return std::exp(a(z, xz, x2z, e));
            };
        }
        if (name == "sqrt") {
            need(1);
            auto a = args[0];
            return [a](double z, double xz, double x2z, double e) {
                return std::sqrt(a(z, xz, x2z, e));
            };
        }
        if (name == "abs") {
            need(1);
            auto a = args[0];
            return [a](double z, double xz, double x2z, double e) {
                return std::fabs(a(z, xz, x2z, e));
            };
        }
        if (name == "pow") {
            need(2);
            auto a = args[0], b = args[1];
            return [a, b](double z, double xz, double x2z, double e) {
                return std::pow(a(z, xz, x2z, e), b(z, xz, x2z, e));
            };
        }
        if (name == "min") {
            need(2);
            auto a = args[0], b = args[1];
            return [a, b](double z, double xz, double x2z, double e) {
                return std::min(a(z, xz, x2z, e), b(z, xz, x2z, e));
            };
        }
        if (name == "max") {
            need(2);
            auto a = args[0], b = args[1];
            return [a, b](double z, double xz, double x2z, double e) {
                return std::max(a(z, xz, x2z, e), b(z, xz, x2z, e));
            };
        }
        throw validation_error("criterion expression: unknown function '" + name + "'");
    }
};

}  // namespace

CriterionSpec CriterionSpec::parse(const std::string& name) {
    if (name == "eff") return eff();
    if (name == "d") return d_optimality();
    if (name.rfind("custom:", 0) == 0) {
        std::string expr = name.substr(7);
        if (expr.empty()) throw validation_error("custom criterion: empty expression");
        return custom(ExprParser(expr).parse(), name);
    }
    throw validation_error("unknown criterion '" + name +
                           "' (expected eff, d, or custom:<expr>)");
}

}  // namespace tiebreak
