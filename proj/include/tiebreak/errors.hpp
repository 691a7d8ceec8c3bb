#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace tiebreak {

// Error taxonomy shared by the C++ core, the C API status codes, and the
// CLI exit codes / error payloads. `context` carries numeric diagnostics
// (violated bounds, residuals) for machine-readable reporting.
class error : public std::runtime_error {
public:
    error(std::string code, const std::string& message,
          std::map<std::string, double> context = {})
        : std::runtime_error(message),
          code_(std::move(code)),
          context_(std::move(context)) {}

    const std::string& code() const noexcept { return code_; }
    const std::map<std::string, double>& context() const noexcept { return context_; }

private:
    std::string code_;
    std::map<std::string, double> context_;
};

struct validation_error : error {
    explicit validation_error(const std::string& message,
                              std::map<std::string, double> context = {})
        : error("invalid_argument", message, std::move(context)) {}
};

struct infeasible_error : error {
    explicit infeasible_error(const std::string& message,
                              std::map<std::string, double> context = {})
        : error("infeasible", message, std::move(context)) {}
};

struct io_error : error {
    explicit io_error(const std::string& message,
                      std::map<std::string, double> context = {})
        : error("io", message, std::move(context)) {}
};

struct singular_error : error {
    explicit singular_error(const std::string& message,
                            std::map<std::string, double> context = {})
        : error("singular", message, std::move(context)) {}
};

struct internal_error : error {
    explicit internal_error(const std::string& message,
                            std::map<std::string, double> context = {})
        : error("internal", message, std::move(context)) {}
};

}  // namespace tiebreak
