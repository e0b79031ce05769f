#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kspod {

/// Base for every failure that is a property of the data or model rather than
/// a programming or usage error. Precondition violations on plain arguments
/// are reported with std::invalid_argument instead.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FormatErrc {
    Io,
    BadMagic,
    Truncated,
    TrailingData,
    NonFinite,
    DimensionOverflow,
    InvalidContent,
};

const char* to_string(FormatErrc code);

class FormatError : public DomainError {
public:
    FormatError(FormatErrc code, const std::string& what)
        : DomainError(std::string(to_string(code)) + ": " + what), code_(code) {}

    FormatErrc code() const noexcept { return code_; }

private:
    FormatErrc code_;
};

/// Correlation matrix could not be factorized.
class IllConditionedError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Likelihood optimization never found a factorizable parameter vector.
class FitError : public DomainError {
public:
    FitError(const std::string& what, std::vector<double> best_theta)
        : DomainError(what), best_theta_(std::move(best_theta)) {}

    const std::vector<double>& best_theta() const noexcept { return best_theta_; }

private:
    std::vector<double> best_theta_;
};

class IncompatibleCasesError : public DomainError {
public:
    using DomainError::DomainError;
};

class GridMismatchError : public DomainError {
public:
    using DomainError::DomainError;
};

class DegenerateWeightsError : public DomainError {
public:
    DegenerateWeightsError(const std::string& what, std::vector<double> x_new)
        : DomainError(what), x_new_(std::move(x_new)) {}

    const std::vector<double>& x_new() const noexcept { return x_new_; }

private:
    std::vector<double> x_new_;
};

class UndefinedBaselineError : public DomainError {
public:
    using DomainError::DomainError;
};

class UnsupportedGridError : public DomainError {
public:
    using DomainError::DomainError;
};

class NoFilmError : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace kspod
