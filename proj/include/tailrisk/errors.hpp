#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tailrisk {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid input row; `row` is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class OrderError : public Error {
public:
    OrderError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

#define TAILRISK_DEFINE_ERROR(Name)          \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    }

TAILRISK_DEFINE_ERROR(InsufficientData);
TAILRISK_DEFINE_ERROR(DomainError);
TAILRISK_DEFINE_ERROR(InsufficientTail);
TAILRISK_DEFINE_ERROR(TailError);
TAILRISK_DEFINE_ERROR(TailMeanUndefined);
TAILRISK_DEFINE_ERROR(DegenerateWeights);
TAILRISK_DEFINE_ERROR(SingularDesign);
TAILRISK_DEFINE_ERROR(ForecastError);
TAILRISK_DEFINE_ERROR(DegenerateBandwidth);
TAILRISK_DEFINE_ERROR(AlignmentError);
TAILRISK_DEFINE_ERROR(EmptyResiduals);
TAILRISK_DEFINE_ERROR(DegenerateResiduals);
TAILRISK_DEFINE_ERROR(NotApplicable);
TAILRISK_DEFINE_ERROR(ConfigError);

#undef TAILRISK_DEFINE_ERROR

/// Optimizer gave up. Carries the best iterate found (in the model's natural
/// parameterization) so callers can decide whether to use it.
class FitError : public Error {
public:
    FitError(const std::string& what, std::vector<double> best, double best_objective)
        : Error(what), best_(std::move(best)), best_objective_(best_objective) {}
    [[nodiscard]] const std::vector<double>& best() const noexcept { return best_; }
    [[nodiscard]] double best_objective() const noexcept { return best_objective_; }
    [[nodiscard]] bool nonconverged() const noexcept { return true; }

private:
    std::vector<double> best_;
    double best_objective_;
};

}  // namespace tailrisk
