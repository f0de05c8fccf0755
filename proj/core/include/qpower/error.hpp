#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpower {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An inconsistent (codebook, multipliers) pair: a threshold that is not
// positive, a non-monotone threshold sequence, or a violated admissibility
// condition. level() is the 1-based index of the offending level.
class StructuralError : public Error {
public:
    StructuralError(const std::string& what, std::size_t level)
        : Error(what), level_(level) {}
    std::size_t level() const noexcept { return level_; }

private:
    std::size_t level_;
};

// A recursion left its domain. index() is the 1-based equation index at
// which the log argument left (0, 1] or monotonicity broke.
class InvalidBracket : public Error {
public:
    InvalidBracket(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double lambda, double mu, int iterations)
        : Error(what), lambda_(lambda), mu_(mu), iterations_(iterations) {}
    double last_lambda() const noexcept { return lambda_; }
    double last_mu() const noexcept { return mu_; }
    int iterations() const noexcept { return iterations_; }

private:
    double lambda_;
    double mu_;
    int iterations_;
};

// A root search found no sign change. samples() holds (abscissa, value)
// pairs that were inspected, flattened.
class NoRootError : public Error {
public:
    NoRootError(const std::string& what, std::vector<double> samples)
        : Error(what), samples_(std::move(samples)) {}
    const std::vector<double>& samples() const noexcept { return samples_; }

private:
    std::vector<double> samples_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::vector<std::string> keys)
        : Error(what), keys_(std::move(keys)) {}
    const std::vector<std::string>& keys() const noexcept { return keys_; }

private:
    std::vector<std::string> keys_;
};

class UnboundedExpectation : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace qpower
