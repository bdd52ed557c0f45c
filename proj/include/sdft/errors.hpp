#pragma once

#include <stdexcept>
#include <string>

namespace sdft {

// Shape disagreements between tensors (messages name both shapes).
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid values handed to a constructor or operation (bad bounds, t out of range, ...).
class ParameterError : public std::runtime_error {
public:
    explicit ParameterError(const std::string& msg) : std::runtime_error(msg) {}
};

// Misuse of an API contract (backward on a non-scalar, non-finite inputs, ...).
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// File I/O and parse failures; parse messages carry a line number where applicable.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdft
