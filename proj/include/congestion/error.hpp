#pragma once

#include <stdexcept>
#include <string>

namespace congestion {

// Exit codes used by the command-line driver. Library code throws one of the
// exception types below and the driver maps them onto these values.
enum class exit_code : int {
    success = 0,
    validation = 2,
    budget_refusal = 3,
    contract_violation = 4,
};

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual exit_code code() const noexcept { return exit_code::validation; }
};

// Malformed input: invalid game, bad index, non-positive load, bad file.
class validation_error : public error {
public:
    using error::error;
};

// Parameter combination that the algorithm cannot run with.
class config_error : public error {
public:
    using error::error;
};

// Exhaustive enumeration would exceed the configured state budget.
class budget_exceeded : public error {
public:
    using error::error;
    exit_code code() const noexcept override { return exit_code::budget_refusal; }
};

// A proven bound was breached at run time; indicates a bug.
class contract_violation : public error {
public:
    using error::error;
    exit_code code() const noexcept override { return exit_code::contract_violation; }
};

} // namespace congestion
