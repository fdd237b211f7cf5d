#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace congestion {

// Polynomial latency f(x) = sum_k a_k x^k. The declared degree is the length of
// the coefficient list minus one, trailing zeros included, so that a family of
// degree-d instances keeps reporting d even when a draw zeroes its top term.
class latency_function {
public:
    latency_function() : coeffs_{rational(0)} {}
    explicit latency_function(std::vector<rational> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) coeffs_.push_back(rational(0));
    }
    latency_function(std::initializer_list<rational> coeffs)
        : latency_function(std::vector<rational>(coeffs)) {}

    const std::vector<rational>& coefficients() const noexcept { return coeffs_; }
    std::size_t degree() const noexcept { return coeffs_.size() - 1; }

    bool has_nonnegative_coefficients() const {
        for (const auto& c : coeffs_)
            if (sgn(c) < 0) return false;
        return true;
    }

    bool is_zero() const {
        for (const auto& c : coeffs_)
            if (sgn(c) != 0) return false;
        return true;
    }

    /// Exact value at a positive integer load. Throws on load < 1.
    rational operator()(std::int64_t load) const {
        if (load < 1) throw validation_error("latency evaluated at non-positive load " + std::to_string(load));
        return evaluate(rational(static_cast<long>(load)));
    }

    /// Horner evaluation at any rational point; no load check.
    rational evaluate(const rational& x) const {
        rational acc(0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc *= x;
            acc += *it;
        }
        return acc;
    }

    friend bool operator==(const latency_function& a, const latency_function& b) {
        return a.coeffs_ == b.coeffs_;
    }

private:
    std::vector<rational> coeffs_;
};

inline rational eval_latency(const latency_function& f, std::int64_t load) { return f(load); }

} // namespace congestion
