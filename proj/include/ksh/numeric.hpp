#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ksh {

inline constexpr double kPi = 3.14159265358979323846;

// Largest x with exp(x) finite in double precision, with a safety margin.
inline constexpr double kMaxExpArg = 700.0;

namespace detail {

// Running signed sum of terms given as (log|t|, sign), kept stable by
// rescaling to the largest exponent seen so far. Accumulation order is the
// insertion order, so results are reproducible bit for bit.
class SignedLogSum {
public:
    void add(double log_abs, int sign) {
        if (sign == 0 || log_abs == -std::numeric_limits<double>::infinity())
            return;
        if (!std::isfinite(log_abs) || sign < -1 || sign > 1)
            throw std::runtime_error("SignedLogSum: non-finite term");
        if (empty_) {
            shift_ = log_abs;
            sum_ = static_cast<double>(sign);
            empty_ = false;
            return;
        }
        if (log_abs <= shift_) {
            sum_ += sign * std::exp(log_abs - shift_);
        } else {
            sum_ = sum_ * std::exp(shift_ - log_abs) + sign;
            shift_ = log_abs;
        }
    }

    bool empty() const { return empty_; }

    // Sign of the accumulated sum: -1, 0, or +1.
    int sign() const {
        if (empty_ || sum_ == 0.0) return 0;
        return sum_ > 0.0 ? 1 : -1;
    }

    // log of the absolute value of the sum; -inf when the sum vanished.
    double log_abs() const {
        if (empty_ || sum_ == 0.0)
            return -std::numeric_limits<double>::infinity();
        return shift_ + std::log(std::abs(sum_));
    }

private:
    double shift_ = 0.0;
    double sum_ = 0.0;
    bool empty_ = true;
};

// log(sinh(a)/a), even in a, with the removable singularity at 0. The series
// branch keeps full precision where sinh(a) and a cancel.
inline double log_sinh_over(double a) {
    const double x = std::abs(a);
    if (x < 1e-4) {
        const double s = x * x;
        return std::log1p(s / 6.0 * (1.0 + s / 20.0 * (1.0 + s / 42.0)));
    }
    // sinh(x)/x = e^x (1 - e^{-2x}) / (2x)
    return x - std::log(2.0 * x) + std::log1p(-std::exp(-2.0 * x));
}

// log(2 |sinh(a)|) for a != 0, safe against overflow of sinh itself.
inline double log_two_sinh_abs(double a) {
    const double x = std::abs(a);
    return x + std::log1p(-std::exp(-2.0 * x));
}

inline int round_up_even(int n) { return n + (n & 1); }

}  // namespace detail
}  // namespace ksh
