#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ksh/complexifier.hpp"
#include "ksh/numeric.hpp"
#include "ksh/root_system.hpp"

namespace ksh {

// Tensor Gauss-Legendre rule on the box [center - R, center + R]^r. Even
// per-axis counts keep every node off the box center, and therefore off any
// Weyl wall passing through it.
struct QuadratureSpec {
    int points_per_axis = 48;
    double truncation_radius = 1.0;
    Vec center;  // empty means the origin
    double target_rel_tol = 1e-9;
};

// One integrand sample in log form: value = sign * exp(log_abs). sign 0 (or
// log_abs = -inf) marks an exact zero contribution, which is legitimate.
struct LogIntegrandValue {
    double log_abs;
    int sign;
};

struct IntegralResult {
    double log_value;          // log |integral|
    double rel_err_estimate;   // from comparing against the half-density grid
    int sign;                  // sign of the integral; negative mass is reported, not hidden
};

namespace detail {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], by Newton
// iteration on the three-term recurrence. Nodes are returned in ascending
// order; the construction is deterministic.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based initial guess for the i-th root from the top.
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

inline std::string format_node(const Vec& node) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < node.size(); ++i) os << (i ? ", " : "") << node(i);
    os << ")";
    return os.str();
}

inline double tensor_pass(const std::function<LogIntegrandValue(const Vec&)>& f_log, int r,
                          const Vec& center, double R, int npts, int* sign_out) {
    std::vector<double> x, w;
    gauss_legendre(npts, x, w);
    std::vector<double> logw(npts);
    for (int i = 0; i < npts; ++i) logw[i] = std::log(R * w[i]);

    SignedLogSum sum;
    std::vector<int> idx(r, 0);
    Vec node(r);
    while (true) {
        double lw = 0.0;
        for (int i = 0; i < r; ++i) {
            node(i) = center(i) + R * x[idx[i]];
            lw += logw[idx[i]];
        }
        const LogIntegrandValue v = f_log(node);
        if (std::isnan(v.log_abs) || v.log_abs == std::numeric_limits<double>::infinity())
            throw std::runtime_error("integrate_logdomain: non-finite integrand at node " +
                                     format_node(node));
        sum.add(v.log_abs + lw, v.sign);

        int i = r - 1;
        while (i >= 0 && idx[i] == npts - 1) idx[i--] = 0;
        if (i < 0) break;
        ++idx[i];
    }
    *sign_out = sum.sign();
    return sum.log_abs();
}

}  // namespace detail

inline IntegralResult integrate_logdomain(const std::function<LogIntegrandValue(const Vec&)>& f_log,
                                          int r, const QuadratureSpec& spec) {
    if (r < 1 || r > 4) throw std::invalid_argument("integrate_logdomain: dimension must be 1..4");
    if (spec.points_per_axis < 8 || spec.points_per_axis % 2 != 0)
        throw std::invalid_argument("integrate_logdomain: points_per_axis must be even and >= 8");
    if (!(spec.truncation_radius > 0.0))
        throw std::invalid_argument("integrate_logdomain: truncation radius must be > 0");
    Vec center = spec.center.size() ? spec.center : Vec::Zero(r);
    if (center.size() != r)
        throw std::invalid_argument("integrate_logdomain: center size does not match dimension");

    int sign_full = 0, sign_half = 0;
    const double log_full = detail::tensor_pass(f_log, r, center, spec.truncation_radius,
                                                spec.points_per_axis, &sign_full);
    const int half_pts = std::max(8, detail::round_up_even(spec.points_per_axis / 2));
    const double log_half =
        detail::tensor_pass(f_log, r, center, spec.truncation_radius, half_pts, &sign_half);

    double rel_err;
    if (sign_full == 0)
        rel_err = (sign_half == 0) ? 0.0 : 1.0;
    else if (sign_half != sign_full)
        rel_err = 1.0;
    else
        rel_err = std::abs(std::expm1(log_half - log_full));
    return IntegralResult{log_full, rel_err, sign_full};
}

// Solve exp(-scale*c2*R^2 + shift*R) = tol for the truncation half-width R,
// where scale = 2 tau2 / hbar and c2 is the audited strong-convexity modulus.
// The Gaussian tail of the integrand beyond R is then below tol relative to
// the peak. The center is left for the caller, who knows the saddle.
inline QuadratureSpec auto_truncation(const Complexifier& c, double scale, const Vec& linear_shift,
                                      double tol) {
    if (!(scale > 0.0)) throw std::invalid_argument("auto_truncation: scale must be > 0");
    if (!(tol > 0.0) || tol >= 1.0)
        throw std::invalid_argument("auto_truncation: tol must lie in (0, 1)");
    const double c2 = c.bound().c2;
    const double shift = (linear_shift.size() ? linear_shift.norm() : 0.0) + c.bound().v0_norm();
    const double L = std::log(1.0 / tol);
    const double q = scale * c2;
    const double R = (shift + std::sqrt(shift * shift + 4.0 * q * L)) / (2.0 * q);

    QuadratureSpec spec;
    spec.truncation_radius = R;
    // Baseline density: about four nodes per Gaussian width from the c2
    // bound. Callers with a stiffer local Hessian should raise this.
    const double sigma = 1.0 / std::sqrt(scale * 2.0 * c2);
    const double suggested = std::ceil(4.0 * 2.0 * R / sigma);
    spec.points_per_axis =
        std::max(48, detail::round_up_even(static_cast<int>(std::min(suggested, 5000.0))));
    return spec;
}

}  // namespace ksh
