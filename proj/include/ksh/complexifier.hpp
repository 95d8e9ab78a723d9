#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksh/numeric.hpp"
#include "ksh/root_system.hpp"

namespace ksh {

enum class ComplexifierFamily { Quadratic, Quartic, CustomRadial };

// Claimed lower bound h(Y) >= c0 + <v0, Y> + c2 |Y|^2 with c2 > 0. The bound
// drives tail truncation of every integral, so validate_convexity audits it
// against the actual Hessian rather than trusting the caller.
struct ConvexityBound {
    double c0 = 0.0;
    Vec v0;  // empty means the zero vector
    double c2 = 0.5;

    double v0_norm() const { return v0.size() ? v0.norm() : 0.0; }
};

struct ConvexityCertificate {
    double min_eig;
    bool pass;
    Vec worst_point;
};

// Invariant convex function h(Y) = p(|Y|^2) with polynomial profile
// p(s) = sum_{i>=1} c_i s^i. Radial profiles are Weyl invariant for every
// root system, so no per-group case analysis is needed. Values are immutable
// after construction.
class Complexifier {
public:
    static Complexifier quadratic() {
        return Complexifier(ComplexifierFamily::Quadratic, {0.5}, ConvexityBound{0.0, Vec(), 0.5});
    }

    static Complexifier quartic(double eps) {
        if (eps < 0.0) throw std::invalid_argument("quartic coefficient must be >= 0");
        return Complexifier(ComplexifierFamily::Quartic, {0.5, eps / 4.0},
                            ConvexityBound{0.0, Vec(), 0.5});
    }

    static Complexifier radial(std::vector<double> profile_coeffs) {
        if (profile_coeffs.empty())
            throw std::invalid_argument("radial profile needs at least one coefficient");
        // Default claim: p(s) >= c1 s for profiles with a positive linear
        // term. Degenerate profiles get a deliberately unsatisfiable claim so
        // that the audit fails loudly instead of silently mistruncating.
        const double c1 = profile_coeffs[0];
        ConvexityBound bound{0.0, Vec(), c1 > 0.0 ? c1 : 0.5};
        return Complexifier(ComplexifierFamily::CustomRadial, std::move(profile_coeffs), bound);
    }

    static Complexifier radial(std::vector<double> profile_coeffs, ConvexityBound bound) {
        if (profile_coeffs.empty())
            throw std::invalid_argument("radial profile needs at least one coefficient");
        if (bound.c2 <= 0.0) throw std::invalid_argument("convexity bound requires c2 > 0");
        return Complexifier(ComplexifierFamily::CustomRadial, std::move(profile_coeffs), bound);
    }

    ComplexifierFamily family() const { return family_; }
    const std::vector<double>& profile_coeffs() const { return coeffs_; }
    const ConvexityBound& bound() const { return bound_; }

    // k-th derivative of the profile p at s, exact for the polynomial model.
    double profile_deriv(int k, double s) const {
        if (k < 0) throw std::invalid_argument("derivative order must be >= 0");
        double acc = 0.0;
        for (int i = static_cast<int>(coeffs_.size()); i >= 1; --i) {
            // term c_i s^i differentiated k times: c_i * i!/(i-k)! * s^{i-k}
            if (i < k) continue;
            double f = coeffs_[i - 1];
            for (int j = 0; j < k; ++j) f *= (i - j);
            acc += f * std::pow(s, i - k);
        }
        return acc;
    }

    double p(double s) const { return profile_deriv(0, s); }
    double g(double s) const { return 2.0 * profile_deriv(1, s); }        // u(Y) = g(|Y|^2) Y
    double g_prime(double s) const { return 2.0 * profile_deriv(2, s); }

    double eval_h(const Vec& Y) const { return p(Y.squaredNorm()); }

    Vec eval_grad(const Vec& Y) const { return g(Y.squaredNorm()) * Y; }

    Mat eval_hess(const Vec& Y) const {
        const double s = Y.squaredNorm();
        Mat H = g(s) * Mat::Identity(Y.size(), Y.size());
        H += 2.0 * g_prime(s) * (Y * Y.transpose());
        return H;
    }

    // det of the Hessian restricted to the rank space, in closed radial form:
    // eigenvalues are g + 2 s g' (radial direction) and g (tangential ones).
    double det_hess_rank(int rank, double s) const {
        const double gs = g(s);
        return (gs + 2.0 * s * g_prime(s)) * std::pow(gs, rank - 1);
    }

    // phi(Y) = B(Y, u(Y)) - h(Y), the convex-dual exponent. Non-negative for
    // profiles with p(0) = 0, and bounded below by the quadratic growth used
    // in truncation.
    double legendre_exponent(const Vec& Y) const {
        const double s = Y.squaredNorm();
        return g(s) * s - p(s);
    }

private:
    Complexifier(ComplexifierFamily family, std::vector<double> coeffs, ConvexityBound bound)
        : family_(family), coeffs_(std::move(coeffs)), bound_(std::move(bound)) {}

    ComplexifierFamily family_;
    std::vector<double> coeffs_;
    ConvexityBound bound_;
};

// Full n x n Hessian determinant on the group Lie algebra. The rank-space
// block contributes det_hess_rank; each root direction contributes a factor
// g(|X|^2), smooth through the Weyl walls for radial h.
inline double det_hess_full(const RootSystem& sys, const Complexifier& c, const Vec& X) {
    const double s = X.squaredNorm();
    const int npos = static_cast<int>(sys.positive_roots.size());
    return c.det_hess_rank(sys.rank, s) * std::pow(c.g(s), 2 * npos);
}

// Audit the declared convexity bound on a deterministic tensor grid inside
// the ball of the given radius. Odd per-axis counts keep the origin on the
// grid, which is where degenerate radial profiles lose definiteness.
inline ConvexityCertificate validate_convexity(const Complexifier& c, double radius,
                                               int grid_points, int rank = 1) {
    if (radius <= 0.0) throw std::invalid_argument("validate_convexity: radius must be > 0");
    if (rank < 1 || rank > 4) throw std::invalid_argument("validate_convexity: rank must be 1..4");
    if (grid_points < 1) throw std::invalid_argument("validate_convexity: grid_points must be >= 1");
    if (grid_points % 2 == 0) ++grid_points;

    double total = 1.0;
    for (int i = 0; i < rank; ++i) total *= grid_points;
    if (total > 1e6) throw std::invalid_argument("validate_convexity: grid too large");

    ConvexityCertificate cert{std::numeric_limits<double>::infinity(), true, Vec::Zero(rank)};
    std::vector<int> idx(rank, 0);
    Eigen::SelfAdjointEigenSolver<Mat> solver;
    while (true) {
        Vec Y(rank);
        for (int i = 0; i < rank; ++i)
            Y(i) = radius * (2.0 * idx[i] / (grid_points - 1.0) - 1.0);
        if (grid_points == 1) Y.setZero();
        if (Y.norm() <= radius + 1e-12) {
            solver.compute(c.eval_hess(Y), Eigen::EigenvaluesOnly);
            const double me = solver.eigenvalues().minCoeff();
            if (me < cert.min_eig) {
                cert.min_eig = me;
                cert.worst_point = Y;
            }
        }
        int i = rank - 1;
        while (i >= 0 && idx[i] == grid_points - 1) idx[i--] = 0;
        if (i < 0) break;
        ++idx[i];
    }
    cert.pass = cert.min_eig >= c.bound().c2 * (1.0 - 1e-6);
    return cert;
}

}  // namespace ksh
