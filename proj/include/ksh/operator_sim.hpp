#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ksh/cst.hpp"
#include "ksh/numeric.hpp"
#include "ksh/root_system.hpp"

namespace ksh {

using MatC = Eigen::MatrixXcd;

// Truncated Fourier model of the circle transform: modes n in [-N, N]. The
// target basis is defined as the image of the source basis under the
// intertwiner, which absorbs the tau1 phase and makes the intertwiner the
// identity matrix; the transform itself is then diag(c_n) with
// c_n = a_n e^{-tau2 h_n / hbar}. Defects are measured on the interior modes
// |n| <= N/2 so that truncation at the boundary cannot masquerade as a
// representation failure.
struct TruncatedHilbert {
    int max_mode = 0;        // N
    std::vector<int> modes;  // basis labels -N..N in ascending order

    static TruncatedHilbert circle(int N) {
        if (N < 1) throw std::invalid_argument("TruncatedHilbert: N must be >= 1");
        TruncatedHilbert space;
        space.max_mode = N;
        space.modes.reserve(2 * N + 1);
        for (int n = -N; n <= N; ++n) space.modes.push_back(n);
        return space;
    }

    int dim() const { return static_cast<int>(modes.size()); }
    bool in_range(int n) const { return n >= -max_mode && n <= max_mode; }
    int index_of(int n) const {
        if (!in_range(n)) throw std::out_of_range("TruncatedHilbert: mode outside truncation");
        return n + max_mode;
    }
    bool interior(int n) const { return 2 * std::abs(n) <= max_mode; }
};

struct BlockOperator {
    MatC matrix;
    std::vector<int> boundary_rows;  // mode labels whose shifted partner was truncated away
};

// Diagonal transform coefficients c_n = a_n e^{-tau2 h_n / hbar} for every
// mode of the truncation. Returned as a list indexed like the mode labels so
// that perturbed sets can be injected back into the defect metrics.
inline std::vector<double> ksh_coefficients(const TruncatedHilbert& space, const RootSystem& sys,
                                            const Complexifier& c, const QuantParams& p) {
    if (sys.family != GroupFamily::Torus || sys.rank != 1)
        throw std::invalid_argument("ksh_coefficients: the mode model is for the circle");
    std::vector<double> out;
    out.reserve(space.dim());
    for (int n : space.modes) {
        IVec coords(1);
        coords(0) = n;
        const NormResult res = a_lambda(sys, c, sys.weight(coords), p);
        out.push_back(std::exp(0.5 * res.log_a2_shifted));
    }
    return out;
}

namespace detail {

inline void check_coeffs(const TruncatedHilbert& space, const std::vector<double>& coeffs) {
    if (static_cast<int>(coeffs.size()) != space.dim())
        throw std::invalid_argument("coefficient list does not match the truncation");
    for (double c : coeffs)
        if (!(c > 0.0)) throw std::invalid_argument("transform coefficients must be positive");
}

}  // namespace detail

// Conjugated image of the mode-m character: entries (n+m, n) = c_{n+m}/c_n
// wherever both modes survive the truncation, zero elsewhere. Rows whose
// source mode was cut off are flagged rather than wrapped around.
inline BlockOperator nu_matrix(const TruncatedHilbert& space, int m,
                               const std::vector<double>& coeffs) {
    if (std::abs(m) > space.max_mode)
        throw std::invalid_argument("nu_matrix: |m| exceeds the truncation");
    detail::check_coeffs(space, coeffs);

    BlockOperator op;
    op.matrix = MatC::Zero(space.dim(), space.dim());
    for (int n : space.modes) {
        if (!space.in_range(n + m)) continue;
        op.matrix(space.index_of(n + m), space.index_of(n)) =
            coeffs[space.index_of(n + m)] / coeffs[space.index_of(n)];
    }
    for (int k : space.modes)
        if (!space.in_range(k - m)) op.boundary_rows.push_back(k);
    return op;
}

// Adjoint mismatch of the conjugated representation on interior modes:
// max_n |c_n/c_{n+m} - c_{n+m}/c_n|, zero exactly when the interior
// coefficients are constant.
inline double star_defect(const TruncatedHilbert& space, int m, const std::vector<double>& coeffs) {
    if (2 * std::abs(m) > space.max_mode)
        throw std::invalid_argument("star_defect: need |m| <= N/2 to stay clear of the boundary");
    detail::check_coeffs(space, coeffs);

    double worst = 0.0;
    for (int n : space.modes) {
        if (!space.interior(n)) continue;
        const double a = coeffs[space.index_of(n)];
        const double b = coeffs[space.index_of(n + m)];
        worst = std::max(worst, std::abs(a / b - b / a));
    }
    return worst;
}

// Covariance residual: two-sided translation by angles (theta1, theta2) acts
// on modes by the diagonal phase e^{2 pi i n (theta2 - theta1)} and on the
// mode-m character by the scalar e^{2 pi i m (theta2 - theta1)}. The residual
// R nu R^dagger - e^{2 pi i m (...)} nu is measured entrywise on the interior
// block and is zero to rounding for every complexifier.
inline double covariance_defect(const TruncatedHilbert& space, double theta1, double theta2, int m,
                                const std::vector<double>& coeffs) {
    if (theta1 < 0.0 || theta1 >= 1.0 || theta2 < 0.0 || theta2 >= 1.0)
        throw std::invalid_argument("covariance_defect: angles must lie in [0, 1)");
    if (2 * std::abs(m) > space.max_mode)
        throw std::invalid_argument("covariance_defect: need |m| <= N/2");

    const BlockOperator nu = nu_matrix(space, m, coeffs);
    const double d = theta2 - theta1;
    const std::complex<double> im(0.0, 1.0);

    Eigen::VectorXcd phases(space.dim());
    for (int n : space.modes)
        phases(space.index_of(n)) = std::exp(2.0 * kPi * im * (static_cast<double>(n) * d));
    const MatC conjugated = phases.asDiagonal() * nu.matrix * phases.conjugate().asDiagonal();
    const MatC translated = std::exp(2.0 * kPi * im * (static_cast<double>(m) * d)) * nu.matrix;

    double worst = 0.0;
    for (int row : space.modes)
        for (int col : space.modes) {
            if (!space.interior(row) || !space.interior(col)) continue;
            worst = std::max(worst, std::abs(conjugated(space.index_of(row), space.index_of(col)) -
                                             translated(space.index_of(row), space.index_of(col))));
        }
    return worst;
}

// The intertwiner in the matched-basis convention is the identity, so its
// unitarity residual vanishes identically; the substance of unitarity lives
// in the normalization constants, not here. Kept as a computed quantity so
// the convention is machine-checked rather than asserted.
inline double u_unitarity(const TruncatedHilbert& space) {
    const MatC U = MatC::Identity(space.dim(), space.dim());
    return (U.adjoint() * U - MatC::Identity(space.dim(), space.dim())).cwiseAbs().maxCoeff();
}

}  // namespace ksh
