#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ksh/complexifier.hpp"
#include "ksh/numeric.hpp"
#include "ksh/quadrature.hpp"
#include "ksh/root_system.hpp"

namespace ksh {

struct QuantParams {
    double tau1 = 0.0;
    double tau2 = 1.0;   // imaginary part of the evolution parameter, > 0
    double hbar = 1.0;   // > 0
};

// Everything about one normalization constant, stored pre-shifted: a_lambda
// itself overflows double range already at moderate tau2 |lambda|^2, while
// the shifted ratio a_lambda^2 e^{-2 tau2 h_lambda / hbar} stays near 1. The
// defect is the unitarity criterion residual a_lambda e^{-tau2 h_lambda/hbar} - 1.
struct NormResult {
    DominantWeight lambda;
    double h_lambda;
    double log_a2_shifted;
    double defect;
    double quad_err;
};

struct AsymptoticFit {
    double b1_estimate;
    double b2_estimate;
    double residual;  // rms misfit of the two-term model on the grid
    std::vector<double> tau2_grid;
};

struct ContractionReport {
    double sup_norm;
    bool pass;
};

inline void check_params(const QuantParams& p) {
    if (!(p.tau2 > 0.0)) throw std::invalid_argument("tau2 must be > 0");
    if (!(p.hbar > 0.0)) throw std::invalid_argument("hbar must be > 0");
}

// Spectrum of the momentum quantization of h on the lambda block.
inline double q_spectrum(const RootSystem& sys, const Complexifier& c,
                         const DominantWeight& lambda, double hbar) {
    if (!sys.is_dominant(lambda.coords)) throw std::invalid_argument("q_spectrum: non-dominant weight");
    return c.eval_h(-hbar * (lambda.vector + sys.weyl_vector));
}

namespace detail {

// Integrand of the rank-space reduction of the norm integral, in log form.
// The character times eta is evaluated with the Weyl-denominator sinh factors
// cancelled against eta, which removes both the alternating-sign instability
// and the exponential growth of eta from the tails:
//   chi_lambda(e^{2 i t u}) eta(t u)
//     = sum_W (-1)^w e^{-2 t w(lambda+rho)(u)} / ((-2 t)^{|roots|} P(u)).
// Near a wall (some |alpha| pairing below 1e-4) the alternating sum loses
// precision and the evaluation falls back to the positive weight sum. For a
// character argument scaled by b/hbar != 1 the cancellation is only partial
// and the quotient form plus an explicit eta ratio is used instead.
struct ReducedIntegrand {
    const RootSystem* sys;
    const Complexifier* c;
    double tau2;
    double scale;       // 2 tau2 / hbar
    double char_ratio;  // b / hbar; 1 for the norm integral itself
    double h_shift;     // h(-b(lambda+rho)), the spectral shift
    Vec lambda_vec;
    std::vector<SignedVector> orbit;  // Weyl orbit of lambda + rho
    std::vector<WeightLine> weights;  // weight system, for the wall fallback

    LogIntegrandValue operator()(const Vec& X) const {
        const double s = X.squaredNorm();
        const Vec u = c->eval_grad(X);
        const double phi = c->g(s) * s - c->p(s);
        double lf = -scale * (phi + h_shift);

        const int npos = static_cast<int>(sys->positive_roots.size());
        if (npos == 0) {
            const double dr = c->det_hess_rank(sys->rank, s);
            if (!(dr > 0.0)) throw std::runtime_error("integrand: Hessian lost definiteness");
            lf += 0.5 * std::log(dr);
            lf += -2.0 * char_ratio * tau2 * lambda_vec.dot(u);
            return {lf, 1};
        }

        const double gs = c->g(s);
        const double dr = c->det_hess_rank(sys->rank, s);
        if (!(gs > 0.0) || !(dr > 0.0))
            throw std::runtime_error("integrand: Hessian lost definiteness");
        lf += 0.5 * std::log(dr) + npos * std::log(gs);

        double min_pair = std::numeric_limits<double>::infinity();
        for (const Vec& a : sys->positive_roots) {
            const double ax = a.dot(X);
            if (ax == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
            lf += 2.0 * std::log(std::abs(ax));
            // alpha(u) = g(s) alpha(X) for radial h, so walls in u and X agree
            min_pair = std::min(min_pair, std::abs(char_ratio * tau2 * gs * ax));
        }

        int sign = 1;
        if (min_pair < 1e-4) {
            // Weight-multiplicity sum: strictly positive, exact at the walls.
            SignedLogSum chi;
            for (const WeightLine& wl : weights)
                chi.add(std::log(static_cast<double>(wl.multiplicity)) -
                            2.0 * char_ratio * tau2 * wl.vector.dot(u),
                        1);
            lf += chi.log_abs();
            for (const Vec& a : sys->positive_roots)
                lf += log_sinh_over(tau2 * a.dot(u));
        } else if (char_ratio == 1.0) {
            SignedLogSum num;
            for (const SignedVector& t : orbit)
                num.add(-2.0 * tau2 * t.vector.dot(u), t.sign);
            lf += num.log_abs();
            sign = num.sign() * (npos % 2 ? -1 : 1);
            for (const Vec& a : sys->positive_roots) {
                const double au = a.dot(u);
                lf -= std::log(2.0 * tau2 * std::abs(au));
                if (au < 0.0) sign = -sign;
            }
        } else {
            // Quotient character at the scaled argument, then eta at tau2 u.
            SignedLogSum num;
            for (const SignedVector& t : orbit)
                num.add(-2.0 * char_ratio * tau2 * t.vector.dot(u), t.sign);
            lf += num.log_abs();
            sign = num.sign() * (npos % 2 ? -1 : 1);
            for (const Vec& a : sys->positive_roots) {
                const double az = char_ratio * tau2 * a.dot(u);
                lf -= log_two_sinh_abs(az);
                if (az < 0.0) sign = -sign;
                lf += log_sinh_over(tau2 * a.dot(u));
            }
        }
        return {lf, sign};
    }
};

struct ReducedIntegral {
    double log_shifted;  // log of the integral times the analytic prefactor
    double rel_err;
};

// Shared evaluator behind a_lambda and i_lambda. b = hbar reproduces the norm
// integral; general b >= 0 scales only the character argument while the
// density keeps eta(tau2 u). The spectral shift becomes h(-b(lambda+rho)) and
// the saddles move to -b w(lambda+rho).
inline ReducedIntegral reduced_integral(const RootSystem& sys, const Complexifier& c,
                                        const DominantWeight& lambda, double hbar, double b,
                                        double tau2,
                                        const std::optional<QuadratureSpec>& user_spec) {
    if (!(tau2 > 0.0)) throw std::invalid_argument("tau2 must be > 0");
    if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be > 0");
    if (b < 0.0) throw std::invalid_argument("character scale b must be >= 0");
    if (!sys.is_dominant(lambda.coords))
        throw std::invalid_argument("norm integral: non-dominant weight");

    const int r = sys.rank;
    const int npos = static_cast<int>(sys.positive_roots.size());
    const double scale = 2.0 * tau2 / hbar;
    const Vec lam_rho = lambda.vector + sys.weyl_vector;
    const Vec center = -b * lam_rho;
    const double h_shift = c.eval_h(center);

    QuadratureSpec spec;
    if (user_spec) {
        spec = *user_spec;
        if (spec.center.size() == 0) spec.center = center;
    } else {
        const double tail_tol = 1e-14;
        spec = auto_truncation(c, scale, Vec(), tail_tol);
        const double ratio = b / hbar;
        if (npos > 0 && ratio != 1.0) {
            // eta(tau2 u)/eta(ratio tau2 u) grows like exp(tau2 (1-ratio) sum
            // |alpha(u)|); bound it linearly on the box found by a first pass.
            double root_sum = 0.0;
            for (const Vec& a : sys.positive_roots) root_sum += a.norm();
            const double reach = center.norm() + spec.truncation_radius;
            const double g_probe = c.g(reach * reach);
            Vec shift = Vec::Zero(r);
            shift(0) = tau2 * std::abs(1.0 - ratio) * root_sum * std::max(g_probe, 1e-300);
            spec = auto_truncation(c, scale, shift, tail_tol);
        }
        if (sys.weyl_order > 1) spec.truncation_radius += 2.0 * center.norm();
        spec.center = center;

        // Node density from the local Hessian at the saddle; the global c2
        // bound alone under-resolves stiff profiles at large |lambda|.
        Eigen::SelfAdjointEigenSolver<Mat> es(c.eval_hess(center), Eigen::EigenvaluesOnly);
        const double m_eff = std::max(2.0 * c.bound().c2, es.eigenvalues().minCoeff());
        const double sigma = 1.0 / std::sqrt(scale * m_eff);
        const double want = std::ceil(4.0 * 2.0 * spec.truncation_radius / sigma);
        const int cap = (r == 1) ? 4096 : (r == 2) ? 320 : (r == 3) ? 96 : 48;
        spec.points_per_axis = std::clamp(round_up_even(static_cast<int>(std::min(want, 1e7))),
                                          48, cap);
    }

    {
        const double audit_radius = spec.center.norm() + spec.truncation_radius + 1.0;
        const ConvexityCertificate cert = validate_convexity(c, audit_radius, 9, r);
        if (!cert.pass)
            throw std::runtime_error(
                "norm integral: convexity certificate failed, min Hessian eigenvalue " +
                std::to_string(cert.min_eig) + " at " + format_node(cert.worst_point));
    }

    ReducedIntegrand f;
    f.sys = &sys;
    f.c = &c;
    f.tau2 = tau2;
    f.scale = scale;
    f.char_ratio = b / hbar;
    f.h_shift = h_shift;
    f.lambda_vec = lambda.vector;
    f.orbit = weyl_orbit(sys, lam_rho);
    if (npos > 0) f.weights = weight_system(sys, lambda);

    const IntegralResult integral = integrate_logdomain(f, r, spec);
    if (integral.sign <= 0)
        throw std::runtime_error("norm integral: non-positive mass, quadrature is unreliable");

    const double log_pref = 0.5 * sys.group_dim * std::log(tau2 / (kPi * hbar)) -
                            std::log(static_cast<double>(sys.weyl_order) * torus_volume(sys) *
                                     static_cast<double>(dim_irrep(sys, lambda)));
    return ReducedIntegral{log_pref + integral.log_value,
                           std::max(integral.rel_err_estimate, 1e-14)};
}

}  // namespace detail

// Normalization constant of the evolved character state, as the shifted ratio
// a_lambda^2 e^{-2 tau2 h_lambda / hbar} computed by rank-space quadrature.
inline NormResult a_lambda(const RootSystem& sys, const Complexifier& c,
                           const DominantWeight& lambda, const QuantParams& p,
                           const std::optional<QuadratureSpec>& spec = std::nullopt) {
    check_params(p);
    const detail::ReducedIntegral red =
        detail::reduced_integral(sys, c, lambda, p.hbar, p.hbar, p.tau2, spec);
    NormResult out;
    out.lambda = lambda;
    out.h_lambda = q_spectrum(sys, c, lambda, p.hbar);
    out.log_a2_shifted = red.log_shifted;
    out.defect = std::expm1(0.5 * red.log_shifted);
    out.quad_err = red.rel_err;
    return out;
}

// Residual of the growth criterion e^{tau2 h_lambda / hbar} = a_lambda; zero
// exactly when the transform is unitary on the lambda block.
inline double unitarity_defect(const NormResult& result) {
    return std::expm1(0.5 * result.log_a2_shifted);
}

// Deformed norm integral with the character argument scaled by b/hbar and the
// spectral shift h(-b(lambda+rho)). b = hbar recovers a_lambda^2; b = 0 is
// lambda independent. Returns the log of the shifted value.
inline double i_lambda(const RootSystem& sys, const Complexifier& c, const DominantWeight& lambda,
                       double hbar, double b, double tau2,
                       const std::optional<QuadratureSpec>& spec = std::nullopt) {
    return detail::reduced_integral(sys, c, lambda, hbar, b, tau2, spec).log_shifted;
}

// Closed form of the leading large-tau2 correction coefficient for the circle:
// b1 = (5 h'''^2 - 3 h'' h'''') / (24 h''^3) evaluated at y = -hbar n.
inline double b1_circle_closed(const Complexifier& c, int n, double hbar) {
    const double y = -hbar * n;
    const double s = y * y;
    const double p2 = c.profile_deriv(2, s);
    const double p3 = c.profile_deriv(3, s);
    const double p4 = c.profile_deriv(4, s);
    const double h2 = 2.0 * c.profile_deriv(1, s) + 4.0 * s * p2;
    const double h3 = 12.0 * y * p2 + 8.0 * y * s * p3;
    const double h4 = 12.0 * p2 + 48.0 * s * p3 + 16.0 * s * s * p4;
    if (!(h2 > 0.0)) throw std::runtime_error("b1_circle_closed: h'' must be positive");
    return (5.0 * h3 * h3 - 3.0 * h2 * h4) / (24.0 * h2 * h2 * h2);
}

// Least-squares estimate of the large-tau2 correction: the shifted ratio is
// fitted to 1 + b1 x + b2 x^2 in the variable x = hbar/(2 tau2), which is the
// expansion variable the closed-form coefficient belongs to.
inline AsymptoticFit fit_b1(const RootSystem& sys, const Complexifier& c,
                            const DominantWeight& lambda, double hbar,
                            const std::vector<double>& tau2_grid) {
    if (tau2_grid.size() < 4)
        throw std::invalid_argument("fit_b1: need at least 4 tau2 values");
    for (std::size_t i = 1; i < tau2_grid.size(); ++i)
        if (!(tau2_grid[i] > tau2_grid[i - 1]))
            throw std::invalid_argument("fit_b1: tau2 grid must be strictly increasing");

    const int m = static_cast<int>(tau2_grid.size());
    Mat X(m, 2);
    Vec y(m);
    for (int i = 0; i < m; ++i) {
        QuantParams p{0.0, tau2_grid[i], hbar};
        const NormResult res = a_lambda(sys, c, lambda, p);
        if (std::abs(res.defect) >= 0.2)
            throw std::invalid_argument("fit_b1: tau2 = " + std::to_string(tau2_grid[i]) +
                                        " is outside the asymptotic regime");
        const double x = hbar / (2.0 * tau2_grid[i]);
        X(i, 0) = x;
        X(i, 1) = x * x;
        y(i) = std::expm1(res.log_a2_shifted);
    }
    Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    if (!(cond < 1e8)) throw std::runtime_error("fit_b1: design matrix ill-conditioned");
    const Vec coef = svd.solve(y);
    const double rss = (X * coef - y).squaredNorm();
    return AsymptoticFit{coef(0), coef(1), std::sqrt(rss / m), tau2_grid};
}

// Shifted ratios a_lambda^2 e^{-2 tau2 h_lambda / hbar} along a decreasing
// hbar grid; the approach to 1 probes the semiclassical limit.
inline std::vector<double> semiclassical_scan(const RootSystem& sys, const Complexifier& c,
                                              const DominantWeight& lambda, double tau2,
                                              const std::vector<double>& hbar_grid) {
    if (hbar_grid.empty()) throw std::invalid_argument("semiclassical_scan: empty hbar grid");
    for (std::size_t i = 0; i < hbar_grid.size(); ++i) {
        if (!(hbar_grid[i] > 0.0))
            throw std::invalid_argument("semiclassical_scan: hbar values must be > 0");
        if (i > 0 && !(hbar_grid[i] < hbar_grid[i - 1]))
            throw std::invalid_argument("semiclassical_scan: hbar grid must be decreasing");
    }
    std::vector<double> out;
    out.reserve(hbar_grid.size());
    for (double hb : hbar_grid) {
        QuantParams p{0.0, tau2, hb};
        out.push_back(std::exp(a_lambda(sys, c, lambda, p).log_a2_shifted));
    }
    return out;
}

// kappa(Y) = 2 tau2 (B(Y, u(Y)) - h(Y)), the Kaehler potential of the evolved
// structure; non-negative for the built-in profiles.
inline double kahler_potential(const Complexifier& c, const Vec& Y, double tau2) {
    return 2.0 * tau2 * c.legendre_exponent(Y);
}

// Half-form norm density (tau2 hbar)^{n/2} eta(tau2 u(Y)) sqrt(det H).
inline double bks_density(const RootSystem& sys, const Complexifier& c, const Vec& Y,
                          const QuantParams& p) {
    check_params(p);
    const double det = det_hess_full(sys, c, Y);
    if (!(det > 0.0)) throw std::runtime_error("bks_density: Hessian lost definiteness");
    return std::pow(p.tau2 * p.hbar, 0.5 * sys.group_dim) *
           eta(sys, p.tau2 * c.eval_grad(Y)) * std::sqrt(det);
}

// Contraction bound sup_lambda e^{-tau2 h_lambda / hbar} over the enumerated
// weights, plus a decay check: sorted by |lambda + rho|, the last decile must
// sit strictly below the first.
inline ContractionReport contraction_check(const RootSystem& sys, const Complexifier& c,
                                           double hbar, double tau2, int cutoff) {
    if (!(tau2 > 0.0) || !(hbar > 0.0))
        throw std::invalid_argument("contraction_check: tau2 and hbar must be > 0");
    const std::vector<DominantWeight> weights = enumerate_dominant(sys, cutoff);
    std::vector<std::pair<double, double>> keyed;  // (|lambda+rho|, value)
    double sup = 0.0;
    for (const DominantWeight& w : weights) {
        const double v = std::exp(-tau2 * q_spectrum(sys, c, w, hbar) / hbar);
        sup = std::max(sup, v);
        keyed.emplace_back((w.vector + sys.weyl_vector).norm(), v);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    bool decays = true;
    const std::size_t n = keyed.size();
    if (n >= 2) {
        const std::size_t k = std::max<std::size_t>(1, n / 10);
        double first_min = std::numeric_limits<double>::infinity();
        double last_max = 0.0;
        for (std::size_t i = 0; i < k; ++i) first_min = std::min(first_min, keyed[i].second);
        for (std::size_t i = n - k; i < n; ++i) last_max = std::max(last_max, keyed[i].second);
        decays = last_max < first_min;
    }
    return ContractionReport{sup, std::isfinite(sup) && decays};
}

}  // namespace ksh
