#pragma once

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ksh/complexifier.hpp"
#include "ksh/cst.hpp"
#include "ksh/numeric.hpp"
#include "ksh/root_system.hpp"

namespace ksh {

struct ValidationCheck {
    std::string name;
    bool pass;
    double worst;  // the quantity compared against the tolerance
    double tolerance;
    std::string detail;
};

namespace detail {

inline Vec random_ball_point(std::mt19937& rng, int r, double radius) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Vec Y(r);
    for (int i = 0; i < r; ++i) Y(i) = u(rng);
    return Y;
}

// A direction bounded away from every reflection wall, found deterministically.
inline Vec regular_direction(const RootSystem& sys, std::mt19937& rng) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        Vec d = random_ball_point(rng, sys.rank, 1.0);
        if (d.norm() < 1e-3) continue;
        d.normalize();
        bool ok = true;
        for (const Vec& a : sys.positive_roots)
            if (std::abs(a.dot(d)) < 0.05) ok = false;
        if (ok) return d;
    }
    throw std::runtime_error("regular_direction: search failed");
}

}  // namespace detail

// Property suites behind the validate command. Each check is deterministic;
// seeds are fixed so failures reproduce exactly.
inline std::vector<ValidationCheck> run_validation(const RootSystem& sys, const Complexifier& c,
                                                   double hbar, double tau2) {
    std::vector<ValidationCheck> out;
    std::mt19937 rng(20260814u);

    {
        // Alternating sum of the Vandermonde over the Weyl orbit collapses to
        // |W| P(X); the identity exercises signs and matrices together.
        double worst = 0.0;
        const double tol = 1e-9;
        for (int i = 0; i < 100; ++i) {
            const Vec X = detail::random_ball_point(rng, sys.rank, 3.0);
            double sum = 0.0;
            for (const SignedVector& t : weyl_orbit(sys, X))
                sum += t.sign * vandermonde_p(sys, t.vector);
            const double ref = static_cast<double>(sys.weyl_order) * vandermonde_p(sys, X);
            const double scale = std::max(std::abs(ref), 1e-30);
            worst = std::max(worst, std::abs(sum - ref) / scale);
        }
        out.push_back({"weyl-alternating-identity", worst <= tol, worst, tol, ""});
    }

    {
        // Characters approach the dimension at the identity. Weyl-symmetric
        // families converge quadratically in the argument, the torus only
        // linearly, so the criterion is rate-aware: at the last halving the
        // gap must either sit below a small absolute floor or have contracted
        // by at least the geometric factor a convergent sequence shows.
        double worst = 0.0;
        const double tol = 1.0;
        const Vec dir = detail::regular_direction(sys, rng);
        for (const DominantWeight& lam : enumerate_dominant(sys, 2)) {
            const double d = static_cast<double>(dim_irrep(sys, lam));
            double prev = std::numeric_limits<double>::infinity();
            double score = 0.0;
            for (int j = 0; j < 10; ++j) {
                const double gap =
                    std::abs(char_imag_exp(sys, lam, (0.2 / (1 << j)) * dir) - d);
                if (j == 9)
                    score = gap / std::max(1e-6 * std::max(1.0, d), 0.6 * prev);
                prev = gap;
            }
            worst = std::max(worst, score);
        }
        out.push_back({"character-dimension-limit", worst <= tol, worst, tol,
                       "last gap over max(absolute floor, 0.6 x previous gap)"});
    }

    {
        // Central differences of h against the analytic gradient.
        double worst = 0.0;
        const double tol = 1e-6;
        for (int i = 0; i < 100; ++i) {
            const Vec Y = detail::random_ball_point(rng, sys.rank, 3.0);
            const double step = 1e-5 * std::max(1.0, Y.norm());
            const Vec grad = c.eval_grad(Y);
            for (int k = 0; k < sys.rank; ++k) {
                Vec Yp = Y, Ym = Y;
                Yp(k) += step;
                Ym(k) -= step;
                const double fd = (c.eval_h(Yp) - c.eval_h(Ym)) / (2.0 * step);
                worst = std::max(worst, std::abs(fd - grad(k)) / std::max(1.0, std::abs(grad(k))));
            }
        }
        out.push_back({"gradient-consistency", worst <= tol, worst, tol, ""});
    }

    {
        // Central differences of the gradient against the analytic Hessian.
        double worst = 0.0;
        const double tol = 1e-6;
        for (int i = 0; i < 100; ++i) {
            const Vec Y = detail::random_ball_point(rng, sys.rank, 3.0);
            const double step = 1e-5 * std::max(1.0, Y.norm());
            const Mat H = c.eval_hess(Y);
            for (int k = 0; k < sys.rank; ++k) {
                Vec Yp = Y, Ym = Y;
                Yp(k) += step;
                Ym(k) -= step;
                const Vec fd = (c.eval_grad(Yp) - c.eval_grad(Ym)) / (2.0 * step);
                for (int j = 0; j < sys.rank; ++j)
                    worst = std::max(worst,
                                     std::abs(fd(j) - H(j, k)) / std::max(1.0, std::abs(H(j, k))));
            }
        }
        out.push_back({"hessian-consistency", worst <= tol, worst, tol, ""});
    }

    {
        // eta is continuous through the walls and equals 1 at the origin.
        double worst = std::abs(eta(sys, Vec::Zero(sys.rank)) - 1.0);
        const double tol = 1e-9;
        if (!sys.positive_roots.empty()) {
            const Vec a0 = sys.positive_roots.front();
            Vec wall = Vec::Zero(sys.rank);
            if (sys.rank > 1) {
                // A point on the first wall: orthogonal complement within the span.
                wall = sys.positive_roots.back() - (sys.positive_roots.back().dot(a0) / 2.0) * a0;
            }
            for (double eps : {1e-5, 1e-7, 1e-9}) {
                const Vec near_wall = wall + eps * a0;
                worst = std::max(worst, std::abs(eta(sys, near_wall) - eta(sys, wall)) /
                                            std::max(1.0, eta(sys, wall)));
            }
        }
        out.push_back({"eta-wall-limit", worst <= tol, worst, tol, ""});
    }

    {
        // The norm constants contain no tau1 dependence at all; outputs must
        // match bit for bit, not merely to tolerance.
        const DominantWeight lam = enumerate_dominant(sys, 1).back();
        double ref = 0.0;
        bool pass = true;
        bool first = true;
        std::string detail;
        try {
            for (double t1 : {0.0, 1.0, -3.0}) {
                const NormResult res = a_lambda(sys, c, lam, QuantParams{t1, tau2, hbar});
                if (first) {
                    ref = res.log_a2_shifted;
                    first = false;
                } else if (std::memcmp(&ref, &res.log_a2_shifted, sizeof(double)) != 0) {
                    pass = false;
                }
            }
        } catch (const std::exception& e) {
            // A throwing integral still yields a report; the certificate check
            // below names the underlying convexity violation.
            pass = false;
            detail = e.what();
        }
        out.push_back({"tau1-independence", pass, pass ? 0.0 : 1.0, 0.0, detail});
    }

    {
        const ConvexityCertificate cert = validate_convexity(c, 6.0, 9, sys.rank);
        out.push_back({"convexity-certificate", cert.pass, cert.min_eig, c.bound().c2,
                       cert.pass ? "" : "violation at " + detail::format_node(cert.worst_point)});
    }

    return out;
}

}  // namespace ksh
