#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "ksh/root_system.hpp"

using namespace ksh;
using Catch::Approx;

namespace {

Vec random_vec(std::mt19937& rng, int r, double radius) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Vec v(r);
    for (int i = 0; i < r; ++i) v(i) = u(rng);
    return v;
}

}  // namespace

TEST_CASE("torus structure") {
    const auto sys = RootSystem::torus(2);
    CHECK(sys.family == GroupFamily::Torus);
    CHECK(sys.rank == 2);
    CHECK(sys.positive_roots.empty());
    CHECK(sys.weyl_vector.norm() == 0.0);
    CHECK(sys.weyl_order == 1);
    CHECK(sys.group_dim == 2);
}

TEST_CASE("type A structure") {
    for (int r : {1, 2, 3}) {
        const auto sys = RootSystem::type_a(r);
        CHECK(static_cast<int>(sys.positive_roots.size()) == r * (r + 1) / 2);
        long fact = 1;
        for (int i = 2; i <= r + 1; ++i) fact *= i;
        CHECK(sys.weyl_order == fact);
        CHECK(sys.group_dim == sys.rank + 2 * static_cast<int>(sys.positive_roots.size()));

        for (const Vec& a : sys.positive_roots) CHECK(a.squaredNorm() == Approx(2.0).margin(1e-12));

        Vec half = Vec::Zero(r);
        for (const Vec& a : sys.positive_roots) half += 0.5 * a;
        CHECK((half - sys.weyl_vector).norm() < 1e-12);

        // The Weyl action is orthogonal and closed on the root set.
        for (const Mat& w : sys.weyl_matrices) {
            CHECK((w * w.transpose() - Mat::Identity(r, r)).norm() < 1e-12);
            for (const Vec& a : sys.positive_roots) {
                const Vec img = w * a;
                bool found = false;
                for (const Vec& b : sys.positive_roots)
                    if ((img - b).norm() < 1e-9 || (img + b).norm() < 1e-9) found = true;
                CHECK(found);
            }
        }
    }
}

TEST_CASE("fundamental weights pair integrally with simple roots") {
    const auto sys = RootSystem::type_a(2);
    // <omega_i, alpha_j> = delta_ij for |alpha|^2 = 2.
    for (int i = 0; i < 2; ++i) {
        const Vec w = sys.fundamental_weights[i];
        CHECK(w.dot(sys.positive_roots[0]) == Approx(i == 0 ? 1.0 : 0.0).margin(1e-12));
    }
    CHECK(sys.weight({1, 0}).vector.squaredNorm() == Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("weyl_orbit enumerates signed images") {
    SECTION("torus is trivial") {
        const auto sys = RootSystem::torus(2);
        Vec v(2);
        v << 1.0, 2.0;
        const auto orbit = weyl_orbit(sys, v);
        REQUIRE(orbit.size() == 1);
        CHECK(orbit[0].sign == 1);
        CHECK((orbit[0].vector - v).norm() == 0.0);
    }
    SECTION("rank one reflection negates") {
        const auto sys = RootSystem::type_a(1);
        Vec v(1);
        v << 0.8;
        const auto orbit = weyl_orbit(sys, v);
        REQUIRE(orbit.size() == 2);
        CHECK(orbit[0].sign == 1);
        CHECK(orbit[0].vector(0) == Approx(0.8));
        CHECK(orbit[1].sign == -1);
        CHECK(orbit[1].vector(0) == Approx(-0.8));
    }
    SECTION("six signed images for A(2)") {
        const auto sys = RootSystem::type_a(2);
        std::mt19937 rng(7u);
        const Vec v = random_vec(rng, 2, 2.0);
        const auto orbit = weyl_orbit(sys, v);
        REQUIRE(orbit.size() == 6);
        int sign_sum = 0;
        std::set<std::pair<long, long>> distinct;
        for (const auto& t : orbit) {
            sign_sum += t.sign;
            CHECK(t.vector.norm() == Approx(v.norm()).margin(1e-12));
            distinct.insert({std::lround(t.vector(0) * 1e9), std::lround(t.vector(1) * 1e9)});
        }
        CHECK(sign_sum == 0);
        CHECK(distinct.size() == 6);
    }
}

TEST_CASE("dim_irrep") {
    CHECK(dim_irrep(RootSystem::type_a(1), RootSystem::type_a(1).weight({2})) == 3);
    CHECK(dim_irrep(RootSystem::type_a(2), RootSystem::type_a(2).weight({1, 1})) == 8);
    CHECK(dim_irrep(RootSystem::torus(2), RootSystem::torus(2).weight({5, -3})) == 1);
    CHECK(dim_irrep(RootSystem::type_a(3), RootSystem::type_a(3).weight({1, 0, 0})) == 4);

    SECTION("zero weight gives the trivial representation in every family") {
        for (int r : {1, 2, 3}) {
            CHECK(dim_irrep(RootSystem::type_a(r), RootSystem::type_a(r).weight(IVec::Zero(r))) == 1);
            CHECK(dim_irrep(RootSystem::torus(r), RootSystem::torus(r).weight(IVec::Zero(r))) == 1);
        }
    }
    SECTION("non-dominant weights are rejected") {
        const auto sys = RootSystem::type_a(1);
        IVec bad(1);
        bad << -1;
        CHECK_THROWS_AS(dim_irrep(sys, DominantWeight{bad, sys.embed(bad)}), std::invalid_argument);
    }
}

TEST_CASE("char_imag_exp") {
    SECTION("circle mode") {
        const auto sys = RootSystem::torus(1);
        Vec zeta(1);
        zeta << 0.5;
        CHECK(char_imag_exp(sys, sys.weight({1}), zeta) == Approx(std::exp(-1.0)).epsilon(1e-12));
    }
    SECTION("rank one ratio") {
        const auto sys = RootSystem::type_a(1);
        // alpha(zeta) = 1 means zeta = alpha/2 since |alpha|^2 = 2.
        const Vec zeta = 0.5 * sys.positive_roots[0];
        const double want = std::sinh(2.0) / std::sinh(1.0);
        CHECK(char_imag_exp(sys, sys.weight({1}), zeta) == Approx(want).epsilon(1e-12));
    }
    SECTION("value at the identity is the dimension") {
        for (auto sys : {RootSystem::type_a(1), RootSystem::type_a(2)}) {
            for (const auto& lam : enumerate_dominant(sys, 2)) {
                const double d = static_cast<double>(dim_irrep(sys, lam));
                CHECK(char_imag_exp(sys, lam, Vec::Zero(sys.rank)) == Approx(d).epsilon(1e-12));
            }
        }
        const auto t = RootSystem::torus(2);
        CHECK(char_imag_exp(t, t.weight({3, -1}), Vec::Zero(2)) == 1.0);
    }
    SECTION("quotient and weight-sum branches agree at regular points") {
        const auto sys = RootSystem::type_a(2);
        std::mt19937 rng(11u);
        for (int i = 0; i < 20; ++i) {
            const Vec zeta = random_vec(rng, 2, 1.0);
            bool regular = true;
            for (const Vec& a : sys.positive_roots)
                if (std::abs(a.dot(zeta)) < 1e-3) regular = false;
            if (!regular) continue;
            for (const auto& lam : {sys.weight({1, 0}), sys.weight({1, 1}), sys.weight({2, 1})}) {
                double wsum = 0.0;
                for (const WeightLine& wl : detail::weight_system(sys, lam))
                    wsum += static_cast<double>(wl.multiplicity) *
                            std::exp(-2.0 * wl.vector.dot(zeta));
                CHECK(char_imag_exp(sys, lam, zeta) == Approx(wsum).epsilon(1e-9));
            }
        }
    }
    SECTION("overflow is an explicit range error") {
        const auto sys = RootSystem::torus(1);
        Vec zeta(1);
        zeta << -400.0;
        CHECK_THROWS_AS(char_imag_exp(sys, sys.weight({1}), zeta), std::range_error);
    }
}

TEST_CASE("weight systems carry exact multiplicities") {
    const auto sys = RootSystem::type_a(2);
    const auto lines = detail::weight_system(sys, sys.weight({1, 1}));
    long total = 0;
    long zero_mult = 0;
    for (const auto& wl : lines) {
        total += wl.multiplicity;
        if (wl.fcoords.isZero()) zero_mult = wl.multiplicity;
    }
    CHECK(total == 8);
    CHECK(zero_mult == 2);
    CHECK(lines.size() == 7);
}

TEST_CASE("vandermonde_p") {
    CHECK(vandermonde_p(RootSystem::torus(3), Vec::Ones(3)) == 1.0);

    const auto a1 = RootSystem::type_a(1);
    CHECK(vandermonde_p(a1, a1.positive_roots[0]) == Approx(2.0).margin(1e-12));

    const auto a2 = RootSystem::type_a(2);
    CHECK(vandermonde_p(a2, a2.weyl_vector) == Approx(2.0).margin(1e-12));
    CHECK(vandermonde_p(a2, a2.weyl_vector) > 0.0);
}

TEST_CASE("eta") {
    CHECK(eta(RootSystem::torus(2), Vec::Ones(2)) == 1.0);

    const auto a1 = RootSystem::type_a(1);
    const Vec half_root = 0.5 * a1.positive_roots[0];
    CHECK(eta(a1, half_root) == Approx(std::sinh(1.0)).epsilon(1e-12));
    CHECK(eta(a1, Vec::Zero(1)) == 1.0);

    SECTION("series branch is smooth against the direct quotient") {
        for (double x : {2e-4, 9e-5, 1e-6}) {
            const Vec Y = x * a1.positive_roots[0];
            const double direct = std::sinh(2.0 * x) / (2.0 * x);
            CHECK(eta(a1, Y) == Approx(direct).epsilon(1e-13));
        }
    }
}

TEST_CASE("torus_volume") {
    CHECK(torus_volume(RootSystem::torus(3)) == 1.0);
    CHECK(torus_volume(RootSystem::type_a(1)) == Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
    const double want_a2 = 2.0 / std::pow(2.0 * kPi, 3);
    CHECK(torus_volume(RootSystem::type_a(2)) == Approx(want_a2).epsilon(1e-12));
}

TEST_CASE("enumerate_dominant") {
    SECTION("rank one ladder") {
        const auto got = enumerate_dominant(RootSystem::type_a(1), 2);
        REQUIRE(got.size() == 3);
        for (int k = 0; k < 3; ++k) CHECK(got[k].coords(0) == k);
    }
    SECTION("torus window includes negatives") {
        const auto got = enumerate_dominant(RootSystem::torus(1), 1);
        REQUIRE(got.size() == 3);
        CHECK(got[0].coords(0) == -1);
        CHECK(got[1].coords(0) == 0);
        CHECK(got[2].coords(0) == 1);
    }
    SECTION("A(2) grid in lexicographic order") {
        const auto got = enumerate_dominant(RootSystem::type_a(2), 1);
        REQUIRE(got.size() == 4);
        const int want[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
        for (int i = 0; i < 4; ++i) {
            CHECK(got[i].coords(0) == want[i][0]);
            CHECK(got[i].coords(1) == want[i][1]);
        }
    }
}

TEST_CASE("alternating Vandermonde identity over the Weyl group") {
    std::mt19937 rng(101u);
    for (auto sys : {RootSystem::type_a(1), RootSystem::type_a(2), RootSystem::type_a(3)}) {
        for (int i = 0; i < 100; ++i) {
            const Vec X = random_vec(rng, sys.rank, 3.0);
            double sum = 0.0;
            for (const auto& t : weyl_orbit(sys, X)) sum += t.sign * vandermonde_p(sys, t.vector);
            const double ref = static_cast<double>(sys.weyl_order) * vandermonde_p(sys, X);
            CHECK(std::abs(sum - ref) <=
                  1e-9 * static_cast<double>(sys.weyl_order) * std::max(std::abs(ref), 1.0));
        }
    }
}

TEST_CASE("characters converge to the dimension near the identity") {
    std::mt19937 rng(5u);
    for (auto sys : {RootSystem::type_a(1), RootSystem::type_a(2)}) {
        Vec dir;
        do {
            dir = random_vec(rng, sys.rank, 1.0).normalized();
        } while ([&] {
            for (const Vec& a : sys.positive_roots)
                if (std::abs(a.dot(dir)) < 0.05) return true;
            return false;
        }());
        for (const auto& lam : enumerate_dominant(sys, 2)) {
            const double d = static_cast<double>(dim_irrep(sys, lam));
            double gap = 0.0;
            for (int j = 0; j < 10; ++j)
                gap = std::abs(char_imag_exp(sys, lam, (0.2 / (1 << j)) * dir) - d);
            CHECK(gap <= 1e-6 * std::max(1.0, d));
        }
    }
}

TEST_CASE("Weyl invariance of eta and the squared Vandermonde") {
    std::mt19937 rng(23u);
    for (auto sys : {RootSystem::type_a(1), RootSystem::type_a(2)}) {
        for (int i = 0; i < 25; ++i) {
            const Vec Y = random_vec(rng, sys.rank, 2.5);
            const double e0 = eta(sys, Y);
            const double p2 = std::pow(vandermonde_p(sys, Y), 2);
            for (const auto& t : weyl_orbit(sys, Y)) {
                CHECK(eta(sys, t.vector) == Approx(e0).epsilon(1e-12));
                CHECK(std::pow(vandermonde_p(sys, t.vector), 2) == Approx(p2).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("rank guards") {
    CHECK_THROWS_AS(RootSystem::torus(0), std::invalid_argument);
    CHECK_THROWS_AS(RootSystem::type_a(0), std::invalid_argument);
    CHECK_THROWS_AS(RootSystem::type_a(4), std::invalid_argument);
    const auto sys = RootSystem::type_a(2);
    IVec short_coords(1);
    short_coords << 1;
    CHECK_THROWS_AS(sys.embed(short_coords), std::invalid_argument);
}
