#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksh/numeric.hpp"

namespace ksh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

enum class GroupFamily { Torus, TypeA };

// Highest weight given by non-negative integer coordinates in the
// fundamental-weight basis (any integers for a torus), together with its
// embedding into the Cartan subalgebra in the orthonormal basis.
struct DominantWeight {
    IVec coords;
    Vec vector;
};

struct SignedVector {
    Vec vector;
    int sign;  // determinant sign of the Weyl element that produced it
};

// Root data for the supported families. Torus(r) has no roots and a trivial
// Weyl group. A(r) is realized on the sum-zero hyperplane of R^{r+1},
// orthonormalized so that the invariant form is the dot product and all roots
// have squared length 2. The Weyl group of A(r) is S_{r+1} acting by
// coordinate permutations, conjugated into the orthonormal basis; elements
// are enumerated in lexicographic order of one-line notation with sign equal
// to the permutation parity.
class RootSystem {
public:
    GroupFamily family;
    int rank = 0;                      // r = dim of the Cartan subalgebra
    std::vector<Vec> positive_roots;
    Vec weyl_vector;                   // rho = half sum of positive roots
    long weyl_order = 1;               // |W|
    int group_dim = 0;                 // n = r + 2 |Delta+|

    std::vector<Mat> weyl_matrices;    // orthogonal action on the rank space
    std::vector<int> weyl_signs;
    std::vector<Vec> fundamental_weights;       // empty for a torus
    std::vector<IVec> simple_root_fcoords;      // alpha_i in fundamental coords

    static RootSystem torus(int r) {
        if (r < 1) throw std::invalid_argument("torus rank must be >= 1");
        RootSystem sys;
        sys.family = GroupFamily::Torus;
        sys.rank = r;
        sys.weyl_vector = Vec::Zero(r);
        sys.weyl_order = 1;
        sys.group_dim = r;
        sys.weyl_matrices.push_back(Mat::Identity(r, r));
        sys.weyl_signs.push_back(1);
        return sys;
    }

    static RootSystem type_a(int r) {
        if (r < 1) throw std::invalid_argument("A(r) rank must be >= 1");
        if (r > 3) throw std::invalid_argument("A(r) supported for r <= 3");
        RootSystem sys;
        sys.family = GroupFamily::TypeA;
        sys.rank = r;
        const int m = r + 1;

        // Orthonormal basis of the sum-zero hyperplane, built by Gram-Schmidt
        // from the differences e_i - e_{i+1}. Rows of E map ambient R^m
        // vectors (restricted to the hyperplane) to rank-space coordinates.
        Mat E(r, m);
        for (int i = 0; i < r; ++i) {
            Vec v = Vec::Zero(m);
            v(i) = 1.0;
            v(i + 1) = -1.0;
            for (int j = 0; j < i; ++j) v -= E.row(j).dot(v) * E.row(j).transpose();
            E.row(i) = v / v.norm();
        }
        sys.embedding_ = E;

        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                Vec a = Vec::Zero(m);
                a(i) = 1.0;
                a(j) = -1.0;
                sys.positive_roots.push_back(E * a);
            }
        sys.weyl_vector = Vec::Zero(r);
        for (const Vec& a : sys.positive_roots) sys.weyl_vector += 0.5 * a;

        // Fundamental weights: omega_i = e_1 + ... + e_i - (i/m) * ones.
        for (int i = 1; i <= r; ++i) {
            Vec w = Vec::Constant(m, -static_cast<double>(i) / m);
            for (int j = 0; j < i; ++j) w(j) += 1.0;
            sys.fundamental_weights.push_back(E * w);
        }

        // Simple roots in fundamental coordinates are the Cartan matrix rows:
        // alpha_i = 2 omega_i - omega_{i-1} - omega_{i+1}.
        for (int i = 0; i < r; ++i) {
            IVec fc = IVec::Zero(r);
            fc(i) = 2;
            if (i > 0) fc(i - 1) = -1;
            if (i + 1 < r) fc(i + 1) = -1;
            sys.simple_root_fcoords.push_back(fc);
        }

        std::vector<int> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            Mat P = Mat::Zero(m, m);
            for (int k = 0; k < m; ++k) P(k, perm[k]) = 1.0;
            sys.weyl_matrices.push_back(E * P * E.transpose());
            sys.weyl_signs.push_back(parity(perm));
        } while (std::next_permutation(perm.begin(), perm.end()));

        sys.weyl_order = static_cast<long>(sys.weyl_matrices.size());
        sys.group_dim = r + 2 * static_cast<int>(sys.positive_roots.size());
        return sys;
    }

    // Embed fundamental (or torus lattice) coordinates into the rank space.
    Vec embed(const IVec& coords) const {
        if (coords.size() != rank)
            throw std::invalid_argument("weight coordinate size does not match rank");
        if (family == GroupFamily::Torus) return coords.cast<double>();
        Vec v = Vec::Zero(rank);
        for (int i = 0; i < rank; ++i)
            v += static_cast<double>(coords(i)) * fundamental_weights[i];
        return v;
    }

    DominantWeight weight(const IVec& coords) const {
        return DominantWeight{coords, embed(coords)};
    }

    DominantWeight weight(std::initializer_list<int> coords) const {
        IVec c(static_cast<int>(coords.size()));
        int i = 0;
        for (int x : coords) c(i++) = x;
        return weight(c);
    }

    bool is_dominant(const IVec& coords) const {
        if (family == GroupFamily::Torus) return true;
        return (coords.array() >= 0).all();
    }

private:
    Mat embedding_;  // rows: orthonormal basis of the sum-zero hyperplane

    static int parity(const std::vector<int>& perm) {
        std::vector<int> p = perm;
        int sign = 1;
        for (std::size_t i = 0; i < p.size(); ++i)
            while (p[i] != static_cast<int>(i)) {
                std::swap(p[i], p[p[i]]);
                sign = -sign;
            }
        return sign;
    }
};

inline std::vector<SignedVector> weyl_orbit(const RootSystem& sys, const Vec& v) {
    if (v.size() != sys.rank)
        throw std::invalid_argument("weyl_orbit: vector size does not match rank");
    std::vector<SignedVector> orbit;
    orbit.reserve(sys.weyl_matrices.size());
    for (std::size_t i = 0; i < sys.weyl_matrices.size(); ++i)
        orbit.push_back({sys.weyl_matrices[i] * v, sys.weyl_signs[i]});
    return orbit;
}

inline double vandermonde_p(const RootSystem& sys, const Vec& X) {
    double p = 1.0;
    for (const Vec& a : sys.positive_roots) p *= a.dot(X);
    return p;
}

inline double eta(const RootSystem& sys, const Vec& Y) {
    double v = 1.0;
    for (const Vec& a : sys.positive_roots) {
        const double x = a.dot(Y);
        if (std::abs(x) < 1e-4) {
            const double s = x * x;
            v *= 1.0 + s / 6.0 * (1.0 + s / 20.0);
        } else {
            v *= std::sinh(x) / x;
        }
    }
    return v;
}

inline double torus_volume(const RootSystem& sys) {
    const int npos = static_cast<int>(sys.positive_roots.size());
    if (npos == 0) return 1.0;
    return vandermonde_p(sys, sys.weyl_vector) / std::pow(2.0 * kPi, npos);
}

inline long dim_irrep(const RootSystem& sys, const DominantWeight& lambda) {
    if (!sys.is_dominant(lambda.coords))
        throw std::invalid_argument("dim_irrep: weight is not dominant");
    if (sys.family == GroupFamily::Torus) return 1;
    const Vec lr = lambda.vector + sys.weyl_vector;
    double d = 1.0;
    for (const Vec& a : sys.positive_roots) d *= lr.dot(a) / sys.weyl_vector.dot(a);
    const double rounded = std::round(d);
    if (std::abs(d - rounded) > 1e-9)
        throw std::runtime_error("dim_irrep: non-integer dimension " + std::to_string(d));
    return static_cast<long>(rounded);
}

inline std::vector<DominantWeight> enumerate_dominant(const RootSystem& sys, int cutoff) {
    if (cutoff < 0) throw std::invalid_argument("enumerate_dominant: cutoff must be >= 0");
    const int lo = (sys.family == GroupFamily::Torus) ? -cutoff : 0;
    std::vector<DominantWeight> out;
    IVec c = IVec::Constant(sys.rank, lo);
    while (true) {
        out.push_back(sys.weight(c));
        int i = sys.rank - 1;
        while (i >= 0 && c(i) == cutoff) {
            c(i) = lo;
            --i;
        }
        if (i < 0) break;
        ++c(i);
    }
    std::sort(out.begin(), out.end(), [&](const DominantWeight& a, const DominantWeight& b) {
        return std::lexicographical_compare(a.coords.data(), a.coords.data() + a.coords.size(),
                                            b.coords.data(), b.coords.data() + b.coords.size());
    });
    return out;
}

// One weight of an irreducible representation with its multiplicity.
struct WeightLine {
    IVec fcoords;
    Vec vector;
    long multiplicity;
};

namespace detail {

inline std::vector<int> key_of(const IVec& v) {
    return std::vector<int>(v.data(), v.data() + v.size());
}

// Reflect until all fundamental coordinates are non-negative. Each step
// applies a simple reflection s_i(mu) = mu - mu_i alpha_i at a negative
// coordinate, which strictly raises mu in the dominance order.
inline IVec dominantize(const RootSystem& sys, IVec mu) {
    for (int guard = 0; guard < 100000; ++guard) {
        int j = -1;
        for (int i = 0; i < mu.size(); ++i)
            if (mu(i) < 0) {
                j = i;
                break;
            }
        if (j < 0) return mu;
        mu -= mu(j) * sys.simple_root_fcoords[j];
    }
    throw std::runtime_error("dominantize: reflection loop did not terminate");
}

// Full weight system of the irrep with highest weight lambda, multiplicities
// by Freudenthal's recursion. All lattice arithmetic is exact in fundamental
// coordinates; inner products use the orthonormal embedding. The total count
// is checked against the Weyl dimension formula.
inline std::vector<WeightLine> weight_system(const RootSystem& sys, const DominantWeight& lambda) {
    if (sys.family == GroupFamily::Torus)
        return {WeightLine{lambda.coords, lambda.vector, 1}};

    const int r = sys.rank;
    const double lam_norm2 = lambda.vector.squaredNorm();
    const Vec lr = lambda.vector + sys.weyl_vector;
    const double lr_norm2 = lr.squaredNorm();

    // Positive roots in fundamental coordinates: sums of consecutive simple
    // roots for type A. Recovered numerically from the embedding and rounded;
    // entries are small integers.
    std::vector<IVec> pos_fcoords;
    {
        Mat FW(r, r);
        for (int i = 0; i < r; ++i) FW.col(i) = sys.fundamental_weights[i];
        // alpha expressed in the fundamental-weight basis solves FW * c = alpha.
        Eigen::FullPivLU<Mat> lu(FW);
        for (const Vec& a : sys.positive_roots) {
            Vec c = lu.solve(a);
            IVec fc(r);
            for (int i = 0; i < r; ++i) {
                fc(i) = static_cast<int>(std::llround(c(i)));
                if (std::abs(c(i) - fc(i)) > 1e-6)
                    throw std::runtime_error("weight_system: non-integral root coordinates");
            }
            pos_fcoords.push_back(fc);
        }
    }

    // Enumerate all weights below lambda by breadth-first subtraction of
    // simple roots. Every weight of the irrep satisfies |mu| <= |lambda|, and
    // each one is reachable from lambda through other weights, so pruning on
    // the norm keeps the search exact.
    std::set<std::vector<int>> seen;
    std::vector<IVec> all;
    std::vector<IVec> frontier{lambda.coords};
    seen.insert(key_of(lambda.coords));
    all.push_back(lambda.coords);
    while (!frontier.empty()) {
        std::vector<IVec> next;
        for (const IVec& mu : frontier)
            for (int j = 0; j < r; ++j) {
                IVec nu = mu - sys.simple_root_fcoords[j];
                auto key = key_of(nu);
                if (seen.count(key)) continue;
                if (sys.embed(nu).squaredNorm() > lam_norm2 + 1e-9) continue;
                seen.insert(key);
                next.push_back(nu);
                all.push_back(nu);
            }
        frontier = std::move(next);
    }

    // Dominant representatives ordered by depth below lambda, so that the
    // recursion only consults multiplicities already computed.
    struct Dom {
        IVec fc;
        Vec vec;
        long level;
    };
    std::vector<Dom> doms;
    {
        Mat A(r, r);  // Cartan matrix, to convert depth vectors to levels
        for (int i = 0; i < r; ++i) A.col(i) = sys.simple_root_fcoords[i].cast<double>();
        Eigen::FullPivLU<Mat> lu(A);
        std::set<std::vector<int>> dom_seen;
        for (const IVec& mu : all) {
            if (!sys.is_dominant(mu)) continue;
            auto key = key_of(mu);
            if (dom_seen.count(key)) continue;
            dom_seen.insert(key);
            Vec k = lu.solve((lambda.coords - mu).cast<double>());
            long lvl = 0;
            for (int i = 0; i < r; ++i) lvl += std::llround(k(i));
            doms.push_back({mu, sys.embed(mu), lvl});
        }
        std::sort(doms.begin(), doms.end(), [](const Dom& a, const Dom& b) {
            if (a.level != b.level) return a.level < b.level;
            return std::lexicographical_compare(a.fc.data(), a.fc.data() + a.fc.size(),
                                                b.fc.data(), b.fc.data() + b.fc.size());
        });
    }

    std::map<std::vector<int>, long> mult;
    auto lookup = [&](const IVec& mu) -> long {
        auto it = mult.find(key_of(dominantize(sys, mu)));
        return it == mult.end() ? 0 : it->second;
    };
    for (const Dom& d : doms) {
        if (d.level == 0) {
            mult[key_of(d.fc)] = 1;
            continue;
        }
        double num = 0.0;
        for (std::size_t ai = 0; ai < pos_fcoords.size(); ++ai) {
            for (int k = 1;; ++k) {
                IVec nu = d.fc + k * pos_fcoords[ai];
                Vec nv = sys.embed(nu);
                if (nv.squaredNorm() > lam_norm2 + 1e-9) break;
                const long m = lookup(nu);
                if (m > 0) num += 2.0 * m * nv.dot(sys.positive_roots[ai]);
            }
        }
        const double den = lr_norm2 - (d.vec + sys.weyl_vector).squaredNorm();
        const double value = num / den;
        const long m = std::lround(value);
        if (std::abs(value - m) > 1e-6)
            throw std::runtime_error("weight_system: non-integer multiplicity");
        mult[key_of(d.fc)] = m;
    }

    // Expand Weyl orbits exactly in fundamental coordinates.
    std::vector<WeightLine> lines;
    long total = 0;
    for (const Dom& d : doms) {
        const long m = mult[key_of(d.fc)];
        std::set<std::vector<int>> orbit{key_of(d.fc)};
        std::vector<IVec> work{d.fc};
        while (!work.empty()) {
            IVec mu = work.back();
            work.pop_back();
            for (int j = 0; j < r; ++j) {
                IVec nu = mu - mu(j) * sys.simple_root_fcoords[j];
                auto key = key_of(nu);
                if (orbit.insert(key).second) work.push_back(nu);
            }
        }
        for (const auto& key : orbit) {
            IVec fc = Eigen::Map<const IVec>(key.data(), static_cast<int>(key.size()));
            lines.push_back({fc, sys.embed(fc), m});
            total += m;
        }
    }
    if (total != dim_irrep(sys, lambda))
        throw std::runtime_error("weight_system: multiplicities do not sum to the dimension");
    return lines;
}

}  // namespace detail

// Character chi_lambda(exp(2 i zeta)) for real zeta, which is real valued.
// Regular points use the Weyl quotient with a shifted alternating sum; near
// the reflection walls (any |alpha(zeta)| < 1e-4) the quotient degenerates to
// 0/0 and the evaluation falls back to the positive weight-multiplicity sum.
inline double char_imag_exp(const RootSystem& sys, const DominantWeight& lambda, const Vec& zeta) {
    if (zeta.size() != sys.rank)
        throw std::invalid_argument("char_imag_exp: argument size does not match rank");
    if (!sys.is_dominant(lambda.coords))
        throw std::invalid_argument("char_imag_exp: weight is not dominant");

    if (sys.family == GroupFamily::Torus) {
        const double ex = -2.0 * lambda.vector.dot(zeta);
        if (ex > kMaxExpArg) throw std::range_error("char_imag_exp: result exceeds double range");
        return std::exp(ex);
    }

    double min_wall = std::numeric_limits<double>::infinity();
    for (const Vec& a : sys.positive_roots) min_wall = std::min(min_wall, std::abs(a.dot(zeta)));

    if (min_wall < 1e-4) {
        detail::SignedLogSum s;
        for (const WeightLine& w : detail::weight_system(sys, lambda))
            s.add(std::log(static_cast<double>(w.multiplicity)) - 2.0 * w.vector.dot(zeta), 1);
        const double lg = s.log_abs();
        if (lg > kMaxExpArg) throw std::range_error("char_imag_exp: result exceeds double range");
        return std::exp(lg);
    }

    detail::SignedLogSum num;
    const auto orbit = weyl_orbit(sys, lambda.vector + sys.weyl_vector);
    for (const SignedVector& t : orbit) num.add(-2.0 * t.vector.dot(zeta), t.sign);

    // Denominator in closed form: prod over positive roots of -2 sinh(alpha(zeta)).
    double log_den = 0.0;
    int den_sign = 1;
    for (const Vec& a : sys.positive_roots) {
        const double x = a.dot(zeta);
        log_den += detail::log_two_sinh_abs(x);
        if (x > 0.0) den_sign = -den_sign;
    }
    const double lg = num.log_abs() - log_den;
    if (lg > kMaxExpArg) throw std::range_error("char_imag_exp: result exceeds double range");
    return num.sign() * den_sign * std::exp(lg);
}

}  // namespace ksh
