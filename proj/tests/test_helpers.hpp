#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here (finite differences, grid + projected-gradient search) deliberately
// avoid the moment/SDP code paths they are used to check.

#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "paretopt/driver.hpp"

namespace testutil {

using paretopt::Exponent;
using paretopt::HybridProblem;
using paretopt::MooProblem;
using paretopt::Polynomial;
using paretopt::SweepBox;

inline Polynomial p2(std::initializer_list<std::tuple<int, int, double>> terms) {
    Polynomial p(2);
    for (const auto& [a, b, c] : terms) p.add_term(Exponent{a, b}, c);
    return p;
}

// Three convex objectives over the nonnegative quadrant; the workhorse
// fixture for driver and acceptance tests.
//   f1 = (x1-3)^2 + (x2-2)^2,  f2 = x1 + x2,  f3 = x1 + 2 x2,
//   g1 = -x1 <= 0,             g2 = -x2 <= 0,   lambda = (1,1,1).
inline MooProblem quadrant_fixture() {
    MooProblem mp;
    mp.n = 2;
    mp.objectives = {
        p2({{2, 0, 1.0}, {0, 2, 1.0}, {1, 0, -6.0}, {0, 1, -4.0}, {0, 0, 13.0}}),
        p2({{1, 0, 1.0}, {0, 1, 1.0}}),
        p2({{1, 0, 1.0}, {0, 1, 2.0}}),
    };
    mp.constraints = {
        p2({{1, 0, -1.0}}),
        p2({{0, 1, -1.0}}),
    };
    mp.lambda = Eigen::Vector3d::Ones();
    return mp;
}

// Nonconvex control: both objectives equal to (x1 x2 - 1)^2 + x2^2 with an
// unconstrained feasible set. The infimum is not attained anywhere.
inline MooProblem nonconvex_fixture() {
    MooProblem mp;
    mp.n = 2;
    Polynomial f = p2({{2, 2, 1.0}, {1, 1, -2.0}, {0, 0, 1.0}, {0, 2, 1.0}});
    mp.objectives = {f, f};
    mp.lambda = Eigen::Vector2d::Ones();
    return mp;
}

// --- finite-difference oracles -------------------------------------------

inline Eigen::VectorXd fd_gradient(const Polynomial& f, const Eigen::VectorXd& x) {
    const double h = 1e-4 * std::max(1.0, x.norm());
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd hi = x, lo = x;
        hi(i) += h;
        lo(i) -= h;
        g(i) = (f.evaluate(hi) - f.evaluate(lo)) / (2.0 * h);
    }
    return g;
}

inline Eigen::MatrixXd fd_hessian(const Polynomial& f, const Eigen::VectorXd& x) {
    const double h = 1e-4 * std::max(1.0, x.norm());
    const Eigen::Index n = x.size();
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
            pp(i) += h; pp(j) += h;
            pm(i) += h; pm(j) -= h;
            mp(i) -= h; mp(j) += h;
            mm(i) -= h; mm(j) -= h;
            m(i, j) = (f.evaluate(pp) - f.evaluate(pm) - f.evaluate(mp) + f.evaluate(mm)) /
                      (4.0 * h * h);
        }
    }
    return m;
}

// --- brute-force scalar oracle -------------------------------------------

// Minimizes lambda^T f over K_z: dense grid over the box (plus z itself),
// then projected-gradient refinement where infeasible steps backtrack and
// slide along the tangent of whichever constraint blocks them.
inline double oracle_min_value(const HybridProblem& hp, const Eigen::Vector2d& lo,
                               const Eigen::Vector2d& hi, int grid = 160,
                               Eigen::VectorXd* argmin = nullptr) {
    const Polynomial lf = hp.base.weighted_sum();
    Eigen::VectorXd best = hp.z;
    double bestv = lf.evaluate(best);

    for (int i = 0; i <= grid; ++i) {
        for (int j = 0; j <= grid; ++j) {
            Eigen::VectorXd x(2);
            x << lo(0) + (hi(0) - lo(0)) * i / grid, lo(1) + (hi(1) - lo(1)) * j / grid;
            if (!paretopt::feasibility_check(hp, x, 0.0)) continue;
            const double v = lf.evaluate(x);
            if (v < bestv) {
                bestv = v;
                best = x;
            }
        }
    }

    // Candidate descent directions: raw gradient plus its projection onto the
    // tangent space of each nearly active constraint.
    auto directions = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
        std::vector<Eigen::VectorXd> dirs{-g};
        auto add_tangent = [&](const Polynomial& h, double hval, double scale) {
            if (hval < -1e-6 * scale) return;
            Eigen::VectorXd nrm = h.gradient_at(x);
            const double nn = nrm.squaredNorm();
            if (nn < 1e-18) return;
            Eigen::VectorXd d = -g + (g.dot(nrm) / nn) * nrm;
            if (d.norm() > 1e-14) dirs.push_back(d);
        };
        for (const Polynomial& gcon : hp.base.constraints)
            add_tangent(gcon, gcon.evaluate(x), 1.0 + std::abs(gcon.evaluate(hp.z)));
        for (int j = 0; j < hp.base.objective_count(); ++j) {
            const Polynomial& f = hp.base.objectives[static_cast<std::size_t>(j)];
            add_tangent(f, f.evaluate(x) - hp.f_at_z(j), 1.0 + std::abs(hp.f_at_z(j)));
        }
        return dirs;
    };

    double step = (hi - lo).norm() / grid;
    for (int it = 0; it < 6000 && step > 1e-13; ++it) {
        const Eigen::VectorXd g = lf.gradient_at(best);
        bool improved = false;
        for (const Eigen::VectorXd& d : directions(best, g)) {
            const double dn = d.norm();
            if (dn < 1e-16) continue;
            for (double t = step; t > 1e-14; t *= 0.5) {
                Eigen::VectorXd cand = best + (t / dn) * d;
                if (!paretopt::feasibility_check(hp, cand, 0.0)) continue;
                const double v = lf.evaluate(cand);
                if (v < bestv - 1e-15 * (1.0 + std::abs(bestv))) {
                    bestv = v;
                    best = cand;
                    improved = true;
                    break;
                }
            }
            if (improved) break;
        }
        if (!improved) step *= 0.5;
    }
    if (argmin) *argmin = best;
    return bestv;
}

// --- random convex instances ----------------------------------------------

struct RandomInstance {
    MooProblem problem;
    SweepBox box;
};

// Two-variable convex instances: convex quadratics plus an occasional
// ||x||^4-style quartic, linear halfplane constraints, and box constraints
// keeping the feasible set compact inside [-2, 2]^2.
inline RandomInstance random_convex_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto u = [&](double a, double b) {
        std::uniform_real_distribution<double> d(a, b);
        return d(rng);
    };

    const Polynomial x1 = Polynomial::variable(2, 0);
    const Polynomial x2 = Polynomial::variable(2, 1);
    const int p = 2 + static_cast<int>(rng() % 2);

    MooProblem mp;
    mp.n = 2;
    for (int j = 0; j < p; ++j) {
        const double a = u(-1.0, 1.0), b = u(-1.0, 1.0), c = u(-1.0, 1.0), d = u(-1.0, 1.0);
        // Q = A^T A + 0.3 I is safely positive definite.
        const double q11 = a * a + c * c + 0.3;
        const double q12 = a * b + c * d;
        const double q22 = b * b + d * d + 0.3;
        const double c1 = u(-1.0, 1.0), c2 = u(-1.0, 1.0);
        Polynomial d1 = x1 - Polynomial::constant(2, c1);
        Polynomial d2 = x2 - Polynomial::constant(2, c2);
        Polynomial f = d1 * d1 * q11 + d1 * d2 * (2.0 * q12) + d2 * d2 * q22 +
                       x1 * u(-0.3, 0.3) + x2 * u(-0.3, 0.3);
        if (j == 0 && rng() % 2 == 0) {
            Polynomial h = x1 * x1 * u(0.5, 1.5) + x2 * x2 * u(0.5, 1.5);
            f += h * h * u(0.2, 0.6);
        }
        mp.objectives.push_back(std::move(f));
    }

    const double box_half = 2.0;
    mp.constraints = {
        x1 - Polynomial::constant(2, box_half),
        x1 * -1.0 - Polynomial::constant(2, box_half),
        x2 - Polynomial::constant(2, box_half),
        x2 * -1.0 - Polynomial::constant(2, box_half),
    };
    const int extra = 1 + static_cast<int>(rng() % 2);
    for (int i = 0; i < extra; ++i) {
        const double a = u(-1.0, 1.0), b = u(-1.0, 1.0);
        const double rhs = u(0.3, 1.2);  // keeps the origin strictly feasible
        mp.constraints.push_back(x1 * a + x2 * b - Polynomial::constant(2, rhs));
    }
    mp.lambda = Eigen::VectorXd::Ones(p);

    RandomInstance inst;
    inst.problem = std::move(mp);
    inst.box.lo = Eigen::Vector2d(-box_half, -box_half);
    inst.box.hi = Eigen::Vector2d(box_half, box_half);
    return inst;
}

// A feasible z for the instance, rejection-sampled from its box.
inline Eigen::VectorXd random_feasible_z(const RandomInstance& inst, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int tries = 0; tries < 100000; ++tries) {
        Eigen::VectorXd z(2);
        for (int i = 0; i < 2; ++i)
            z(i) = inst.box.lo(i) + (inst.box.hi(i) - inst.box.lo(i)) * d(rng);
        bool ok = true;
        for (const Polynomial& g : inst.problem.constraints)
            if (g.evaluate(z) > 0.0) { ok = false; break; }
        if (ok) return z;
    }
    throw std::runtime_error("random_feasible_z: no feasible sample found");
}

}  // namespace testutil
