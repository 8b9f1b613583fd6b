#include "paretopt/driver.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <random>
#include <thread>

namespace paretopt {

namespace {

bool in_feasible_set(const MooProblem& problem, const Eigen::VectorXd& z, double tol) {
    for (const Polynomial& g : problem.constraints)
        if (g.evaluate(z) > tol) return false;
    return true;
}

std::uint64_t seed_from_z(const Eigen::VectorXd& z, std::uint64_t base) {
    std::uint64_t h = base ^ 0x9e3779b97f4a7c15ull;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        std::uint64_t bits;
        const double v = z(i);
        static_assert(sizeof bits == sizeof v);
        std::memcpy(&bits, &v, sizeof bits);
        h = (h ^ bits) * 1099511628211ull;
    }
    return h;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a(i) != b(i)) return a(i) < b(i);
    }
    return a.size() < b.size();
}

Eigen::VectorXd objective_values(const MooProblem& problem, const Eigen::VectorXd& x) {
    Eigen::VectorXd v(problem.objective_count());
    for (int j = 0; j < problem.objective_count(); ++j)
        v(j) = problem.objectives[static_cast<std::size_t>(j)].evaluate(x);
    return v;
}

// Local KKT polish of an extracted candidate: restore the active constraint
// manifold with Gauss-Newton steps, then take reduced Newton steps on the
// weighted objective along its null space. The polished point is kept only
// when it stays feasible and keeps lambda^T f inside the extraction
// soundness envelope (restoring feasibility can raise the objective when the
// iterate sat slightly outside K_z).
Eigen::VectorXd polish_point(const HybridProblem& hp, const Eigen::VectorXd& start,
                             double feas_tol, double objective_allowance) {
    const MooProblem& mp = hp.base;
    const int n = mp.n;
    const Polynomial lf = mp.weighted_sum();
    const double f_start = lf.evaluate(start);

    // Active constraints of K_z at the candidate.
    std::vector<Polynomial> active;
    for (std::size_t i = 0; i < mp.constraints.size(); ++i) {
        const double scale = 1.0 + std::abs(mp.constraints[i].evaluate(hp.z));
        if (mp.constraints[i].evaluate(start) >= -1e-3 * scale)
            active.push_back(mp.constraints[i]);
    }
    for (std::size_t j = 0; j < mp.objectives.size(); ++j) {
        const double fz = hp.f_at_z(static_cast<Eigen::Index>(j));
        const double scale = 1.0 + std::abs(fz);
        if (mp.objectives[j].evaluate(start) - fz >= -1e-3 * scale)
            active.push_back(mp.objectives[j] - Polynomial::constant(n, fz));
    }
    const int a = static_cast<int>(active.size());

    Eigen::VectorXd x = start;
    for (int iter = 0; iter < 12; ++iter) {
        Eigen::MatrixXd jac(a, n);
        Eigen::VectorXd h(a);
        for (int i = 0; i < a; ++i) {
            jac.row(i) = active[static_cast<std::size_t>(i)].gradient_at(x).transpose();
            h(i) = active[static_cast<std::size_t>(i)].evaluate(x);
        }

        Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd kernel = Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd omega = Eigen::VectorXd::Zero(a);
        if (a > 0) {
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
            step = -cod.solve(h);  // feasibility restoration, minimum norm
            Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
            lu.setThreshold(1e-9);
            kernel = lu.kernel();
            if (kernel.cols() == 1 && kernel.isZero(0.0)) kernel.resize(n, 0);
            // Least-squares multipliers: J^T omega ~ -grad.
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> codt(jac.transpose());
            omega = codt.solve(-lf.gradient_at(x));
        }
        if (step.norm() > 0.5 * (1.0 + x.norm())) return start;
        x += step;

        if (kernel.cols() > 0) {
            Eigen::VectorXd grad = lf.gradient_at(x);
            Eigen::MatrixXd w = lf.hessian_at(x);
            for (int i = 0; i < a; ++i)
                w += omega(i) * active[static_cast<std::size_t>(i)].hessian_at(x);
            Eigen::VectorXd residual = grad;
            if (a > 0) residual += jac.transpose() * omega;
            Eigen::MatrixXd hn = kernel.transpose() * w * kernel;
            hn += 1e-12 * Eigen::MatrixXd::Identity(hn.rows(), hn.cols());
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hn);
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
                Eigen::VectorXd du = ldlt.solve(-kernel.transpose() * residual);
                Eigen::VectorXd dx = kernel * du;
                if (dx.norm() > 0.5 * (1.0 + x.norm())) return start;
                x += dx;
            }
        }

        if (step.norm() < 1e-14 && iter > 0) break;
    }

    const double f_new = lf.evaluate(x);
    if (!feasibility_check(hp, x, std::min(feas_tol, 1e-6)) ||
        f_new > f_start + objective_allowance ||
        (x - start).norm() > 0.5 * (1.0 + start.norm()))
        return start;
    return x;
}

// Interior-point stalls on degenerate instances (empty-interior K_z, orders
// past finite convergence) still carry accurate iterates; the extraction
// soundness checks downstream are the real gate.
bool usable_solve(const SdpSolution& sol, const SweepConfig& cfg) {
    if (sol.status == SdpStatus::Optimal) return true;
    if (sol.status != SdpStatus::MaxIter && sol.status != SdpStatus::NumericalTrouble) return false;
    const double gap_ok = std::max(1e-4, 100.0 * cfg.tol_gap);
    const double feas_ok = std::max(1e-5, 100.0 * cfg.tol_feas);
    return sol.gap <= gap_ok && sol.primal_residual <= feas_ok && sol.dual_residual <= feas_ok;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_feasible_z(const SweepConfig& cfg, const MooProblem& problem) {
    problem.validate();
    std::vector<Eigen::VectorXd> out;
    for (std::size_t i = 0; i < cfg.z_list.size(); ++i) {
        const Eigen::VectorXd& z = cfg.z_list[i];
        if (z.size() != problem.n)
            throw std::invalid_argument("sample_feasible_z: explicit z dimension mismatch");
        if (!in_feasible_set(problem, z, 1e-9))
            throw std::invalid_argument("sample_feasible_z: explicit z outside the feasible set (entry " +
                                        std::to_string(i) + ")");
        out.push_back(z);
    }
    if (!cfg.box || cfg.samples <= 0) return out;

    const SweepBox& box = *cfg.box;
    if (box.lo.size() != problem.n || box.hi.size() != problem.n)
        throw std::invalid_argument("sample_feasible_z: box dimension mismatch");
    for (Eigen::Index i = 0; i < box.lo.size(); ++i) {
        if (!std::isfinite(box.lo(i)) || !std::isfinite(box.hi(i)) || box.lo(i) > box.hi(i))
            throw std::invalid_argument("sample_feasible_z: box bounds must be finite with lo <= hi");
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    long draws = 0;
    long accepted = 0;
    while (accepted < cfg.samples) {
        Eigen::VectorXd z(problem.n);
        for (int i = 0; i < problem.n; ++i)
            z(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unif(rng);
        ++draws;
        if (in_feasible_set(problem, z, 0.0)) {
            out.push_back(std::move(z));
            ++accepted;
        }
        if (draws >= 1000000 && accepted * 1000 < draws)
            throw SamplingStalled(
                "sample_feasible_z: acceptance rate below 0.1% over 1e6 draws; "
                "choose a box with more overlap with the feasible set");
    }
    return out;
}

EfficientPoint solve_hybrid(const MooProblem& problem, const Eigen::VectorXd& z,
                            const SweepConfig& cfg) {
    HybridProblem hp = HybridProblem::at(problem, z);
    const RelaxationSpec spec0 = RelaxationSpec::derive(problem, cfg.family, 0);
    const int k_start = std::max(1, spec0.k0);
    const int k_max = std::max(cfg.k_max < 0 ? spec0.k0 + 3 : cfg.k_max, k_start);

    SdpOptions opts;
    opts.eps_gap = cfg.tol_gap;
    opts.eps_feas = cfg.tol_feas;
    opts.max_iter = cfg.solver_max_iter;

    EfficientPoint pt;
    pt.z = z;
    pt.family = cfg.family;

    Eigen::VectorXd fallback_x = z;  // overwritten by first-order moments below
    const Polynomial lf = problem.weighted_sum();

    for (int k = k_start; k <= k_max; ++k) {
        SdpInstance inst = cfg.family == RelaxFamily::Q
                               ? build_q(hp, k)
                               : build_p(hp, k, cfg.localization_bound);
        SdpSolution sol = solve(inst, opts);
        pt.solve_status = sol.status;
        pt.objective = sol.objective;
        pt.gap = sol.gap;
        pt.k_used = k;

        MomentVector y(MonomialBasis(problem.n, 2 * k), sol.y);
        Eigen::VectorXd first_order(problem.n);
        for (int i = 0; i < problem.n; ++i) first_order(i) = y[Exponent::unit(problem.n, i)];
        fallback_x = first_order;

        if (!usable_solve(sol, cfg)) continue;

        RankProfile profile = check_flat_truncation(y, k, spec0.k0, cfg.tol_rank);
        pt.ranks = profile.ranks;
        if (!profile.flat_t) continue;

        ExtractOptions eopts;
        eopts.rank_tol = cfg.tol_rank;
        eopts.seed = seed_from_z(z, cfg.seed);
        auto atoms = extract_atoms(y, *profile.flat_t, spec0.k0, eopts);
        if (!atoms) continue;

        // Extraction soundness: keep atoms that are feasible and reproduce the
        // relaxation value; pick the best by objective.
        const double value_tol = 1e-4 * (1.0 + std::abs(sol.objective));
        std::optional<Eigen::VectorXd> candidate;
        double candidate_value = 0.0;
        for (const Eigen::VectorXd& atom : *atoms) {
            if (!feasibility_check(hp, atom, cfg.point_feas_tol)) continue;
            const double v = lf.evaluate(atom);
            if (std::abs(v - sol.objective) > value_tol) continue;
            if (!candidate || v < candidate_value) {
                candidate = atom;
                candidate_value = v;
            }
        }
        if (!candidate) continue;

        Eigen::VectorXd x = cfg.polish
                                ? polish_point(hp, *candidate, cfg.point_feas_tol, value_tol)
                                : *candidate;
        pt.x = x;
        pt.values = objective_values(problem, x);
        pt.verified = true;
        if (cfg.emit_certificates && sol.status == SdpStatus::Optimal) {
            pt.certificate = recover_certificate(inst, sol, hp, cfg.family, k,
                                                 cfg.certificate_tol, cfg.localization_bound);
        }
        return pt;
    }

    pt.x = fallback_x;
    pt.values = objective_values(problem, fallback_x);
    pt.verified = false;
    return pt;
}

bool reverify_efficiency(const MooProblem& problem, EfficientPoint& point,
                         const SweepConfig& cfg) {
    if (!point.verified) return false;
    SweepConfig sub = cfg;
    sub.emit_certificates = false;
    sub.reverify = false;
    EfficientPoint at_self = solve_hybrid(problem, point.x, sub);
    // Best available estimate of the re-solved optimal value: the extracted
    // minimizer when verification fired, else the relaxation objective.
    const double resolved = at_self.verified
                                ? problem.weighted_sum().evaluate(at_self.x)
                                : at_self.objective;
    const double own_value = problem.weighted_sum().evaluate(point.x);
    const bool ok = std::abs(resolved - own_value) <= 1e-5 * (1.0 + std::abs(resolved));
    point.reverify_ok = ok;
    return ok;
}

std::vector<EfficientPoint> pareto_filter(std::vector<EfficientPoint> points, double tol) {
    std::sort(points.begin(), points.end(),
              [](const EfficientPoint& a, const EfficientPoint& b) { return lex_less(a.x, b.x); });

    std::vector<EfficientPoint> kept;
    for (EfficientPoint& p : points) {
        bool duplicate = false;
        for (const EfficientPoint& q : kept) {
            if ((p.x - q.x).norm() <= tol) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(std::move(p));
    }

    auto dominates = [tol](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        bool strictly = false;
        for (Eigen::Index j = 0; j < a.size(); ++j) {
            if (a(j) > b(j) + tol) return false;
            if (a(j) < b(j) - tol) strictly = true;
        }
        return strictly;
    };

    std::vector<EfficientPoint> out;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < kept.size() && !dominated; ++j) {
            if (i != j && dominates(kept[j].values, kept[i].values)) dominated = true;
        }
        if (!dominated) out.push_back(kept[i]);
    }
    return out;
}

ExistenceReport existence_probe(const MooProblem& problem,
                                const std::vector<Eigen::VectorXd>& samples) {
    problem.validate();
    ExistenceReport rep;

    for (const Eigen::VectorXd& x : samples) {
        for (int j = 0; j < problem.objective_count(); ++j) {
            Eigen::MatrixXd h = problem.objectives[static_cast<std::size_t>(j)].hessian_at(x);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
            const double lmin = es.eigenvalues().minCoeff();
            if (lmin < -1e-8 * (1.0 + h.cwiseAbs().maxCoeff())) {
                rep.convexity_violated = true;
                rep.violation_point = x;
                rep.violation_objective = j;
                rep.summary =
                    "inconclusive: objective " + std::to_string(j + 1) +
                    " has a non-PSD Hessian at a sample point, so the convexity hypothesis "
                    "behind the sufficient condition fails";
                return rep;
            }
        }
    }

    const Polynomial lf = problem.weighted_sum();
    for (const Eigen::VectorXd& x : samples) {
        Eigen::MatrixXd h = lf.hessian_at(x);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() > 1e-8 * (1.0 + h.cwiseAbs().maxCoeff())) {
            rep.hessian_pd_found = true;
            rep.witness = x;
            rep.summary = "existence condition fires: weighted Hessian positive definite at a sample";
            return rep;
        }
    }
    rep.summary = "inconclusive: weighted Hessian not positive definite at any sample";
    return rep;
}

SweepResult run_sweep(const MooProblem& problem, const SweepConfig& cfg) {
    std::vector<Eigen::VectorXd> zs = sample_feasible_z(cfg, problem);
    if (zs.empty()) throw std::invalid_argument("run_sweep: no z sources configured");

    SweepResult result;
    std::vector<EfficientPoint> points(zs.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, cfg.workers);

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= zs.size()) break;
            EfficientPoint pt = solve_hybrid(problem, zs[i], cfg);
            if (pt.verified && cfg.reverify) reverify_efficiency(problem, pt, cfg);
            points[i] = std::move(pt);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    std::sort(points.begin(), points.end(),
              [](const EfficientPoint& a, const EfficientPoint& b) { return lex_less(a.z, b.z); });

    result.solve_count = static_cast<int>(points.size());
    std::vector<EfficientPoint> verified;
    for (EfficientPoint& pt : points) {
        ZDiagnostic diag;
        diag.z = pt.z;
        diag.status = pt.solve_status;
        diag.k_used = pt.k_used;
        diag.gap = pt.gap;
        diag.ranks = pt.ranks;
        diag.verified = pt.verified;
        diag.reverify_ok = pt.reverify_ok;
        result.diagnostics.push_back(std::move(diag));
        if (pt.verified)
            verified.push_back(std::move(pt));
        else
            result.unverified.push_back(std::move(pt));
    }
    result.verified_count = static_cast<int>(verified.size());
    result.efficient = pareto_filter(std::move(verified), cfg.dedup_tol);
    return result;
}

}  // namespace paretopt
