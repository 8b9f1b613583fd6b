#include "paretopt/relaxation.hpp"

#include <stdexcept>

namespace paretopt {

const char* to_string(RelaxFamily f) { return f == RelaxFamily::Q ? "Q" : "P"; }

HybridProblem HybridProblem::at(MooProblem problem, Eigen::VectorXd z) {
    problem.validate();
    if (z.size() != problem.n)
        throw std::invalid_argument("HybridProblem: z dimension mismatch");
    HybridProblem hp;
    hp.base = std::move(problem);
    hp.z = std::move(z);
    hp.f_at_z.resize(hp.base.objective_count());
    for (int j = 0; j < hp.base.objective_count(); ++j)
        hp.f_at_z(j) = hp.base.objectives[static_cast<std::size_t>(j)].evaluate(hp.z);
    hp.lambda_f_at_z = hp.base.lambda.dot(hp.f_at_z);
    return hp;
}

RelaxationSpec RelaxationSpec::derive(const MooProblem& problem, RelaxFamily family, int k) {
    problem.validate();
    RelaxationSpec spec;
    spec.family = family;
    spec.k = k;
    spec.r.reserve(problem.constraints.size());
    for (const Polynomial& g : problem.constraints) spec.r.push_back(half_degree(g));
    spec.d.reserve(problem.objectives.size());
    for (const Polynomial& f : problem.objectives) spec.d.push_back(half_degree(f));
    spec.k0 = 0;
    for (int ri : spec.r) spec.k0 = std::max(spec.k0, ri);
    spec.d_f = 0;
    for (int dj : spec.d) spec.d_f = std::max(spec.d_f, dj);
    spec.k0 = std::max(spec.k0, spec.d_f);
    return spec;
}

namespace {

// Localization block M_t(p y) >= 0 expressed over the moment variables
// indexed by `vars` (the basis of order 2k).
PsdBlock localization_block(const Polynomial& p, const MonomialBasis& vars, int n, int t) {
    MonomialBasis rows(n, t);
    PsdBlock blk;
    blk.dim = rows.size();
    for (int i = 0; i < rows.size(); ++i) {
        for (int j = i; j < rows.size(); ++j) {
            const Exponent ab = rows[i].plus(rows[j]);
            for (const auto& [g, c] : p.terms()) {
                auto idx = vars.index_of(g.plus(ab));
                if (!idx)
                    throw std::logic_error("localization_block: exponent outside variable basis");
                blk.entries.push_back({*idx, i, j, c});
            }
        }
    }
    return blk;
}

Eigen::VectorXd moment_objective(const Polynomial& obj, const MonomialBasis& vars,
                                 double* constant) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(vars.size());
    for (const auto& [e, v] : obj.terms()) {
        auto idx = vars.index_of(e);
        if (!idx) throw std::logic_error("moment_objective: exponent outside variable basis");
        c(*idx) += v;
    }
    // The alpha = 0 coefficient rides on the pinned y_0 = 1 entry, so the
    // reported optimal value matches lambda^T f including its constant.
    *constant = 0.0;
    return c;
}

void check_order(const RelaxationSpec& spec) {
    if (spec.k < spec.k0)
        throw std::invalid_argument("relaxation order k must be at least k0");
}

}  // namespace

ScalarIneq moment_functional(const Polynomial& p, const MonomialBasis& b) {
    ScalarIneq s;
    for (const auto& [e, c] : p.terms()) {
        if (e.degree() == 0) {
            s.constant += c;
            continue;
        }
        auto idx = b.index_of(e);
        if (!idx) throw std::logic_error("moment_functional: exponent outside basis");
        s.coeffs.emplace_back(*idx, c);
    }
    return s;
}

SdpInstance build_q(const HybridProblem& hp, int k) {
    const MooProblem& mp = hp.base;
    RelaxationSpec spec = RelaxationSpec::derive(mp, RelaxFamily::Q, k);
    check_order(spec);

    MonomialBasis vars(mp.n, 2 * k);
    SdpInstance inst;
    inst.var_count = vars.size();
    double c0 = 0.0;
    inst.objective = moment_objective(mp.weighted_sum(), vars, &c0);
    inst.objective_constant = c0;
    inst.fixed.emplace_back(0, 1.0);

    // i = 0 block with g_0 = 1: M_k(y) >= 0.
    inst.psd_blocks.push_back(localization_block(Polynomial::constant(mp.n, 1.0), vars, mp.n, k));
    for (std::size_t i = 0; i < mp.constraints.size(); ++i) {
        const Polynomial neg_g = -mp.constraints[i];
        inst.psd_blocks.push_back(
            localization_block(neg_g, vars, mp.n, k - spec.r[i]));
    }
    for (std::size_t j = 0; j < mp.objectives.size(); ++j) {
        Polynomial bound = Polynomial::constant(mp.n, hp.f_at_z(static_cast<Eigen::Index>(j))) -
                           mp.objectives[j];
        inst.psd_blocks.push_back(localization_block(bound, vars, mp.n, k - spec.d[j]));
    }
    return inst;
}

SdpInstance build_p(const HybridProblem& hp, int k, std::optional<double> localization_bound) {
    const MooProblem& mp = hp.base;
    RelaxationSpec spec = RelaxationSpec::derive(mp, RelaxFamily::P, k);
    check_order(spec);

    MonomialBasis vars(mp.n, 2 * k);
    SdpInstance inst;
    inst.var_count = vars.size();
    double c0 = 0.0;
    inst.objective = moment_objective(mp.weighted_sum(), vars, &c0);
    inst.objective_constant = c0;
    inst.fixed.emplace_back(0, 1.0);

    inst.psd_blocks.push_back(localization_block(Polynomial::constant(mp.n, 1.0), vars, mp.n, k));

    for (const Polynomial& g : mp.constraints)
        inst.scalar_ineqs.push_back(moment_functional(g, vars));
    for (std::size_t j = 0; j < mp.objectives.size(); ++j) {
        ScalarIneq s = moment_functional(mp.objectives[j], vars);
        s.constant -= hp.f_at_z(static_cast<Eigen::Index>(j));
        inst.scalar_ineqs.push_back(std::move(s));
    }

    const double bound = localization_bound.value_or(hp.lambda_f_at_z);
    Polynomial q = Polynomial::constant(mp.n, bound) - mp.weighted_sum();
    inst.psd_blocks.push_back(localization_block(q, vars, mp.n, k - spec.d_f));
    return inst;
}

bool feasibility_check(const HybridProblem& hp, const Eigen::VectorXd& x, double tol) {
    if (x.size() != hp.base.n)
        throw std::invalid_argument("feasibility_check: point dimension mismatch");
    for (const Polynomial& g : hp.base.constraints)
        if (g.evaluate(x) > tol) return false;
    for (int j = 0; j < hp.base.objective_count(); ++j)
        if (hp.base.objectives[static_cast<std::size_t>(j)].evaluate(x) > hp.f_at_z(j) + tol)
            return false;
    return true;
}

}  // namespace paretopt
