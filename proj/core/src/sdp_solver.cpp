#include "paretopt/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace paretopt {

Eigen::MatrixXd PsdBlock::eval(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (const BlockEntry& e : entries) {
        const double v = (e.var < 0) ? e.value : e.value * y(e.var);
        m(e.row, e.col) += v;
        if (e.row != e.col) m(e.col, e.row) += v;
    }
    return m;
}

Eigen::MatrixXd PsdBlock::coefficient_matrix(int var) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (const BlockEntry& e : entries) {
        if (e.var != var) continue;
        m(e.row, e.col) += e.value;
        if (e.row != e.col) m(e.col, e.row) += e.value;
    }
    return m;
}

double ScalarIneq::eval(const Eigen::VectorXd& y) const {
    double v = constant;
    for (const auto& [i, c] : coeffs) v += c * y(i);
    return v;
}

void SdpInstance::validate() const {
    if (var_count < 0) throw std::invalid_argument("SdpInstance: negative var_count");
    if (objective.size() != var_count)
        throw std::invalid_argument("SdpInstance: objective length != var_count");
    for (const PsdBlock& b : psd_blocks) {
        if (b.dim <= 0) throw std::invalid_argument("SdpInstance: block dimension must be positive");
        for (const BlockEntry& e : b.entries) {
            if (e.row < 0 || e.col < 0 || e.row >= b.dim || e.col >= b.dim || e.row > e.col)
                throw std::invalid_argument("SdpInstance: block entry indices out of range");
            if (e.var < -1 || e.var >= var_count)
                throw std::invalid_argument("SdpInstance: block entry variable out of range");
        }
    }
    for (const ScalarIneq& s : scalar_ineqs)
        for (const auto& [i, c] : s.coeffs)
            if (i < 0 || i >= var_count)
                throw std::invalid_argument("SdpInstance: scalar coefficient variable out of range");
    std::vector<char> seen(static_cast<std::size_t>(var_count), 0);
    for (const auto& [i, v] : fixed) {
        if (i < 0 || i >= var_count)
            throw std::invalid_argument("SdpInstance: pinned index out of range");
        if (seen[static_cast<std::size_t>(i)])
            throw std::invalid_argument("SdpInstance: duplicate pin");
        seen[static_cast<std::size_t>(i)] = 1;
        (void)v;
    }
}

void SdpInstance::dump(std::ostream& out) const {
    char buf[128];
    out << "paretopt sdp dump v1\n";
    out << "vars " << var_count << "\n";
    std::snprintf(buf, sizeof buf, "c0 %.17g\n", objective_constant);
    out << buf;
    for (int i = 0; i < var_count; ++i) {
        if (objective(i) == 0.0) continue;
        std::snprintf(buf, sizeof buf, "obj %d %.17g\n", i + 1, objective(i));
        out << buf;
    }
    for (const auto& [i, v] : fixed) {
        std::snprintf(buf, sizeof buf, "pin %d %.17g\n", i + 1, v);
        out << buf;
    }
    const int nblocks = static_cast<int>(psd_blocks.size() + scalar_ineqs.size());
    out << "blocks " << nblocks << "\n";
    int b = 0;
    for (const PsdBlock& blk : psd_blocks) {
        out << "block " << b << " dim " << blk.dim << "\n";
        for (const BlockEntry& e : blk.entries) {
            std::snprintf(buf, sizeof buf, "entry %d %d %d %d %.17g\n", b, e.row, e.col,
                          e.var + 1, e.value);
            out << buf;
        }
        ++b;
    }
    // Scalar inequalities a0 + a^T y <= 0 appear as 1x1 blocks -a0 - a^T y >= 0.
    for (const ScalarIneq& s : scalar_ineqs) {
        out << "block " << b << " dim 1\n";
        std::snprintf(buf, sizeof buf, "entry %d 0 0 0 %.17g\n", b, -s.constant);
        out << buf;
        for (const auto& [i, c] : s.coeffs) {
            std::snprintf(buf, sizeof buf, "entry %d 0 0 %d %.17g\n", b, i + 1, -c);
            out << buf;
        }
        ++b;
    }
}

const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Optimal: return "Optimal";
        case SdpStatus::Infeasible: return "Infeasible";
        case SdpStatus::Unbounded: return "Unbounded";
        case SdpStatus::MaxIter: return "MaxIter";
        case SdpStatus::NumericalTrouble: return "NumericalTrouble";
    }
    return "Unknown";
}

namespace {

struct SparseEntry {
    int row, col;
    double value;
};

// Reduced block after pin substitution and per-block scaling. Scalar
// inequalities live here as 1x1 blocks.
struct RBlock {
    int dim = 0;
    Eigen::MatrixXd a0;
    std::vector<int> vars;                             // reduced variable indices
    std::vector<std::vector<SparseEntry>> var_entries; // parallel to vars
    bool from_scalar = false;
    int source_index = 0;
    double scale = 1.0;
};

double sym_eig_min(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// <A_i, M> for the sparse symmetric coefficient list of one variable.
double sparse_inner(const std::vector<SparseEntry>& entries, const Eigen::MatrixXd& m) {
    double acc = 0.0;
    for (const SparseEntry& e : entries)
        acc += e.value * (e.row == e.col ? m(e.row, e.col) : 2.0 * m(e.row, e.col));
    return acc;
}

// G A G where A is given by a sparse symmetric entry list.
Eigen::MatrixXd congruence_sparse(const Eigen::MatrixXd& g,
                                  const std::vector<SparseEntry>& entries) {
    const Eigen::Index m = g.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (const SparseEntry& e : entries) {
        const auto gr = g.col(e.row);
        const auto gc = g.col(e.col);
        if (e.row == e.col) {
            out.noalias() += e.value * (gr * gr.transpose());
        } else {
            out.noalias() += e.value * (gr * gc.transpose());
            out.noalias() += e.value * (gc * gr.transpose());
        }
    }
    return out;
}

// Largest step alpha with X + alpha * D still PSD (may be +inf).
double max_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& d) {
    Eigen::LLT<Eigen::MatrixXd> llt(x);
    Eigen::MatrixXd m;
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd li = llt.matrixL().solve(Eigen::MatrixXd::Identity(x.rows(), x.cols()));
        m = li * d * li.transpose();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-300);
        Eigen::MatrixXd xin =
            es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
        m = xin * d * xin;
    }
    const double lmin = sym_eig_min(0.5 * (m + m.transpose()));
    if (lmin >= -1e-300) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

struct Reduction {
    std::vector<int> free_vars;     // original index per reduced index
    std::vector<int> to_reduced;    // original index -> reduced index or -1
    Eigen::VectorXd c;              // reduced objective (original scale)
    double c0 = 0.0;                // constant including pinned contributions
    std::vector<RBlock> blocks;     // active blocks
};

Reduction reduce(const SdpInstance& inst, SdpSolution& sol) {
    Reduction red;
    std::vector<double> pin_value(static_cast<std::size_t>(inst.var_count), 0.0);
    std::vector<char> pinned(static_cast<std::size_t>(inst.var_count), 0);
    for (const auto& [i, v] : inst.fixed) {
        pinned[static_cast<std::size_t>(i)] = 1;
        pin_value[static_cast<std::size_t>(i)] = v;
    }
    red.to_reduced.assign(static_cast<std::size_t>(inst.var_count), -1);
    for (int i = 0; i < inst.var_count; ++i) {
        if (!pinned[static_cast<std::size_t>(i)]) {
            red.to_reduced[static_cast<std::size_t>(i)] = static_cast<int>(red.free_vars.size());
            red.free_vars.push_back(i);
        }
    }
    const int nf = static_cast<int>(red.free_vars.size());
    red.c = Eigen::VectorXd::Zero(nf);
    red.c0 = inst.objective_constant;
    for (int i = 0; i < inst.var_count; ++i) {
        if (pinned[static_cast<std::size_t>(i)])
            red.c0 += inst.objective(i) * pin_value[static_cast<std::size_t>(i)];
        else
            red.c(red.to_reduced[static_cast<std::size_t>(i)]) = inst.objective(i);
    }

    auto add_block = [&](int dim, bool from_scalar, int src) -> RBlock& {
        RBlock b;
        b.dim = dim;
        b.a0 = Eigen::MatrixXd::Zero(dim, dim);
        b.from_scalar = from_scalar;
        b.source_index = src;
        red.blocks.push_back(std::move(b));
        return red.blocks.back();
    };

    for (std::size_t k = 0; k < inst.psd_blocks.size(); ++k) {
        const PsdBlock& src = inst.psd_blocks[k];
        RBlock& b = add_block(src.dim, false, static_cast<int>(k));
        std::vector<int> slot(static_cast<std::size_t>(nf), -1);
        for (const BlockEntry& e : src.entries) {
            if (e.var < 0 || pinned[static_cast<std::size_t>(e.var)]) {
                const double v =
                    (e.var < 0) ? e.value : e.value * pin_value[static_cast<std::size_t>(e.var)];
                b.a0(e.row, e.col) += v;
                if (e.row != e.col) b.a0(e.col, e.row) += v;
            } else {
                const int r = red.to_reduced[static_cast<std::size_t>(e.var)];
                if (slot[static_cast<std::size_t>(r)] < 0) {
                    slot[static_cast<std::size_t>(r)] = static_cast<int>(b.vars.size());
                    b.vars.push_back(r);
                    b.var_entries.emplace_back();
                }
                b.var_entries[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(
                    {e.row, e.col, e.value});
            }
        }
    }
    for (std::size_t k = 0; k < inst.scalar_ineqs.size(); ++k) {
        const ScalarIneq& s = inst.scalar_ineqs[k];
        RBlock& b = add_block(1, true, static_cast<int>(k));
        double a0 = -s.constant;
        std::vector<int> slot(static_cast<std::size_t>(nf), -1);
        for (const auto& [i, c] : s.coeffs) {
            if (pinned[static_cast<std::size_t>(i)]) {
                a0 -= c * pin_value[static_cast<std::size_t>(i)];
            } else {
                const int r = red.to_reduced[static_cast<std::size_t>(i)];
                if (slot[static_cast<std::size_t>(r)] < 0) {
                    slot[static_cast<std::size_t>(r)] = static_cast<int>(b.vars.size());
                    b.vars.push_back(r);
                    b.var_entries.emplace_back();
                }
                b.var_entries[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(
                    {0, 0, -c});
            }
        }
        b.a0(0, 0) = a0;
    }

    // Coalesce duplicate coefficient entries and drop variable slots that
    // cancel to zero.
    for (RBlock& b : red.blocks) {
        std::vector<int> keep_vars;
        std::vector<std::vector<SparseEntry>> keep_entries;
        for (std::size_t vi = 0; vi < b.vars.size(); ++vi) {
            auto& ent = b.var_entries[vi];
            std::sort(ent.begin(), ent.end(), [](const SparseEntry& a, const SparseEntry& c) {
                return a.row != c.row ? a.row < c.row : a.col < c.col;
            });
            std::vector<SparseEntry> merged;
            for (const SparseEntry& e : ent) {
                if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
                    merged.back().value += e.value;
                else
                    merged.push_back(e);
            }
            std::erase_if(merged, [](const SparseEntry& e) { return e.value == 0.0; });
            if (!merged.empty()) {
                keep_vars.push_back(b.vars[vi]);
                keep_entries.push_back(std::move(merged));
            }
        }
        b.vars = std::move(keep_vars);
        b.var_entries = std::move(keep_entries);
    }

    // Screen constant blocks out of the cone problem.
    std::vector<RBlock> active;
    for (RBlock& b : red.blocks) {
        if (!b.vars.empty()) {
            active.push_back(std::move(b));
            continue;
        }
        // Constant block: inactive for the cone solver, dual fixed to zero.
        const double lmin = b.dim == 1 ? b.a0(0, 0) : sym_eig_min(b.a0);
        const double scale = 1.0 + b.a0.cwiseAbs().maxCoeff();
        if (lmin < -1e-9 * scale) {
            // Constant violation: Farkas ray from the most negative eigenvector.
            sol.status = SdpStatus::Infeasible;
            sol.dual_ray_psd.assign(inst.psd_blocks.size(), Eigen::MatrixXd());
            for (std::size_t k = 0; k < inst.psd_blocks.size(); ++k)
                sol.dual_ray_psd[k] = Eigen::MatrixXd::Zero(inst.psd_blocks[k].dim,
                                                            inst.psd_blocks[k].dim);
            sol.dual_ray_scalar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.scalar_ineqs.size()));
            if (b.from_scalar) {
                sol.dual_ray_scalar(b.source_index) = 1.0;
            } else {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.a0);
                Eigen::VectorXd u = es.eigenvectors().col(0);
                sol.dual_ray_psd[static_cast<std::size_t>(b.source_index)] = u * u.transpose();
            }
        }
    }
    red.blocks = std::move(active);

    for (RBlock& b : red.blocks) {
        double m = b.a0.cwiseAbs().maxCoeff();
        for (const auto& ent : b.var_entries)
            for (const SparseEntry& e : ent) m = std::max(m, std::abs(e.value));
        b.scale = std::max(1.0, m);
        b.a0 /= b.scale;
        for (auto& ent : b.var_entries)
            for (SparseEntry& e : ent) e.value /= b.scale;
    }
    return red;
}

}  // namespace

SdpSolution solve(const SdpInstance& inst, const SdpOptions& opts) {
    inst.validate();
    SdpSolution sol;
    sol.status = SdpStatus::NumericalTrouble;

    Reduction red = reduce(inst, sol);
    const int nf = static_cast<int>(red.free_vars.size());
    const int nb = static_cast<int>(red.blocks.size());

    auto inflate = [&](const Eigen::VectorXd& yf) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(inst.var_count);
        for (const auto& [i, v] : inst.fixed) full(i) = v;
        for (int i = 0; i < nf; ++i) full(red.free_vars[static_cast<std::size_t>(i)]) = yf(i);
        return full;
    };

    if (sol.status == SdpStatus::Infeasible) {
        sol.y = inflate(Eigen::VectorXd::Zero(nf));
        sol.objective = inst.objective.dot(sol.y) + inst.objective_constant;
        return sol;
    }

    const double s_c = std::max(1.0, red.c.size() > 0 ? red.c.cwiseAbs().maxCoeff() : 0.0);
    const Eigen::VectorXd c = red.c / s_c;

    // Dual variables per active block (scaled space); zeros elsewhere.
    auto finish = [&](SdpStatus status, const Eigen::VectorXd& yf,
                      const std::vector<Eigen::MatrixXd>& z, double relgap, double pinf,
                      double dinf, int iters) {
        sol.status = status;
        sol.y = inflate(yf);
        sol.objective = inst.objective.dot(sol.y) + inst.objective_constant;
        sol.iterations = iters;
        sol.gap = relgap;
        sol.primal_residual = pinf;
        sol.dual_residual = dinf;
        sol.dual_psd.assign(inst.psd_blocks.size(), Eigen::MatrixXd());
        for (std::size_t k = 0; k < inst.psd_blocks.size(); ++k)
            sol.dual_psd[k] = Eigen::MatrixXd::Zero(inst.psd_blocks[k].dim, inst.psd_blocks[k].dim);
        sol.dual_scalar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.scalar_ineqs.size()));
        double dual_val = 0.0;
        for (int b = 0; b < nb; ++b) {
            const RBlock& rb = red.blocks[b];
            if (z.empty()) continue;
            // Back to original data scale.
            Eigen::MatrixXd zorig = z[static_cast<std::size_t>(b)] * (s_c / rb.scale);
            dual_val += -(rb.a0 * rb.scale).cwiseProduct(zorig).sum();
            if (rb.from_scalar)
                sol.dual_scalar(rb.source_index) = zorig(0, 0);
            else
                sol.dual_psd[static_cast<std::size_t>(rb.source_index)] = zorig;
        }
        sol.dual_objective = dual_val + red.c0;
    };

    if (nf == 0 || nb == 0) {
        // Nothing left for the cone solver: feasibility/boundedness is decided
        // by the screening above.
        if (nf > 0 && c.cwiseAbs().maxCoeff() > 0.0) {
            Eigen::VectorXd ray = Eigen::VectorXd::Zero(nf);
            for (int i = 0; i < nf; ++i) ray(i) = -c(i);
            finish(SdpStatus::Unbounded, Eigen::VectorXd::Zero(nf), {}, 0, 0, 0, 0);
            sol.primal_ray = inflate(ray);
            for (const auto& [i, v] : inst.fixed) sol.primal_ray(i) = 0.0;
            return sol;
        }
        finish(SdpStatus::Optimal, Eigen::VectorXd::Zero(nf), {}, 0, 0, 0, 0);
        sol.dual_objective = sol.objective;
        return sol;
    }

    // Interior-point state.
    Eigen::VectorXd y = Eigen::VectorXd::Zero(nf);
    std::vector<Eigen::MatrixXd> S(static_cast<std::size_t>(nb)), Z(static_cast<std::size_t>(nb));
    double dim_total = 0.0;
    for (int b = 0; b < nb; ++b) {
        const RBlock& rb = red.blocks[b];
        const double beta = std::max(10.0, 2.0 * rb.a0.norm());
        S[static_cast<std::size_t>(b)] = beta * Eigen::MatrixXd::Identity(rb.dim, rb.dim);
        Z[static_cast<std::size_t>(b)] = 10.0 * Eigen::MatrixXd::Identity(rb.dim, rb.dim);
        dim_total += rb.dim;
    }

    double best_score = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_y = y;
    std::vector<Eigen::MatrixXd> best_z = Z;
    double best_relgap = 0, best_pinf = 0, best_dinf = 0;

    const double cnorm = 1.0 + c.cwiseAbs().maxCoeff();
    SdpStatus final_status = SdpStatus::MaxIter;
    int iter = 0;

    for (iter = 0; iter < opts.max_iter; ++iter) {
        // Residuals.
        std::vector<Eigen::MatrixXd> Rp(static_cast<std::size_t>(nb));
        Eigen::VectorXd av = Eigen::VectorXd::Zero(nf);  // A*(Z)
        double pobj = c.dot(y);
        double dobj = 0.0;
        double mu = 0.0;
        double pinf = 0.0;
        for (int b = 0; b < nb; ++b) {
            const RBlock& rb = red.blocks[b];
            Eigen::MatrixXd f = rb.a0;
            for (std::size_t vi = 0; vi < rb.vars.size(); ++vi) {
                const double yv = y(rb.vars[vi]);
                for (const SparseEntry& e : rb.var_entries[vi]) {
                    f(e.row, e.col) += e.value * yv;
                    if (e.row != e.col) f(e.col, e.row) += e.value * yv;
                }
            }
            Rp[static_cast<std::size_t>(b)] = f - S[static_cast<std::size_t>(b)];
            pinf = std::max(pinf, Rp[static_cast<std::size_t>(b)].cwiseAbs().maxCoeff() /
                                      (1.0 + rb.a0.cwiseAbs().maxCoeff()));
            for (std::size_t vi = 0; vi < rb.vars.size(); ++vi)
                av(rb.vars[vi]) += sparse_inner(rb.var_entries[vi], Z[static_cast<std::size_t>(b)]);
            dobj += -rb.a0.cwiseProduct(Z[static_cast<std::size_t>(b)]).sum();
            mu += S[static_cast<std::size_t>(b)].cwiseProduct(Z[static_cast<std::size_t>(b)]).sum();
        }
        mu /= dim_total;
        const Eigen::VectorXd rd = c - av;
        const double dinf = rd.cwiseAbs().maxCoeff() / cnorm;
        // Gap measured on the reported objective, constants and scale restored.
        const double pobj_full = s_c * pobj + red.c0;
        const double dobj_full = s_c * dobj + red.c0;
        const double relgap = std::abs(pobj_full - dobj_full) / (1.0 + std::abs(pobj_full));

        const double score = std::max({relgap, pinf, dinf});
        if (score < best_score) {
            best_score = score;
            best_y = y;
            best_z = Z;
            best_relgap = relgap;
            best_pinf = pinf;
            best_dinf = dinf;
        }

        if (opts.verbose) {
            std::printf("iter %3d  pobj %+.6e dobj %+.6e gap %.2e pinf %.2e dinf %.2e mu %.2e\n",
                        iter, pobj, dobj, relgap, pinf, dinf, mu);
        }

        if (relgap <= opts.eps_gap && pinf <= opts.eps_feas && dinf <= opts.eps_feas) {
            final_status = SdpStatus::Optimal;
            best_y = y;
            best_z = Z;
            best_relgap = relgap;
            best_pinf = pinf;
            best_dinf = dinf;
            break;
        }

        // Divergence: certify infeasibility or unboundedness from scaled rays.
        // A certificate only makes sense while the matching residual is still
        // large; degenerate feasible problems also blow the duals up.
        double zmax = 0.0;
        for (const auto& zb : Z) zmax = std::max(zmax, zb.cwiseAbs().maxCoeff());
        if (zmax > 1e8 && pinf > 1e-5) {
            bool farkas = dobj > 1e-6 * zmax && av.cwiseAbs().maxCoeff() <= 1e-6 * zmax;
            if (farkas) {
                final_status = SdpStatus::Infeasible;
                sol.dual_ray_psd.assign(inst.psd_blocks.size(), Eigen::MatrixXd());
                for (std::size_t k = 0; k < inst.psd_blocks.size(); ++k)
                    sol.dual_ray_psd[k] =
                        Eigen::MatrixXd::Zero(inst.psd_blocks[k].dim, inst.psd_blocks[k].dim);
                sol.dual_ray_scalar =
                    Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.scalar_ineqs.size()));
                for (int b = 0; b < nb; ++b) {
                    const RBlock& rb = red.blocks[b];
                    Eigen::MatrixXd zr = Z[static_cast<std::size_t>(b)] / (zmax * rb.scale);
                    if (rb.from_scalar)
                        sol.dual_ray_scalar(rb.source_index) = zr(0, 0);
                    else
                        sol.dual_ray_psd[static_cast<std::size_t>(rb.source_index)] = zr;
                }
                break;
            }
        }
        const double ymax = y.size() ? y.cwiseAbs().maxCoeff() : 0.0;
        if (ymax > 1e8 && dinf > 1e-5) {
            Eigen::VectorXd ray = y / ymax;
            bool improving = c.dot(ray) < -1e-6;
            bool recession = true;
            for (int b = 0; b < nb && recession; ++b) {
                const RBlock& rb = red.blocks[b];
                Eigen::MatrixXd dir = Eigen::MatrixXd::Zero(rb.dim, rb.dim);
                for (std::size_t vi = 0; vi < rb.vars.size(); ++vi) {
                    const double rv = ray(rb.vars[vi]);
                    for (const SparseEntry& e : rb.var_entries[vi]) {
                        dir(e.row, e.col) += e.value * rv;
                        if (e.row != e.col) dir(e.col, e.row) += e.value * rv;
                    }
                }
                if (sym_eig_min(dir) < -1e-6) recession = false;
            }
            if (improving && recession) {
                final_status = SdpStatus::Unbounded;
                sol.primal_ray = inflate(ray);
                for (const auto& [i, v] : inst.fixed) sol.primal_ray(i) = 0.0;
                break;
            }
        }
        if (zmax > 1e13 || ymax > 1e13 || !std::isfinite(mu)) {
            final_status = SdpStatus::NumericalTrouble;
            break;
        }

        // Nesterov-Todd scaling G = W^{-1} per block, with the pieces the
        // Newton right-hand sides need.
        std::vector<Eigen::MatrixXd> G(static_cast<std::size_t>(nb)),
            Sinv(static_cast<std::size_t>(nb)), GRpG(static_cast<std::size_t>(nb));
        bool scale_ok = true;
        for (int b = 0; b < nb; ++b) {
            const Eigen::MatrixXd& Sb = S[static_cast<std::size_t>(b)];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sb);
            if (es.info() != Eigen::Success) { scale_ok = false; break; }
            const double lmax = std::max(es.eigenvalues().maxCoeff(), 1e-300);
            Eigen::VectorXd ls = es.eigenvalues().cwiseMax(lmax * 1e-15);
            Eigen::MatrixXd shalf =
                es.eigenvectors() * ls.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
            Eigen::MatrixXd sinvhalf = es.eigenvectors() * ls.cwiseSqrt().cwiseInverse().asDiagonal() *
                                       es.eigenvectors().transpose();
            Sinv[static_cast<std::size_t>(b)] = es.eigenvectors() * ls.cwiseInverse().asDiagonal() *
                                                es.eigenvectors().transpose();
            Eigen::MatrixXd t = shalf * Z[static_cast<std::size_t>(b)] * shalf;
            t = 0.5 * (t + t.transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(t);
            if (et.info() != Eigen::Success) { scale_ok = false; break; }
            const double tmax = std::max(et.eigenvalues().maxCoeff(), 1e-300);
            Eigen::VectorXd lt = et.eigenvalues().cwiseMax(tmax * 1e-15);
            Eigen::MatrixXd m = sinvhalf * et.eigenvectors();
            G[static_cast<std::size_t>(b)] = m * lt.cwiseSqrt().asDiagonal() * m.transpose();
            GRpG[static_cast<std::size_t>(b)] = G[static_cast<std::size_t>(b)] *
                                                Rp[static_cast<std::size_t>(b)] *
                                                G[static_cast<std::size_t>(b)];
        }
        if (!scale_ok) {
            final_status = SdpStatus::NumericalTrouble;
            break;
        }

        // Schur complement H_ij = sum_b <A_i, G A_j G> plus rhs ingredients.
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nf, nf);
        Eigen::VectorXd q = Eigen::VectorXd::Zero(nf);  // <A_i, S^{-1}>
        Eigen::VectorXd u = Eigen::VectorXd::Zero(nf);  // <A_i, G Rp G>
        std::vector<std::vector<Eigen::MatrixXd>> congr(static_cast<std::size_t>(nb));
        for (int b = 0; b < nb; ++b) {
            const RBlock& rb = red.blocks[b];
            auto& cb = congr[static_cast<std::size_t>(b)];
            cb.resize(rb.vars.size());
            for (std::size_t vi = 0; vi < rb.vars.size(); ++vi)
                cb[vi] = congruence_sparse(G[static_cast<std::size_t>(b)], rb.var_entries[vi]);
            for (std::size_t vi = 0; vi < rb.vars.size(); ++vi) {
                const int i = rb.vars[vi];
                q(i) += sparse_inner(rb.var_entries[vi], Sinv[static_cast<std::size_t>(b)]);
                u(i) += sparse_inner(rb.var_entries[vi], GRpG[static_cast<std::size_t>(b)]);
                for (std::size_t vj = 0; vj < rb.vars.size(); ++vj) {
                    const int j = rb.vars[vj];
                    if (j < i) continue;
                    const double hij = sparse_inner(rb.var_entries[vi], cb[vj]);
                    H(i, j) += hij;
                    if (i != j) H(j, i) += hij;
                }
            }
        }

        Eigen::LDLT<Eigen::MatrixXd> ldlt;
        double ridge = 0.0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            Eigen::MatrixXd hh = H;
            if (ridge > 0.0) hh += ridge * Eigen::MatrixXd::Identity(nf, nf);
            ldlt.compute(hh);
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) break;
            ridge = ridge == 0.0 ? 1e-14 * (1.0 + H.trace() / nf) : ridge * 100.0;
        }
        if (ldlt.info() != Eigen::Success) {
            final_status = SdpStatus::NumericalTrouble;
            break;
        }

        // One step of iterative refinement keeps the Schur solves usable when
        // the scaling matrices blow up the condition number near convergence.
        auto schur_solve = [&](const Eigen::VectorXd& rhs) {
            Eigen::VectorXd x0 = ldlt.solve(rhs);
            Eigen::VectorXd resid = rhs - H * x0;
            return Eigen::VectorXd(x0 + ldlt.solve(resid));
        };

        auto newton = [&](double sigma_mu) {
            Eigen::VectorXd g = sigma_mu * q - u - c;
            Eigen::VectorXd dy = schur_solve(g);
            std::vector<Eigen::MatrixXd> dS(static_cast<std::size_t>(nb)),
                dZ(static_cast<std::size_t>(nb));
            for (int b = 0; b < nb; ++b) {
                const RBlock& rb = red.blocks[b];
                Eigen::MatrixXd ds = Rp[static_cast<std::size_t>(b)];
                for (std::size_t vi = 0; vi < rb.vars.size(); ++vi) {
                    const double dv = dy(rb.vars[vi]);
                    for (const SparseEntry& e : rb.var_entries[vi]) {
                        ds(e.row, e.col) += e.value * dv;
                        if (e.row != e.col) ds(e.col, e.row) += e.value * dv;
                    }
                }
                Eigen::MatrixXd gz = G[static_cast<std::size_t>(b)] * ds * G[static_cast<std::size_t>(b)];
                Eigen::MatrixXd dz = sigma_mu * Sinv[static_cast<std::size_t>(b)] -
                                     Z[static_cast<std::size_t>(b)] - 0.5 * (gz + gz.transpose());
                dS[static_cast<std::size_t>(b)] = 0.5 * (ds + ds.transpose());
                dZ[static_cast<std::size_t>(b)] = dz;
            }
            return std::make_tuple(dy, dS, dZ);
        };

        // Predictor.
        auto [dy_aff, dS_aff, dZ_aff] = newton(0.0);
        double ap = 1.0, ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, max_step(S[static_cast<std::size_t>(b)], dS_aff[static_cast<std::size_t>(b)]));
            ad = std::min(ad, max_step(Z[static_cast<std::size_t>(b)], dZ_aff[static_cast<std::size_t>(b)]));
        }
        double mu_aff = 0.0;
        for (int b = 0; b < nb; ++b) {
            mu_aff += (S[static_cast<std::size_t>(b)] + ap * dS_aff[static_cast<std::size_t>(b)])
                          .cwiseProduct(Z[static_cast<std::size_t>(b)] +
                                        ad * dZ_aff[static_cast<std::size_t>(b)])
                          .sum();
        }
        mu_aff = std::max(mu_aff / dim_total, 0.0);
        double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
        // Centering safeguard: short affine steps call for more centering.
        sigma = std::max(sigma, std::pow(1.0 - std::min({ap, ad, 1.0}), 3.0));
        sigma = std::clamp(sigma, 1e-10, 1.0);

        // Corrector (same factorization, recentered target).
        auto [dy, dS, dZ] = newton(sigma * mu);
        const double tau = 0.95;
        auto step_lengths = [&](const std::vector<Eigen::MatrixXd>& ds,
                                const std::vector<Eigen::MatrixXd>& dz) {
            double sp = 1.0, sd = 1.0;
            for (int b = 0; b < nb; ++b) {
                sp = std::min(sp, tau * max_step(S[static_cast<std::size_t>(b)], ds[static_cast<std::size_t>(b)]));
                sd = std::min(sd, tau * max_step(Z[static_cast<std::size_t>(b)], dz[static_cast<std::size_t>(b)]));
            }
            return std::make_pair(std::min(sp, 1.0), std::min(sd, 1.0));
        };
        auto [bp, bd] = step_lengths(dS, dZ);
        if (std::min(bp, bd) < 1e-3) {
            // Stalled: retake the step as a pure centering direction.
            auto [dy_c, dS_c, dZ_c] = newton(mu);
            auto [cp, cd] = step_lengths(dS_c, dZ_c);
            if (std::min(cp, cd) > std::min(bp, bd)) {
                dy = dy_c;
                dS = dS_c;
                dZ = dZ_c;
                bp = cp;
                bd = cd;
            }
        }
        if (bp < 1e-10 && bd < 1e-10) {
            final_status = SdpStatus::NumericalTrouble;
            break;
        }

        y += bp * dy;
        for (int b = 0; b < nb; ++b) {
            S[static_cast<std::size_t>(b)] += bp * dS[static_cast<std::size_t>(b)];
            Z[static_cast<std::size_t>(b)] += bd * dZ[static_cast<std::size_t>(b)];
            S[static_cast<std::size_t>(b)] =
                0.5 * (S[static_cast<std::size_t>(b)] + S[static_cast<std::size_t>(b)].transpose());
            Z[static_cast<std::size_t>(b)] =
                0.5 * (Z[static_cast<std::size_t>(b)] + Z[static_cast<std::size_t>(b)].transpose());
        }
    }

    if (final_status == SdpStatus::Infeasible || final_status == SdpStatus::Unbounded) {
        finish(final_status, best_y, best_z, best_relgap, best_pinf, best_dinf, iter);
        return sol;
    }
    finish(final_status, best_y, best_z, best_relgap, best_pinf, best_dinf, iter);
    return sol;
}

WeakDualityReport certify_weak_duality(const SdpSolution& sol, const SdpInstance& inst,
                                       double eps_gap) {
    WeakDualityReport rep;
    rep.primal = sol.objective;

    // Recompute the dual objective from the returned multipliers:
    //   -sum_b <A0_b + sum_pins v A_i_b, Z_b> + (c0 + sum_pins c_i v_i),
    // scalar inequalities contributing through their 1x1 block form.
    double dual = inst.objective_constant;
    for (const auto& [i, v] : inst.fixed) dual += inst.objective(i) * v;

    Eigen::VectorXd pinvec = Eigen::VectorXd::Zero(inst.var_count);
    std::vector<char> pinned(static_cast<std::size_t>(inst.var_count), 0);
    for (const auto& [i, v] : inst.fixed) {
        pinvec(i) = v;
        pinned[static_cast<std::size_t>(i)] = 1;
    }

    for (std::size_t k = 0; k < inst.psd_blocks.size(); ++k) {
        const PsdBlock& blk = inst.psd_blocks[k];
        if (sol.dual_psd.size() <= k || sol.dual_psd[k].size() == 0) continue;
        const Eigen::MatrixXd& z = sol.dual_psd[k];
        for (const BlockEntry& e : blk.entries) {
            if (e.var >= 0 && !pinned[static_cast<std::size_t>(e.var)]) continue;
            const double v = (e.var < 0) ? e.value : e.value * pinvec(e.var);
            dual -= v * (e.row == e.col ? z(e.row, e.col) : 2.0 * z(e.row, e.col));
        }
    }
    for (std::size_t k = 0; k < inst.scalar_ineqs.size(); ++k) {
        if (sol.dual_scalar.size() <= static_cast<Eigen::Index>(k)) continue;
        const ScalarIneq& s = inst.scalar_ineqs[k];
        double a0 = -s.constant;
        for (const auto& [i, cf] : s.coeffs)
            if (pinned[static_cast<std::size_t>(i)]) a0 -= cf * pinvec(i);
        dual -= a0 * sol.dual_scalar(static_cast<Eigen::Index>(k));
    }

    rep.dual_recomputed = dual;
    const double allow = eps_gap * (1.0 + std::abs(rep.primal));
    rep.violation = std::max(0.0, dual - rep.primal - allow);
    rep.ok = sol.status == SdpStatus::Optimal && rep.violation == 0.0;
    return rep;
}

}  // namespace paretopt
