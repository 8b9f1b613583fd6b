#include "paretopt/certificate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>
#include <stdexcept>

namespace paretopt {

int numeric_rank(const Eigen::MatrixXd& m, double tol_rel) {
    if (m.rows() != m.cols()) throw std::invalid_argument("numeric_rank: matrix not square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cutoff = tol_rel * std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    int r = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > cutoff) ++r;
    return r;
}

RankProfile check_flat_truncation(const MomentVector& y, int k, int k0, double tol_rel) {
    if (2 * k > y.order())
        throw std::invalid_argument("check_flat_truncation: moment vector order too small");
    if (k0 < 0 || k < k0) throw std::invalid_argument("check_flat_truncation: need 0 <= k0 <= k");
    RankProfile profile;
    std::vector<int> rank_at(static_cast<std::size_t>(k) + 1, 0);
    for (int t = 0; t <= k; ++t) {
        rank_at[static_cast<std::size_t>(t)] = numeric_rank(moment_matrix(y, t), tol_rel);
        profile.ranks.emplace_back(t, rank_at[static_cast<std::size_t>(t)]);
    }
    for (int t = std::max(k0, 0); t <= k; ++t) {
        if (rank_at[static_cast<std::size_t>(t)] == rank_at[static_cast<std::size_t>(t - k0)]) {
            profile.flat_t = t;
            break;
        }
    }
    return profile;
}

namespace {

struct EchelonForm {
    std::vector<int> pivot_cols;  // column (monomial) per pivot, in discovery order
    std::vector<int> pivot_rows;  // row of vt holding that pivot's unit entry
};

// Row echelon reduction of vt (r x s) with partial pivoting by magnitude,
// declaring pivots only among the first `pivot_limit` columns. Returns
// nullopt when fewer than r pivots survive the threshold.
std::optional<EchelonForm> echelon_reduce(Eigen::MatrixXd& vt, int pivot_limit, double tol) {
    const int r = static_cast<int>(vt.rows());
    EchelonForm ef;
    std::vector<char> row_used(static_cast<std::size_t>(r), 0);
    for (int c = 0; c < pivot_limit && static_cast<int>(ef.pivot_cols.size()) < r; ++c) {
        int best = -1;
        double best_abs = tol;
        for (int i = 0; i < r; ++i) {
            if (row_used[static_cast<std::size_t>(i)]) continue;
            if (std::abs(vt(i, c)) > best_abs) {
                best_abs = std::abs(vt(i, c));
                best = i;
            }
        }
        if (best < 0) continue;
        row_used[static_cast<std::size_t>(best)] = 1;
        vt.row(best) /= vt(best, c);
        for (int i = 0; i < r; ++i) {
            if (i == best) continue;
            const double f = vt(i, c);
            if (f != 0.0) vt.row(i) -= f * vt.row(best);
        }
        ef.pivot_cols.push_back(c);
        ef.pivot_rows.push_back(best);
    }
    if (static_cast<int>(ef.pivot_cols.size()) < r) return std::nullopt;
    return ef;
}

}  // namespace

std::optional<std::vector<Eigen::VectorXd>> extract_atoms(const MomentVector& y, int t, int k0,
                                                          const ExtractOptions& opts) {
    const int n = y.var_count();
    if (t < 0 || 2 * t > y.order())
        throw std::invalid_argument("extract_atoms: order t out of range");

    Eigen::MatrixXd mt = moment_matrix(y, t);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mt);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cutoff = opts.rank_tol * std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    int r = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > cutoff) ++r;
    if (r == 0) return std::nullopt;

    if (r == 1) {
        // Single atom: read the first-order moments directly.
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = y[Exponent::unit(n, i)];
        return std::vector<Eigen::VectorXd>{x};
    }

    MonomialBasis rows(n, t);
    const int s = rows.size();
    // Factor M_t ~= V V^T from the leading eigenpairs.
    Eigen::MatrixXd v(s, r);
    for (int j = 0; j < r; ++j) {
        const Eigen::Index src = ev.size() - 1 - j;
        v.col(j) = es.eigenvectors().col(src) * std::sqrt(std::max(ev(src), 0.0));
    }

    // Flat truncation at t makes the order t - k0 principal block carry the
    // full rank, so pivots can be drawn from it; shifting a pivot by one
    // variable then stays inside the basis.
    const int pivot_degree = t - std::max(1, std::min(k0, t));
    int pivot_limit = 0;
    while (pivot_limit < s && rows[pivot_limit].degree() <= pivot_degree) ++pivot_limit;

    Eigen::MatrixXd vt = v.transpose();
    const double tol = opts.pivot_tol * std::max(1.0, v.norm());
    auto ef = echelon_reduce(vt, pivot_limit, tol);
    if (!ef) return std::nullopt;

    // Multiplication operators: row i of N_l holds the echelon coordinates of
    // x_l * x^{pivot_i} over the pivot monomials.
    std::vector<Eigen::MatrixXd> mult(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        Eigen::MatrixXd nl(r, r);
        for (int i = 0; i < r; ++i) {
            const Exponent shifted =
                rows[ef->pivot_cols[static_cast<std::size_t>(i)]].plus(Exponent::unit(n, l));
            auto col = rows.index_of(shifted);
            if (!col) return std::nullopt;
            for (int j = 0; j < r; ++j)
                nl(i, j) = vt(ef->pivot_rows[static_cast<std::size_t>(j)], *col);
        }
        mult[static_cast<std::size_t>(l)] = nl;
    }

    std::mt19937_64 rng(opts.seed);
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
        // Random convex combination separates the joint eigenvalues generically.
        std::uniform_real_distribution<double> unif(0.1, 1.0);
        Eigen::VectorXd w(n);
        for (int l = 0; l < n; ++l) w(l) = unif(rng);
        w /= w.sum();
        Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(r, r);
        for (int l = 0; l < n; ++l) combo += w(l) * mult[static_cast<std::size_t>(l)];

        Eigen::RealSchur<Eigen::MatrixXd> schur(combo);
        if (schur.info() != Eigen::Success) continue;
        const Eigen::MatrixXd& tt = schur.matrixT();
        bool real_spectrum = true;
        for (int i = 0; i + 1 < r; ++i) {
            if (std::abs(tt(i + 1, i)) > 1e-7 * std::max(1.0, tt.cwiseAbs().maxCoeff())) {
                real_spectrum = false;
                break;
            }
        }
        if (!real_spectrum) continue;

        const Eigen::MatrixXd& qmat = schur.matrixU();
        std::vector<Eigen::VectorXd> atoms;
        atoms.reserve(static_cast<std::size_t>(r));
        for (int sidx = 0; sidx < r; ++sidx) {
            Eigen::VectorXd x(n);
            const Eigen::VectorXd qs = qmat.col(sidx);
            for (int l = 0; l < n; ++l) x(l) = qs.dot(mult[static_cast<std::size_t>(l)] * qs);
            atoms.push_back(std::move(x));
        }
        return atoms;
    }
    return std::nullopt;
}

Polynomial GramBlock::to_polynomial(int n) const {
    Polynomial p(n);
    if (empty()) return p;
    MonomialBasis b(n, order);
    if (gram.rows() != b.size() || gram.cols() != b.size())
        throw std::invalid_argument("GramBlock: matrix size does not match basis");
    const Eigen::MatrixXd g = 0.5 * (gram + gram.transpose());
    for (int i = 0; i < b.size(); ++i)
        for (int j = 0; j < b.size(); ++j) p.add_term(b[i].plus(b[j]), g(i, j));
    return p;
}

double GramBlock::min_eigenvalue() const {
    if (empty()) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gram + gram.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Polynomial SosCertificate::reconstruct_rhs(const HybridProblem& hp) const {
    const MooProblem& mp = hp.base;
    const int n = mp.n;
    Polynomial rhs = sigma0.to_polynomial(n);
    if (family == RelaxFamily::Q) {
        for (std::size_t i = 0; i < mp.constraints.size(); ++i)
            rhs += sos_g[i].to_polynomial(n) * mp.constraints[i] * -1.0;
        for (std::size_t j = 0; j < mp.objectives.size(); ++j) {
            Polynomial shifted = mp.objectives[j] -
                                 Polynomial::constant(n, hp.f_at_z(static_cast<Eigen::Index>(j)));
            rhs += sos_f[j].to_polynomial(n) * shifted * -1.0;
        }
    } else {
        for (std::size_t i = 0; i < mp.constraints.size(); ++i)
            rhs += mp.constraints[i] * -mu(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < mp.objectives.size(); ++j) {
            Polynomial shifted = mp.objectives[j] -
                                 Polynomial::constant(n, hp.f_at_z(static_cast<Eigen::Index>(j)));
            rhs += shifted * -nu(static_cast<Eigen::Index>(j));
        }
        Polynomial bounded = mp.weighted_sum() - Polynomial::constant(n, localization_bound);
        rhs += sigma_lambda.to_polynomial(n) * bounded * -1.0;
    }
    return rhs;
}

SosCertificate recover_certificate(const SdpInstance& inst, const SdpSolution& sol,
                                   const HybridProblem& hp, RelaxFamily family, int k, double tol,
                                   std::optional<double> localization_bound) {
    if (sol.status != SdpStatus::Optimal)
        throw std::invalid_argument("recover_certificate: requires an Optimal solution");
    const MooProblem& mp = hp.base;
    RelaxationSpec spec = RelaxationSpec::derive(mp, family, k);
    const int m = mp.constraint_count();
    const int p = mp.objective_count();

    SosCertificate cert;
    cert.family = family;
    cert.n = mp.n;
    cert.gamma = sol.dual_objective;
    cert.localization_bound = localization_bound.value_or(hp.lambda_f_at_z);

    auto gram_of = [&](std::size_t block, int order) {
        GramBlock g;
        g.order = order;
        g.gram = sol.dual_psd.at(block);
        if (g.gram.rows() != MonomialBasis::dimension(mp.n, order))
            throw std::invalid_argument("recover_certificate: dual block size mismatch");
        return g;
    };

    bool psd_ok = true;
    bool scalars_ok = true;
    auto note_gram = [&](const GramBlock& g) {
        const double trace = g.empty() ? 0.0 : g.gram.trace();
        if (g.min_eigenvalue() < -1e-7 * (1.0 + trace)) psd_ok = false;
    };

    if (family == RelaxFamily::Q) {
        if (sol.dual_psd.size() != static_cast<std::size_t>(1 + m + p))
            throw std::invalid_argument("recover_certificate: unexpected block layout for family Q");
        cert.sigma0 = gram_of(0, k);
        for (int i = 0; i < m; ++i)
            cert.sos_g.push_back(gram_of(static_cast<std::size_t>(1 + i),
                                         k - spec.r[static_cast<std::size_t>(i)]));
        for (int j = 0; j < p; ++j)
            cert.sos_f.push_back(gram_of(static_cast<std::size_t>(1 + m + j),
                                         k - spec.d[static_cast<std::size_t>(j)]));
        note_gram(cert.sigma0);
        for (const auto& g : cert.sos_g) note_gram(g);
        for (const auto& g : cert.sos_f) note_gram(g);
        cert.mu = Eigen::VectorXd::Zero(m);
        cert.nu = Eigen::VectorXd::Zero(p);
    } else {
        if (sol.dual_psd.size() != 2 ||
            sol.dual_scalar.size() != static_cast<Eigen::Index>(m + p))
            throw std::invalid_argument("recover_certificate: unexpected block layout for family P");
        cert.sigma0 = gram_of(0, k);
        cert.sigma_lambda = gram_of(1, k - spec.d_f);
        cert.mu = sol.dual_scalar.head(m);
        cert.nu = sol.dual_scalar.tail(p);
        note_gram(cert.sigma0);
        note_gram(cert.sigma_lambda);
        for (Eigen::Index i = 0; i < cert.mu.size(); ++i)
            if (cert.mu(i) < -1e-9) scalars_ok = false;
        for (Eigen::Index j = 0; j < cert.nu.size(); ++j)
            if (cert.nu(j) < -1e-9) scalars_ok = false;
    }
    (void)inst;

    const Polynomial target =
        mp.weighted_sum() - Polynomial::constant(mp.n, cert.gamma);
    const Polynomial defect = target - cert.reconstruct_rhs(hp);
    cert.residual = defect.coeff_inf_norm();
    cert.grams_psd = psd_ok;
    cert.scalars_nonneg = scalars_ok;
    const double allowance = tol * (1.0 + mp.weighted_sum().coeff_inf_norm());
    cert.accepted = psd_ok && scalars_ok && cert.residual <= allowance;
    return cert;
}

}  // namespace paretopt
