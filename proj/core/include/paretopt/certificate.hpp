#pragma once

#include <cstdint>
#include <optional>

#include "paretopt/relaxation.hpp"

namespace paretopt {

// Count of eigenvalues above tol_rel * max(sigma_max, 1). The matrix is
// expected to be PSD up to solver noise.
int numeric_rank(const Eigen::MatrixXd& m, double tol_rel = 1e-4);

struct RankProfile {
    std::vector<std::pair<int, int>> ranks;  // (t, rank M_t(y)) for t = 0..k
    std::optional<int> flat_t;               // smallest t in [k0, k] with the rank equality
};

// Flat truncation: smallest t in [k0, k] with rank M_t(y) = rank M_{t-k0}(y).
RankProfile check_flat_truncation(const MomentVector& y, int k, int k0, double tol_rel = 1e-4);

struct ExtractOptions {
    double rank_tol = 1e-4;
    double pivot_tol = 1e-6;  // relative to ||V||
    int max_retries = 3;
    std::uint64_t seed = 20240901ull;
};

// Atoms of an (approximately) atomic truncated moment sequence with flat
// truncation at order t. Rank one short-circuits to the first-order moments;
// otherwise multiplication operators are built from a column echelon form of
// the moment matrix factor and jointly diagonalized through a real Schur
// decomposition of a random convex combination.
// Returns nullopt when echelon pivoting or the joint diagonalization fails;
// the caller escalates the relaxation order.
std::optional<std::vector<Eigen::VectorXd>> extract_atoms(const MomentVector& y, int t, int k0,
                                                          const ExtractOptions& opts = {});

// SOS polynomial represented by a Gram matrix over the monomial basis of the
// given order.
struct GramBlock {
    int order = 0;
    Eigen::MatrixXd gram;

    bool empty() const { return gram.size() == 0; }
    Polynomial to_polynomial(int n) const;
    double min_eigenvalue() const;
};

struct SosCertificate {
    RelaxFamily family = RelaxFamily::P;
    int n = 0;
    double gamma = 0.0;
    GramBlock sigma0;

    // Family Q: one SOS multiplier per constraint and per objective bound.
    std::vector<GramBlock> sos_g;
    std::vector<GramBlock> sos_f;

    // Family P: scalar multipliers plus one SOS on the weighted-sum bound.
    Eigen::VectorXd mu;
    Eigen::VectorXd nu;
    GramBlock sigma_lambda;
    double localization_bound = 0.0;

    double residual = 0.0;   // coefficient inf-norm of the identity defect
    bool grams_psd = false;
    bool scalars_nonneg = false;
    bool accepted = false;

    // lambda^T f - gamma reconstructed from the multipliers.
    Polynomial reconstruct_rhs(const HybridProblem& hp) const;
};

// Maps the dual blocks of an Optimal solve back to Gram matrices and scalar
// multipliers, sets gamma to the dual objective, and measures the identity
// residual coefficient-wise. `accepted` is false when the residual exceeds
// tol * (1 + ||lambda^T f||) or a Gram fails the PSD check.
SosCertificate recover_certificate(const SdpInstance& inst, const SdpSolution& sol,
                                   const HybridProblem& hp, RelaxFamily family, int k,
                                   double tol = 1e-5,
                                   std::optional<double> localization_bound = std::nullopt);

}  // namespace paretopt
