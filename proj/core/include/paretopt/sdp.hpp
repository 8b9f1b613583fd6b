#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace paretopt {

// One coefficient of an affine symmetric-matrix map. `var == -1` addresses
// the constant matrix A0, otherwise the matrix A_{var} multiplying y_var.
// Entries are stored with row <= col and apply to both mirrored positions.
struct BlockEntry {
    int var = -1;
    int row = 0;
    int col = 0;
    double value = 0.0;
};

// Affine map y -> A0 + sum_i y_i A_i constrained to be PSD.
struct PsdBlock {
    int dim = 0;
    std::vector<BlockEntry> entries;

    Eigen::MatrixXd eval(const Eigen::VectorXd& y) const;
    Eigen::MatrixXd coefficient_matrix(int var) const;  // A_var (or A0 for var = -1)
};

// Affine scalar constraint: constant + coeffs^T y <= 0.
struct ScalarIneq {
    double constant = 0.0;
    std::vector<std::pair<int, double>> coeffs;

    double eval(const Eigen::VectorXd& y) const;
};

// Linear program over block-diagonal PSD cones in primal moment form:
//   minimize  objective^T y + objective_constant
//   s.t.      every psd_block(y) is PSD, every scalar_ineq(y) <= 0,
//             y_i = v for each pin (i, v).
struct SdpInstance {
    int var_count = 0;
    Eigen::VectorXd objective;
    double objective_constant = 0.0;
    std::vector<PsdBlock> psd_blocks;
    std::vector<ScalarIneq> scalar_ineqs;
    std::vector<std::pair<int, double>> fixed;

    void validate() const;

    // Plain-text sparse dump for cross-checking against external solvers.
    // Scalar inequalities are listed as the trailing 1x1 blocks.
    void dump(std::ostream& out) const;
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, MaxIter, NumericalTrouble };
const char* to_string(SdpStatus s);

struct SdpOptions {
    double eps_gap = 1e-8;
    double eps_feas = 1e-8;
    int max_iter = 200;
    bool verbose = false;
};

struct SdpSolution {
    SdpStatus status = SdpStatus::NumericalTrouble;
    Eigen::VectorXd y;          // includes pinned entries at their exact values
    double objective = 0.0;     // objective^T y + objective_constant
    double dual_objective = 0.0;

    // Dual variables in original data scale: Z per PSD block and a
    // nonnegative multiplier per scalar inequality.
    std::vector<Eigen::MatrixXd> dual_psd;
    Eigen::VectorXd dual_scalar;

    double gap = 0.0;             // |primal - dual| / (1 + |primal|)
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;

    // Certificates: a primal improving ray when Unbounded, a dual improving
    // ray (per-block Z, plus scalar part) when Infeasible.
    Eigen::VectorXd primal_ray;
    std::vector<Eigen::MatrixXd> dual_ray_psd;
    Eigen::VectorXd dual_ray_scalar;
};

SdpSolution solve(const SdpInstance& inst, const SdpOptions& opts = {});

struct WeakDualityReport {
    bool ok = false;
    double primal = 0.0;
    double dual_recomputed = 0.0;
    double violation = 0.0;  // max(0, dual - primal - slack allowance)
};

// Recomputes the dual objective from the returned dual variables and checks
// dual <= primal + eps_gap * (1 + |primal|). Requires an Optimal solution.
WeakDualityReport certify_weak_duality(const SdpSolution& sol, const SdpInstance& inst,
                                       double eps_gap = 1e-6);

}  // namespace paretopt
