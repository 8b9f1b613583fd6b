#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "paretopt/certificate.hpp"

namespace paretopt {

struct SweepBox {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

// z-selection, relaxation family, escalation limits and tolerances for one
// sweep over the feasible set.
struct SweepConfig {
    std::vector<Eigen::VectorXd> z_list;  // explicit parameters, must lie in K
    std::optional<SweepBox> box;          // rejection-sampling box
    int samples = 0;
    std::uint64_t seed = 0;

    RelaxFamily family = RelaxFamily::P;
    int k_max = -1;  // < 0 means k0 + 3

    // Tighter than the solver's stand-alone defaults: rank decisions on the
    // returned moment vector want the extra two orders of margin.
    double tol_gap = 1e-10;
    double tol_feas = 1e-10;
    int solver_max_iter = 200;
    double tol_rank = 1e-4;
    double point_feas_tol = 1e-5;
    double dedup_tol = 1e-4;

    int workers = 1;
    bool reverify = true;
    bool polish = true;
    bool emit_certificates = false;
    double certificate_tol = 1e-5;
    std::optional<double> localization_bound;  // family P bound override
};

struct EfficientPoint {
    Eigen::VectorXd x;
    Eigen::VectorXd values;  // f_1(x) ... f_p(x)
    Eigen::VectorXd z;
    int k_used = 0;
    RelaxFamily family = RelaxFamily::P;
    bool verified = false;      // flat truncation fired and extraction validated
    bool reverify_ok = false;
    double objective = 0.0;     // relaxation optimal value at k_used
    double gap = 0.0;
    SdpStatus solve_status = SdpStatus::NumericalTrouble;
    std::vector<std::pair<int, int>> ranks;
    std::optional<SosCertificate> certificate;
};

class SamplingStalled : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rejection-samples z in K (explicit entries are checked and passed through).
// Throws SamplingStalled when acceptance stays below 0.1% over 1e6 draws.
std::vector<Eigen::VectorXd> sample_feasible_z(const SweepConfig& cfg, const MooProblem& problem);

// Order-escalation loop for one parameter z: build, solve, rank-test,
// extract. Falls back to the first-order moment point with verified = false
// when flat truncation never fires up to k_max.
EfficientPoint solve_hybrid(const MooProblem& problem, const Eigen::VectorXd& z,
                            const SweepConfig& cfg);

// Re-solves at z = x and accepts when the optimal value matches
// lambda^T f(x) within 1e-5 * (1 + |value|). Stores the flag on the point.
bool reverify_efficiency(const MooProblem& problem, EfficientPoint& point,
                         const SweepConfig& cfg);

// Removes outputs whose value vector is dominated by another output and
// deduplicates points within Euclidean distance tol. Result sorted by x.
std::vector<EfficientPoint> pareto_filter(std::vector<EfficientPoint> points, double tol);

struct ExistenceReport {
    bool hessian_pd_found = false;
    Eigen::VectorXd witness;
    bool convexity_violated = false;  // an objective Hessian failed PSD at a sample
    Eigen::VectorXd violation_point;
    int violation_objective = -1;
    std::string summary;
};

// Sufficient-condition probe: the weighted Hessian positive definite at some
// sample point. Each objective Hessian is spot-checked for PSD first; any
// violation is evidence against the convexity hypothesis and forces an
// inconclusive report.
ExistenceReport existence_probe(const MooProblem& problem,
                                const std::vector<Eigen::VectorXd>& samples);

struct ZDiagnostic {
    Eigen::VectorXd z;
    SdpStatus status = SdpStatus::NumericalTrouble;
    int k_used = 0;
    double gap = 0.0;
    std::vector<std::pair<int, int>> ranks;
    bool verified = false;
    bool reverify_ok = false;
};

struct SweepResult {
    std::vector<EfficientPoint> efficient;   // verified, dominance-filtered
    std::vector<EfficientPoint> unverified;  // reported separately, never merged
    std::vector<ZDiagnostic> diagnostics;
    int solve_count = 0;
    int verified_count = 0;  // verified points before filtering
};

// Algorithm: sample z, solve the hybrid relaxation per z (in parallel when
// cfg.workers > 1), reverify, filter. Deterministic for a fixed config.
SweepResult run_sweep(const MooProblem& problem, const SweepConfig& cfg);

}  // namespace paretopt
