#pragma once

#include <optional>

#include "paretopt/moment.hpp"
#include "paretopt/sdp.hpp"

namespace paretopt {

enum class RelaxFamily { Q, P };
const char* to_string(RelaxFamily f);

// The scalar problem obtained by bounding every objective at its value at z:
//   minimize lambda^T f(x)  s.t.  g_i(x) <= 0,  f_j(x) <= f_j(z).
struct HybridProblem {
    MooProblem base;
    Eigen::VectorXd z;
    Eigen::VectorXd f_at_z;       // f_j(z)
    double lambda_f_at_z = 0.0;   // lambda^T f(z)

    static HybridProblem at(MooProblem problem, Eigen::VectorXd z);
};

// Relaxation orders: r_i = ceil(deg g_i / 2), d_j = ceil(deg f_j / 2),
// k0 = max of both families of orders, d_f = max_j d_j.
struct RelaxationSpec {
    RelaxFamily family = RelaxFamily::P;
    int k = 0;
    std::vector<int> r;
    std::vector<int> d;
    int k0 = 0;
    int d_f = 0;

    static RelaxationSpec derive(const MooProblem& problem, RelaxFamily family, int k);
};

// Moment relaxation of order k with localization blocks
//   M_{k-r_i}(-g_i y) >= 0  (i = 0..m, g_0 = 1)  and
//   M_{k-d_j}((f_j(z) - f_j) y) >= 0  (j = 1..p).
// Throws std::invalid_argument when k < k0.
SdpInstance build_q(const HybridProblem& hp, int k);

// Moment relaxation of order k with a single moment matrix M_k(y),
// scalar moment inequalities for g_i and f_j, and the localization block
// M_{k-d_f}((lambda^T f(z) - lambda^T f) y) >= 0. The localization bound
// may be overridden (it defaults to lambda^T f(z)).
SdpInstance build_p(const HybridProblem& hp, int k,
                    std::optional<double> localization_bound = std::nullopt);

// True iff g_i(x) <= tol for all i and f_j(x) <= f_j(z) + tol for all j.
bool feasibility_check(const HybridProblem& hp, const Eigen::VectorXd& x, double tol);

// Linear moment functional of a polynomial: sum_a p_a y_a as a ScalarIneq
// representation over the basis of order 2k (helper shared by both builders).
ScalarIneq moment_functional(const Polynomial& p, const MonomialBasis& b);

}  // namespace paretopt
