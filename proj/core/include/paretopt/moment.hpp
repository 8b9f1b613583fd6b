#pragma once

#include <Eigen/Dense>
#include <optional>
#include <unordered_map>
#include <vector>

#include "paretopt/polynomial.hpp"

namespace paretopt {

// Monomials of degree <= d in n variables, in graded-lex order:
// 1, x1, ..., xn, x1^2, x1x2, ..., xn^2, ..., xn^d.
class MonomialBasis {
public:
    MonomialBasis(int n, int d);

    int var_count() const { return n_; }
    int max_degree() const { return d_; }
    int size() const { return static_cast<int>(exps_.size()); }
    const Exponent& operator[](int i) const { return exps_[static_cast<std::size_t>(i)]; }
    const std::vector<Exponent>& exponents() const { return exps_; }

    std::optional<int> index_of(const Exponent& e) const {
        auto it = index_.find(e);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    // s(d) = binomial(n + d, d)
    static long dimension(int n, int d);

private:
    int n_, d_;
    std::vector<Exponent> exps_;
    std::unordered_map<Exponent, int, Exponent::Hash> index_;
};

// Pseudo-moment vector indexed by MonomialBasis(n, order); the entry at
// the zero exponent is fixed to 1.
class MomentVector {
public:
    MomentVector(int n, int order);
    MomentVector(MonomialBasis basis, Eigen::VectorXd values);

    int var_count() const { return basis_.var_count(); }
    int order() const { return basis_.max_degree(); }
    const MonomialBasis& basis() const { return basis_; }
    const Eigen::VectorXd& values() const { return vals_; }

    double operator[](const Exponent& e) const;
    void set(const Exponent& e, double v);

private:
    MonomialBasis basis_;
    Eigen::VectorXd vals_;
};

MonomialBasis basis(int n, int d);

// M_d(y): entry (a, b) = y_{a+b}. Requires 2d <= y.order().
Eigen::MatrixXd moment_matrix(const MomentVector& y, int d);

// M_d(p y): entry (a, b) = sum_g p_g y_{g+a+b}. Requires 2d + deg p <= y.order().
Eigen::MatrixXd localization_matrix(const Polynomial& p, const MomentVector& y, int d);

// Moments of the Dirac measure at x: y_a = x^a for all |a| <= order.
MomentVector dirac_moments(const Eigen::VectorXd& x, int order);

// ceil(deg p / 2); the r_i / d_j order helpers for relaxation levels.
int half_degree(const Polynomial& p);

}  // namespace paretopt
