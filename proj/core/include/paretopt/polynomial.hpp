#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>

#include "paretopt/exponent.hpp"

namespace paretopt {

// Sparse multivariate polynomial with real coefficients.
//
// Terms are kept in a graded-lex ordered map with no stored zero
// coefficients, so equal polynomials compare equal structurally.
class Polynomial {
public:
    using TermMap = std::map<Exponent, double, GrlexLess>;

    explicit Polynomial(int n) : n_(check_n(n)) {}

    static Polynomial constant(int n, double c);
    static Polynomial variable(int n, int var);   // x_{var}
    static Polynomial monomial(const Exponent& e, double coeff);

    int var_count() const { return n_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int term_count() const { return static_cast<int>(terms_.size()); }

    // 0 for the zero polynomial.
    int degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

    double coeff(const Exponent& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? 0.0 : it->second;
    }

    // Adds c * x^e, pruning the term if the sum cancels to zero.
    void add_term(const Exponent& e, double c);

    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator-(const Polynomial& other) const;
    Polynomial operator*(const Polynomial& other) const;
    Polynomial operator*(double s) const;
    Polynomial operator-() const { return *this * -1.0; }
    Polynomial& operator+=(const Polynomial& other);

    bool operator==(const Polynomial& other) const {
        return n_ == other.n_ && terms_ == other.terms_;
    }

    double evaluate(std::span<const double> point) const;
    double evaluate(const Eigen::VectorXd& point) const {
        return evaluate(std::span<const double>(point.data(), static_cast<std::size_t>(point.size())));
    }

    Polynomial differentiate(int var) const;

    Eigen::VectorXd gradient_at(const Eigen::VectorXd& point) const;
    Eigen::MatrixXd hessian_at(const Eigen::VectorXd& point) const;

    // Largest absolute coefficient (0 for the zero polynomial).
    double coeff_inf_norm() const;

    std::string to_string() const;

private:
    static int check_n(int n) {
        if (n < 1) throw std::invalid_argument("Polynomial: needs at least one variable");
        return n;
    }
    void check_point(std::size_t len) const;

    int n_;
    TermMap terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

// True iff the symmetric matrix has smallest eigenvalue > tol.
// Throws if the matrix is asymmetric beyond tol.
bool is_positive_definite(const Eigen::MatrixXd& m, double tol = 1e-8);

// Multi-objective problem: minimize (f_1,...,f_p) over g_i(x) <= 0,
// with a fixed strictly positive weight vector lambda.
struct MooProblem {
    int n = 0;
    std::vector<Polynomial> objectives;
    std::vector<Polynomial> constraints;
    Eigen::VectorXd lambda;

    int objective_count() const { return static_cast<int>(objectives.size()); }
    int constraint_count() const { return static_cast<int>(constraints.size()); }

    // Throws std::invalid_argument when p < 1, variable counts differ,
    // or lambda is not strictly positive of length p.
    void validate() const;

    // lambda^T f, combined coefficient-wise.
    Polynomial weighted_sum() const;
};

}  // namespace paretopt
