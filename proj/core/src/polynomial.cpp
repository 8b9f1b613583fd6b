#include "paretopt/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace paretopt {

Polynomial Polynomial::constant(int n, double c) {
    Polynomial p(n);
    p.add_term(Exponent::zero(n), c);
    return p;
}

Polynomial Polynomial::variable(int n, int var) {
    Polynomial p(n);
    p.add_term(Exponent::unit(n, var), 1.0);
    return p;
}

Polynomial Polynomial::monomial(const Exponent& e, double coeff) {
    Polynomial p(e.size());
    p.add_term(e, coeff);
    return p;
}

void Polynomial::add_term(const Exponent& e, double c) {
    if (e.size() != n_)
        throw std::invalid_argument("Polynomial::add_term: variable count mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    Polynomial r = *this;
    r += other;
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    if (n_ != other.n_)
        throw std::invalid_argument("Polynomial: variable count mismatch in +");
    for (const auto& [e, c] : other.terms_) add_term(e, c);
    return *this;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
    return *this + (other * -1.0);
}

Polynomial Polynomial::operator*(double s) const {
    Polynomial r(n_);
    if (s == 0.0) return r;
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, c * s);
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    if (n_ != other.n_)
        throw std::invalid_argument("Polynomial: variable count mismatch in *");
    Polynomial r(n_);
    for (const auto& [ea, ca] : terms_)
        for (const auto& [eb, cb] : other.terms_) r.add_term(ea.plus(eb), ca * cb);
    return r;
}

void Polynomial::check_point(std::size_t len) const {
    if (static_cast<int>(len) != n_)
        throw std::invalid_argument("Polynomial: point dimension mismatch");
}

double Polynomial::evaluate(std::span<const double> point) const {
    check_point(point.size());
    double total = 0.0;
    for (const auto& [e, c] : terms_) {
        double m = c;
        for (int i = 0; i < n_; ++i) {
            for (int k = 0; k < e[i]; ++k) m *= point[static_cast<std::size_t>(i)];
        }
        total += m;
    }
    return total;
}

Polynomial Polynomial::differentiate(int var) const {
    if (var < 0 || var >= n_) throw std::out_of_range("Polynomial::differentiate: variable index");
    Polynomial r(n_);
    for (const auto& [e, c] : terms_) {
        if (e[var] == 0) continue;
        r.add_term(e.minus_unit(var), c * e[var]);
    }
    return r;
}

Eigen::VectorXd Polynomial::gradient_at(const Eigen::VectorXd& point) const {
    check_point(static_cast<std::size_t>(point.size()));
    Eigen::VectorXd g(n_);
    for (int i = 0; i < n_; ++i) g(i) = differentiate(i).evaluate(point);
    return g;
}

Eigen::MatrixXd Polynomial::hessian_at(const Eigen::VectorXd& point) const {
    check_point(static_cast<std::size_t>(point.size()));
    Eigen::MatrixXd h(n_, n_);
    for (int i = 0; i < n_; ++i) {
        Polynomial di = differentiate(i);
        for (int j = i; j < n_; ++j) {
            double v = di.differentiate(j).evaluate(point);
            h(i, j) = v;
            h(j, i) = v;
        }
    }
    return h;
}

double Polynomial::coeff_inf_norm() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (!first) out << (c < 0 ? " - " : " + ");
        else if (c < 0) out << "-";
        first = false;
        double ac = std::abs(c);
        bool wrote_coeff = false;
        if (e.degree() == 0 || ac != 1.0) {
            out << ac;
            wrote_coeff = true;
        }
        for (int i = 0; i < n_; ++i) {
            if (e[i] == 0) continue;
            if (wrote_coeff) out << "*";
            out << "x" << (i + 1);
            if (e[i] > 1) out << "^" << e[i];
            wrote_coeff = true;
        }
    }
    return out.str();
}

bool is_positive_definite(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols()) throw std::invalid_argument("is_positive_definite: matrix not square");
    double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("is_positive_definite: matrix not symmetric within tolerance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > tol;
}

void MooProblem::validate() const {
    if (n < 1) throw std::invalid_argument("MooProblem: variable count must be >= 1");
    if (objectives.empty()) throw std::invalid_argument("MooProblem: needs at least one objective");
    for (const auto& f : objectives)
        if (f.var_count() != n) throw std::invalid_argument("MooProblem: objective variable count mismatch");
    for (const auto& g : constraints)
        if (g.var_count() != n) throw std::invalid_argument("MooProblem: constraint variable count mismatch");
    if (lambda.size() != static_cast<Eigen::Index>(objectives.size()))
        throw std::invalid_argument("MooProblem: lambda length must equal objective count");
    for (Eigen::Index j = 0; j < lambda.size(); ++j)
        if (!(lambda(j) > 0.0))
            throw std::invalid_argument("MooProblem: lambda must be strictly positive");
}

Polynomial MooProblem::weighted_sum() const {
    validate();
    Polynomial sum(n);
    for (std::size_t j = 0; j < objectives.size(); ++j)
        sum += objectives[j] * lambda(static_cast<Eigen::Index>(j));
    return sum;
}

}  // namespace paretopt
