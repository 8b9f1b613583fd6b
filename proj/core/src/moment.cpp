#include "paretopt/moment.hpp"

#include <algorithm>
#include <stdexcept>

namespace paretopt {

namespace {

void enumerate_exponents(int n, int d, std::vector<Exponent>& out) {
    std::vector<int> current(static_cast<std::size_t>(n), 0);
    for (int deg = 0; deg <= d; ++deg) {
        // First composition of `deg` in grlex order puts everything on x1.
        std::fill(current.begin(), current.end(), 0);
        current[0] = deg;
        while (true) {
            out.emplace_back(current);
            // Successor: shift one unit from the rightmost positive entry
            // before the last slot and collect the tail after it.
            int idx = -1;
            for (int i = n - 2; i >= 0; --i) {
                if (current[static_cast<std::size_t>(i)] > 0) { idx = i; break; }
            }
            if (idx < 0) break;
            int tail = 0;
            for (int i = idx + 1; i < n; ++i) {
                tail += current[static_cast<std::size_t>(i)];
                current[static_cast<std::size_t>(i)] = 0;
            }
            current[static_cast<std::size_t>(idx)] -= 1;
            current[static_cast<std::size_t>(idx + 1)] = tail + 1;
        }
    }
}

}  // namespace

MonomialBasis::MonomialBasis(int n, int d) : n_(n), d_(d) {
    if (n < 1) throw std::invalid_argument("MonomialBasis: n must be >= 1");
    if (d < 0) throw std::invalid_argument("MonomialBasis: d must be >= 0");
    exps_.reserve(static_cast<std::size_t>(dimension(n, d)));
    enumerate_exponents(n, d, exps_);
    index_.reserve(exps_.size());
    for (std::size_t i = 0; i < exps_.size(); ++i) index_.emplace(exps_[i], static_cast<int>(i));
}

long MonomialBasis::dimension(int n, int d) {
    long r = 1;
    for (int i = 1; i <= d; ++i) {
        r = r * (n + i) / i;  // exact: product of consecutive integers divisible by i!
    }
    return r;
}

MomentVector::MomentVector(int n, int order)
    : basis_(n, order), vals_(Eigen::VectorXd::Zero(basis_.size())) {
    vals_(0) = 1.0;
}

MomentVector::MomentVector(MonomialBasis b, Eigen::VectorXd values)
    : basis_(std::move(b)), vals_(std::move(values)) {
    if (vals_.size() != basis_.size())
        throw std::invalid_argument("MomentVector: value length does not match basis size");
    if (std::abs(vals_(0) - 1.0) > 1e-6)
        throw std::invalid_argument("MomentVector: entry at the zero exponent must be 1");
}

double MomentVector::operator[](const Exponent& e) const {
    auto idx = basis_.index_of(e);
    if (!idx) throw std::out_of_range("MomentVector: exponent outside basis");
    return vals_(*idx);
}

void MomentVector::set(const Exponent& e, double v) {
    auto idx = basis_.index_of(e);
    if (!idx) throw std::out_of_range("MomentVector: exponent outside basis");
    vals_(*idx) = v;
}

MonomialBasis basis(int n, int d) { return MonomialBasis(n, d); }

Eigen::MatrixXd moment_matrix(const MomentVector& y, int d) {
    if (2 * d > y.order())
        throw std::invalid_argument("moment_matrix: moment vector order too small");
    MonomialBasis rows(y.var_count(), d);
    const int s = rows.size();
    Eigen::MatrixXd m(s, s);
    for (int i = 0; i < s; ++i) {
        for (int j = i; j < s; ++j) {
            double v = y[rows[i].plus(rows[j])];
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

Eigen::MatrixXd localization_matrix(const Polynomial& p, const MomentVector& y, int d) {
    if (p.var_count() != y.var_count())
        throw std::invalid_argument("localization_matrix: variable count mismatch");
    if (2 * d + p.degree() > y.order())
        throw std::invalid_argument("localization_matrix: moment vector order too small");
    MonomialBasis rows(y.var_count(), d);
    const int s = rows.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        for (int j = i; j < s; ++j) {
            const Exponent ab = rows[i].plus(rows[j]);
            double v = 0.0;
            for (const auto& [g, c] : p.terms()) v += c * y[g.plus(ab)];
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

MomentVector dirac_moments(const Eigen::VectorXd& x, int order) {
    MomentVector y(static_cast<int>(x.size()), order);
    const MonomialBasis& b = y.basis();
    for (int i = 0; i < b.size(); ++i) {
        const Exponent& e = b[i];
        double v = 1.0;
        for (int k = 0; k < e.size(); ++k)
            for (int r = 0; r < e[k]; ++r) v *= x(k);
        y.set(e, v);
    }
    return y;
}

int half_degree(const Polynomial& p) { return (p.degree() + 1) / 2; }

}  // namespace paretopt
