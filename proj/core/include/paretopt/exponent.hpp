#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace paretopt {

// Multi-index of monomial exponents over a fixed number of variables.
// Immutable after construction; the total degree is cached.
class Exponent {
public:
    explicit Exponent(int n) : e_(static_cast<std::size_t>(check_n(n)), 0), degree_(0) {}

    Exponent(std::initializer_list<int> entries) : Exponent(std::vector<int>(entries)) {}

    explicit Exponent(std::vector<int> entries) : e_(std::move(entries)) {
        if (e_.empty()) throw std::invalid_argument("Exponent: needs at least one variable");
        degree_ = 0;
        for (int v : e_) {
            if (v < 0) throw std::invalid_argument("Exponent: entries must be non-negative");
            degree_ += v;
        }
    }

    static Exponent zero(int n) { return Exponent(n); }

    // e_i, the exponent of a single variable.
    static Exponent unit(int n, int var) {
        Exponent e(n);
        if (var < 0 || var >= n) throw std::out_of_range("Exponent::unit: variable index");
        e.e_[static_cast<std::size_t>(var)] = 1;
        e.degree_ = 1;
        return e;
    }

    int size() const { return static_cast<int>(e_.size()); }
    int degree() const { return degree_; }
    int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& entries() const { return e_; }

    Exponent plus(const Exponent& other) const {
        if (size() != other.size())
            throw std::invalid_argument("Exponent::plus: variable count mismatch");
        Exponent r(size());
        for (int i = 0; i < size(); ++i) {
            long s = static_cast<long>(e_[i]) + other.e_[i];
            if (s > kMaxEntry)
                throw std::overflow_error("Exponent::plus: entry overflow");
            r.e_[static_cast<std::size_t>(i)] = static_cast<int>(s);
        }
        r.degree_ = degree_ + other.degree_;
        return r;
    }

    // Derivative index: this with entry `var` reduced by one. Requires e[var] > 0.
    Exponent minus_unit(int var) const {
        Exponent r(*this);
        r.e_[static_cast<std::size_t>(var)] -= 1;
        r.degree_ -= 1;
        return r;
    }

    bool operator==(const Exponent& other) const { return e_ == other.e_; }
    bool operator!=(const Exponent& other) const { return !(*this == other); }

    struct Hash {
        std::size_t operator()(const Exponent& e) const {
            std::size_t h = 0x9e3779b97f4a7c15ull;
            for (int v : e.e_) h = h * 1099511628211ull + static_cast<std::size_t>(v) + 1;
            return h;
        }
    };

private:
    static int check_n(int n) {
        if (n < 1) throw std::invalid_argument("Exponent: needs at least one variable");
        return n;
    }
    static constexpr int kMaxEntry = 1 << 20;

    std::vector<int> e_;
    int degree_;
};

// Graded lexicographic order: lower total degree first; ties broken so that
// x1^d precedes x1^{d-1}x2, matching the canonical monomial ordering
// 1, x1, ..., xn, x1^2, x1x2, ..., xn^2, ...
inline bool grlex_less(const Exponent& a, const Exponent& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return false;
}

struct GrlexLess {
    bool operator()(const Exponent& a, const Exponent& b) const { return grlex_less(a, b); }
};

}  // namespace paretopt
