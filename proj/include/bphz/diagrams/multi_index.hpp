#ifndef BPHZ_DIAGRAMS_MULTI_INDEX_HPP
#define BPHZ_DIAGRAMS_MULTI_INDEX_HPP

#include "rational.hpp"

#include <array>
#include <compare>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bphz {

inline constexpr int kMaxDim = 4;

// element of N^d, d <= kMaxDim
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(int d) : dim_(d) {
        if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
    }
    MultiIndex(int d, std::initializer_list<int> v) : MultiIndex(d) {
        if (static_cast<int>(v.size()) != d) throw std::invalid_argument("multiindex size mismatch");
        int i = 0;
        for (int x : v) set(i++, x);
    }
    static MultiIndex unit(int d, int i) {
        MultiIndex m(d);
        m.c_[i] = 1;
        return m;
    }

    int dim() const { return dim_; }
    int operator[](int i) const { return c_[i]; }
    void set(int i, int v) {
        if (v < 0) throw std::invalid_argument("negative multiindex component");
        c_[i] = v;
    }

    int abs() const {
        int s = 0;
        for (int i = 0; i < dim_; ++i) s += c_[i];
        return s;
    }
    bool is_zero() const { return abs() == 0; }

    MultiIndex& operator+=(const MultiIndex& o) {
        check(o);
        for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
        return *this;
    }
    MultiIndex& operator-=(const MultiIndex& o) {
        check(o);
        for (int i = 0; i < dim_; ++i) {
            if (c_[i] < o.c_[i]) throw std::invalid_argument("multiindex subtraction underflow");
            c_[i] -= o.c_[i];
        }
        return *this;
    }
    friend MultiIndex operator+(MultiIndex a, const MultiIndex& b) { return a += b; }
    friend MultiIndex operator-(MultiIndex a, const MultiIndex& b) { return a -= b; }

    bool leq(const MultiIndex& o) const {
        for (int i = 0; i < dim_; ++i)
            if (c_[i] > o.c_[i]) return false;
        return true;
    }

    Rational factorial() const {
        Rational f(1);
        for (int i = 0; i < dim_; ++i) f *= bphz::factorial(c_[i]);
        return f;
    }
    double binom_double(const MultiIndex& m) const {
        double b = 1;
        for (int i = 0; i < dim_; ++i)
            for (int t = 0; t < m.c_[i]; ++t) b = b * (c_[i] - t) / (t + 1);
        return b;
    }
    double factorial_double() const {
        double f = 1;
        for (int i = 0; i < dim_; ++i)
            for (int t = 2; t <= c_[i]; ++t) f *= t;
        return f;
    }
    // prod_i binom(this_i, m_i)
    Rational binom(const MultiIndex& m) const {
        Rational b(1);
        for (int i = 0; i < dim_; ++i) b *= bphz::binomial(c_[i], m.c_[i]);
        return b;
    }

    std::string str() const {
        std::string s = "(";
        for (int i = 0; i < dim_; ++i) {
            if (i) s += ",";
            s += std::to_string(c_[i]);
        }
        return s + ")";
    }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
        return a.dim_ == b.dim_ && a.c_ == b.c_;
    }
    friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) {
        if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
        return a.c_ <=> b.c_;
    }

private:
    void check(const MultiIndex& o) const {
        if (o.dim_ != dim_) throw std::invalid_argument("multiindex dimension mismatch");
    }
    int dim_ = 1;
    std::array<int, kMaxDim> c_{};
};

// all m in N^d with |m| <= budget, in lexicographic order
inline std::vector<MultiIndex> multi_indices_up_to(int d, int budget) {
    std::vector<MultiIndex> out;
    if (budget < 0) return out;
    MultiIndex m(d);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == d) {
            out.push_back(m);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            m.set(i, v);
            rec(i + 1, left - v);
        }
        m.set(i, 0);
    };
    rec(0, budget);
    return out;
}

// all m <= cap componentwise
inline std::vector<MultiIndex> multi_indices_below(const MultiIndex& cap) {
    std::vector<MultiIndex> out;
    MultiIndex m(cap.dim());
    std::function<void(int)> rec = [&](int i) {
        if (i == cap.dim()) {
            out.push_back(m);
            return;
        }
        for (int v = 0; v <= cap[i]; ++v) {
            m.set(i, v);
            rec(i + 1);
        }
        m.set(i, 0);
    };
    rec(0);
    return out;
}

}  // namespace bphz

#endif
