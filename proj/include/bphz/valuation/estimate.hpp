#ifndef BPHZ_VALUATION_ESTIMATE_HPP
#define BPHZ_VALUATION_ESTIMATE_HPP

#include <cmath>
#include <ostream>

namespace bphz {

// A value with an absolute error bound; arithmetic propagates first-order bounds.
struct Estimate {
    double value = 0;
    double error = 0;

    Estimate() = default;
    explicit Estimate(double v, double e = 0) : value(v), error(e) {}

    Estimate& operator+=(const Estimate& o) {
        value += o.value;
        error += o.error;
        return *this;
    }
    Estimate& operator-=(const Estimate& o) {
        value -= o.value;
        error += o.error;
        return *this;
    }
    Estimate& operator*=(const Estimate& o) {
        double e = std::abs(value) * o.error + std::abs(o.value) * error + error * o.error;
        value *= o.value;
        error = e;
        return *this;
    }
    friend Estimate operator+(Estimate a, const Estimate& b) { return a += b; }
    friend Estimate operator-(Estimate a, const Estimate& b) { return a -= b; }
    friend Estimate operator*(Estimate a, const Estimate& b) { return a *= b; }
    friend Estimate operator-(Estimate a) {
        a.value = -a.value;
        return a;
    }
    friend std::ostream& operator<<(std::ostream& os, const Estimate& e) {
        return os << e.value << " +- " << e.error;
    }
};

}  // namespace bphz

#endif
