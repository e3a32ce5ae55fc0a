#ifndef BPHZ_ALGEBRA_CHARACTER_HPP
#define BPHZ_ALGEBRA_CHARACTER_HPP

#include "antipode.hpp"
#include "coaction.hpp"
#include "formal_sum.hpp"

#include <functional>
#include <map>
#include <memory>

namespace bphz {

template <class T>
T coef_as(const Rational& r) {
    if constexpr (std::is_same_v<T, Rational>)
        return r;
    else
        return static_cast<T>(to_double(r));
}

// Multiplicative functional on vacuum diagrams, given by its values on
// connected ones. Values are cached by canonical code.
template <class T>
class Character {
public:
    using Fn = std::function<T(const Diagram&)>;

    Character() = default;
    explicit Character(Fn on_connected)
        : fn_(std::make_shared<Fn>(std::move(on_connected))), cache_(std::make_shared<std::map<CanonicalCode, T>>()) {}

    // the counit 1*: zero on every nonempty connected diagram
    static Character counit() {
        return Character([](const Diagram&) { return T(0); });
    }

    T connected(const Diagram& g) const {
        auto code = canonicalize(g).code;
        if (auto it = cache_->find(code); it != cache_->end()) return it->second;
        T v = (*fn_)(g);
        cache_->emplace(std::move(code), v);
        return v;
    }

    T operator()(const Diagram& g) const {
        T acc(1);
        for (const auto& c : split_components(g)) acc *= connected(c);
        return acc;
    }

    template <class C>
    T operator()(const BasicFormalSum<C>& s) const {
        T acc(0);
        for (const auto& [k, t] : s) {
            if constexpr (std::is_same_v<C, Rational>)
                acc += coef_as<T>(t.coef) * (*this)(t.diagram);
            else
                acc += static_cast<T>(t.coef) * (*this)(t.diagram);
        }
        return acc;
    }

private:
    std::shared_ptr<Fn> fn_;
    std::shared_ptr<std::map<CanonicalCode, T>> cache_;
};

// (f∘g)(τ) = (f⊗g)Δ⁻τ with both factors projected to the divergent sector
template <class T>
Character<T> char_product(const Character<T>& f, const Character<T>& g, const LabelTable& labels) {
    return Character<T>([f, g, &labels](const Diagram& tau) {
        T acc(0);
        for (const auto& [k, t] : coproduct_minus(tau, labels, true))
            acc += coef_as<T>(t.coef) * f(t.left) * g(t.right);
        return acc;
    });
}

// g⁻¹ = g𝒜
template <class T>
Character<T> char_inverse(const Character<T>& g, const LabelTable& labels) {
    auto engine = std::make_shared<AntipodeEngine>(labels);
    return Character<T>([g, engine](const Diagram& tau) { return g(engine->plain(tau)); });
}

// M^g Γ = (g⊗id)ΔΓ
template <class T>
BasicFormalSum<T> renorm_map(const Character<T>& g, const Diagram& gamma, const LabelTable& labels) {
    BasicFormalSum<T> out;
    for (const auto& [k, t] : coaction(gamma, labels)) out.add(t.right, coef_as<T>(t.coef) * g(t.left));
    return out;
}

// M^g applied termwise to a formal sum
template <class T, class C>
BasicFormalSum<T> renorm_map(const Character<T>& g, const BasicFormalSum<C>& s, const LabelTable& labels) {
    BasicFormalSum<T> out;
    for (const auto& [k, t] : s) {
        T c;
        if constexpr (std::is_same_v<C, Rational>)
            c = coef_as<T>(t.coef);
        else
            c = static_cast<T>(t.coef);
        auto m = renorm_map(g, t.diagram, labels);
        m *= c;
        out += m;
    }
    return out;
}

}  // namespace bphz

#endif
