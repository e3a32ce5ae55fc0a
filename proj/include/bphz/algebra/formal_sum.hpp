#ifndef BPHZ_ALGEBRA_FORMAL_SUM_HPP
#define BPHZ_ALGEBRA_FORMAL_SUM_HPP

#include "../diagrams/canonical.hpp"
#include "../diagrams/diagram.hpp"
#include "../diagrams/rational.hpp"

#include <map>
#include <utility>

namespace bphz {

// Linear combination of diagrams keyed by canonical code. Zero terms are dropped.
template <class Coef>
class BasicFormalSum {
public:
    struct Term {
        Diagram diagram;
        Coef coef;
    };
    using Map = std::map<CanonicalCode, Term>;

    BasicFormalSum() = default;
    static BasicFormalSum single(const Diagram& g, Coef c = Coef(1)) {
        BasicFormalSum s;
        s.add(g, c);
        return s;
    }
    // the empty diagram in dimension d
    static BasicFormalSum unit(int d) { return single(Diagram(d)); }

    void add(const Diagram& g, const Coef& c) {
        if (c == Coef(0)) return;
        auto cf = canonicalize(g);
        add_canonical(std::move(cf.code), std::move(cf.diagram), c);
    }
    void add_canonical(CanonicalCode code, Diagram g, const Coef& c) {
        auto it = terms_.find(code);
        if (it == terms_.end()) {
            terms_.emplace(std::move(code), Term{std::move(g), c});
            return;
        }
        it->second.coef += c;
        if (it->second.coef == Coef(0)) terms_.erase(it);
    }

    BasicFormalSum& operator+=(const BasicFormalSum& o) {
        for (const auto& [k, t] : o.terms_) add_canonical(k, t.diagram, t.coef);
        return *this;
    }
    BasicFormalSum& operator-=(const BasicFormalSum& o) {
        for (const auto& [k, t] : o.terms_) add_canonical(k, t.diagram, -t.coef);
        return *this;
    }
    BasicFormalSum& operator*=(const Coef& c) {
        if (c == Coef(0)) {
            terms_.clear();
            return *this;
        }
        for (auto& [k, t] : terms_) t.coef *= c;
        return *this;
    }
    friend BasicFormalSum operator+(BasicFormalSum a, const BasicFormalSum& b) { return a += b; }
    friend BasicFormalSum operator-(BasicFormalSum a, const BasicFormalSum& b) { return a -= b; }
    friend BasicFormalSum operator*(BasicFormalSum a, const Coef& c) { return a *= c; }
    friend BasicFormalSum operator*(const Coef& c, BasicFormalSum a) { return a *= c; }

    // product by disjoint union
    friend BasicFormalSum operator*(const BasicFormalSum& a, const BasicFormalSum& b) {
        BasicFormalSum out;
        for (const auto& [ka, ta] : a.terms_)
            for (const auto& [kb, tb] : b.terms_) out.add(disjoint_union(ta.diagram, tb.diagram), ta.coef * tb.coef);
        return out;
    }

    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const Map& terms() const { return terms_; }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    Coef coefficient(const Diagram& g) const {
        auto it = terms_.find(canonicalize(g).code);
        return it == terms_.end() ? Coef(0) : it->second.coef;
    }

    friend bool operator==(const BasicFormalSum& a, const BasicFormalSum& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        auto i = a.terms_.begin();
        auto j = b.terms_.begin();
        for (; i != a.terms_.end(); ++i, ++j)
            if (i->first != j->first || !(i->second.coef == j->second.coef)) return false;
        return true;
    }

private:
    Map terms_;
};

using FormalSum = BasicFormalSum<Rational>;
using RealFormalSum = BasicFormalSum<double>;

// Linear combination of (vacuum part) ⊗ (diagram part).
template <class Coef>
class BasicTensorSum {
public:
    struct Term {
        Diagram left;
        Diagram right;
        Coef coef;
    };
    using Key = std::pair<CanonicalCode, CanonicalCode>;
    using Map = std::map<Key, Term>;

    void add(const Diagram& left, const Diagram& right, const Coef& c) {
        if (c == Coef(0)) return;
        auto l = canonicalize(left);
        auto r = canonicalize(right);
        Key k{std::move(l.code), std::move(r.code)};
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(std::move(k), Term{std::move(l.diagram), std::move(r.diagram), c});
            return;
        }
        it->second.coef += c;
        if (it->second.coef == Coef(0)) terms_.erase(it);
    }
    BasicTensorSum& operator+=(const BasicTensorSum& o) {
        for (const auto& [k, t] : o.terms_) add(t.left, t.right, t.coef);
        return *this;
    }
    BasicTensorSum& operator-=(const BasicTensorSum& o) {
        for (const auto& [k, t] : o.terms_) add(t.left, t.right, -t.coef);
        return *this;
    }
    BasicTensorSum& operator*=(const Coef& c) {
        if (c == Coef(0)) terms_.clear();
        for (auto& [k, t] : terms_) t.coef *= c;
        return *this;
    }
    friend BasicTensorSum operator+(BasicTensorSum a, const BasicTensorSum& b) { return a += b; }
    friend BasicTensorSum operator-(BasicTensorSum a, const BasicTensorSum& b) { return a -= b; }

    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const Map& terms() const { return terms_; }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    Coef coefficient(const Diagram& left, const Diagram& right) const {
        auto it = terms_.find(Key{canonicalize(left).code, canonicalize(right).code});
        return it == terms_.end() ? Coef(0) : it->second.coef;
    }

    friend bool operator==(const BasicTensorSum& a, const BasicTensorSum& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        auto i = a.terms_.begin();
        auto j = b.terms_.begin();
        for (; i != a.terms_.end(); ++i, ++j)
            if (i->first != j->first || !(i->second.coef == j->second.coef)) return false;
        return true;
    }

private:
    Map terms_;
};

using TensorSum = BasicTensorSum<Rational>;

}  // namespace bphz

#endif
