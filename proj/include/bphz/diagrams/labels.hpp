#ifndef BPHZ_DIAGRAMS_LABELS_HPP
#define BPHZ_DIAGRAMS_LABELS_HPP

#include "multi_index.hpp"
#include "rational.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bphz {

// deg_inf == nullopt encodes -infinity
struct BaseLabel {
    std::string name;
    Rational deg;
    std::optional<Rational> deg_inf;
};

class LabelTable {
public:
    explicit LabelTable(int dimension = 1) : d_(dimension) {
        if (d_ < 1 || d_ > kMaxDim) throw std::invalid_argument("dimension out of range");
    }

    int dimension() const { return d_; }
    int size() const { return static_cast<int>(labels_.size()); }

    int add(std::string name, Rational deg, std::optional<Rational> deg_inf = std::nullopt) {
        if (name == "delta") throw std::invalid_argument("'delta' is reserved for legs");
        if (find(name)) throw std::invalid_argument("duplicate label " + name);
        labels_.push_back({std::move(name), std::move(deg), std::move(deg_inf)});
        return size() - 1;
    }

    const BaseLabel& operator[](int i) const { return labels_.at(i); }
    bool contains(int i) const { return i >= 0 && i < size(); }

    std::optional<int> find(const std::string& name) const {
        for (int i = 0; i < size(); ++i)
            if (labels_[i].name == name) return i;
        return std::nullopt;
    }

    // degree of the derived label t^(k)
    Rational deg(int label, const MultiIndex& k) const { return labels_.at(label).deg - k.abs(); }
    std::optional<Rational> deg_inf(int label) const { return labels_.at(label).deg_inf; }

    Rational delta_deg(const MultiIndex& k) const { return Rational(-d_ - k.abs()); }

    friend bool operator==(const LabelTable& a, const LabelTable& b) {
        if (a.d_ != b.d_ || a.labels_.size() != b.labels_.size()) return false;
        for (std::size_t i = 0; i < a.labels_.size(); ++i) {
            const auto& x = a.labels_[i];
            const auto& y = b.labels_[i];
            if (x.name != y.name || x.deg != y.deg || x.deg_inf != y.deg_inf) return false;
        }
        return true;
    }

private:
    int d_;
    std::vector<BaseLabel> labels_;
};

}  // namespace bphz

#endif
