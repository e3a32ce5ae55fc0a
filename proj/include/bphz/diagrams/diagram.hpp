#ifndef BPHZ_DIAGRAMS_DIAGRAM_HPP
#define BPHZ_DIAGRAMS_DIAGRAM_HPP

#include "labels.hpp"
#include "multi_index.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bphz {

struct Edge {
    int src;
    int dst;
    int label;
    MultiIndex deriv;
    friend bool operator==(const Edge&, const Edge&) = default;
};

// a leg attached to an internal vertex, carrying the label delta^(deriv)
struct Leg {
    int vertex;
    MultiIndex deriv;
    friend bool operator==(const Leg&, const Leg&) = default;
};

class DiagramError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Directed multigraph with ordered legs. Vertex order is the construction index.
// Vacuum mode: no legs, one distinguished vertex (root) per component, optional
// node decorations.
class Diagram {
public:
    Diagram() = default;
    explicit Diagram(int dim, int vertices = 0) : dim_(dim) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
        for (int i = 0; i < vertices; ++i) add_vertex();
    }

    int dim() const { return dim_; }
    int num_vertices() const { return static_cast<int>(decoration_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    int num_legs() const { return static_cast<int>(legs_.size()); }
    bool empty() const { return num_vertices() == 0; }

    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Leg>& legs() const { return legs_; }
    const Edge& edge(int i) const { return edges_.at(i); }
    const Leg& leg(int i) const { return legs_.at(i); }
    const MultiIndex& decoration(int v) const { return decoration_.at(v); }
    const std::vector<int>& roots() const { return roots_; }
    bool is_root(int v) const { return std::binary_search(roots_.begin(), roots_.end(), v); }
    bool vacuum_mode() const { return legs_.empty() && !roots_.empty(); }

    int add_vertex() {
        decoration_.emplace_back(dim_);
        return num_vertices() - 1;
    }
    int add_edge(int src, int dst, int label, MultiIndex deriv) {
        check_vertex(src);
        check_vertex(dst);
        check_dim(deriv);
        edges_.push_back({src, dst, label, deriv});
        return num_edges() - 1;
    }
    int add_edge(int src, int dst, int label) { return add_edge(src, dst, label, MultiIndex(dim_)); }
    int add_leg(int vertex, MultiIndex deriv) {
        check_vertex(vertex);
        check_dim(deriv);
        legs_.push_back({vertex, deriv});
        return num_legs() - 1;
    }
    int add_leg(int vertex) { return add_leg(vertex, MultiIndex(dim_)); }
    void add_root(int v) {
        check_vertex(v);
        auto it = std::lower_bound(roots_.begin(), roots_.end(), v);
        if (it == roots_.end() || *it != v) roots_.insert(it, v);
    }
    void clear_roots() { roots_.clear(); }
    void set_decoration(int v, MultiIndex n) {
        check_vertex(v);
        check_dim(n);
        decoration_[v] = n;
    }
    Edge& mutable_edge(int i) { return edges_.at(i); }
    Leg& mutable_leg(int i) { return legs_.at(i); }
    std::vector<Leg>& mutable_legs() { return legs_; }

    // component index per vertex, numbered by lowest vertex
    std::vector<int> components() const {
        std::vector<int> parent(num_vertices());
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& e : edges_) {
            int a = find(e.src), b = find(e.dst);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
        std::vector<int> comp(num_vertices(), -1);
        int next = 0;
        for (int v = 0; v < num_vertices(); ++v) {
            int r = find(v);
            if (comp[r] < 0) comp[r] = next++;
            comp[v] = comp[r];
        }
        return comp;
    }
    int num_components() const {
        auto c = components();
        return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1;
    }

    friend bool operator==(const Diagram&, const Diagram&) = default;

private:
    void check_vertex(int v) const {
        if (v < 0 || v >= num_vertices()) throw std::out_of_range("vertex index out of range");
    }
    void check_dim(const MultiIndex& m) const {
        if (m.dim() != dim_) throw std::invalid_argument("multiindex dimension mismatch");
    }

    int dim_ = 1;
    std::vector<MultiIndex> decoration_;
    std::vector<Edge> edges_;
    std::vector<Leg> legs_;
    std::vector<int> roots_;
};

// Legs of b are renumbered after those of a; vertices of b follow those of a.
inline Diagram disjoint_union(const Diagram& a, const Diagram& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
    Diagram g = a;
    int off = a.num_vertices();
    for (int v = 0; v < b.num_vertices(); ++v) {
        g.add_vertex();
        g.set_decoration(off + v, b.decoration(v));
    }
    for (const auto& e : b.edges()) g.add_edge(e.src + off, e.dst + off, e.label, e.deriv);
    for (const auto& l : b.legs()) g.add_leg(l.vertex + off, l.deriv);
    for (int r : b.roots()) g.add_root(r + off);
    return g;
}

// Empty vector means valid.
inline std::vector<std::string> validate(const Diagram& g, const LabelTable& labels) {
    std::vector<std::string> errors;
    if (g.dim() != labels.dimension()) errors.push_back("DimensionMismatch");
    for (int i = 0; i < g.num_edges(); ++i)
        if (!labels.contains(g.edge(i).label)) errors.push_back("BadLabel(edge " + std::to_string(i) + ")");
    bool vacuum = g.vacuum_mode();
    if (!vacuum) {
        if (!g.roots().empty()) errors.push_back("DistinguishedVertexWithLegs");
        for (int v = 0; v < g.num_vertices(); ++v)
            if (!g.decoration(v).is_zero()) {
                errors.push_back("DecorationOutsideVacuumMode");
                break;
            }
    }
    auto comp = g.components();
    int nc = g.num_components();
    std::vector<int> legs(nc, 0), roots(nc, 0);
    for (const auto& l : g.legs()) legs[comp[l.vertex]]++;
    for (int r : g.roots()) roots[comp[r]]++;
    for (int c = 0; c < nc; ++c) {
        if (vacuum) {
            if (roots[c] != 1) errors.push_back("MissingLeg(component " + std::to_string(c) + ")");
        } else if (legs[c] == 0) {
            errors.push_back("MissingLeg(component " + std::to_string(c) + ")");
        }
    }
    return errors;
}

inline void validate_or_throw(const Diagram& g, const LabelTable& labels) {
    auto errs = validate(g, labels);
    if (!errs.empty()) throw DiagramError(errs.front());
}

// Degree of the whole diagram. Vacuum diagrams: additive over components.
inline Rational degree(const Diagram& g, const LabelTable& labels) {
    if (g.empty()) throw DiagramError("EmptyGraph");
    Rational s(0);
    for (const auto& e : g.edges()) s += labels.deg(e.label, e.deriv);
    for (int v = 0; v < g.num_vertices(); ++v) s += g.decoration(v).abs();
    int blocks = g.vacuum_mode() ? g.num_components() : 1;
    s += g.dim() * (g.num_vertices() - blocks);
    return s;
}

}  // namespace bphz

#endif
