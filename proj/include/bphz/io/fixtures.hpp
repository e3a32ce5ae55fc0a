#ifndef BPHZ_IO_FIXTURES_HPP
#define BPHZ_IO_FIXTURES_HPP

#include "json_io.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace bphz {

struct UnknownFixture : std::runtime_error {
    explicit UnknownFixture(const std::string& n) : std::runtime_error("unknown fixture '" + n + "'") {}
};

namespace fixtures {

inline Rational q(std::int64_t p, std::int64_t d = 1) { return make_rational(p, d); }

// single edge 0 -> 1, legs at both ends
inline Problem e1(const std::string& name, Rational deg) {
    Problem p;
    p.name = name;
    p.labels = LabelTable(1);
    int t = p.labels.add("t", deg);
    p.diagram = Diagram(1, 2);
    p.diagram.add_edge(0, 1, t);
    p.diagram.add_leg(0);
    p.diagram.add_leg(1);
    return p;
}

inline LabelTable triangle_labels() {
    LabelTable l(1);
    l.add("t1", q(-1, 3));
    l.add("t2", q(-4, 3));
    return l;
}

inline Diagram triangle_body() {
    Diagram g(1, 3);
    g.add_edge(0, 1, 0);
    g.add_edge(1, 2, 1);
    g.add_edge(2, 0, 0);
    return g;
}

inline Problem tri() {
    Problem p{"TRI", triangle_labels(), triangle_body(), {}};
    p.diagram.add_leg(0);
    return p;
}

// triangle with legs on both ends of the t2 edge
inline Problem tri2() {
    Problem p{"TRI2", triangle_labels(), triangle_body(), {}};
    p.diagram.add_leg(1);
    p.diagram.add_leg(2);
    return p;
}

inline Problem par() {
    Problem p;
    p.name = "PAR";
    p.labels = LabelTable(1);
    int t = p.labels.add("t", q(-5, 4));
    p.diagram = Diagram(1, 2);
    p.diagram.add_edge(0, 1, t);
    p.diagram.add_edge(0, 1, t);
    p.diagram.add_leg(0);
    p.diagram.add_leg(1);
    return p;
}

// 0 -> 1 -> 2 with legs at the ends; equals E1 ⋆ E1
inline Problem ch2(const std::string& name, Rational deg, std::optional<Rational> deg_inf, bool large_scale) {
    Problem p;
    p.name = name;
    p.labels = LabelTable(1);
    int t1 = p.labels.add("t1", deg, deg_inf);
    int t2 = p.labels.add("t2", deg, deg_inf);
    p.diagram = Diagram(1, 3);
    p.diagram.add_edge(0, 1, t1);
    p.diagram.add_edge(1, 2, t2);
    p.diagram.add_leg(0);
    p.diagram.add_leg(2);
    if (large_scale)
        for (const char* n : {"t1", "t2"}) p.kernels[n] = KernelConfig{deg, deg_inf, 0.1, true};
    return p;
}

// E1 with a self-loop at vertex 1
inline Problem sl() {
    Problem p = e1("SL", q(-3, 2));
    int s = p.labels.add("s", q(-1, 2));
    p.diagram.add_edge(1, 1, s);
    return p;
}

// E1 with a two-edge bubble hanging off vertex 1; the bubble has positive degree
inline Problem gsl() {
    Problem p = e1("GSL", q(-3, 2));
    int b = p.labels.add("b", q(-1, 4));
    int v = p.diagram.add_vertex();
    p.diagram.add_edge(1, v, b);
    p.diagram.add_edge(v, 1, b);
    return p;
}

// E1 after collapsing the bubble of GSL
inline Problem gsl0() {
    Problem p = e1("GSL0", q(-3, 2));
    p.labels.add("b", q(-1, 4));
    return p;
}

// Diagram of the subgraph figure: vertices left, upper-left, upper-right,
// right, centre, down.
inline Problem fig2() {
    Problem p;
    p.name = "FIG2";
    p.labels = LabelTable(1);
    int t = p.labels.add("t", q(-1, 4));
    p.diagram = Diagram(1, 6);
    auto& g = p.diagram;
    g.add_edge(0, 1, t);
    g.add_edge(1, 2, t);
    g.add_edge(2, 3, t);
    g.add_edge(0, 4, t);
    g.add_edge(1, 4, t);
    g.add_edge(0, 5, t);
    g.add_edge(4, 5, t);
    g.add_edge(5, 3, t);
    g.add_leg(0);
    g.add_leg(3);
    g.add_leg(5);
    return p;
}

inline Problem vacuum(const std::string& name, Diagram g) {
    g.add_root(0);
    return Problem{name, triangle_labels(), std::move(g), {}};
}

// t2 edge
inline Problem line() {
    Diagram g(1, 2);
    g.add_edge(0, 1, 1);
    return vacuum("line", std::move(g));
}

// two t1 edges closing a loop
inline Problem bareloop() {
    Diagram g(1, 2);
    g.add_edge(0, 1, 0);
    g.add_edge(1, 0, 0);
    return vacuum("bareloop", std::move(g));
}

inline Problem baretriang() { return vacuum("baretriang", triangle_body()); }

inline const std::map<std::string, std::function<Problem()>>& registry() {
    static const std::map<std::string, std::function<Problem()>> r = {
        {"E1", [] { return e1("E1", q(-3, 2)); }},
        {"E1_m1", [] { return e1("E1_m1", q(-1)); }},
        {"E1_m5_4", [] { return e1("E1_m5_4", q(-5, 4)); }},
        {"E1_m5_2", [] { return e1("E1_m5_2", q(-5, 2)); }},
        {"E1_pos", [] { return e1("E1_pos", q(-1, 2)); }},
        {"CH2", [] { return ch2("CH2", q(-3, 2), q(-3, 2), true); }},
        {"CH2_weak", [] { return ch2("CH2_weak", q(-3, 2), q(-1, 2), true); }},
        {"CH2_pos", [] { return ch2("CH2_pos", q(-1, 2), std::nullopt, false); }},
        {"TRI", tri},
        {"TRI2", tri2},
        {"PAR", par},
        {"SL", sl},
        {"GSL", gsl},
        {"GSL0", gsl0},
        {"FIG2", fig2},
        {"line", line},
        {"bareloop", bareloop},
        {"baretriang", baretriang},
    };
    return r;
}

inline std::vector<std::string> names() {
    std::vector<std::string> n;
    for (const auto& [k, v] : registry()) n.push_back(k);
    return n;
}

inline Problem build(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end()) throw UnknownFixture(name);
    return it->second();
}

}  // namespace fixtures
}  // namespace bphz

#endif
