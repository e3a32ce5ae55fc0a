#ifndef BPHZ_IO_JSON_IO_HPP
#define BPHZ_IO_JSON_IO_HPP

#include "../algebra/formal_sum.hpp"
#include "../diagrams/diagram.hpp"
#include "../diagrams/labels.hpp"
#include "../kernels/kernel.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bphz {

using json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KernelConfig {
    Rational a;
    std::optional<Rational> deg_inf;
    double epsilon = 0.1;
    bool large_scale = false;
};

// A diagram file: label table, diagram and optional kernel configuration.
struct Problem {
    std::string name;
    LabelTable labels;
    Diagram diagram;
    std::map<std::string, KernelConfig> kernels;

    KernelAssignment kernel_assignment(double epsilon_override = -1, double rho = -1) const {
        KernelAssignment K(labels.dimension());
        for (int l = 0; l < labels.size(); ++l) {
            KernelSpec s{labels[l].deg, 0.1, labels[l].deg_inf, false};
            if (auto it = kernels.find(labels[l].name); it != kernels.end()) {
                s.a = it->second.a;
                s.epsilon = it->second.epsilon;
                s.deg_inf = it->second.deg_inf;
                s.large_scale = it->second.large_scale;
            }
            if (epsilon_override >= 0) s.epsilon = epsilon_override;
            if (rho > 0) s.rho = rho;
            K.set(l, s);
        }
        return K;
    }
};

inline std::string deg_inf_string(const std::optional<Rational>& r) { return r ? format_rational(*r) : "-inf"; }

inline std::optional<Rational> parse_deg_inf(const std::string& s) {
    if (s == "-inf") return std::nullopt;
    return parse_rational(s);
}

inline json multi_index_json(const MultiIndex& m) {
    json a = json::array();
    for (int i = 0; i < m.dim(); ++i) a.push_back(m[i]);
    return a;
}

inline MultiIndex multi_index_from(const json& a, int d, const std::string& where) {
    if (!a.is_array() || static_cast<int>(a.size()) != d) throw ParseError(where + ": multiindex must have " + std::to_string(d) + " entries");
    MultiIndex m(d);
    for (int i = 0; i < d; ++i) {
        if (!a[i].is_number_integer() || a[i].get<int>() < 0) throw ParseError(where + ": multiindex entries must be nonnegative integers");
        m.set(i, a[i].get<int>());
    }
    return m;
}

// diagram body without labels; label names resolved through `labels`
inline json diagram_json(const Diagram& g, const LabelTable& labels) {
    json j;
    j["vertices"] = g.num_vertices();
    json edges = json::array();
    for (const auto& e : g.edges())
        edges.push_back({{"from", e.src}, {"to", e.dst}, {"label", labels[e.label].name}, {"deriv", multi_index_json(e.deriv)}});
    j["edges"] = edges;
    json legs = json::array();
    for (const auto& l : g.legs()) legs.push_back({{"vertex", l.vertex}, {"deriv", multi_index_json(l.deriv)}});
    j["legs"] = legs;
    if (!g.roots().empty()) j["roots"] = g.roots();
    json dec = json::array();
    for (int v = 0; v < g.num_vertices(); ++v)
        if (!g.decoration(v).is_zero()) dec.push_back({{"vertex", v}, {"n", multi_index_json(g.decoration(v))}});
    if (!dec.empty()) j["decorations"] = dec;
    return j;
}

inline Diagram diagram_from(const json& j, const LabelTable& labels) {
    const int d = labels.dimension();
    if (!j.contains("vertices") || !j["vertices"].is_number_integer()) throw ParseError("diagram: missing integer field 'vertices'");
    int n = j["vertices"].get<int>();
    if (n < 0) throw ParseError("diagram: negative vertex count");
    Diagram g(d, n);
    auto vertex = [&](const json& v, const std::string& where) {
        if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() >= n) throw ParseError(where + ": vertex out of range");
        return v.get<int>();
    };
    if (j.contains("edges")) {
        int i = 0;
        for (const auto& e : j["edges"]) {
            std::string where = "edge " + std::to_string(i++);
            if (!e.contains("label") || !e["label"].is_string()) throw ParseError(where + ": missing label");
            auto lab = labels.find(e["label"].get<std::string>());
            if (!lab) throw ParseError(where + ": unknown label '" + e["label"].get<std::string>() + "'");
            MultiIndex k = e.contains("deriv") ? multi_index_from(e["deriv"], d, where) : MultiIndex(d);
            g.add_edge(vertex(e.value("from", json()), where), vertex(e.value("to", json()), where), *lab, k);
        }
    }
    if (j.contains("legs")) {
        int i = 0;
        for (const auto& l : j["legs"]) {
            std::string where = "leg " + std::to_string(i++);
            MultiIndex k = l.contains("deriv") ? multi_index_from(l["deriv"], d, where) : MultiIndex(d);
            g.add_leg(vertex(l.value("vertex", json()), where), k);
        }
    }
    if (j.contains("root")) g.add_root(vertex(j["root"], "root"));
    if (j.contains("roots"))
        for (const auto& r : j["roots"]) g.add_root(vertex(r, "roots"));
    if (j.contains("decorations")) {
        for (const auto& dcr : j["decorations"]) {
            int v = vertex(dcr.value("vertex", json()), "decoration");
            g.set_decoration(v, multi_index_from(dcr.value("n", json()), d, "decoration"));
        }
    }
    return g;
}

inline json labels_json(const LabelTable& labels) {
    json a = json::array();
    for (int l = 0; l < labels.size(); ++l)
        a.push_back({{"name", labels[l].name}, {"deg", format_rational(labels[l].deg)}, {"deg_inf", deg_inf_string(labels[l].deg_inf)}});
    return a;
}

inline LabelTable labels_from(const json& j) {
    if (!j.contains("dimension") || !j["dimension"].is_number_integer()) throw ParseError("missing integer field 'dimension'");
    LabelTable t(j["dimension"].get<int>());
    if (!j.contains("labels")) return t;
    int i = 0;
    for (const auto& l : j["labels"]) {
        std::string where = "label " + std::to_string(i++);
        if (!l.contains("name") || !l.contains("deg")) throw ParseError(where + ": needs name and deg");
        if (!l["deg"].is_string()) throw ParseError(where + ": deg must be an exact rational string");
        try {
            t.add(l["name"].get<std::string>(), parse_rational(l["deg"].get<std::string>()),
                  parse_deg_inf(l.value("deg_inf", std::string("-inf"))));
        } catch (const std::invalid_argument& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    return t;
}

inline json problem_json(const Problem& p) {
    json j;
    if (!p.name.empty()) j["name"] = p.name;
    j["dimension"] = p.labels.dimension();
    j["labels"] = labels_json(p.labels);
    json body = diagram_json(p.diagram, p.labels);
    for (auto& [k, v] : body.items()) j[k] = v;
    if (!p.kernels.empty()) {
        json ks = json::array();
        for (const auto& [name, k] : p.kernels)
            ks.push_back({{"label", name}, {"a", format_rational(k.a)}, {"deg_inf", deg_inf_string(k.deg_inf)},
                          {"epsilon", k.epsilon}, {"large_scale", k.large_scale}});
        j["kernels"] = ks;
    }
    return j;
}

inline Problem problem_from(const json& j) {
    Problem p;
    p.name = j.value("name", std::string());
    p.labels = labels_from(j);
    p.diagram = diagram_from(j, p.labels);
    if (j.contains("kernels")) {
        for (const auto& k : j["kernels"]) {
            std::string name = k.value("label", std::string());
            if (!p.labels.find(name)) throw ParseError("kernel for unknown label '" + name + "'");
            KernelConfig c;
            c.a = parse_rational(k.value("a", std::string("0")));
            c.deg_inf = parse_deg_inf(k.value("deg_inf", std::string("-inf")));
            c.epsilon = k.value("epsilon", 0.1);
            c.large_scale = k.value("large_scale", false);
            p.kernels[name] = c;
        }
    }
    return p;
}

// line/column from a byte offset
inline std::string position_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline Problem parse_problem(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(position_of(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
    }
    try {
        return problem_from(j);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

inline Problem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_problem(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline std::string serialize_problem(const Problem& p) { return problem_json(p).dump(2) + "\n"; }

inline json tensor_sum_json(const TensorSum& s, const LabelTable& labels) {
    json a = json::array();
    for (const auto& [k, t] : s)
        a.push_back({{"coef", format_rational(t.coef)}, {"vacuum", diagram_json(t.left, labels)}, {"diagram", diagram_json(t.right, labels)}});
    return a;
}

inline TensorSum tensor_sum_from(const json& a, const LabelTable& labels) {
    TensorSum s;
    for (const auto& t : a) s.add(diagram_from(t["vacuum"], labels), diagram_from(t["diagram"], labels), parse_rational(t["coef"].get<std::string>()));
    return s;
}

inline json formal_sum_json(const FormalSum& s, const LabelTable& labels) {
    json a = json::array();
    for (const auto& [k, t] : s) a.push_back({{"coef", format_rational(t.coef)}, {"diagram", diagram_json(t.diagram, labels)}});
    return a;
}

// Compact one-line form: "[n | src->dst:label^k ... | legs v^k ... | roots ... | dec v:n ...]", "1" when empty.
inline std::string diagram_text(const Diagram& g, const LabelTable& labels) {
    if (g.empty()) return "1";
    std::string s = "[" + std::to_string(g.num_vertices()) + " |";
    for (const auto& e : g.edges()) {
        s += " " + std::to_string(e.src) + "->" + std::to_string(e.dst) + ":" + labels[e.label].name;
        if (!e.deriv.is_zero()) s += "^" + e.deriv.str();
    }
    if (g.num_legs()) {
        s += " | legs";
        for (const auto& l : g.legs()) {
            s += " " + std::to_string(l.vertex);
            if (!l.deriv.is_zero()) s += "^" + l.deriv.str();
        }
    }
    if (!g.roots().empty()) {
        s += " | roots";
        for (int r : g.roots()) s += " " + std::to_string(r);
    }
    bool dec = false;
    for (int v = 0; v < g.num_vertices(); ++v)
        if (!g.decoration(v).is_zero()) {
            if (!dec) s += " | dec";
            dec = true;
            s += " " + std::to_string(v) + ":" + g.decoration(v).str();
        }
    return s + "]";
}

inline std::string coef_prefix(const Rational& c) {
    if (c == Rational(1)) return "";
    if (c == Rational(-1)) return "-";
    return format_rational(c) + " ";
}

inline std::string tensor_sum_text(const TensorSum& s, const LabelTable& labels) {
    std::string out;
    for (const auto& [k, t] : s)
        out += coef_prefix(t.coef) + diagram_text(t.left, labels) + " ⊗ " + diagram_text(t.right, labels) + "\n";
    return out.empty() ? "0\n" : out;
}

inline std::string formal_sum_text(const FormalSum& s, const LabelTable& labels) {
    std::string out;
    for (const auto& [k, t] : s) out += coef_prefix(t.coef) + diagram_text(t.diagram, labels) + "\n";
    return out.empty() ? "0\n" : out;
}

}  // namespace bphz

#endif
