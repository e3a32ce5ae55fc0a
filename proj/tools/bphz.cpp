#include <bphz/io/fixtures.hpp>
#include <bphz/multiscale/hepp.hpp>
#include <bphz/valuation/studies.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

using namespace bphz;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::vector<std::string> inputs;
    std::string command;
    std::string what = "coaction";
    std::vector<double> epsilons;
    double tol = 1e-9;
    double rho = 0;
    std::string out;
    unsigned seed = 1;
    std::string route = "twisted";
    int configs = 200;
};

// a path to a diagram file, or the name of a built-in fixture
Problem load_input(const std::string& in) {
    if (fs::exists(in)) return load_problem(in);
    return fixtures::build(in);
}

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::string scale_str(int s) {
    if (s == INT_MIN) return "-inf";
    if (s == INT_MAX) return "inf";
    return std::to_string(s);
}

std::string edge_list(const Subgraph& s) {
    std::string out;
    for (int e : mask_to_list(s.edges)) out += (out.empty() ? "" : " ") + std::to_string(e);
    return out;
}

// default test function: one bump of radius 0.6 per leg, centres spread along the first axis
TestFunctionPtr default_phi(const Diagram& g) {
    std::vector<Bump> b;
    for (int i = 0; i < g.num_legs(); ++i) {
        std::vector<double> c(g.dim(), 0.0);
        c[0] = 0.15 * i;
        b.emplace_back(c, 0.6);
    }
    return std::make_shared<ProductBump>(b);
}

std::vector<Route> routes_of(const std::string& r) {
    if (r == "twisted") return {Route::TwistedAntipode};
    if (r == "forest") return {Route::ForestFormula};
    if (r == "full") return {Route::FullForest};
    if (r == "all") return {Route::TwistedAntipode, Route::ForestFormula, Route::FullForest};
    throw CLI::ValidationError("--route", "expected twisted, forest, full or all");
}

QuadratureSpec quadrature(const RunConfig& c) {
    QuadratureSpec q;
    q.rel_tol = c.tol;
    return q;
}

class Output {
public:
    Output(const RunConfig& c, const std::string& file) {
        if (!c.out.empty()) {
            fs::create_directories(c.out);
            file_.open(fs::path(c.out) / file);
            if (!file_) throw std::runtime_error("cannot write " + (fs::path(c.out) / file).string());
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

int cmd_analyze(const RunConfig& c) {
    Output out(c, "analyze.csv");
    std::unique_ptr<Output> detail;
    if (!c.out.empty()) detail = std::make_unique<Output>(c, "analyze_subgraphs.csv");
    out.os() << "fixture,vertices,edges,legs,degree,divergent_subgraphs,forests,full_forests,weinberg,in_H_plus\n";
    if (detail) detail->os() << "fixture,subgraph,degree,full,divergent\n";
    for (const auto& in : c.inputs) {
        auto P = load_input(in);
        const auto& g = P.diagram;
        std::string name = P.name.empty() ? in : P.name;
        std::string deg = "";
        if (g.num_edges() > 0) deg = format_rational(subgraph_degree(g, P.labels, Subgraph{all_edges(g)}));
        out.os() << name << "," << g.num_vertices() << "," << g.num_edges() << "," << g.num_legs() << "," << deg << ","
                 << connected_divergent_subgraphs(g, P.labels).size() << "," << forests(g, P.labels, false).size() << ","
                 << forests(g, P.labels, true).size() << "," << (weinberg_holds(g, P.labels) ? "pass" : "fail") << ","
                 << (in_H_plus(g, P.labels) ? "true" : "false") << "\n";
        if (detail)
            for (const auto& s : connected_subgraphs(g)) {
                Rational d = subgraph_degree(g, P.labels, s);
                detail->os() << name << "," << edge_list(s) << "," << format_rational(d) << ","
                             << (is_full(g, s) ? "true" : "false") << "," << (d <= 0 ? "true" : "false") << "\n";
            }
    }
    return 0;
}

int cmd_expand(const RunConfig& c) {
    Output out(c, "expand_" + c.what + ".txt");
    for (const auto& in : c.inputs) {
        auto P = load_input(in);
        out.os() << "# " << (P.name.empty() ? in : P.name) << " " << c.what << "\n";
        if (c.what == "coaction")
            out.os() << tensor_sum_text(coaction(P.diagram, P.labels), P.labels);
        else if (c.what == "antipode")
            out.os() << formal_sum_text(twisted_antipode(P.diagram, P.labels), P.labels);
        else if (c.what == "forest-formula")
            out.os() << tensor_sum_text(forest_formula(P.diagram, P.labels), P.labels);
        else
            throw CLI::ValidationError("--what", "expected coaction, antipode or forest-formula");
    }
    return 0;
}

int cmd_evaluate(const RunConfig& c) {
    Output out(c, "evaluate.csv");
    out.os() << "fixture,route,epsilon,value,error,wall_ms\n";
    auto eps_list = c.epsilons.empty() ? std::vector<double>{0.1} : c.epsilons;
    auto routes = routes_of(c.route);
    bool ok = true;
    for (const auto& in : c.inputs) {
        auto P = load_input(in);
        std::string name = P.name.empty() ? in : P.name;
        auto phi = default_phi(P.diagram);
        for (double eps : eps_list) {
            auto K = c.rho > 0 ? P.kernel_assignment(eps, c.rho) : P.kernel_assignment(eps).small_scale_only();
            Evaluator ev(P.labels, K, quadrature(c));
            auto row = [&](const std::string& route, double value, double error, double ms) {
                out.os() << name << "," << route << "," << num(eps) << "," << num(value) << "," << num(error) << ","
                         << num(ms) << "\n";
            };
            auto t0 = std::chrono::steady_clock::now();
            auto ms = [&] {
                return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            };
            if (P.diagram.num_legs() == 0 && !P.diagram.empty()) {
                auto v = ev.vacuum(P.diagram);
                row("vacuum", v.value, v.error, ms());
                continue;
            }
            if (c.rho > 0) {
                auto r = ev.large_scale(P.diagram, phi);
                row("large-scale", r.value, r.error_estimate, ms());
                continue;
            }
            std::vector<EvaluationReport> reps;
            for (Route r : routes) {
                t0 = std::chrono::steady_clock::now();
                reps.push_back(ev.bphz(P.diagram, phi, r));
                row(route_name(r), reps.back().value, reps.back().error_estimate, ms());
            }
            // routes must agree within 3x the combined error estimates
            for (std::size_t i = 1; i < reps.size(); ++i)
                if (std::abs(reps[i].value - reps[0].value) >
                    3 * (reps[i].error_estimate + reps[0].error_estimate) + 1e-12) {
                    std::cerr << name << ": routes disagree at epsilon " << eps << "\n";
                    ok = false;
                }
        }
    }
    return ok ? 0 : 1;
}

int cmd_converge(const RunConfig& c) {
    Output out(c, "converge.csv");
    out.os() << "fixture,kind,epsilon,value,error,difference,slope,slope_stderr,r_squared\n";
    auto eps_list = c.epsilons.empty() ? std::vector<double>{0.2, 0.1, 0.05, 0.025} : c.epsilons;
    bool ok = true;
    for (const auto& in : c.inputs) {
        auto P = load_input(in);
        std::string name = P.name.empty() ? in : P.name;
        auto phi = default_phi(P.diagram);
        auto K = P.kernel_assignment().small_scale_only();
        for (StudyKind kind : {StudyKind::Canonical, StudyKind::Bphz}) {
            if (kind == StudyKind::Canonical && !weinberg_holds(P.diagram, P.labels) && eps_list.back() == 0) continue;
            auto t = convergence_study(P.labels, K, eps_list, P.diagram, phi, quadrature(c), kind, routes_of(c.route)[0]);
            auto diffs = t.differences();
            for (std::size_t i = 0; i < t.rows.size(); ++i) {
                const auto& r = t.rows[i];
                out.os() << name << "," << (kind == StudyKind::Canonical ? "canonical" : "bphz") << "," << num(r.epsilon)
                         << "," << num(r.value) << "," << num(r.error) << "," << (i ? num(diffs[i - 1]) : "") << ","
                         << num(t.slope) << "," << num(t.slope_stderr) << "," << num(t.r_squared) << "\n";
            }
            if (kind == StudyKind::Bphz) {
                // Cauchy: strictly shrinking gaps, or a table flat to within its error estimates
                double err = 0, gap = 0;
                for (const auto& r : t.rows) err = std::max(err, r.error);
                for (double d : diffs) gap = std::max(gap, d);
                bool shrinking = true;
                for (std::size_t i = 1; i < diffs.size(); ++i) shrinking = shrinking && diffs[i] < diffs[i - 1];
                if (!shrinking && gap > 6 * err + 1e-9) {
                    std::cerr << name << ": renormalised values are not Cauchy\n";
                    ok = false;
                }
            }
        }
    }
    return ok ? 0 : 1;
}

int cmd_hepp(const RunConfig& c) {
    Output out(c, "hepp.csv");
    out.os() << "fixture,config,forest,gamma,int,ext,safe,ultrametric_violations,bound_violations,partition_ok\n";
    std::mt19937 rng(c.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    bool ok = true;
    for (const auto& in : c.inputs) {
        auto P = load_input(in);
        std::string name = P.name.empty() ? in : P.name;
        const auto& g = P.diagram;
        if (g.num_vertices() < 2) throw std::runtime_error(name + ": needs at least two vertices");
        auto family = forests(g, P.labels, true);
        auto cand = divergent_list(g, P.labels, true);
        for (int cfg = 0; cfg < c.configs; ++cfg) {
            std::vector<Point> pts(g.num_vertices(), Point(g.dim()));
            for (auto& p : pts)
                for (auto& x : p) x = U(rng);
            auto t = hepp_tree(pts);
            int ultra = 0, bound = 0;
            const int n = t.leaves;
            for (int u = 0; u < n; ++u)
                for (int v = 0; v < n; ++v)
                    for (int w = 0; w < n; ++w)
                        if (t.distance(u, w) > std::max(t.distance(u, v), t.distance(v, w))) ++ultra;
            const double C = distance_constant(n);
            for (int v = 0; v < n; ++v)
                for (int w = v + 1; w < n; ++w) {
                    double d = euclidean(pts[v], pts[w]), s = t.distance(v, w);
                    if (d < s / C || d > C * s) ++bound;
                }
            bool partition = true;
            try {
                interval_partition(g, P.labels, t);
            } catch (const MultiscaleError&) {
                partition = false;
            }
            ok = ok && ultra == 0 && bound == 0 && partition;
            std::string tail = "," + std::to_string(ultra) + "," + std::to_string(bound) + "," + (partition ? "true" : "false");
            for (std::size_t fi = 0; fi < family.size(); ++fi) {
                auto scales = forest_scales(g, family[fi], t);
                if (scales.entries.empty()) out.os() << name << "," << cfg << "," << fi << ",,,,true" << tail << "\n";
                for (const auto& e : scales.entries) {
                    auto id = std::find(cand.begin(), cand.end(), e.gamma) - cand.begin();
                    out.os() << name << "," << cfg << "," << fi << "," << id << "," << scale_str(e.internal) << ","
                             << scale_str(e.external) << "," << (e.safe ? "true" : "false") << tail << "\n";
                }
            }
        }
    }
    return ok ? 0 : 1;
}

int cmd_fixtures(const RunConfig& c) {
    fs::path dir = c.out.empty() ? fs::path("fixtures") : fs::path(c.out);
    fs::create_directories(dir);
    auto names = c.inputs.empty() ? fixtures::names() : c.inputs;
    for (const auto& n : names) {
        std::ofstream f(dir / (n + ".json"));
        f << serialize_problem(fixtures::build(n));
        std::cout << (dir / (n + ".json")).string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BPHZ renormalisation of generalised Feynman diagrams"};
    RunConfig c;
    app.add_option("command,--command", c.command, "analyze | expand | evaluate | converge | hepp | fixtures")
        ->required()
        ->check(CLI::IsMember({"analyze", "expand", "evaluate", "converge", "hepp", "fixtures"}));
    app.add_option("-i,--input", c.inputs, "diagram file or fixture name (repeatable)");
    app.add_option("--what", c.what, "expansion: coaction | antipode | forest-formula")
        ->check(CLI::IsMember({"coaction", "antipode", "forest-formula"}));
    app.add_option("--epsilons", c.epsilons, "mollification ladder, strictly decreasing")->delimiter(',');
    app.add_option("--tol", c.tol, "relative quadrature tolerance")->check(CLI::PositiveNumber);
    app.add_option("--rho", c.rho, "large-scale truncation radius; enables the large-scale evaluation")
        ->check(CLI::PositiveNumber);
    app.add_option("-o,--out", c.out, "output directory (stdout when absent)");
    app.add_option("--seed", c.seed, "seed for random point configurations");
    app.add_option("--route", c.route, "twisted | forest | full | all")
        ->check(CLI::IsMember({"twisted", "forest", "full", "all"}));
    app.add_option("--configs", c.configs, "point configurations per diagram for hepp")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 1; i < c.epsilons.size(); ++i)
        if (!(c.epsilons[i] < c.epsilons[i - 1])) {
            std::cerr << "error: --epsilons must be strictly decreasing\n";
            return 2;
        }
    if (c.inputs.empty() && c.command != "fixtures") {
        std::cerr << "error: no --input given\n";
        return 2;
    }
    try {
        if (c.command == "analyze") return cmd_analyze(c);
        if (c.command == "expand") return cmd_expand(c);
        if (c.command == "evaluate") return cmd_evaluate(c);
        if (c.command == "converge") return cmd_converge(c);
        if (c.command == "hepp") return cmd_hepp(c);
        return cmd_fixtures(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
