#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "snop/analysis.hpp"
#include "snop/dsl.hpp"
#include "snop/environment.hpp"
#include "snop/linalg.hpp"
#include "snop/random_env.hpp"
#include "snop/rewrite.hpp"
#include "snop/semantics.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;
constexpr int kInput = 3;
constexpr int kNumeric = 4;

struct Output {
    bool pretty = false;
    std::string out_path;  // empty => stdout

    void emit(const json& j, const std::string& pretty_text) const {
        std::ostream* os = &std::cout;
        std::ofstream f;
        if (!out_path.empty()) {
            f.open(out_path);
            if (!f) throw snop::EnvError("cannot open output file: " + out_path);
            os = &f;
        }
        if (pretty)
            *os << pretty_text;
        else
            *os << j.dump(2) << "\n";
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw snop::EnvError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

snop::SourceProgram parse_file(const std::string& path) { return snop::parse(read_file(path)); }

const snop::DiagramDecl& last_diagram(const snop::SourceProgram& p, const std::string& path) {
    const snop::DiagramDecl* last = nullptr;
    for (const auto& d : p.decls)
        if (const auto* g = std::get_if<snop::DiagramDecl>(&d)) last = g;
    if (!last) throw snop::EnvError("no diagram definition in " + path);
    return *last;
}

json sig_json(const snop::Signature& s) {
    json arr = json::array();
    for (const auto& sp : s.spaces) arr.push_back({{"name", sp.name}, {"dim", sp.dim}});
    return arr;
}

json feedback_json(const snop::FeedbackReport& f) {
    return {{"kappa", f.kappa},
            {"spectral_radius", f.spectral_radius},
            {"mode", f.mode == snop::FeedbackMode::Strict ? "strict" : "relaxed"},
            {"neumann_terms", f.neumann_terms},
            {"truncation_bound", f.truncation_bound},
            {"loop_norm_actual", f.loop_norm_actual},
            {"loop_norm_bound", f.loop_norm_bound},
            {"strict_ok", f.strict_ok},
            {"relaxed_ok", f.relaxed_ok}};
}

void apply_overrides(snop::Environment& env, const std::string& mode, double tol) {
    if (mode == "strict") env.options.feedback_mode = snop::FeedbackMode::Strict;
    if (mode == "relaxed") env.options.feedback_mode = snop::FeedbackMode::Relaxed;
    if (tol > 0) env.options.tol = tol;
}

int cmd_check(const std::string& file, const Output& out) {
    snop::SourceProgram p = parse_file(file);
    json report = json::array();
    std::ostringstream pretty;
    for (const auto& d : p.decls) {
        if (const auto* g = std::get_if<snop::DiagramDecl>(&d)) {
            snop::Interface itf = snop::typecheck(g->term);
            report.push_back({{"diagram", g->name},
                              {"in", sig_json(itf.in)},
                              {"out", sig_json(itf.out)},
                              {"in_wire_dim", itf.in.wire_dim()},
                              {"out_wire_dim", itf.out.wire_dim()}});
            pretty << g->name << " : " << itf.in.wire_dim() << " -> " << itf.out.wire_dim()
                   << " (ports " << itf.in.size() << " -> " << itf.out.size() << ")\n";
        }
    }
    out.emit({{"ok", true}, {"diagrams", report}}, pretty.str());
    return kOk;
}

int cmd_normalize(const std::string& file, const std::string& env_path, const Output& out) {
    snop::SourceProgram p = parse_file(file);
    snop::Environment env;
    if (!env_path.empty()) env = snop::load_environment_file(env_path);
    const snop::ControlMonoid* monoid = env.monoid ? &*env.monoid : nullptr;

    // Witness program: control-normalized terms, followed by the canonical
    // port-graph serialization of each diagram as comment lines.
    std::ostringstream text;
    for (auto& d : p.decls) {
        if (auto* g = std::get_if<snop::DiagramDecl>(&d))
            g->term = snop::normalize_control(g->term, monoid);
    }
    text << snop::print(p);
    for (const auto& d : p.decls) {
        if (const auto* g = std::get_if<snop::DiagramDecl>(&d)) {
            snop::CanonicalForm cf = snop::canonicalize(g->term, monoid);
            text << "# canonical " << g->name << "\n";
            std::istringstream lines(cf.serial);
            std::string line;
            while (std::getline(lines, line)) text << "#   " << line << "\n";
        }
    }
    // The witness is a program, not JSON, in both modes.
    Output o = out;
    o.pretty = true;
    o.emit(json(), text.str());
    return kOk;
}

int cmd_equiv(const std::string& file_a, const std::string& file_b, const std::string& env_path,
              bool semantic, int trials, std::uint64_t seed, const Output& out) {
    snop::SourceProgram pa = parse_file(file_a);
    snop::SourceProgram pb = parse_file(file_b);
    const snop::Diagram da = last_diagram(pa, file_a).term;
    const snop::Diagram db = last_diagram(pb, file_b).term;
    snop::Environment env;
    if (!env_path.empty()) env = snop::load_environment_file(env_path);
    const snop::ControlMonoid* monoid = env.monoid ? &*env.monoid : nullptr;

    json j;
    std::ostringstream pretty;
    snop::EquivVerdict v;
    try {
        v = snop::equiv(da, db, monoid);
    } catch (const snop::SignatureMismatch& e) {
        j = {{"verdict", "signature-mismatch"}, {"reason", e.what()}};
        out.emit(j, std::string("signature-mismatch: ") + e.what() + "\n");
        return kNegative;
    }
    switch (v.verdict) {
        case snop::Verdict::Equal:
            j = {{"verdict", "equal"}, {"trace", v.trace}};
            pretty << "equal (" << v.trace << ")\n";
            break;
        case snop::Verdict::Inequivalent:
            j = {{"verdict", "inequivalent"}, {"witness", v.witness}};
            pretty << "inequivalent: " << v.witness << "\n";
            break;
        case snop::Verdict::Unknown:
            j = {{"verdict", "unknown"}, {"reason", v.reason}};
            pretty << "unknown: " << v.reason << "\n";
            break;
    }

    if (semantic) {
        // Randomized semantic cross-check over shared environments.
        double max_dev = 0.0;
        const snop::Diagram both = snop::make_tensor(da, db);
        for (int k = 0; k < trials; ++k) {
            snop::Environment renv = snop::random_environment(both, seed + static_cast<std::uint64_t>(k));
            snop::OperatorValue va = snop::eval(da, renv);
            snop::OperatorValue vb = snop::eval(db, renv);
            const double na = va.matrix.empty() ? 0.0 : snop::op_norm_value(va.matrix);
            const double dev =
                snop::sub(va.matrix, vb.matrix).max_abs() / (1.0 + na);
            max_dev = std::max(max_dev, dev);
        }
        j["semantic_trials"] = trials;
        j["semantic_max_deviation"] = max_dev;
        pretty << "semantic max deviation over " << trials << " trials: " << max_dev << "\n";
        if (v.verdict == snop::Verdict::Equal && max_dev > 1e-9) {
            j["semantic_soundness"] = "VIOLATED";
            out.emit(j, pretty.str());
            std::cerr << "semantic mismatch on a syntactic Equal verdict\n";
            return kNumeric;
        }
    }
    out.emit(j, pretty.str());
    return v.verdict == snop::Verdict::Equal ? kOk : kNegative;
}

int cmd_eval(const std::string& file, const std::string& env_path, const std::string& mode,
             double tol, const Output& out) {
    snop::SourceProgram p = parse_file(file);
    const snop::DiagramDecl& d = last_diagram(p, file);
    snop::Environment env = snop::load_environment_file(env_path);
    apply_overrides(env, mode, tol);
    snop::EvalReport rep;
    snop::OperatorValue v = snop::eval(d.term, env, &rep);
    json j = {{"diagram", d.name},
              {"in", sig_json(v.in_sig)},
              {"out", sig_json(v.out_sig)},
              {"matrix", snop::matrix_to_json(v.matrix)}};
    json fb = json::array();
    for (const auto& f : rep.feedbacks) fb.push_back(feedback_json(f));
    j["feedbacks"] = fb;

    std::ostringstream pretty;
    pretty << d.name << " : " << v.matrix.cols() << " -> " << v.matrix.rows() << "\n";
    for (std::size_t i = 0; i < v.matrix.rows(); ++i) {
        for (std::size_t k = 0; k < v.matrix.cols(); ++k) {
            const snop::cplx c = v.matrix(i, k);
            pretty << (k ? "  " : "") << c.real() << (c.imag() < 0 ? "-" : "+")
                   << std::abs(c.imag()) << "i";
        }
        pretty << "\n";
    }
    out.emit(j, pretty.str());
    return kOk;
}

int cmd_analyze(const std::string& file, const std::string& env_path, const Output& out) {
    snop::SourceProgram p = parse_file(file);
    const snop::DiagramDecl& d = last_diagram(p, file);
    snop::Environment env = snop::load_environment_file(env_path);
    std::vector<snop::FeedbackReport> reports = snop::well_posedness(d.term, env);
    json j = {{"diagram", d.name}, {"feedbacks", json::array()}};
    std::ostringstream pretty;
    bool any_bad = false;
    for (const auto& f : reports) {
        j["feedbacks"].push_back(feedback_json(f));
        pretty << "kappa=" << f.kappa << " rho~" << f.spectral_radius
               << " strict=" << (f.strict_ok ? "ok" : "fail")
               << " relaxed=" << (f.relaxed_ok ? "ok" : "fail") << "\n";
        if (!f.relaxed_ok) any_bad = true;
    }
    out.emit(j, pretty.str());
    return any_bad ? kNegative : kOk;
}

int cmd_dagger(const std::string& file, const Output& out) {
    snop::SourceProgram p = parse_file(file);
    for (auto& d : p.decls) {
        if (auto* g = std::get_if<snop::DiagramDecl>(&d)) g->term = snop::dagger_push(g->term);
    }
    Output o = out;
    o.pretty = true;
    o.emit(json(), snop::print(p));
    return kOk;
}

int cmd_demo(const std::string& name, std::vector<int> sizes, double gain, const Output& out) {
    if (name != "pde") throw snop::EnvError("unknown demo: " + name);
    if (sizes.empty()) sizes = {4, 16, 64};
    json j = json::array();
    std::ostringstream pretty;
    pretty << "n    gain   ||CL - (I+GK)^-1 G||   strict(KG)   D2\n";
    for (int n : sizes) {
        snop::PdeCase pc = snop::build_pde_case(n, gain);
        snop::OperatorValue cl = snop::eval(pc.cl, pc.env);
        // Direct oracle (I + G K)^-1 G.
        snop::ComplexMatrix gk = snop::matmul(pc.g, pc.k);
        snop::ComplexMatrix lhs =
            snop::add(snop::ComplexMatrix::identity(gk.rows()), gk);
        snop::ComplexMatrix oracle = snop::solve(lhs, pc.g);
        const double residual = snop::sub(cl.matrix, oracle).max_abs();
        const double kg_norm = snop::op_norm_value(snop::matmul(pc.k, pc.g));

        snop::Environment strict_env = pc.env;
        strict_env.options.feedback_mode = snop::FeedbackMode::Strict;
        bool strict_ok = true;
        try {
            snop::eval(pc.cl, strict_env);
        } catch (const snop::IllPosedFeedback&) {
            strict_ok = false;
        }

        std::string d2_status = "ok";
        double d1_vs_cl = -1.0;
        try {
            snop::eval(pc.d2, pc.env);
        } catch (const snop::SingularLoop&) {
            d2_status = "singular-loop";
        }
        snop::OperatorValue d1 = snop::eval(pc.d1, pc.env);
        d1_vs_cl = snop::sub(d1.matrix, cl.matrix).max_abs();

        j.push_back({{"n", n},
                     {"gain", gain},
                     {"cl_residual", residual},
                     {"kg_norm", kg_norm},
                     {"strict_ok", strict_ok},
                     {"d2_status", d2_status},
                     {"d1_vs_cl_residual", d1_vs_cl}});
        pretty << n << "  " << gain << "  " << residual << "  "
               << (strict_ok ? "accept" : "reject") << "  " << d2_status << "\n";
    }
    out.emit(j, pretty.str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synergy operad calculus: parse, rewrite, evaluate and analyze "
                 "operator-network wiring diagrams"};
    app.require_subcommand(1);
    app.fallthrough();  // let --json/--pretty appear after the subcommand

    Output out;
    bool json_flag = false, pretty_flag = false;
    app.add_flag("--json", json_flag, "machine-readable output (default)");
    app.add_flag("--pretty", pretty_flag, "human-readable output");

    std::string file_a, file_b, env_path, mode, demo_name;
    std::string out_path;
    bool semantic = false;
    int trials = 100;
    std::uint64_t seed = 42;
    double tol = 0.0, gain = 0.5;
    std::vector<int> sizes;

    auto* c_check = app.add_subcommand("check", "typecheck a .snop file");
    c_check->add_option("file", file_a)->required();

    auto* c_norm = app.add_subcommand("normalize", "print the canonical-form witness program");
    c_norm->add_option("file", file_a)->required();
    c_norm->add_option("--env", env_path);

    auto* c_equiv = app.add_subcommand("equiv", "decide diagram equivalence");
    c_equiv->add_option("file_a", file_a)->required();
    c_equiv->add_option("file_b", file_b)->required();
    c_equiv->add_option("--env", env_path);
    c_equiv->add_flag("--semantic", semantic, "randomized semantic cross-check");
    c_equiv->add_option("--trials", trials);
    c_equiv->add_option("--seed", seed);

    auto* c_eval = app.add_subcommand("eval", "evaluate the last diagram of a file");
    c_eval->add_option("file", file_a)->required();
    c_eval->add_option("--env", env_path)->required();
    c_eval->add_option("--out", out_path);
    c_eval->add_option("--mode", mode)->check(CLI::IsMember({"strict", "relaxed"}));
    c_eval->add_option("--tol", tol);

    auto* c_analyze = app.add_subcommand("analyze", "feedback well-posedness report");
    c_analyze->add_option("file", file_a)->required();
    c_analyze->add_option("--env", env_path)->required();

    auto* c_dagger = app.add_subcommand("dagger", "print the daggered program");
    c_dagger->add_option("file", file_a)->required();

    auto* c_demo = app.add_subcommand("demo", "run a named demo (pde)");
    c_demo->add_option("name", demo_name)->required();
    c_demo->add_option("--n", sizes);
    c_demo->add_option("--gain", gain);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    out.pretty = pretty_flag && !json_flag;
    out.out_path = out_path;

    try {
        if (*c_check) return cmd_check(file_a, out);
        if (*c_norm) return cmd_normalize(file_a, env_path, out);
        if (*c_equiv) return cmd_equiv(file_a, file_b, env_path, semantic, trials, seed, out);
        if (*c_eval) return cmd_eval(file_a, env_path, mode, tol, out);
        if (*c_analyze) return cmd_analyze(file_a, env_path, out);
        if (*c_dagger) return cmd_dagger(file_a, out);
        if (*c_demo) return cmd_demo(demo_name, sizes, gain, out);
    } catch (const snop::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kInput;
    } catch (const snop::TypeError& e) {
        std::cerr << "type error: " << e.what() << "\n";
        return kInput;
    } catch (const snop::EnvError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const snop::UnboundAtom& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const snop::UnboundToken& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const snop::IllPosedFeedback& e) {
        std::cerr << e.what() << "\n";
        return kNegative;
    } catch (const snop::SingularLoop& e) {
        std::cerr << e.what() << "\n";
        return kNegative;
    } catch (const snop::ConvergenceError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
