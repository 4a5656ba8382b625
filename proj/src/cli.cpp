#include "plp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "plp/analysis.hpp"
#include "plp/asym.hpp"
#include "plp/checks.hpp"
#include "plp/errors.hpp"
#include "plp/exact.hpp"
#include "plp/parser.hpp"
#include "plp/program.hpp"
#include "plp/rational.hpp"

namespace plp {

namespace {

struct IoError {
    std::string message;
};

struct RunConfig {
    std::string input;
    std::string output;
    std::string query;
    std::string format = "text";
    std::string reduct;
    int n = 1;
    int max_n = 0;
    std::size_t max_atoms = Limits{}.max_fact_atoms;

    bool json() const { return format == "json"; }
    Limits limits() const { return Limits{max_atoms}; }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError{"cannot read " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ProbProgram load_program(const std::string& path) { return parse_program(read_file(path)); }

// Probabilities are always rendered num/den, including a unit denominator,
// so output lines stay machine-splittable on '/'.
std::string rat(const Rational& q) {
    return numerator(q).str() + "/" + denominator(q).str();
}

std::string prob_line(const Rational& q) { return rat(q) + " = " + to_decimal(q) + "\n"; }

std::vector<std::string> structure_atoms(const logic::FiniteStructure& s) {
    std::vector<std::string> out;
    for (const auto& [rel, tuples] : s.extensions)
        for (const auto& tuple : tuples) {
            std::string a = rel;
            if (!tuple.empty()) {
                a += "(";
                for (std::size_t i = 0; i < tuple.size(); ++i)
                    a += (i ? "," : "") + std::to_string(tuple[i]);
                a += ")";
            }
            out.push_back(std::move(a));
        }
    return out;
}

std::string atoms_text(const logic::FiniteStructure& s) {
    std::string out = "{";
    auto atoms = structure_atoms(s);
    for (std::size_t i = 0; i < atoms.size(); ++i) out += (i ? ", " : "") + atoms[i];
    return out + "}";
}

std::string transform_text(const TransformResult& t) {
    if (t.single()) return serialize_program(t.program());
    std::string out = "% branches: " + std::to_string(t.branches.size()) + "\n";
    for (std::size_t i = 0; i < t.branches.size(); ++i) {
        const auto& br = t.branches[i];
        out += "% branch " + std::to_string(i + 1) + " of " +
               std::to_string(t.branches.size()) + ": weight " + rat(br.weight);
        for (const auto& [name, value] : br.values)
            out += ", " + name + " = " + (value ? "true" : "false");
        out += "\n" + serialize_program(br.program);
    }
    return out;
}

nlohmann::json transform_json(const TransformResult& t) {
    nlohmann::json branches = nlohmann::json::array();
    for (const auto& br : t.branches) {
        nlohmann::json values = nlohmann::json::object();
        for (const auto& [name, value] : br.values) values[name] = value;
        branches.push_back({{"weight", rat(br.weight)},
                            {"values", values},
                            {"program", serialize_program(br.program)}});
    }
    return {{"branches", branches}};
}

// TV between the source distribution and the weighted branch mixture, both
// materialized over the source vocabulary at domain size n.
Rational mixture_tv(const ProbProgram& orig, const std::vector<NullaryBranch>& branches, int n,
                    const Limits& limits) {
    auto base = world_distribution(orig, n, limits);
    const auto& big = base.atoms();
    std::map<std::uint64_t, Rational> mix;
    for (const auto& br : branches) {
        if (br.weight == 0) continue;
        auto wd = world_distribution(br.program, n, limits);
        const auto& small = wd.atoms();
        std::uint64_t pinned = 0;
        for (const auto& [name, val] : br.values)
            if (val)
                pinned |= std::uint64_t{1}
                          << big.atom_index(static_cast<std::size_t>(big.relation_index(name)), {});
        for (const auto& [mask, w] : wd.worlds()) {
            std::uint64_t lifted = pinned;
            for (std::size_t j = 0; j < small.size(); ++j)
                if (mask >> j & 1) {
                    auto [ri, tuple] = small.decode(j);
                    lifted |= std::uint64_t{1}
                              << big.atom_index(static_cast<std::size_t>(big.relation_index(
                                                    small.relation(ri).name)),
                                                tuple);
                }
            mix[lifted] += br.weight * w;
        }
    }
    for (const auto& [mask, w] : base.worlds()) mix[mask] -= w;
    Rational acc = 0;
    for (const auto& [mask, diff] : mix) acc += abs(diff);
    return acc / 2;
}

std::string cmd_transform(const RunConfig& cfg) {
    auto t = asymptotic_transform(load_program(cfg.input));
    if (cfg.json()) return transform_json(t).dump(2) + "\n";
    return transform_text(t);
}

std::string cmd_infer(const RunConfig& cfg) {
    auto p = load_program(cfg.input);
    auto query = parse_query(cfg.query);
    Rational value = query_prob(p, cfg.n, *query, cfg.limits());
    if (cfg.json())
        return nlohmann::json{{"n", cfg.n}, {"query", cfg.query}, {"probability", rat(value)}}
                   .dump(2) +
               "\n";
    return prob_line(value);
}

std::string cmd_limit(const RunConfig& cfg) {
    auto p = load_program(cfg.input);
    Rational value = asymptotic_query_prob(p, *parse_query(cfg.query));
    if (cfg.json())
        return nlohmann::json{{"query", cfg.query}, {"probability", rat(value)}}.dump(2) + "\n";
    return prob_line(value);
}

// Rule rendering for diagnostics, keeping the variable names the program was
// written with so they match the reported offender variables.
std::string source_atom_text(const std::string& pred, const std::vector<logic::Term>& args) {
    if (args.empty()) return pred;
    std::string s = pred + "(";
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i].name;
    return s + ")";
}

std::string source_clause_text(const Clause& c) {
    std::string s = source_atom_text(c.head.pred, c.head.args);
    for (std::size_t i = 0; i < c.body.size(); ++i) {
        const auto& l = c.body[i];
        s += i ? ", " : " :- ";
        switch (l.kind) {
            case BodyLiteral::Kind::Atom: s += source_atom_text(l.pred, l.args); break;
            case BodyLiteral::Kind::NegAtom: s += "\\+ " + source_atom_text(l.pred, l.args); break;
            case BodyLiteral::Kind::Eq: s += l.lhs.name + " = " + l.rhs.name; break;
            case BodyLiteral::Kind::Neq: s += l.lhs.name + " \\= " + l.rhs.name; break;
        }
    }
    return s + ".";
}

std::string check_determinate_report(const ProbProgram& p, const RunConfig& cfg) {
    auto report = check_determinate(p);
    if (cfg.json()) {
        nlohmann::json offenders = nlohmann::json::array();
        for (const auto& [idx, vars] : report.offenders)
            offenders.push_back(
                {{"rule", source_clause_text(p.rules[static_cast<std::size_t>(idx)])},
                 {"variables", vars}});
        nlohmann::json j = {{"check", "determinate"}, {"holds", report.determinate}};
        if (!report.determinate) j["offenders"] = offenders;
        return j.dump(2) + "\n";
    }
    if (report.determinate) return "determinate: holds\n";
    std::string out = "determinate: fails\n";
    for (const auto& [idx, vars] : report.offenders) {
        out += "  rule " + source_clause_text(p.rules[static_cast<std::size_t>(idx)]) +
               " has body-only variables:";
        for (const auto& v : vars) out += " " + v;
        out += "\n";
    }
    return out;
}

// Family under test: the program's induced distributions, restricted to the
// --reduct relations when given. The restriction can break properties that
// the full family has, which is exactly what the flag is for.
FamilyAccessor check_family(const ProbProgram& p, const RunConfig& cfg) {
    auto family = program_family(p, cfg.limits());
    if (cfg.reduct.empty()) return family;
    logic::Vocabulary target;
    std::string name;
    std::istringstream names(cfg.reduct);
    while (std::getline(names, name, ',')) {
        if (name.empty()) continue;
        int arity = family.vocab.arity_of(name);
        if (arity < 0) throw ProgramError("--reduct names unknown relation: " + name);
        target.add_relation(name, arity);
    }
    return reduct_family(std::move(family), std::move(target));
}

std::string check_projective_report(const ProbProgram& p, const RunConfig& cfg) {
    auto report = check_projective(check_family(p, cfg), cfg.max_n);
    if (cfg.json()) {
        nlohmann::json j = {{"check", "projective"}, {"max_n", cfg.max_n}, {"holds", report.holds}};
        if (report.witness) {
            const auto& w = *report.witness;
            j["witness"] = {{"m", w.m},
                            {"n", w.n},
                            {"world", structure_atoms(w.world)},
                            {"direct", rat(w.direct)},
                            {"marginal", rat(w.marginal)}};
        }
        return j.dump(2) + "\n";
    }
    if (report.holds) return "projective: holds up to n=" + std::to_string(cfg.max_n) + "\n";
    const auto& w = *report.witness;
    return "projective: counterexample at (m,n)=(" + std::to_string(w.m) + "," +
           std::to_string(w.n) + ")\n  world: " + atoms_text(w.world) +
           "\n  direct: " + rat(w.direct) + "\n  marginal: " + rat(w.marginal) + "\n";
}

std::string check_ip_report(const ProbProgram& p, const RunConfig& cfg) {
    auto report = check_IP(check_family(p, cfg), cfg.max_n);
    std::string projective = report.projective ? "yes" : "no";
    if (cfg.json()) {
        nlohmann::json j = {{"check", "independence"},
                            {"max_n", cfg.max_n},
                            {"holds", report.holds},
                            {"projective", report.projective}};
        if (report.witness) {
            const auto& w = *report.witness;
            j["witness"] = {{"n", w.n},         {"m", w.m},
                            {"phi", w.phi},     {"psi", w.psi},
                            {"joint", rat(w.joint)}, {"left", rat(w.left)},
                            {"right", rat(w.right)}};
        }
        return j.dump(2) + "\n";
    }
    if (report.holds)
        return "independence: holds up to n=" + std::to_string(cfg.max_n) +
               " (family projective: " + projective + ")\n";
    const auto& w = *report.witness;
    return "independence: counterexample at block sizes n=" + std::to_string(w.n) +
           ", m=" + std::to_string(w.m) + " (family projective: " + projective + ")\n  phi: " +
           w.phi + "\n  psi: " + w.psi + "\n  joint: " + rat(w.joint) +
           "\n  left: " + rat(w.left) + "\n  right: " + rat(w.right) + "\n";
}

std::string check_cip_report(const ProbProgram& p, const RunConfig& cfg) {
    auto report = check_CIP(check_family(p, cfg), cfg.max_n);
    std::string projective = report.projective ? "yes" : "no";
    if (cfg.json()) {
        nlohmann::json j = {{"check", "conditional-independence"},
                            {"max_n", cfg.max_n},
                            {"holds", report.holds},
                            {"projective", report.projective}};
        if (report.witness) {
            const auto& w = *report.witness;
            j["witness"] = {{"n", w.n},
                            {"domain", w.n + 1},
                            {"given", structure_atoms(w.given)},
                            {"phi", w.phi},
                            {"joint", rat(w.joint)},
                            {"left", rat(w.left)},
                            {"right", rat(w.right)},
                            {"given_prob", rat(w.given_prob)}};
        }
        return j.dump(2) + "\n";
    }
    if (report.holds)
        return "conditional independence: holds up to n=" + std::to_string(cfg.max_n) +
               " (family projective: " + projective + ")\n";
    const auto& w = *report.witness;
    std::string domain = "{";
    for (int i = 1; i <= w.n + 1; ++i) domain += (i > 1 ? "," : "") + std::to_string(i);
    domain += "}";
    return "conditional independence: counterexample on domain " + domain +
           "\n  given world on {1.." + std::to_string(w.given.n) + "}: " + atoms_text(w.given) +
           "\n  phi: " + w.phi + "\n  joint: " + rat(w.joint) + "\n  left: " + rat(w.left) +
           "\n  right: " + rat(w.right) + "\n  given: " + rat(w.given_prob) + "\n";
}

std::string cmd_converge(const RunConfig& cfg) {
    auto p = load_program(cfg.input);
    auto query = parse_query(cfg.query);
    auto t = asymptotic_transform(p);
    nlohmann::json rows = nlohmann::json::array();
    std::string text = "n\tprobability\ttv\n";
    for (int n = 1; n <= cfg.max_n; ++n) {
        Rational prob = query_prob(p, n, *query, cfg.limits());
        Rational tv = t.single() ? program_tv(p, t.program(), n, cfg.limits())
                                 : mixture_tv(p, t.branches, n, cfg.limits());
        if (cfg.json())
            rows.push_back({{"n", n}, {"probability", rat(prob)}, {"tv", rat(tv)}});
        else
            text += std::to_string(n) + "\t" + rat(prob) + "\t" + rat(tv) + "\n";
    }
    if (cfg.json()) return rows.dump(2) + "\n";
    return text;
}

void deliver(const RunConfig& cfg, const std::string& payload, std::ostream& out) {
    if (cfg.output.empty()) {
        out << payload;
        return;
    }
    std::ofstream file(cfg.output);
    if (!file) throw IoError{"cannot write " + cfg.output};
    file << payload;
    if (!file.good()) throw IoError{"short write to " + cfg.output};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    bool want_projective = false, want_ip = false, want_cip = false, want_determinate = false;

    CLI::App app{"exact and asymptotic analysis of probabilistic logic programs"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd, bool with_query) {
        cmd->add_option("input", cfg.input, "program file (.plp)")->required();
        cmd->add_option("--output", cfg.output, "write the payload to a file instead of stdout");
        cmd->add_option("--format", cfg.format, "output format")
            ->check(CLI::IsMember({"text", "json"}));
        if (with_query) cmd->add_option("--query", cfg.query, "quantifier-free query")->required();
        cmd->add_option("--max-atoms", cfg.max_atoms,
                        "fact-atom enumeration guard (default 25)");
    };

    auto* transform = app.add_subcommand("transform", "compile to an acyclic determinate program");
    add_common(transform, false);

    auto* infer = app.add_subcommand("infer", "exact query probability at a fixed domain size");
    add_common(infer, true);
    infer->add_option("--n", cfg.n, "domain size")->required()->check(CLI::Range(1, 1000000));

    auto* limit = app.add_subcommand("limit", "asymptotic query probability");
    add_common(limit, true);

    auto* check = app.add_subcommand("check", "family property checks");
    add_common(check, false);
    check->add_flag("--projective", want_projective, "marginal consistency across domain sizes");
    check->add_flag("--ip", want_ip, "independence of disjoint blocks");
    check->add_flag("--cip", want_cip, "conditional independence given a shared block");
    check->add_flag("--determinate", want_determinate, "body variables confined to heads");
    check->add_option("--max-n", cfg.max_n, "largest domain size to sweep")
        ->check(CLI::Range(1, 1000000));
    check->add_option("--reduct", cfg.reduct,
                      "check the projection onto these relations (comma-separated)");

    auto* converge = app.add_subcommand("converge", "exact probabilities and TV to the transform");
    add_common(converge, true);
    converge->add_option("--max-n", cfg.max_n, "largest domain size to sweep")
        ->check(CLI::Range(1, 1000000));

    std::vector<const char*> argv;
    argv.push_back("plp");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << "\n";
        return 1;
    }

    try {
        std::string payload;
        if (*transform) {
            payload = cmd_transform(cfg);
        } else if (*infer) {
            payload = cmd_infer(cfg);
        } else if (*limit) {
            payload = cmd_limit(cfg);
        } else if (*check) {
            if (cfg.max_n == 0) cfg.max_n = 4;
            int picked = want_projective + want_ip + want_cip + want_determinate;
            if (picked != 1) {
                err << "error: usage: pick exactly one of --projective, --ip, --cip, "
                       "--determinate\n";
                return 1;
            }
            if (want_determinate && !cfg.reduct.empty()) {
                err << "error: usage: --reduct applies to distribution checks, not "
                       "--determinate\n";
                return 1;
            }
            auto p = load_program(cfg.input);
            if (want_determinate)
                payload = check_determinate_report(p, cfg);
            else if (want_projective)
                payload = check_projective_report(p, cfg);
            else if (want_ip)
                payload = check_ip_report(p, cfg);
            else
                payload = check_cip_report(p, cfg);
        } else if (*converge) {
            if (cfg.max_n == 0) cfg.max_n = 7;
            payload = cmd_converge(cfg);
        }
        deliver(cfg, payload, out);
        return 0;
    } catch (const ParseError& e) {
        err << "error: parse: " << e.what() << "\n";
        return 1;
    } catch (const UnstratifiableError& e) {
        err << "error: unstratifiable: " << e.what() << "\n";
        return 2;
    } catch (const ConstantsError& e) {
        err << "error: constants: " << e.what() << "\n";
        return 3;
    } catch (const ScaleError& e) {
        err << "error: scale: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        err << "error: io: " << e.message << "\n";
        return 6;
    } catch (const Error& e) {
        err << "error: semantic: " << e.what() << "\n";
        return 5;
    }
}

}  // namespace plp
