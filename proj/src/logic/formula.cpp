#include "plp/logic/formula.hpp"

#include <algorithm>

namespace plp::logic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool tree_quantifier_free(const Formula::Node& node) {
    return std::visit(
        overloaded{
            [](const Truth&) { return true; },
            [](const Atom&) { return true; },
            [](const Equality&) { return true; },
            [](const Not& n) { return n.body->quantifier_free(); },
            [](const And& n) { return n.lhs->quantifier_free() && n.rhs->quantifier_free(); },
            [](const Or& n) { return n.lhs->quantifier_free() && n.rhs->quantifier_free(); },
            [](const Implies& n) { return n.lhs->quantifier_free() && n.rhs->quantifier_free(); },
            [](const Exists&) { return false; },
            [](const ForAll&) { return false; },
            [](const Lfp&) { return false; },
        },
        node);
}

bool tree_first_order(const Formula::Node& node) {
    return std::visit(overloaded{
                          [](const Truth&) { return true; },
                          [](const Atom&) { return true; },
                          [](const Equality&) { return true; },
                          [](const Not& n) { return n.body->first_order(); },
                          [](const And& n) { return n.lhs->first_order() && n.rhs->first_order(); },
                          [](const Or& n) { return n.lhs->first_order() && n.rhs->first_order(); },
                          [](const Implies& n) {
                              return n.lhs->first_order() && n.rhs->first_order();
                          },
                          [](const Exists& n) { return n.body->first_order(); },
                          [](const ForAll& n) { return n.body->first_order(); },
                          [](const Lfp&) { return false; },
                      },
                      node);
}

// polarity: +1 even negations, -1 odd, 0 both (under no occurrence tracking
// we simply fail when a negative-side occurrence shows up).
bool occurs_positively_only(const Formula& f, const std::string& rel_var, bool positive) {
    return std::visit(
        overloaded{
            [&](const Truth&) { return true; },
            [&](const Atom& a) { return a.pred != rel_var || positive; },
            [&](const Equality&) { return true; },
            [&](const Not& n) { return occurs_positively_only(*n.body, rel_var, !positive); },
            [&](const And& n) {
                return occurs_positively_only(*n.lhs, rel_var, positive) &&
                       occurs_positively_only(*n.rhs, rel_var, positive);
            },
            [&](const Or& n) {
                return occurs_positively_only(*n.lhs, rel_var, positive) &&
                       occurs_positively_only(*n.rhs, rel_var, positive);
            },
            [&](const Implies& n) {
                return occurs_positively_only(*n.lhs, rel_var, !positive) &&
                       occurs_positively_only(*n.rhs, rel_var, positive);
            },
            [&](const Exists& n) { return occurs_positively_only(*n.body, rel_var, positive); },
            [&](const ForAll& n) { return occurs_positively_only(*n.body, rel_var, positive); },
            [&](const Lfp& n) {
                if (n.rel_var == rel_var) return true;  // shadowed inside
                return occurs_positively_only(*n.body, rel_var, positive);
            },
        },
        f.node());
}

}  // namespace

Formula::Formula(Node node) : node_(std::move(node)) {
    quantifier_free_ = tree_quantifier_free(node_);
    first_order_ = tree_first_order(node_);
}

FormulaPtr truth(bool value) { return std::make_shared<Formula>(Formula::Node{Truth{value}}); }

FormulaPtr atom(std::string pred, std::vector<Term> args) {
    return std::make_shared<Formula>(Formula::Node{Atom{std::move(pred), std::move(args)}});
}

FormulaPtr equal(Term lhs, Term rhs) {
    return std::make_shared<Formula>(Formula::Node{Equality{std::move(lhs), std::move(rhs)}});
}

FormulaPtr negation(FormulaPtr body) {
    return std::make_shared<Formula>(Formula::Node{Not{std::move(body)}});
}

FormulaPtr conj(FormulaPtr lhs, FormulaPtr rhs) {
    return std::make_shared<Formula>(Formula::Node{And{std::move(lhs), std::move(rhs)}});
}

FormulaPtr disj(FormulaPtr lhs, FormulaPtr rhs) {
    return std::make_shared<Formula>(Formula::Node{Or{std::move(lhs), std::move(rhs)}});
}

FormulaPtr implies(FormulaPtr lhs, FormulaPtr rhs) {
    return std::make_shared<Formula>(Formula::Node{Implies{std::move(lhs), std::move(rhs)}});
}

FormulaPtr exists(std::string variable, FormulaPtr body) {
    return std::make_shared<Formula>(Formula::Node{Exists{std::move(variable), std::move(body)}});
}

FormulaPtr forall(std::string variable, FormulaPtr body) {
    return std::make_shared<Formula>(Formula::Node{ForAll{std::move(variable), std::move(body)}});
}

FormulaPtr lfp(std::vector<std::string> vars, std::string rel_var, FormulaPtr body,
               std::vector<Term> args) {
    if (vars.size() != args.size())
        throw Error("lfp: variable tuple and argument tuple lengths differ");
    if (!positive_in(*body, rel_var))
        throw Error("lfp: second-order variable " + rel_var + " occurs negatively");
    return std::make_shared<Formula>(
        Formula::Node{Lfp{std::move(vars), std::move(rel_var), std::move(body), std::move(args)}});
}

FormulaPtr conj_all(const std::vector<FormulaPtr>& parts) {
    if (parts.empty()) return truth(true);
    FormulaPtr acc = parts.front();
    for (size_t i = 1; i < parts.size(); ++i) acc = conj(acc, parts[i]);
    return acc;
}

FormulaPtr disj_all(const std::vector<FormulaPtr>& parts) {
    if (parts.empty()) return truth(false);
    FormulaPtr acc = parts.front();
    for (size_t i = 1; i < parts.size(); ++i) acc = disj(acc, parts[i]);
    return acc;
}

bool positive_in(const Formula& f, const std::string& rel_var) {
    return occurs_positively_only(f, rel_var, true);
}

FormulaPtr desugar(const FormulaPtr& f) {
    return std::visit(
        overloaded{
            [&](const Truth&) { return f; },
            [&](const Atom&) { return f; },
            [&](const Equality&) { return f; },
            [&](const Not& n) -> FormulaPtr {
                auto body = desugar(n.body);
                return body == n.body ? f : negation(body);
            },
            [&](const And& n) -> FormulaPtr {
                auto l = desugar(n.lhs), r = desugar(n.rhs);
                return l == n.lhs && r == n.rhs ? f : conj(l, r);
            },
            [&](const Or& n) -> FormulaPtr {
                auto l = desugar(n.lhs), r = desugar(n.rhs);
                return l == n.lhs && r == n.rhs ? f : disj(l, r);
            },
            [&](const Implies& n) -> FormulaPtr {
                return disj(negation(desugar(n.lhs)), desugar(n.rhs));
            },
            [&](const Exists& n) -> FormulaPtr {
                auto body = desugar(n.body);
                return body == n.body ? f : exists(n.variable, body);
            },
            [&](const ForAll& n) -> FormulaPtr {
                return negation(exists(n.variable, negation(desugar(n.body))));
            },
            [&](const Lfp& n) -> FormulaPtr {
                auto body = desugar(n.body);
                return body == n.body ? f : lfp(n.vars, n.rel_var, body, n.args);
            },
        },
        f->node());
}

namespace {

void collect_free_vars(const Formula& f, std::set<std::string>& bound,
                       std::set<std::string>& out) {
    std::visit(overloaded{
                   [&](const Truth&) {},
                   [&](const Atom& a) {
                       for (const auto& t : a.args)
                           if (t.kind == TermKind::Variable && !bound.count(t.name))
                               out.insert(t.name);
                   },
                   [&](const Equality& e) {
                       for (const Term* t : {&e.lhs, &e.rhs})
                           if (t->kind == TermKind::Variable && !bound.count(t->name))
                               out.insert(t->name);
                   },
                   [&](const Not& n) { collect_free_vars(*n.body, bound, out); },
                   [&](const And& n) {
                       collect_free_vars(*n.lhs, bound, out);
                       collect_free_vars(*n.rhs, bound, out);
                   },
                   [&](const Or& n) {
                       collect_free_vars(*n.lhs, bound, out);
                       collect_free_vars(*n.rhs, bound, out);
                   },
                   [&](const Implies& n) {
                       collect_free_vars(*n.lhs, bound, out);
                       collect_free_vars(*n.rhs, bound, out);
                   },
                   [&](const Exists& n) {
                       bool fresh = bound.insert(n.variable).second;
                       collect_free_vars(*n.body, bound, out);
                       if (fresh) bound.erase(n.variable);
                   },
                   [&](const ForAll& n) {
                       bool fresh = bound.insert(n.variable).second;
                       collect_free_vars(*n.body, bound, out);
                       if (fresh) bound.erase(n.variable);
                   },
                   [&](const Lfp& n) {
                       std::vector<std::string> fresh;
                       for (const auto& v : n.vars)
                           if (bound.insert(v).second) fresh.push_back(v);
                       collect_free_vars(*n.body, bound, out);
                       for (const auto& v : fresh) bound.erase(v);
                       for (const auto& t : n.args)
                           if (t.kind == TermKind::Variable && !bound.count(t.name))
                               out.insert(t.name);
                   },
               },
               f.node());
}

void collect_relation_symbols(const Formula& f, std::set<std::string>& bound_rel,
                              std::set<std::string>& out) {
    std::visit(overloaded{
                   [&](const Truth&) {},
                   [&](const Atom& a) {
                       if (!bound_rel.count(a.pred)) out.insert(a.pred);
                   },
                   [&](const Equality&) {},
                   [&](const Not& n) { collect_relation_symbols(*n.body, bound_rel, out); },
                   [&](const And& n) {
                       collect_relation_symbols(*n.lhs, bound_rel, out);
                       collect_relation_symbols(*n.rhs, bound_rel, out);
                   },
                   [&](const Or& n) {
                       collect_relation_symbols(*n.lhs, bound_rel, out);
                       collect_relation_symbols(*n.rhs, bound_rel, out);
                   },
                   [&](const Implies& n) {
                       collect_relation_symbols(*n.lhs, bound_rel, out);
                       collect_relation_symbols(*n.rhs, bound_rel, out);
                   },
                   [&](const Exists& n) { collect_relation_symbols(*n.body, bound_rel, out); },
                   [&](const ForAll& n) { collect_relation_symbols(*n.body, bound_rel, out); },
                   [&](const Lfp& n) {
                       bool fresh = bound_rel.insert(n.rel_var).second;
                       collect_relation_symbols(*n.body, bound_rel, out);
                       if (fresh) bound_rel.erase(n.rel_var);
                   },
               },
               f.node());
}

std::string term_str(const Term& t) { return t.name; }

}  // namespace

std::set<std::string> free_variables(const Formula& f) {
    std::set<std::string> bound, out;
    collect_free_vars(f, bound, out);
    return out;
}

std::set<std::string> relation_symbols(const Formula& f) {
    std::set<std::string> bound, out;
    collect_relation_symbols(f, bound, out);
    return out;
}

std::string to_sexpr(const Formula& f) {
    return std::visit(
        overloaded{
            [&](const Truth& t) -> std::string { return t.value ? "true" : "false"; },
            [&](const Atom& a) -> std::string {
                std::string s = "(" + a.pred;
                for (const auto& t : a.args) s += " " + term_str(t);
                return s + ")";
            },
            [&](const Equality& e) -> std::string {
                return "(= " + term_str(e.lhs) + " " + term_str(e.rhs) + ")";
            },
            [&](const Not& n) -> std::string { return "(not " + to_sexpr(*n.body) + ")"; },
            [&](const And& n) -> std::string {
                return "(and " + to_sexpr(*n.lhs) + " " + to_sexpr(*n.rhs) + ")";
            },
            [&](const Or& n) -> std::string {
                return "(or " + to_sexpr(*n.lhs) + " " + to_sexpr(*n.rhs) + ")";
            },
            [&](const Implies& n) -> std::string {
                return "(implies " + to_sexpr(*n.lhs) + " " + to_sexpr(*n.rhs) + ")";
            },
            [&](const Exists& n) -> std::string {
                return "(exists " + n.variable + " " + to_sexpr(*n.body) + ")";
            },
            [&](const ForAll& n) -> std::string {
                return "(forall " + n.variable + " " + to_sexpr(*n.body) + ")";
            },
            [&](const Lfp& n) -> std::string {
                std::string s = "(lfp (";
                for (size_t i = 0; i < n.vars.size(); ++i)
                    s += (i ? " " : "") + n.vars[i];
                s += ") " + n.rel_var + " " + to_sexpr(*n.body) + " (";
                for (size_t i = 0; i < n.args.size(); ++i)
                    s += (i ? " " : "") + term_str(n.args[i]);
                return s + "))";
            },
        },
        f.node());
}

namespace {

// Precedence: or < and < unary.
std::string pretty_prec(const Formula& f, int parent) {
    auto wrap = [&](int mine, std::string s) { return mine < parent ? "(" + s + ")" : s; };
    return std::visit(
        overloaded{
            [&](const Truth& t) -> std::string { return t.value ? "true" : "false"; },
            [&](const Atom& a) -> std::string {
                if (a.args.empty()) return a.pred;
                std::string s = a.pred + "(";
                for (size_t i = 0; i < a.args.size(); ++i) s += (i ? "," : "") + term_str(a.args[i]);
                return s + ")";
            },
            [&](const Equality& e) -> std::string {
                return term_str(e.lhs) + " = " + term_str(e.rhs);
            },
            [&](const Not& n) -> std::string {
                if (const auto* eq = std::get_if<Equality>(&n.body->node()))
                    return term_str(eq->lhs) + " != " + term_str(eq->rhs);
                return "~" + pretty_prec(*n.body, 3);
            },
            [&](const And& n) -> std::string {
                return wrap(2, pretty_prec(*n.lhs, 2) + " & " + pretty_prec(*n.rhs, 2));
            },
            [&](const Or& n) -> std::string {
                return wrap(1, pretty_prec(*n.lhs, 1) + " | " + pretty_prec(*n.rhs, 1));
            },
            [&](const Implies& n) -> std::string {
                return wrap(0, pretty_prec(*n.lhs, 1) + " -> " + pretty_prec(*n.rhs, 0));
            },
            [&](const Exists& n) -> std::string {
                return wrap(0, "exists " + n.variable + ". " + pretty_prec(*n.body, 0));
            },
            [&](const ForAll& n) -> std::string {
                return wrap(0, "forall " + n.variable + ". " + pretty_prec(*n.body, 0));
            },
            [&](const Lfp& n) -> std::string {
                std::string s = "lfp[" + n.rel_var + "](";
                for (size_t i = 0; i < n.args.size(); ++i) s += (i ? "," : "") + term_str(n.args[i]);
                return s + ")";
            },
        },
        f.node());
}

}  // namespace

std::string pretty(const Formula& f) { return pretty_prec(f, 0); }

}  // namespace plp::logic
