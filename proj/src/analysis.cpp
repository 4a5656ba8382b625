#include "plp/analysis.hpp"

#include <algorithm>
#include <set>

#include "plp/errors.hpp"

namespace plp {

using logic::Term;
using logic::TermKind;

namespace {

bool is_relation(const BodyLiteral& l) {
    return l.kind == BodyLiteral::Kind::Atom || l.kind == BodyLiteral::Kind::NegAtom;
}

// Dependency edges head -> body symbol among intensional symbols.
struct DepEdge {
    std::string from, to;
    bool negative;
};

std::vector<DepEdge> intensional_edges(const ProbProgram& p) {
    auto heads = p.head_symbols();
    std::vector<DepEdge> edges;
    for (const auto& c : p.rules)
        for (const auto& l : c.body)
            if (is_relation(l) && heads.count(l.pred))
                edges.push_back({c.head.pred, l.pred, l.kind == BodyLiteral::Kind::NegAtom});
    return edges;
}

// A cycle through a negative edge, as a symbol path from -> ... -> from.
// Exists precisely when the program is unstratifiable.
std::vector<std::string> negative_cycle(const std::vector<DepEdge>& edges) {
    for (const auto& e : edges) {
        if (!e.negative) continue;
        // need a dependency path e.to ->* e.from to close the cycle
        std::map<std::string, std::string> parent;
        std::vector<std::string> frontier{e.to};
        parent[e.to] = "";
        bool found = e.to == e.from;
        while (!found && !frontier.empty()) {
            std::vector<std::string> next;
            for (const auto& u : frontier)
                for (const auto& d : edges)
                    if (d.from == u && !parent.count(d.to)) {
                        parent[d.to] = u;
                        next.push_back(d.to);
                        if (d.to == e.from) found = true;
                    }
            frontier = std::move(next);
        }
        if (!found) continue;
        std::vector<std::string> path;
        for (std::string v = e.from; !v.empty(); v = parent[v]) path.push_back(v);
        std::reverse(path.begin(), path.end());  // e.to ... e.from
        path.insert(path.begin(), e.from);       // close via the negative edge
        return path;
    }
    return {};
}

}  // namespace

Stratification stratify(const ProbProgram& p) {
    auto heads = p.head_symbols();
    Stratification s;
    for (const auto& f : p.facts) s.level_of[f.name] = 0;
    for (const auto& e : p.extensional_by_use()) s.level_of[e] = 0;
    for (const auto& h : heads) s.level_of[h] = 1;

    const int bound = static_cast<int>(heads.size()) + 1;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& c : p.rules) {
            int& hl = s.level_of[c.head.pred];
            for (const auto& l : c.body) {
                if (!is_relation(l) || !heads.count(l.pred)) continue;
                int need = s.level_of[l.pred] + (l.kind == BodyLiteral::Kind::NegAtom ? 1 : 0);
                if (hl < need) {
                    if (need > bound) {
                        auto cycle = negative_cycle(intensional_edges(p));
                        std::string text = "negation through a recursive cycle:";
                        for (const auto& sym : cycle) text += " " + sym;
                        throw UnstratifiableError(cycle, text);
                    }
                    hl = need;
                    changed = true;
                }
            }
        }
    }

    for (const auto& h : heads) s.levels = std::max(s.levels, s.level_of[h]);
    s.rules_by_level.assign(s.levels, {});
    for (std::size_t i = 0; i < p.rules.size(); ++i)
        s.rules_by_level[s.level_of[p.rules[i].head.pred] - 1].push_back(static_cast<int>(i));
    return s;
}

DeterminateReport check_determinate(const ProbProgram& p) {
    DeterminateReport report;
    for (std::size_t i = 0; i < p.rules.size(); ++i) {
        const auto& c = p.rules[i];
        std::set<std::string> head_vars;
        for (const auto& t : c.head.args)
            if (t.kind == TermKind::Variable) head_vars.insert(t.name);
        std::set<std::string> extra;
        auto note = [&](const Term& t) {
            if (t.kind == TermKind::Variable && !head_vars.count(t.name)) extra.insert(t.name);
        };
        for (const auto& l : c.body) {
            if (is_relation(l)) {
                for (const auto& t : l.args) note(t);
            } else {
                note(l.lhs);
                note(l.rhs);
            }
        }
        if (!extra.empty()) {
            report.determinate = false;
            report.offenders.emplace_back(static_cast<int>(i),
                                          std::vector<std::string>(extra.begin(), extra.end()));
        }
    }
    return report;
}

namespace {

bool strongly_acyclic(const ProbProgram& p) {
    auto heads = p.head_symbols();
    for (const auto& c : p.rules)
        for (const auto& l : c.body)
            if (is_relation(l) && heads.count(l.pred)) return false;
    return true;
}

// Topological order of intensional symbols, dependencies first.
// Empty result signals a cycle.
std::vector<std::string> topo_order(const ProbProgram& p) {
    auto heads = p.head_symbols();
    auto edges = intensional_edges(p);
    std::map<std::string, std::set<std::string>> deps;  // symbol -> body symbols
    for (const auto& h : heads) deps[h];
    for (const auto& e : edges) deps[e.from].insert(e.to);

    std::vector<std::string> order;
    std::set<std::string> placed;
    while (order.size() < heads.size()) {
        bool progressed = false;
        for (const auto& [sym, below] : deps) {
            if (placed.count(sym)) continue;
            bool ready = true;
            for (const auto& d : below)
                if (!placed.count(d)) ready = false;
            if (ready) {
                order.push_back(sym);
                placed.insert(sym);
                progressed = true;
            }
        }
        if (!progressed) return {};
    }
    return order;
}

class Unfolder {
public:
    explicit Unfolder(const ProbProgram& p) : source_(p), heads_(p.head_symbols()) {}

    ProbProgram run() {
        auto order = topo_order(source_);
        if (order.empty() && !heads_.empty())
            throw Error("cannot unfold: intensional dependency cycle");

        ProbProgram out;
        out.facts = source_.facts;
        for (const auto& sym : order) {
            std::vector<Clause> result;
            for (const auto& c : source_.rules)
                if (c.head.pred == sym) expand(c, result);
            // expansion products can repeat; canonical text is the identity
            std::set<std::string> seen;
            for (auto& c : result)
                if (seen.insert(serialize_clause(c)).second) flat_[sym].push_back(c);
            for (const auto& c : flat_[sym]) out.rules.push_back(c);
        }
        out.validate();
        return out;
    }

private:
    // Appends all intensional-free expansions of c to out.
    void expand(const Clause& c, std::vector<Clause>& out) {
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            const auto& l = c.body[i];
            if (!is_relation(l) || !heads_.count(l.pred)) continue;
            Clause rest = c;
            rest.body.erase(rest.body.begin() + static_cast<long>(i));
            if (l.kind == BodyLiteral::Kind::Atom)
                expand_positive(rest, i, l, out);
            else
                expand_negative(rest, i, l, out);
            return;
        }
        out.push_back(c);
    }

    // Replace q(args) by each flattened clause of q, head-matched onto args.
    void expand_positive(const Clause& rest, std::size_t at, const BodyLiteral& call,
                         std::vector<Clause>& out) {
        for (const auto& def : flat_.at(call.pred)) {
            Clause next = rest;
            auto piece = instantiate(def, call.args, next);
            next.body.insert(next.body.begin() + static_cast<long>(at), piece.begin(),
                             piece.end());
            expand(next, out);
        }
    }

    // De Morgan: not-q(args) is, per defining clause, a disjunction of negated
    // body literals (and negated head-match equalities); the conjunction over
    // clauses multiplies out into one expansion per choice of disjunct. Only
    // possible when no defining clause has body-only variables.
    void expand_negative(const Clause& rest, std::size_t at, const BodyLiteral& call,
                         std::vector<Clause>& out) {
        const auto& defs = flat_.at(call.pred);
        std::vector<std::vector<BodyLiteral>> alternatives;  // one list per def clause
        for (const auto& def : defs) {
            std::set<std::string> head_vars;
            for (const auto& t : def.head.args)
                if (t.kind == TermKind::Variable) head_vars.insert(t.name);
            for (const auto& l : def.body) {
                auto check = [&](const Term& t) {
                    if (t.kind == TermKind::Variable && !head_vars.count(t.name))
                        throw Error("cannot unfold negated " + call.pred +
                                    ": defining clause has body-only variable " + t.name);
                };
                if (is_relation(l)) {
                    for (const auto& t : l.args) check(t);
                } else {
                    check(l.lhs);
                    check(l.rhs);
                }
            }
            Clause scratch = rest;
            auto piece = instantiate(def, call.args, scratch);
            std::vector<BodyLiteral> negated;
            for (const auto& l : piece) negated.push_back(negate(l));
            if (negated.empty()) return;  // clause always covers: complement empty
            alternatives.push_back(std::move(negated));
        }

        std::vector<std::size_t> choice(alternatives.size(), 0);
        while (true) {
            Clause next = rest;
            for (std::size_t d = 0; d < alternatives.size(); ++d)
                next.body.insert(next.body.begin() + static_cast<long>(at + d),
                                 alternatives[d][choice[d]]);
            expand(next, out);
            std::size_t d = 0;
            while (d < choice.size() && ++choice[d] == alternatives[d].size()) choice[d++] = 0;
            if (d == choice.size()) break;
        }
    }

    static BodyLiteral negate(const BodyLiteral& l) {
        BodyLiteral r = l;
        switch (l.kind) {
            case BodyLiteral::Kind::Atom: r.kind = BodyLiteral::Kind::NegAtom; break;
            case BodyLiteral::Kind::NegAtom: r.kind = BodyLiteral::Kind::Atom; break;
            case BodyLiteral::Kind::Eq: r.kind = BodyLiteral::Kind::Neq; break;
            case BodyLiteral::Kind::Neq: r.kind = BodyLiteral::Kind::Eq; break;
        }
        return r;
    }

    // Body of def with variables renamed apart from `host` and head variables
    // bound to the call arguments; repeated or constant head positions become
    // explicit equalities.
    std::vector<BodyLiteral> instantiate(const Clause& def, const std::vector<Term>& args,
                                         const Clause& host) {
        std::set<std::string> used;
        auto collect = [&used](const Clause& c) {
            auto note = [&used](const Term& t) {
                if (t.kind == TermKind::Variable) used.insert(t.name);
            };
            for (const auto& t : c.head.args) note(t);
            for (const auto& l : c.body) {
                if (is_relation(l)) {
                    for (const auto& t : l.args) note(t);
                } else {
                    note(l.lhs);
                    note(l.rhs);
                }
            }
        };
        collect(host);

        std::map<std::string, Term> subst;
        std::vector<BodyLiteral> extra_eqs;
        for (std::size_t i = 0; i < def.head.args.size(); ++i) {
            const Term& formal = def.head.args[i];
            if (formal.kind == TermKind::Variable && !subst.count(formal.name))
                subst[formal.name] = args[i];
            else  // constant or repeated variable: pin with an equality
                extra_eqs.push_back(BodyLiteral::eq(
                    formal.kind == TermKind::Variable ? subst.at(formal.name) : formal,
                    args[i]));
        }
        auto fresh = [&](const std::string& base) {
            for (int k = 1;; ++k) {
                std::string cand = base + "_" + std::to_string(k);
                if (!used.count(cand)) {
                    used.insert(cand);
                    return cand;
                }
            }
        };
        auto apply = [&](const Term& t) -> Term {
            if (t.kind != TermKind::Variable) return t;
            auto it = subst.find(t.name);
            if (it == subst.end()) {
                Term nv = logic::var(fresh(t.name));
                subst[t.name] = nv;
                return nv;
            }
            return it->second;
        };

        std::vector<BodyLiteral> body = extra_eqs;
        for (const auto& l : def.body) {
            BodyLiteral r = l;
            if (is_relation(l)) {
                for (auto& t : r.args) t = apply(t);
            } else {
                r.lhs = apply(r.lhs);
                r.rhs = apply(r.rhs);
            }
            body.push_back(std::move(r));
        }
        return body;
    }

    const ProbProgram& source_;
    std::set<std::string> heads_;
    std::map<std::string, std::vector<Clause>> flat_;
};

}  // namespace

bool check_acyclic(const ProbProgram& p) {
    if (strongly_acyclic(p)) return true;
    try {
        return strongly_acyclic(unfold_acyclic(p));
    } catch (const Error&) {
        return false;
    }
}

ProbProgram unfold_acyclic(const ProbProgram& p) { return Unfolder(p).run(); }

}  // namespace plp
