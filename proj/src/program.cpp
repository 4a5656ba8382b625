#include "plp/program.hpp"

#include <algorithm>
#include <map>

namespace plp {

using logic::Term;
using logic::TermKind;

std::set<std::string> ProbProgram::fact_symbols() const {
    std::set<std::string> out;
    for (const auto& f : facts) out.insert(f.name);
    return out;
}

std::set<std::string> ProbProgram::head_symbols() const {
    std::set<std::string> out;
    for (const auto& c : rules) out.insert(c.head.pred);
    return out;
}

std::set<std::string> ProbProgram::extensional_by_use() const {
    auto f = fact_symbols();
    auto h = head_symbols();
    std::set<std::string> out;
    for (const auto& c : rules)
        for (const auto& l : c.body)
            if (l.kind == BodyLiteral::Kind::Atom || l.kind == BodyLiteral::Kind::NegAtom)
                if (!f.count(l.pred) && !h.count(l.pred)) out.insert(l.pred);
    return out;
}

std::set<std::string> ProbProgram::constant_symbols() const {
    std::set<std::string> out;
    auto scan = [&](const Term& t) {
        if (t.kind == TermKind::Constant) out.insert(t.name);
    };
    for (const auto& c : rules) {
        for (const auto& t : c.head.args) scan(t);
        for (const auto& l : c.body) {
            if (l.kind == BodyLiteral::Kind::Atom || l.kind == BodyLiteral::Kind::NegAtom) {
                for (const auto& t : l.args) scan(t);
            } else {
                scan(l.lhs);
                scan(l.rhs);
            }
        }
    }
    return out;
}

const ProbFact* ProbProgram::fact(const std::string& name) const {
    for (const auto& f : facts)
        if (f.name == name) return &f;
    return nullptr;
}

int ProbProgram::arity_of(const std::string& rel) const {
    if (const auto* f = fact(rel)) return f->arity;
    for (const auto& c : rules) {
        if (c.head.pred == rel) return static_cast<int>(c.head.args.size());
        for (const auto& l : c.body)
            if ((l.kind == BodyLiteral::Kind::Atom || l.kind == BodyLiteral::Kind::NegAtom) &&
                l.pred == rel)
                return static_cast<int>(l.args.size());
    }
    return -1;
}

logic::Vocabulary ProbProgram::vocabulary() const {
    logic::Vocabulary v;
    std::map<std::string, int> arities;
    auto note = [&](const std::string& name, int arity) {
        auto it = arities.find(name);
        if (it == arities.end())
            arities[name] = arity;
        else if (it->second != arity)
            throw Error("relation " + name + " used with inconsistent arities");
    };
    for (const auto& f : facts) note(f.name, f.arity);
    for (const auto& c : rules) {
        note(c.head.pred, static_cast<int>(c.head.args.size()));
        for (const auto& l : c.body)
            if (l.kind == BodyLiteral::Kind::Atom || l.kind == BodyLiteral::Kind::NegAtom)
                note(l.pred, static_cast<int>(l.args.size()));
    }
    for (const auto& [name, arity] : arities) v.add_relation(name, arity);
    for (const auto& c : constant_symbols()) v.add_constant(c);
    return v;
}

void ProbProgram::validate() const {
    vocabulary();  // arity consistency

    std::set<std::string> seen_facts;
    for (const auto& f : facts) {
        if (!seen_facts.insert(f.name).second)
            throw Error("duplicate probabilistic fact declaration for " + f.name);
        if (f.q < 0 || f.q > 1)
            throw Error("probability out of range for fact " + f.name + ": " + to_string(f.q));
        if (f.arity < 0) throw Error("negative arity for fact " + f.name);
    }

    auto fsyms = fact_symbols();
    for (const auto& c : rules)
        if (fsyms.count(c.head.pred))
            throw Error("fact symbol " + c.head.pred + " reused as rule head");

    for (const auto& c : rules) {
        std::set<std::string> head_vars, positive_vars, all_vars;
        for (const auto& t : c.head.args)
            if (t.kind == TermKind::Variable) {
                head_vars.insert(t.name);
                all_vars.insert(t.name);
            }
        for (const auto& l : c.body) {
            if (l.kind == BodyLiteral::Kind::Atom) {
                for (const auto& t : l.args)
                    if (t.kind == TermKind::Variable) {
                        positive_vars.insert(t.name);
                        all_vars.insert(t.name);
                    }
            } else if (l.kind == BodyLiteral::Kind::NegAtom) {
                for (const auto& t : l.args)
                    if (t.kind == TermKind::Variable) all_vars.insert(t.name);
            } else {
                for (const Term* t : {&l.lhs, &l.rhs})
                    if (t->kind == TermKind::Variable) all_vars.insert(t->name);
            }
        }
        for (const auto& v : all_vars)
            if (!head_vars.count(v) && !positive_vars.count(v))
                throw Error("unsafe variable " + v + " in clause with head " + c.head.pred +
                            ": it occurs in neither the head nor a positive body atom");
    }
}

namespace {

std::string term_text(const Term& t, const std::map<std::string, std::string>& renaming) {
    if (t.kind == TermKind::Constant) return t.name;
    return renaming.at(t.name);
}

std::string atom_text(const std::string& pred, const std::vector<Term>& args,
                      const std::map<std::string, std::string>& renaming) {
    if (args.empty()) return pred;
    std::string s = pred + "(";
    for (std::size_t i = 0; i < args.size(); ++i)
        s += (i ? "," : "") + term_text(args[i], renaming);
    return s + ")";
}

std::map<std::string, std::string> clause_renaming(const Clause& c) {
    std::map<std::string, std::string> renaming;
    int next = 0;
    auto note = [&](const Term& t) {
        if (t.kind == TermKind::Variable && !renaming.count(t.name))
            renaming[t.name] = "X" + std::to_string(++next);
    };
    for (const auto& t : c.head.args) note(t);
    for (const auto& l : c.body) {
        if (l.kind == BodyLiteral::Kind::Atom || l.kind == BodyLiteral::Kind::NegAtom) {
            for (const auto& t : l.args) note(t);
        } else {
            note(l.lhs);
            note(l.rhs);
        }
    }
    return renaming;
}

}  // namespace

std::string serialize_clause(const Clause& c) {
    auto renaming = clause_renaming(c);
    std::string s = atom_text(c.head.pred, c.head.args, renaming);
    if (!c.body.empty()) {
        s += " :- ";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            const auto& l = c.body[i];
            if (i) s += ", ";
            switch (l.kind) {
                case BodyLiteral::Kind::Atom:
                    s += atom_text(l.pred, l.args, renaming);
                    break;
                case BodyLiteral::Kind::NegAtom:
                    s += "\\+ " + atom_text(l.pred, l.args, renaming);
                    break;
                case BodyLiteral::Kind::Eq:
                    s += term_text(l.lhs, renaming) + " = " + term_text(l.rhs, renaming);
                    break;
                case BodyLiteral::Kind::Neq:
                    s += term_text(l.lhs, renaming) + " \\= " + term_text(l.rhs, renaming);
                    break;
            }
        }
    }
    return s + ".";
}

std::string serialize_program(const ProbProgram& p) {
    std::string out;
    std::vector<const ProbFact*> facts;
    facts.reserve(p.facts.size());
    for (const auto& f : p.facts) facts.push_back(&f);
    std::sort(facts.begin(), facts.end(),
              [](const ProbFact* a, const ProbFact* b) { return a->name < b->name; });
    for (const auto* f : facts) {
        out += to_string(f->q) + " :: " + f->name;
        if (f->arity > 0) {
            out += "(";
            for (int i = 0; i < f->arity; ++i)
                out += std::string(i ? "," : "") + "X" + std::to_string(i + 1);
            out += ")";
        }
        out += ".\n";
    }

    std::vector<std::pair<std::string, std::string>> clauses;  // (sort key, text)
    clauses.reserve(p.rules.size());
    for (const auto& c : p.rules) {
        std::string text = serialize_clause(c);
        clauses.emplace_back(c.head.pred + "\x01" + text, text);
    }
    std::sort(clauses.begin(), clauses.end());
    if (!facts.empty() && !clauses.empty()) out += "\n";
    for (const auto& [key, text] : clauses) {
        (void)key;
        out += text + "\n";
    }
    return out;
}

}  // namespace plp
