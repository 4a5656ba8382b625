#include "plp/datalog.hpp"

#include <algorithm>

#include "plp/errors.hpp"

namespace plp {

using logic::FiniteStructure;
using logic::GroundAtomTable;
using logic::Term;
using logic::TermKind;
using logic::Vocabulary;

namespace {

bool is_relation(const BodyLiteral& l) {
    return l.kind == BodyLiteral::Kind::Atom || l.kind == BodyLiteral::Kind::NegAtom;
}

// Relational part of the program vocabulary (constants stripped; the atom
// table is a purely relational notion).
Vocabulary relational_vocab(const ProbProgram& p) {
    Vocabulary full = p.vocabulary();
    Vocabulary v;
    for (const auto& r : full.relations()) v.add_relation(r.name, r.arity);
    return v;
}

}  // namespace

GroundProgram::GroundProgram(const ProbProgram& p, int n,
                             const std::map<std::string, int>& constant_values)
    : n_(n) {
    if (n < 1) throw ProgramError("domain size must be positive");
    p.validate();
    Vocabulary vocab = relational_vocab(p);
    std::uint64_t total = 0;
    for (const auto& r : vocab.relations()) {
        std::uint64_t block = 1;
        for (int i = 0; i < r.arity; ++i) block *= static_cast<std::uint64_t>(n);
        total += block;
    }
    if (total > 64)
        throw ScaleError("ground atom count " + std::to_string(total) +
                         " exceeds the 64-atom grounding limit");
    table_ = GroundAtomTable(vocab, n);
    strata_ = stratify(p);

    for (const auto& name : p.constant_symbols()) {
        auto it = constant_values.find(name);
        if (it == constant_values.end())
            throw ProgramError("no interpretation for constant " + name);
        if (it->second < 1 || it->second > n)
            throw ProgramError("constant " + name + " maps outside the domain");
    }

    auto fact_syms = p.fact_symbols();
    auto head_syms = p.head_symbols();
    for (std::size_t r = 0; r < table_.relation_count(); ++r) {
        const auto& rel = table_.relation(r);
        std::uint64_t block = 0;
        for (std::size_t i = 0; i < table_.relation_block_size(r); ++i)
            block |= std::uint64_t(1) << (table_.relation_offset(r) + i);
        used_mask_ |= block;
        if (fact_syms.count(rel.name)) fact_mask_ |= block;
        if (!head_syms.count(rel.name)) extensional_mask_ |= block;
    }

    rules_.assign(strata_.levels, {});
    for (int level = 0; level < strata_.levels; ++level) {
        for (int idx : strata_.rules_by_level[level]) {
            const Clause& c = p.rules[idx];
            std::vector<std::string> vars;
            auto note = [&](const Term& t) {
                if (t.kind == TermKind::Variable &&
                    std::find(vars.begin(), vars.end(), t.name) == vars.end())
                    vars.push_back(t.name);
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

            std::map<std::string, int> env;
            auto value = [&](const Term& t) {
                return t.kind == TermKind::Variable ? env.at(t.name)
                                                    : constant_values.at(t.name);
            };
            auto ground_one = [&]() {
                GroundRule g;
                for (const auto& l : c.body) {
                    if (l.kind == BodyLiteral::Kind::Eq) {
                        if (value(l.lhs) != value(l.rhs)) return;
                    } else if (l.kind == BodyLiteral::Kind::Neq) {
                        if (value(l.lhs) == value(l.rhs)) return;
                    } else {
                        int rel = table_.relation_index(l.pred);
                        std::vector<int> tuple;
                        for (const auto& t : l.args) tuple.push_back(value(t));
                        std::uint64_t bit = std::uint64_t(1)
                                            << table_.atom_index(rel, tuple);
                        if (l.kind == BodyLiteral::Kind::Atom)
                            g.pos_mask |= bit;
                        else
                            g.neg_mask |= bit;
                    }
                }
                if (g.pos_mask & g.neg_mask) return;  // contradictory body
                std::vector<int> head_tuple;
                for (const auto& t : c.head.args) head_tuple.push_back(value(t));
                g.head_bit = static_cast<int>(
                    table_.atom_index(table_.relation_index(c.head.pred), head_tuple));
                rules_[level].push_back(g);
            };

            std::vector<int> counters(vars.size(), 1);
            while (true) {
                for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = counters[i];
                ground_one();
                std::size_t i = 0;
                while (i < counters.size() && ++counters[i] > n) counters[i++] = 1;
                if (i == counters.size()) break;
            }
        }
    }
}

std::uint64_t GroundProgram::closure(std::uint64_t world) const {
    world &= extensional_mask_;
    for (const auto& level : rules_) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& g : level) {
                if ((world & g.pos_mask) == g.pos_mask && (world & g.neg_mask) == 0 &&
                    !(world >> g.head_bit & 1)) {
                    world |= std::uint64_t(1) << g.head_bit;
                    changed = true;
                }
            }
        }
    }
    return world;
}

FiniteStructure datalog_eval(const ProbProgram& p, const FiniteStructure& ext) {
    Vocabulary full = relational_vocab(p);
    auto heads = p.head_symbols();

    // The input must cover the extensional vocabulary, must not interpret an
    // intensional symbol, and may carry extra relations (passed through).
    for (const auto& r : full.relations())
        if (!heads.count(r.name) && ext.vocab.arity_of(r.name) != r.arity)
            throw ProgramError("input structure must interpret the extensional relation " +
                               r.name + "/" + std::to_string(r.arity));
    for (const auto& r : ext.vocab.relations())
        if (heads.count(r.name))
            throw ProgramError("input structure interprets the intensional symbol " + r.name);
    ext.validate();
    for (const auto& c : p.constant_symbols())
        if (!ext.constant_values.count(c))
            throw ProgramError("no interpretation for constant " + c);

    GroundProgram ground(p, ext.n, ext.constant_values);
    std::uint64_t world = 0;
    for (const auto& [rel, tuples] : ext.extensions) {
        int r = ground.atoms().relation_index(rel);
        if (r < 0) continue;  // extra relation, passed through below
        for (const auto& t : tuples) world |= std::uint64_t(1) << ground.atoms().atom_index(r, t);
    }
    FiniteStructure out = ground.atoms().structure_of(ground.closure(world));
    for (const auto& r : ext.vocab.relations())
        if (full.arity_of(r.name) < 0) {
            out.vocab.add_relation(r.name, r.arity);
            out.extensions[r.name] = ext.extensions.at(r.name);
        }
    for (const auto& c : ext.vocab.constants()) out.vocab.add_constant(c);
    out.constant_values = ext.constant_values;
    return out;
}

bool datalog_formula_holds(const ProbProgram& p, const std::string& pred,
                           const std::vector<int>& tuple, const FiniteStructure& ext) {
    if (p.arity_of(pred) < 0) throw EvalError("unknown predicate " + pred);
    if (static_cast<int>(tuple.size()) != p.arity_of(pred))
        throw EvalError("arity mismatch for " + pred);
    return datalog_eval(p, ext).holds(pred, tuple);
}

}  // namespace plp
