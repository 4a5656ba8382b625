#include "plp/asym.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "plp/analysis.hpp"
#include "plp/errors.hpp"
#include "plp/exact.hpp"
#include "plp/logic/structure.hpp"

namespace plp {

namespace {

// Ground-atom indexing over block identifiers 0..b-1. Wraps the atom table
// for b >= 1; a domain of zero blocks leaves only the nullary atoms.
class BlockAtoms {
public:
    BlockAtoms(const logic::Vocabulary& vocab, int b) {
        if (b >= 1) {
            table_.emplace(vocab, b);
            return;
        }
        for (const auto& r : vocab.relations())
            if (r.arity == 0) nullary_.push_back(r.name);
    }

    std::size_t size() const { return table_ ? table_->size() : nullary_.size(); }

    std::size_t index(const std::string& rel, const std::vector<int>& blocks) const {
        if (table_) {
            int ri = table_->relation_index(rel);
            if (ri < 0) throw ProgramError("unknown extensional relation: " + rel);
            std::vector<int> tuple(blocks.size());
            for (std::size_t i = 0; i < blocks.size(); ++i) tuple[i] = blocks[i] + 1;
            return table_->atom_index(static_cast<std::size_t>(ri), tuple);
        }
        auto it = std::find(nullary_.begin(), nullary_.end(), rel);
        if (it == nullary_.end()) throw ProgramError("unknown extensional relation: " + rel);
        return static_cast<std::size_t>(it - nullary_.begin());
    }

    // relation name plus 0-based block tuple
    std::pair<std::string, std::vector<int>> decode(std::size_t i) const {
        if (table_) {
            auto [ri, tuple] = table_->decode(i);
            for (int& e : tuple) --e;
            return {table_->relation(ri).name, std::move(tuple)};
        }
        return {nullary_[i], {}};
    }

private:
    std::optional<logic::GroundAtomTable> table_;
    std::vector<std::string> nullary_;
};

constexpr std::size_t kMaxTypeAtoms = 20;

void each_rgs(int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> rgs(static_cast<std::size_t>(std::max(k, 0)), 0);
    std::function<void(int, int)> rec = [&](int i, int used) {
        if (i == k) {
            fn(rgs);
            return;
        }
        for (int v = 0; v <= used; ++v) {
            rgs[static_cast<std::size_t>(i)] = v;
            rec(i + 1, v == used ? used + 1 : used);
        }
    };
    rec(0, 0);
}

// First variable index of each block, in block order.
std::vector<int> block_representatives(const QfType& t) {
    std::vector<int> rep(static_cast<std::size_t>(t.blocks()), -1);
    for (std::size_t i = 0; i < t.block_of.size(); ++i) {
        auto b = static_cast<std::size_t>(t.block_of[i]);
        if (rep[b] < 0) rep[b] = static_cast<int>(i);
    }
    return rep;
}

// The diagram induced on a sub-tuple of slots, blocks renumbered by first
// occurrence along the sub-tuple.
QfType restrict_type(const QfType& t, const std::vector<int>& slots,
                     const logic::Vocabulary& vocab) {
    QfType out;
    out.block_of.resize(slots.size());
    std::vector<int> to_old;
    std::map<int, int> seen;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        int ob = t.block_of[static_cast<std::size_t>(slots[i])];
        auto [it, fresh] = seen.emplace(ob, static_cast<int>(to_old.size()));
        if (fresh) to_old.push_back(ob);
        out.block_of[i] = it->second;
    }
    BlockAtoms from(vocab, t.blocks());
    BlockAtoms to(vocab, static_cast<int>(to_old.size()));
    for (std::size_t j = 0; j < to.size(); ++j) {
        auto [rel, blocks] = to.decode(j);
        for (int& e : blocks) e = to_old[static_cast<std::size_t>(e)];
        if (t.polarity >> from.index(rel, blocks) & 1) out.polarity |= std::uint64_t{1} << j;
    }
    return out;
}

int term_block(const logic::Term& t, const std::map<std::string, int>& env) {
    if (t.kind == logic::TermKind::Constant)
        throw EvalError("almost-sure evaluation is constant-free, got '" + t.name + "'");
    auto it = env.find(t.name);
    if (it == env.end())
        throw EvalError("unbound variable '" + t.name + "' in almost-sure evaluation");
    return it->second;
}

// Truth in the countable homogeneous limit: atoms over the current blocks
// are read from `world`; an existential tries the current blocks first and
// then one fresh block under every polarity of its new atoms.
bool eval_generic(const logic::Vocabulary& vocab, const logic::Formula& f,
                  std::map<std::string, int>& env, int blocks, std::uint64_t world) {
    const auto& node = f.node();
    if (const auto* t = std::get_if<logic::Truth>(&node)) return t->value;
    if (const auto* a = std::get_if<logic::Atom>(&node)) {
        int arity = vocab.arity_of(a->pred);
        if (arity < 0)
            throw ProgramError("symbol '" + a->pred +
                               "' is not extensional; eliminate defined symbols first");
        if (arity != static_cast<int>(a->args.size()))
            throw ProgramError("arity mismatch for relation '" + a->pred + "'");
        std::vector<int> tuple;
        tuple.reserve(a->args.size());
        for (const auto& t : a->args) tuple.push_back(term_block(t, env));
        return world >> BlockAtoms(vocab, blocks).index(a->pred, tuple) & 1;
    }
    if (const auto* e = std::get_if<logic::Equality>(&node))
        return term_block(e->lhs, env) == term_block(e->rhs, env);
    if (const auto* n = std::get_if<logic::Not>(&node))
        return !eval_generic(vocab, *n->body, env, blocks, world);
    if (const auto* c = std::get_if<logic::And>(&node))
        return eval_generic(vocab, *c->lhs, env, blocks, world) &&
               eval_generic(vocab, *c->rhs, env, blocks, world);
    if (const auto* d = std::get_if<logic::Or>(&node))
        return eval_generic(vocab, *d->lhs, env, blocks, world) ||
               eval_generic(vocab, *d->rhs, env, blocks, world);
    if (const auto* ex = std::get_if<logic::Exists>(&node)) {
        std::optional<int> saved;
        if (auto it = env.find(ex->variable); it != env.end()) saved = it->second;
        bool found = false;
        for (int j = 0; j < blocks && !found; ++j) {
            env[ex->variable] = j;
            found = eval_generic(vocab, *ex->body, env, blocks, world);
        }
        if (!found) {
            BlockAtoms old(vocab, blocks);
            BlockAtoms grown(vocab, blocks + 1);
            if (grown.size() > 63)
                throw ScaleError("generic evaluation needs more than 63 atom bits");
            std::uint64_t base = 0;
            std::vector<std::size_t> fresh;
            for (std::size_t j = 0; j < grown.size(); ++j) {
                auto [rel, tuple] = grown.decode(j);
                bool uses_new = std::any_of(tuple.begin(), tuple.end(),
                                            [&](int e) { return e == blocks; });
                if (uses_new)
                    fresh.push_back(j);
                else if (world >> old.index(rel, tuple) & 1)
                    base |= std::uint64_t{1} << j;
            }
            env[ex->variable] = blocks;
            for (std::uint64_t pick = 0; pick < (std::uint64_t{1} << fresh.size()) && !found;
                 ++pick) {
                std::uint64_t grown_world = base;
                for (std::size_t i = 0; i < fresh.size(); ++i)
                    if (pick >> i & 1) grown_world |= std::uint64_t{1} << fresh[i];
                found = eval_generic(vocab, *ex->body, env, blocks + 1, grown_world);
            }
        }
        if (saved)
            env[ex->variable] = *saved;
        else
            env.erase(ex->variable);
        return found;
    }
    if (std::holds_alternative<logic::Lfp>(node))
        throw ProgramError("almost-sure evaluation handles first-order formulas only");
    throw Error("unexpected connective after desugaring");
}

logic::Vocabulary occurring_vocab(const logic::Formula& f, const logic::Vocabulary& extensional) {
    logic::Vocabulary v;
    for (const auto& sym : logic::relation_symbols(f)) {
        int arity = extensional.arity_of(sym);
        if (arity < 0)
            throw ProgramError("symbol '" + sym +
                               "' is not extensional; eliminate defined symbols first");
        v.add_relation(sym, arity);
    }
    return v;
}

}  // namespace

int QfType::blocks() const {
    return block_of.empty() ? 0 : 1 + *std::max_element(block_of.begin(), block_of.end());
}

std::size_t type_atom_count(const logic::Vocabulary& extensional, int blocks) {
    return BlockAtoms(extensional, blocks).size();
}

std::vector<QfType> enumerate_qf_types(const logic::Vocabulary& extensional, int k) {
    if (!extensional.constants().empty())
        throw ConstantsError("diagram enumeration is constant-free");
    if (k < 0) throw ProgramError("diagram enumeration needs a nonnegative tuple length");
    std::vector<QfType> out;
    each_rgs(k, [&](const std::vector<int>& rgs) {
        QfType t;
        t.block_of = rgs;
        std::size_t atoms = type_atom_count(extensional, t.blocks());
        if (atoms > kMaxTypeAtoms)
            throw ScaleError("a diagram over " + std::to_string(t.blocks()) +
                             " blocks needs " + std::to_string(atoms) +
                             " atom bits, beyond the guard of " + std::to_string(kMaxTypeAtoms));
        for (std::uint64_t pol = 0; pol < (std::uint64_t{1} << atoms); ++pol) {
            t.polarity = pol;
            out.push_back(t);
        }
    });
    return out;
}

logic::FormulaPtr type_formula(const QfType& t, const std::vector<std::string>& vars,
                               const logic::Vocabulary& extensional) {
    if (static_cast<int>(vars.size()) != t.vars())
        throw ProgramError("diagram arity does not match the variable tuple");
    auto rep = block_representatives(t);
    auto rep_var = [&](int block) { return logic::var(vars[static_cast<std::size_t>(rep[static_cast<std::size_t>(block)])]); };
    std::vector<logic::FormulaPtr> parts;
    for (std::size_t i = 0; i < t.block_of.size(); ++i) {
        int b = t.block_of[i];
        if (rep[static_cast<std::size_t>(b)] != static_cast<int>(i))
            parts.push_back(logic::equal(logic::var(vars[i]), rep_var(b)));
    }
    for (int g = 0; g < t.blocks(); ++g)
        for (int h = g + 1; h < t.blocks(); ++h)
            parts.push_back(logic::negation(logic::equal(rep_var(g), rep_var(h))));
    BlockAtoms atoms(extensional, t.blocks());
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        auto [rel, blocks] = atoms.decode(j);
        std::vector<logic::Term> args;
        args.reserve(blocks.size());
        for (int b : blocks) args.push_back(rep_var(b));
        auto lit = logic::atom(rel, std::move(args));
        parts.push_back(t.polarity >> j & 1 ? lit : logic::negation(lit));
    }
    return logic::conj_all(parts);
}

std::string type_name(const QfType& t, const logic::Vocabulary& extensional) {
    std::vector<std::string> vars;
    for (int i = 0; i < t.vars(); ++i) vars.push_back("x" + std::to_string(i + 1));
    return logic::pretty(*type_formula(t, vars, extensional));
}

bool generic_eval(const logic::Formula& f, const QfType& context,
                  const std::vector<std::string>& vars,
                  const logic::Vocabulary& extensional) {
    if (!f.first_order())
        throw ProgramError("almost-sure evaluation handles first-order formulas only");
    if (static_cast<int>(vars.size()) != context.vars())
        throw ProgramError("context diagram does not match the variable tuple");
    std::map<std::string, int> env;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (!env.emplace(vars[i], context.block_of[i]).second)
            throw ProgramError("duplicate variable in the context tuple: " + vars[i]);
    for (const auto& v : logic::free_variables(f))
        if (!env.count(v)) throw EvalError("free variable '" + v + "' missing from the context tuple");
    occurring_vocab(f, extensional);
    auto ds = logic::desugar(std::make_shared<const logic::Formula>(f));
    return eval_generic(extensional, *ds, env, context.blocks(), context.polarity);
}

logic::FormulaPtr asymptotic_qe(const logic::Formula& f, const std::vector<std::string>& vars,
                                const logic::Vocabulary& extensional) {
    logic::Vocabulary used = occurring_vocab(f, extensional);
    auto types = enumerate_qf_types(used, static_cast<int>(vars.size()));
    std::vector<logic::FormulaPtr> accepted;
    for (const auto& t : types)
        if (generic_eval(f, t, vars, used)) accepted.push_back(type_formula(t, vars, used));
    if (accepted.empty()) return logic::truth(false);
    if (accepted.size() == types.size()) return logic::truth(true);
    return logic::disj_all(accepted);
}

std::size_t TypeTable::total() const {
    std::size_t n = 0;
    for (const auto& [pred, set] : accepted) n += set.size();
    return n;
}

namespace {

struct RulePlan {
    std::string head_pred;
    std::vector<std::string> vars;
    std::vector<int> head_slots;
    std::vector<std::pair<int, int>> eqs, neqs;
    struct ExtLit {
        std::string rel;
        std::vector<int> slots;
        bool negated = false;
    };
    struct IntLit {
        std::string pred;
        std::vector<int> slots;
        bool negated = false;
    };
    std::vector<ExtLit> ext;
    std::vector<IntLit> intens;
};

RulePlan plan_rule(const Clause& c, const logic::Vocabulary& type_vocab) {
    RulePlan plan;
    plan.head_pred = c.head.pred;
    std::map<std::string, int> slot_of;
    auto slot = [&](const logic::Term& t) {
        if (t.kind == logic::TermKind::Constant)
            throw ConstantsError("the limit analysis is constant-free");
        auto [it, fresh] = slot_of.emplace(t.name, static_cast<int>(plan.vars.size()));
        if (fresh) plan.vars.push_back(t.name);
        return it->second;
    };
    for (const auto& t : c.head.args) plan.head_slots.push_back(slot(t));
    for (const auto& lit : c.body) {
        switch (lit.kind) {
            case BodyLiteral::Kind::Eq:
                plan.eqs.emplace_back(slot(lit.lhs), slot(lit.rhs));
                break;
            case BodyLiteral::Kind::Neq:
                plan.neqs.emplace_back(slot(lit.lhs), slot(lit.rhs));
                break;
            case BodyLiteral::Kind::Atom:
            case BodyLiteral::Kind::NegAtom: {
                std::vector<int> slots;
                slots.reserve(lit.args.size());
                for (const auto& t : lit.args) slots.push_back(slot(t));
                bool neg = lit.kind == BodyLiteral::Kind::NegAtom;
                if (type_vocab.has_relation(lit.pred))
                    plan.ext.push_back({lit.pred, std::move(slots), neg});
                else
                    plan.intens.push_back({lit.pred, std::move(slots), neg});
                break;
            }
        }
    }
    return plan;
}

TypeTable fixpoint_impl(const ProbProgram& p, const Stratification& strat,
                        const logic::Vocabulary& type_vocab, FixpointStats* stats) {
    TypeTable table;
    for (const auto& pred : p.head_symbols()) table.accepted[pred];
    for (const auto& level : strat.rules_by_level) {
        std::vector<RulePlan> plans;
        std::vector<std::vector<QfType>> candidates;
        for (int idx : level) {
            plans.push_back(plan_rule(p.rules[static_cast<std::size_t>(idx)], type_vocab));
            candidates.push_back(
                enumerate_qf_types(type_vocab, static_cast<int>(plans.back().vars.size())));
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t r = 0; r < plans.size(); ++r) {
                const RulePlan& plan = plans[r];
                std::map<int, BlockAtoms> atoms_by_blocks;
                for (const QfType& sigma : candidates[r]) {
                    auto block = [&](int s) {
                        return sigma.block_of[static_cast<std::size_t>(s)];
                    };
                    bool ok = true;
                    for (auto [a, b] : plan.eqs)
                        if (block(a) != block(b)) { ok = false; break; }
                    if (ok)
                        for (auto [a, b] : plan.neqs)
                            if (block(a) == block(b)) { ok = false; break; }
                    if (!ok) continue;
                    auto at = atoms_by_blocks.find(sigma.blocks());
                    if (at == atoms_by_blocks.end())
                        at = atoms_by_blocks.emplace(sigma.blocks(),
                                                     BlockAtoms(type_vocab, sigma.blocks()))
                                 .first;
                    for (const auto& lit : plan.ext) {
                        std::vector<int> blocks;
                        blocks.reserve(lit.slots.size());
                        for (int s : lit.slots) blocks.push_back(block(s));
                        bool holds = sigma.polarity >> at->second.index(lit.rel, blocks) & 1;
                        if (holds == lit.negated) { ok = false; break; }
                    }
                    if (!ok) continue;
                    for (const auto& lit : plan.intens) {
                        bool holds = table.accepted.at(lit.pred)
                                         .count(restrict_type(sigma, lit.slots, type_vocab)) > 0;
                        if (holds == lit.negated) { ok = false; break; }
                    }
                    if (!ok) continue;
                    if (table.accepted[plan.head_pred]
                            .insert(restrict_type(sigma, plan.head_slots, type_vocab))
                            .second)
                        changed = true;
                }
            }
            if (stats) stats->accepted_per_pass.push_back(table.total());
        }
    }
    return table;
}

logic::Vocabulary fixpoint_type_vocab(const ProbProgram& p) {
    logic::Vocabulary v;
    for (const auto& f : p.facts)
        if (!(f.q == 0) && !(f.q == 1)) v.add_relation(f.name, f.arity);
    for (const auto& rel : p.extensional_by_use()) {
        int arity = p.arity_of(rel);
        if (arity == 0)
            throw ProgramError("nullary relation '" + rel +
                               "' has no declared probability; the limit needs one to split on");
        v.add_relation(rel, arity);
    }
    return v;
}

}  // namespace

TypeTable asymptotic_fixpoint(const ProbProgram& p, FixpointStats* stats) {
    p.validate();
    if (p.has_constants()) throw ConstantsError("the limit analysis is constant-free");
    for (const auto& f : p.facts) {
        if (f.q == 0 || f.q == 1)
            throw ProgramError("fact '" + f.name +
                               "' has a boundary probability; substitute it away first");
        if (f.arity == 0)
            throw ProgramError("nullary fact '" + f.name +
                               "' must be split off before the limit analysis");
    }
    Stratification strat = stratify(p);
    return fixpoint_impl(p, strat, fixpoint_type_vocab(p), stats);
}

namespace {

// Rewrites rule bodies under a fixed truth value for one extensional
// relation: satisfied literals are dropped, falsified literals drop the
// whole clause.
std::vector<Clause> pin_relation(const std::vector<Clause>& rules, const std::string& rel,
                                 bool value) {
    std::vector<Clause> out;
    for (const auto& c : rules) {
        Clause kept;
        kept.head = c.head;
        kept.line = c.line;
        bool alive = true;
        for (const auto& lit : c.body) {
            bool is_atom =
                lit.kind == BodyLiteral::Kind::Atom || lit.kind == BodyLiteral::Kind::NegAtom;
            if (is_atom && lit.pred == rel) {
                bool truth = lit.kind == BodyLiteral::Kind::Atom ? value : !value;
                if (!truth) { alive = false; break; }
                continue;
            }
            kept.body.push_back(lit);
        }
        if (alive) out.push_back(std::move(kept));
    }
    return out;
}

std::vector<NullaryBranch> split_impl(const ProbProgram& p,
                                      const std::vector<ProbFact>& split_facts) {
    if (split_facts.size() > 12)
        throw ScaleError("splitting on " + std::to_string(split_facts.size()) +
                         " nullary facts exceeds the branch guard");
    std::vector<NullaryBranch> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << split_facts.size()); ++mask) {
        NullaryBranch branch;
        branch.weight = 1;
        branch.program.rules = p.rules;
        std::set<std::string> split_names;
        for (std::size_t i = 0; i < split_facts.size(); ++i) {
            bool value = mask >> i & 1;
            branch.values[split_facts[i].name] = value;
            split_names.insert(split_facts[i].name);
            branch.weight *= value ? split_facts[i].q : 1 - split_facts[i].q;
            branch.program.rules = pin_relation(branch.program.rules, split_facts[i].name, value);
        }
        for (const auto& f : p.facts)
            if (!split_names.count(f.name)) branch.program.facts.push_back(f);
        out.push_back(std::move(branch));
    }
    return out;
}

}  // namespace

std::vector<NullaryBranch> nullary_case_split(const ProbProgram& p) {
    p.validate();
    std::vector<ProbFact> nullary;
    for (const auto& f : p.facts)
        if (f.arity == 0) nullary.push_back(f);
    std::sort(nullary.begin(), nullary.end(),
              [](const ProbFact& a, const ProbFact& b) { return a.name < b.name; });
    return split_impl(p, nullary);
}

const ProbProgram& TransformResult::program() const {
    if (branches.size() != 1)
        throw ProgramError("the transform split on nullary facts; inspect the branches");
    return branches.front().program;
}

namespace {

// Drops atom bits acceptance never depends on, then merges the surviving
// polarity masks. The union of the described diagrams is unchanged.
void reduce_masks(std::vector<std::size_t>& kept, std::set<std::uint64_t>& masks) {
    bool shrunk = true;
    while (shrunk) {
        shrunk = false;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            std::uint64_t bit = std::uint64_t{1} << kept[i];
            bool closed = std::all_of(masks.begin(), masks.end(), [&](std::uint64_t m) {
                return masks.count(m ^ bit) > 0;
            });
            if (!closed) continue;
            std::set<std::uint64_t> projected;
            for (std::uint64_t m : masks) projected.insert(m & ~bit);
            masks = std::move(projected);
            kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
            shrunk = true;
            break;
        }
    }
}

std::string head_var(int i) { return "X" + std::to_string(i + 1); }

// One clause per surviving polarity mask of one partition: the equality
// pattern first, then the kept literals in atom order.
void emit_partition(const std::string& pred, const std::vector<int>& rgs,
                    std::set<std::uint64_t> masks, const logic::Vocabulary& type_vocab,
                    std::vector<Clause>& out) {
    QfType shape;
    shape.block_of = rgs;
    auto rep = block_representatives(shape);
    BlockAtoms atoms(type_vocab, shape.blocks());
    std::vector<std::size_t> kept(atoms.size());
    for (std::size_t j = 0; j < kept.size(); ++j) kept[j] = j;
    reduce_masks(kept, masks);

    std::vector<BodyLiteral> pattern;
    for (std::size_t i = 0; i < rgs.size(); ++i) {
        int b = rgs[i];
        if (rep[static_cast<std::size_t>(b)] != static_cast<int>(i))
            pattern.push_back(BodyLiteral::eq(
                logic::var(head_var(static_cast<int>(i))),
                logic::var(head_var(rep[static_cast<std::size_t>(b)]))));
    }
    for (int g = 0; g < shape.blocks(); ++g)
        for (int h = g + 1; h < shape.blocks(); ++h)
            pattern.push_back(BodyLiteral::neq(logic::var(head_var(rep[static_cast<std::size_t>(g)])),
                                               logic::var(head_var(rep[static_cast<std::size_t>(h)]))));

    for (std::uint64_t mask : masks) {
        Clause c;
        c.head.pred = pred;
        for (std::size_t i = 0; i < rgs.size(); ++i)
            c.head.args.push_back(logic::var(head_var(static_cast<int>(i))));
        c.body = pattern;
        for (std::size_t j : kept) {
            auto [rel, blocks] = atoms.decode(j);
            std::vector<logic::Term> args;
            args.reserve(blocks.size());
            for (int b : blocks)
                args.push_back(logic::var(head_var(rep[static_cast<std::size_t>(b)])));
            c.body.push_back(mask >> j & 1 ? BodyLiteral::pos(rel, std::move(args))
                                           : BodyLiteral::neg(rel, std::move(args)));
        }
        out.push_back(std::move(c));
    }
}

// A clause that can never fire, keeping an almost-surely empty predicate in
// the program's vocabulary.
Clause empty_definition(const std::string& pred, int arity) {
    Clause c;
    c.head.pred = pred;
    for (int i = 0; i < arity; ++i) c.head.args.push_back(logic::var(head_var(i)));
    c.body.push_back(BodyLiteral::neq(logic::var(head_var(0)), logic::var(head_var(0))));
    return c;
}

ProbProgram emit_branch(const ProbProgram& branch, const std::map<std::string, int>& intensional,
                        const logic::Vocabulary& type_vocab) {
    Stratification strat = stratify(branch);
    TypeTable table = fixpoint_impl(branch, strat, type_vocab, nullptr);
    ProbProgram out;
    for (const auto& [pred, arity] : intensional) {
        auto it = table.accepted.find(pred);
        if (it == table.accepted.end() || it->second.empty()) {
            if (arity >= 1) out.rules.push_back(empty_definition(pred, arity));
            continue;
        }
        std::map<std::vector<int>, std::set<std::uint64_t>> by_partition;
        for (const QfType& t : it->second) by_partition[t.block_of].insert(t.polarity);
        for (const auto& [rgs, masks] : by_partition)
            emit_partition(pred, rgs, masks, type_vocab, out.rules);
    }
    std::set<std::string> used;
    for (const auto& c : out.rules)
        for (const auto& lit : c.body)
            if (lit.kind == BodyLiteral::Kind::Atom || lit.kind == BodyLiteral::Kind::NegAtom)
                used.insert(lit.pred);
    for (const auto& f : branch.facts)
        if (!f.auxiliary || used.count(f.name)) out.facts.push_back(f);
    out.validate();
    return out;
}

}  // namespace

TransformResult asymptotic_transform(const ProbProgram& p) {
    p.validate();
    if (p.has_constants()) throw ConstantsError("the limit transform is constant-free");
    stratify(p);

    // Boundary probabilities are certainties; substitute them into the rules
    // and keep the declarations so the fact marginals survive unchanged.
    ProbProgram pinned;
    pinned.facts = p.facts;
    pinned.rules = p.rules;
    for (const auto& f : p.facts)
        if (f.q == 0 || f.q == 1) pinned.rules = pin_relation(pinned.rules, f.name, f.q == 1);

    std::vector<ProbFact> to_split;
    for (const auto& f : pinned.facts)
        if (f.arity == 0 && !(f.q == 0) && !(f.q == 1)) to_split.push_back(f);
    std::sort(to_split.begin(), to_split.end(),
              [](const ProbFact& a, const ProbFact& b) { return a.name < b.name; });

    std::map<std::string, int> intensional;
    for (const auto& pred : p.head_symbols()) intensional[pred] = p.arity_of(pred);

    TransformResult result;
    for (NullaryBranch& branch : split_impl(pinned, to_split)) {
        branch.program = emit_branch(branch.program, intensional,
                                     fixpoint_type_vocab(branch.program));
        result.branches.push_back(std::move(branch));
    }
    return result;
}

namespace {

void collect_query_terms(const logic::Formula& f, std::vector<std::string>& vars,
                         std::set<std::string>& seen, int& max_numeral) {
    auto term = [&](const logic::Term& t) {
        if (t.kind == logic::TermKind::Variable) {
            if (seen.insert(t.name).second) vars.push_back(t.name);
            return;
        }
        if (!t.name.empty() &&
            std::all_of(t.name.begin(), t.name.end(), [](char c) { return c >= '0' && c <= '9'; }))
            max_numeral = std::max(max_numeral, std::stoi(t.name));
    };
    const auto& node = f.node();
    if (const auto* a = std::get_if<logic::Atom>(&node)) {
        for (const auto& t : a->args) term(t);
        return;
    }
    if (const auto* e = std::get_if<logic::Equality>(&node)) {
        term(e->lhs);
        term(e->rhs);
        return;
    }
    if (const auto* n = std::get_if<logic::Not>(&node)) {
        collect_query_terms(*n->body, vars, seen, max_numeral);
        return;
    }
    if (const auto* c = std::get_if<logic::And>(&node)) {
        collect_query_terms(*c->lhs, vars, seen, max_numeral);
        collect_query_terms(*c->rhs, vars, seen, max_numeral);
        return;
    }
    if (const auto* d = std::get_if<logic::Or>(&node)) {
        collect_query_terms(*d->lhs, vars, seen, max_numeral);
        collect_query_terms(*d->rhs, vars, seen, max_numeral);
        return;
    }
    if (const auto* im = std::get_if<logic::Implies>(&node)) {
        collect_query_terms(*im->lhs, vars, seen, max_numeral);
        collect_query_terms(*im->rhs, vars, seen, max_numeral);
        return;
    }
}

// Grounds query variables to fresh elements and resolves symbols pinned or
// emptied by the transform branch.
logic::FormulaPtr ground_query(const logic::Formula& f,
                               const std::map<std::string, std::string>& elem_of,
                               const NullaryBranch& branch,
                               const std::set<std::string>& original_heads) {
    auto term = [&](const logic::Term& t) {
        if (t.kind == logic::TermKind::Variable) return logic::cst(elem_of.at(t.name));
        return t;
    };
    const auto& node = f.node();
    if (const auto* tr = std::get_if<logic::Truth>(&node)) return logic::truth(tr->value);
    if (const auto* a = std::get_if<logic::Atom>(&node)) {
        auto pinned = branch.values.find(a->pred);
        if (pinned != branch.values.end()) return logic::truth(pinned->second);
        if (original_heads.count(a->pred) && !branch.program.vocabulary().has_relation(a->pred))
            return logic::truth(false);
        std::vector<logic::Term> args;
        args.reserve(a->args.size());
        for (const auto& t : a->args) args.push_back(term(t));
        return logic::atom(a->pred, std::move(args));
    }
    if (const auto* e = std::get_if<logic::Equality>(&node))
        return logic::equal(term(e->lhs), term(e->rhs));
    if (const auto* n = std::get_if<logic::Not>(&node))
        return logic::negation(ground_query(*n->body, elem_of, branch, original_heads));
    if (const auto* c = std::get_if<logic::And>(&node))
        return logic::conj(ground_query(*c->lhs, elem_of, branch, original_heads),
                           ground_query(*c->rhs, elem_of, branch, original_heads));
    if (const auto* d = std::get_if<logic::Or>(&node))
        return logic::disj(ground_query(*d->lhs, elem_of, branch, original_heads),
                           ground_query(*d->rhs, elem_of, branch, original_heads));
    if (const auto* im = std::get_if<logic::Implies>(&node))
        return logic::implies(ground_query(*im->lhs, elem_of, branch, original_heads),
                              ground_query(*im->rhs, elem_of, branch, original_heads));
    throw EvalError("the limit query must be quantifier-free");
}

}  // namespace

Rational asymptotic_query_prob(const ProbProgram& p, const logic::Formula& query) {
    if (!query.quantifier_free()) throw EvalError("the limit query must be quantifier-free");
    TransformResult t = asymptotic_transform(p);

    std::vector<std::string> vars;
    std::set<std::string> seen;
    int max_numeral = 0;
    collect_query_terms(query, vars, seen, max_numeral);
    std::map<std::string, std::string> elem_of;
    for (std::size_t i = 0; i < vars.size(); ++i)
        elem_of[vars[i]] = std::to_string(max_numeral + 1 + static_cast<int>(i));
    int n = max_numeral + static_cast<int>(vars.size());
    if (n == 0) n = 1;

    std::set<std::string> heads = p.head_symbols();
    Rational total = 0;
    for (const auto& branch : t.branches) {
        if (branch.weight == 0) continue;
        auto grounded = ground_query(query, elem_of, branch, heads);
        total += branch.weight * query_prob(branch.program, n, *grounded);
    }
    return total;
}

}  // namespace plp
