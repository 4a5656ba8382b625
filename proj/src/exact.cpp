#include "plp/exact.hpp"

#include <algorithm>
#include <bit>

#include <json.hpp>

#include "plp/datalog.hpp"
#include "plp/errors.hpp"

namespace plp {

using logic::Formula;
using logic::GroundAtomTable;
using logic::Vocabulary;

WorldDistribution::WorldDistribution(GroundAtomTable table,
                                     std::vector<std::pair<std::uint64_t, Rational>> weights)
    : table_(std::move(table)) {
    std::sort(weights.begin(), weights.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [mask, w] : weights) {
        if (w == 0) continue;
        if (w < 0) throw ProgramError("negative world weight");
        if (!worlds_.empty() && worlds_.back().first == mask)
            worlds_.back().second += w;
        else
            worlds_.emplace_back(mask, std::move(w));
    }
}

Rational WorldDistribution::total() const {
    Rational sum = 0;
    for (const auto& [mask, w] : worlds_) sum += w;
    return sum;
}

Rational WorldDistribution::prob_world(std::uint64_t mask) const {
    auto it = std::lower_bound(worlds_.begin(), worlds_.end(), mask,
                               [](const auto& entry, std::uint64_t m) { return entry.first < m; });
    if (it == worlds_.end() || it->first != mask) return 0;
    return it->second;
}

Rational WorldDistribution::prob(const std::function<bool(std::uint64_t)>& event) const {
    Rational sum = 0;
    for (const auto& [mask, w] : worlds_)
        if (event(mask)) sum += w;
    return sum;
}

Rational WorldDistribution::prob_formula(const Formula& query) const {
    return prob([&](std::uint64_t mask) { return mask_eval(query, table_, mask); });
}

namespace {

int term_element(const logic::Term& t, const GroundAtomTable& table,
                 const std::map<std::string, int>& assignment) {
    if (t.kind == logic::TermKind::Variable) {
        auto it = assignment.find(t.name);
        if (it == assignment.end()) throw EvalError("unbound query variable " + t.name);
        return it->second;
    }
    int value = 0;
    for (char c : t.name) {
        if (c < '0' || c > '9')
            throw EvalError("query constants must be numerals, got " + t.name);
        value = value * 10 + (c - '0');
    }
    if (value < 1 || value > table.domain_size())
        throw EvalError("element " + t.name + " outside the domain {1.." +
                        std::to_string(table.domain_size()) + "}");
    return value;
}

}  // namespace

bool mask_eval(const Formula& f, const GroundAtomTable& table, std::uint64_t mask,
               const std::map<std::string, int>& assignment) {
    using namespace logic;
    return std::visit(
        [&](const auto& node) -> bool {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Truth>) {
                return node.value;
            } else if constexpr (std::is_same_v<T, Atom>) {
                int rel = table.relation_index(node.pred);
                if (rel < 0) throw EvalError("unknown relation " + node.pred);
                std::vector<int> tuple;
                for (const auto& t : node.args)
                    tuple.push_back(term_element(t, table, assignment));
                return mask >> table.atom_index(static_cast<std::size_t>(rel), tuple) & 1;
            } else if constexpr (std::is_same_v<T, Equality>) {
                return term_element(node.lhs, table, assignment) ==
                       term_element(node.rhs, table, assignment);
            } else if constexpr (std::is_same_v<T, Not>) {
                return !mask_eval(*node.body, table, mask, assignment);
            } else if constexpr (std::is_same_v<T, And>) {
                return mask_eval(*node.lhs, table, mask, assignment) &&
                       mask_eval(*node.rhs, table, mask, assignment);
            } else if constexpr (std::is_same_v<T, Or>) {
                return mask_eval(*node.lhs, table, mask, assignment) ||
                       mask_eval(*node.rhs, table, mask, assignment);
            } else if constexpr (std::is_same_v<T, Implies>) {
                return !mask_eval(*node.lhs, table, mask, assignment) ||
                       mask_eval(*node.rhs, table, mask, assignment);
            } else {
                throw EvalError("query must be quantifier-free");
            }
        },
        f.node());
}

namespace {

// Per-relation weight tables: weight_for[r][k] = q^k (1-q)^(m_r - k) where
// m_r is the number of that relation's atoms being enumerated.
struct FactWeights {
    std::vector<std::uint64_t> block_masks;       // per fact relation, within scope
    std::vector<std::vector<Rational>> by_count;  // per fact relation, by popcount

    FactWeights(const ProbProgram& p, const GroundProgram& g, std::uint64_t scope) {
        for (std::size_t r = 0; r < g.atoms().relation_count(); ++r) {
            const auto& rel = g.atoms().relation(r);
            const ProbFact* fact = p.fact(rel.name);
            if (!fact) continue;
            std::uint64_t block = 0;
            for (std::size_t i = 0; i < g.atoms().relation_block_size(r); ++i)
                block |= std::uint64_t(1) << (g.atoms().relation_offset(r) + i);
            block &= scope;
            if (!block) continue;
            int m = std::popcount(block);
            std::vector<Rational> w(static_cast<std::size_t>(m) + 1);
            for (int k = 0; k <= m; ++k) {
                Rational v = 1;
                for (int i = 0; i < k; ++i) v *= fact->q;
                for (int i = k; i < m; ++i) v *= 1 - fact->q;
                w[static_cast<std::size_t>(k)] = v;
            }
            block_masks.push_back(block);
            by_count.push_back(std::move(w));
        }
    }

    Rational weight(std::uint64_t fact_world) const {
        Rational w = 1;
        for (std::size_t r = 0; r < block_masks.size(); ++r)
            w *= by_count[r][static_cast<std::size_t>(
                std::popcount(fact_world & block_masks[r]))];
        return w;
    }
};

void require_distribution_semantics(const ProbProgram& p) {
    p.validate();
    if (p.has_constants())
        throw ConstantsError("distribution semantics is defined for constant-free programs");
    auto edb = p.extensional_by_use();
    if (!edb.empty())
        throw ProgramError("relation " + *edb.begin() +
                           " has no declared probability and no defining rule");
}

// Visits every submask of `scope` in increasing numeric order.
template <typename F>
void for_each_submask(std::uint64_t scope, F&& fn) {
    std::uint64_t s = 0;
    while (true) {
        fn(s);
        if (s == scope) break;
        s = (s - scope) & scope;
    }
}

}  // namespace

WorldDistribution world_distribution(const ProbProgram& p, int n, const Limits& limits) {
    require_distribution_semantics(p);
    GroundProgram g(p, n);
    std::uint64_t facts = g.fact_mask();
    if (static_cast<std::size_t>(std::popcount(facts)) > limits.max_fact_atoms)
        throw ScaleError("fact atom count " + std::to_string(std::popcount(facts)) +
                         " exceeds the guard of " + std::to_string(limits.max_fact_atoms));
    FactWeights weights(p, g, facts);
    std::vector<std::pair<std::uint64_t, Rational>> out;
    for_each_submask(facts, [&](std::uint64_t s) {
        Rational w = weights.weight(s);
        if (w != 0) out.emplace_back(g.closure(s), std::move(w));
    });
    return WorldDistribution(g.atoms(), std::move(out));
}

namespace {

// Ground atoms named by a formula, resolved through the table.
std::vector<std::size_t> formula_atoms(const Formula& f, const GroundAtomTable& table) {
    using namespace logic;
    std::vector<std::size_t> out;
    auto walk = [&](auto&& self, const Formula& g) -> void {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Atom>) {
                    int rel = table.relation_index(node.pred);
                    if (rel < 0) throw EvalError("unknown relation " + node.pred);
                    std::vector<int> tuple;
                    for (const auto& t : node.args)
                        tuple.push_back(term_element(t, table, {}));
                    out.push_back(table.atom_index(static_cast<std::size_t>(rel), tuple));
                } else if constexpr (std::is_same_v<T, Not>) {
                    self(self, *node.body);
                } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or> ||
                                     std::is_same_v<T, Implies>) {
                    self(self, *node.lhs);
                    self(self, *node.rhs);
                } else if constexpr (std::is_same_v<T, Equality> || std::is_same_v<T, Truth>) {
                    // no atoms
                } else {
                    throw EvalError("query must be quantifier-free");
                }
            },
            g.node());
    };
    walk(walk, f);
    return out;
}

// All atoms the seeds depend on through the rule graph, including the seeds.
std::uint64_t dependency_cone(const GroundProgram& g, std::uint64_t seeds) {
    std::uint64_t cone = seeds;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& level : g.rules_by_level())
            for (const auto& r : level) {
                if (!(cone >> r.head_bit & 1)) continue;
                std::uint64_t need = (r.pos_mask | r.neg_mask) & ~cone;
                if (need) {
                    cone |= need;
                    changed = true;
                }
            }
    }
    return cone;
}

}  // namespace

Rational query_prob(const ProbProgram& p, int n, const Formula& query, const Limits& limits) {
    require_distribution_semantics(p);
    GroundProgram g(p, n);
    std::uint64_t seeds = 0;
    for (auto idx : formula_atoms(query, g.atoms())) seeds |= std::uint64_t(1) << idx;
    std::uint64_t scope = dependency_cone(g, seeds) & g.fact_mask();
    if (static_cast<std::size_t>(std::popcount(scope)) > limits.max_fact_atoms)
        throw ScaleError("query depends on " + std::to_string(std::popcount(scope)) +
                         " fact atoms, beyond the guard of " +
                         std::to_string(limits.max_fact_atoms));
    FactWeights weights(p, g, scope);
    Rational sum = 0;
    for_each_submask(scope, [&](std::uint64_t s) {
        if (mask_eval(query, g.atoms(), g.closure(s))) sum += weights.weight(s);
    });
    return sum;
}

WorldDistribution reduct_distribution(const WorldDistribution& d, const Vocabulary& target) {
    if (!target.subset_of(d.vocab()))
        throw ProgramError("reduct target is not a subvocabulary");
    GroundAtomTable table(target, d.domain_size());
    // bit i of the target space comes from this source bit
    std::vector<std::size_t> source_bit(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto [rel, tuple] = table.decode(i);
        int src = d.atoms().relation_index(table.relation(rel).name);
        source_bit[i] = d.atoms().atom_index(static_cast<std::size_t>(src), tuple);
    }
    std::vector<std::pair<std::uint64_t, Rational>> out;
    for (const auto& [mask, w] : d.worlds()) {
        std::uint64_t m = 0;
        for (std::size_t i = 0; i < table.size(); ++i)
            if (mask >> source_bit[i] & 1) m |= std::uint64_t(1) << i;
        out.emplace_back(m, w);
    }
    return WorldDistribution(std::move(table), std::move(out));
}

WorldDistribution marginal_distribution(const WorldDistribution& d, int m) {
    if (m < 1 || m > d.domain_size())
        throw ProgramError("marginal domain size out of range");
    GroundAtomTable table(d.vocab(), m);
    std::vector<std::size_t> source_bit(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto [rel, tuple] = table.decode(i);
        int src = d.atoms().relation_index(table.relation(rel).name);
        source_bit[i] = d.atoms().atom_index(static_cast<std::size_t>(src), tuple);
    }
    std::vector<std::pair<std::uint64_t, Rational>> out;
    for (const auto& [mask, w] : d.worlds()) {
        std::uint64_t sub = 0;
        for (std::size_t i = 0; i < table.size(); ++i)
            if (mask >> source_bit[i] & 1) sub |= std::uint64_t(1) << i;
        out.emplace_back(sub, w);
    }
    return WorldDistribution(std::move(table), std::move(out));
}

Rational tv_distance(const WorldDistribution& a, const WorldDistribution& b) {
    if (!(a.vocab() == b.vocab()) || a.domain_size() != b.domain_size())
        throw ProgramError("total variation requires a common vocabulary and domain size");
    Rational l1 = 0;
    const auto& wa = a.worlds();
    const auto& wb = b.worlds();
    std::size_t i = 0, j = 0;
    while (i < wa.size() || j < wb.size()) {
        if (j == wb.size() || (i < wa.size() && wa[i].first < wb[j].first)) {
            l1 += wa[i++].second;
        } else if (i == wa.size() || wb[j].first < wa[i].first) {
            l1 += wb[j++].second;
        } else {
            l1 += abs(wa[i].second - wb[j].second);
            ++i;
            ++j;
        }
    }
    return l1 / 2;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

bool same_facts(const ProbProgram& a, const ProbProgram& b) {
    auto decl = [](const ProbProgram& p) {
        std::set<std::tuple<std::string, int, Rational>> s;
        for (const auto& f : p.facts) s.insert({f.name, f.arity, f.q});
        return s;
    };
    return decl(a) == decl(b);
}

// Connected components of the union of both rule graphs; returns component
// masks that contain at least one derived atom.
std::vector<std::uint64_t> shared_components(const GroundProgram& ga, const GroundProgram& gb) {
    std::size_t total = ga.atoms().size();
    UnionFind uf(total);
    for (const GroundProgram* g : {&ga, &gb})
        for (const auto& level : g->rules_by_level())
            for (const auto& r : level) {
                std::uint64_t body = r.pos_mask | r.neg_mask;
                for (std::size_t i = 0; i < total; ++i)
                    if (body >> i & 1) uf.unite(static_cast<int>(i), r.head_bit);
            }
    std::map<int, std::uint64_t> groups;
    for (std::size_t i = 0; i < total; ++i)
        groups[uf.find(static_cast<int>(i))] |= std::uint64_t(1) << i;
    std::uint64_t derived = ga.derived_mask() | gb.derived_mask();
    std::vector<std::uint64_t> out;
    for (const auto& [root, mask] : groups)
        if (mask & derived) out.push_back(mask);
    return out;
}

}  // namespace

Rational program_tv(const ProbProgram& a, const ProbProgram& b, int n, const Limits& limits) {
    require_distribution_semantics(a);
    require_distribution_semantics(b);
    if (same_facts(a, b) && a.vocabulary() == b.vocabulary()) {
        GroundProgram ga(a, n), gb(b, n);
        // closures keep the fact bits, so the two induced distributions
        // disagree exactly on the event that some component's derived atoms
        // differ; components are independent.
        Rational agree_all = 1;
        for (std::uint64_t comp : shared_components(ga, gb)) {
            std::uint64_t facts = comp & ga.fact_mask();
            std::uint64_t derived = comp & ~facts;
            if (static_cast<std::size_t>(std::popcount(facts)) > limits.max_fact_atoms)
                throw ScaleError("component with " + std::to_string(std::popcount(facts)) +
                                 " fact atoms exceeds the guard");
            FactWeights local(a, ga, facts);
            Rational agree = 0;
            for_each_submask(facts, [&](std::uint64_t s) {
                if (((ga.closure(s) ^ gb.closure(s)) & derived) == 0)
                    agree += local.weight(s);
            });
            agree_all *= agree;
        }
        return 1 - agree_all;
    }

    // Different fact spaces (e.g. auxiliary facts dropped): compare reducts
    // to the common vocabulary by direct enumeration.
    Vocabulary va = a.vocabulary(), vb = b.vocabulary();
    Vocabulary common;
    for (const auto& r : va.relations())
        if (vb.arity_of(r.name) == r.arity) common.add_relation(r.name, r.arity);
    for (const auto& f : a.facts)
        if (const auto* other = b.fact(f.name))
            if (other->q != f.q)
                throw ProgramError("shared fact " + f.name +
                                   " has different probabilities in the two programs");
    auto da = reduct_distribution(world_distribution(a, n, limits), common);
    auto db = reduct_distribution(world_distribution(b, n, limits), common);
    return tv_distance(da, db);
}

Rational reduct_program_tv(const ProbProgram& a, const ProbProgram& b, int n,
                           const Vocabulary& target, const Limits& limits) {
    require_distribution_semantics(a);
    require_distribution_semantics(b);
    if (!(same_facts(a, b) && a.vocabulary() == b.vocabulary())) {
        auto da = reduct_distribution(world_distribution(a, n, limits), target);
        auto db = reduct_distribution(world_distribution(b, n, limits), target);
        return tv_distance(da, db);
    }
    GroundProgram ga(a, n), gb(b, n);
    if (!target.subset_of(ga.atoms().vocab()))
        throw ProgramError("reduct target is not a subvocabulary");
    std::uint64_t keep = 0;
    for (std::size_t i = 0; i < ga.atoms().size(); ++i) {
        auto [rel, tuple] = ga.atoms().decode(i);
        if (target.arity_of(ga.atoms().relation(rel).name) >= 0)
            keep |= std::uint64_t(1) << i;
    }

    // Per component, the joint law of (A-reduct bits, B-reduct bits); the
    // product across components is assembled below, then TV is the half-L1
    // over the A and B marginals of that product.
    struct Component {
        std::size_t bits = 0;  // kept atoms, component-local order
        std::map<std::pair<std::uint64_t, std::uint64_t>, Rational> joint;
    };
    std::vector<Component> comps;
    for (std::uint64_t comp : shared_components(ga, gb)) {
        std::uint64_t facts = comp & ga.fact_mask();
        if (static_cast<std::size_t>(std::popcount(facts)) > limits.max_fact_atoms)
            throw ScaleError("component with " + std::to_string(std::popcount(facts)) +
                             " fact atoms exceeds the guard");
        std::vector<int> kept_bits;
        for (std::size_t i = 0; i < ga.atoms().size(); ++i)
            if ((comp & keep) >> i & 1) kept_bits.push_back(static_cast<int>(i));
        if (kept_bits.empty()) continue;
        Component c;
        c.bits = kept_bits.size();
        FactWeights local(a, ga, facts);
        for_each_submask(facts, [&](std::uint64_t s) {
            std::uint64_t ca = ga.closure(s), cb = gb.closure(s);
            std::uint64_t la = 0, lb = 0;
            for (std::size_t k = 0; k < kept_bits.size(); ++k) {
                if (ca >> kept_bits[k] & 1) la |= std::uint64_t(1) << k;
                if (cb >> kept_bits[k] & 1) lb |= std::uint64_t(1) << k;
            }
            c.joint[{la, lb}] += local.weight(s);
        });
        comps.push_back(std::move(c));
    }
    // kept fact atoms in no derived component are identical on both sides and
    // cancel in the TV; they are skipped entirely.

    std::map<std::pair<std::uint64_t, std::uint64_t>, Rational> acc;
    acc[{0, 0}] = 1;
    std::size_t width = 0;
    for (const auto& c : comps) {
        std::map<std::pair<std::uint64_t, std::uint64_t>, Rational> next;
        for (const auto& [base, wb0] : acc)
            for (const auto& [key, w] : c.joint)
                next[{base.first | key.first << width, base.second | key.second << width}] +=
                    wb0 * w;
        if (next.size() > (std::size_t(1) << 22))
            throw ScaleError("reduct product exceeds the enumeration guard");
        acc = std::move(next);
        width += c.bits;
        if (width > 63) throw ScaleError("reduct product exceeds 64 atoms");
    }
    std::map<std::uint64_t, Rational> pa, pb;
    for (const auto& [key, w] : acc) {
        pa[key.first] += w;
        pb[key.second] += w;
    }
    Rational l1 = 0;
    for (const auto& [mask, w] : pa) {
        auto it = pb.find(mask);
        l1 += abs(w - (it == pb.end() ? Rational(0) : it->second));
    }
    for (const auto& [mask, w] : pb)
        if (!pa.count(mask)) l1 += w;
    return l1 / 2;
}

FamilyAccessor program_family(ProbProgram p, Limits limits) {
    FamilyAccessor f;
    Vocabulary full = p.vocabulary();
    for (const auto& r : full.relations()) f.vocab.add_relation(r.name, r.arity);
    f.at = [p = std::move(p), limits](int n) { return world_distribution(p, n, limits); };
    return f;
}

FamilyAccessor reduct_family(FamilyAccessor base, Vocabulary target) {
    FamilyAccessor f;
    f.vocab = target;
    f.at = [base = std::move(base), target = std::move(target)](int n) {
        return reduct_distribution(base.at(n), target);
    };
    return f;
}

std::string distribution_json(const WorldDistribution& d) {
    nlohmann::json j;
    j["n"] = d.domain_size();
    j["vocabulary"] = nlohmann::json::array();
    for (const auto& r : d.vocab().relations())
        j["vocabulary"].push_back(r.name + "/" + std::to_string(r.arity));
    j["worlds"] = nlohmann::json::array();
    for (const auto& [mask, w] : d.worlds()) {
        nlohmann::json world;
        world["atoms"] = nlohmann::json::array();
        for (std::size_t i = 0; i < d.atoms().size(); ++i)
            if (mask >> i & 1) world["atoms"].push_back(d.atoms().atom_name(i));
        world["weight"] = to_string(w);
        j["worlds"].push_back(std::move(world));
    }
    return j.dump(2);
}

}  // namespace plp
