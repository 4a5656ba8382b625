#include "plp/checks.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <utility>

#include "plp/errors.hpp"

namespace plp {

using logic::FiniteStructure;
using logic::GroundAtomTable;
using logic::Vocabulary;

namespace {

// Local memo so the nested sweeps do not rebuild distributions.
class FamilyCache {
public:
    explicit FamilyCache(const FamilyAccessor& family) : family_(family) {}
    const WorldDistribution& at(int n) {
        auto it = memo_.find(n);
        if (it == memo_.end()) it = memo_.emplace(n, family_.at(n)).first;
        return it->second;
    }

private:
    const FamilyAccessor& family_;
    std::map<int, WorldDistribution> memo_;
};

}  // namespace

ProjectivityReport check_projective(const FamilyAccessor& family, int n_max) {
    ProjectivityReport report;
    report.n_max = n_max;
    FamilyCache cache(family);
    for (int n = 2; n <= n_max; ++n) {
        const WorldDistribution& big = cache.at(n);
        for (int m = 1; m < n; ++m) {
            const WorldDistribution& direct = cache.at(m);
            WorldDistribution pushed = marginal_distribution(big, m);
            const auto& wa = direct.worlds();
            const auto& wb = pushed.worlds();
            std::size_t i = 0, j = 0;
            while (i < wa.size() || j < wb.size()) {
                std::uint64_t bad;
                Rational da = 0, db = 0;
                if (j == wb.size() || (i < wa.size() && wa[i].first < wb[j].first)) {
                    bad = wa[i].first;
                    da = wa[i].second;
                } else if (i == wa.size() || wb[j].first < wa[i].first) {
                    bad = wb[j].first;
                    db = wb[j].second;
                } else if (wa[i].second != wb[j].second) {
                    bad = wa[i].first;
                    da = wa[i].second;
                    db = wb[j].second;
                } else {
                    ++i;
                    ++j;
                    continue;
                }
                report.holds = false;
                report.witness =
                    ProjectivityWitness{m, n, direct.atoms().structure_of(bad), da, db};
                return report;
            }
        }
    }
    return report;
}

ExchangeabilityReport check_exchangeable(const FamilyAccessor& family, int n_max) {
    ExchangeabilityReport report;
    report.n_max = n_max;
    FamilyCache cache(family);
    for (int n = 1; n <= n_max; ++n) {
        const WorldDistribution& d = cache.at(n);
        const GroundAtomTable& table = d.atoms();
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
        while (std::next_permutation(perm.begin(), perm.end())) {
            std::vector<std::size_t> image(table.size());
            for (std::size_t i = 0; i < table.size(); ++i) {
                auto [rel, tuple] = table.decode(i);
                for (int& t : tuple) t = perm[static_cast<std::size_t>(t - 1)];
                image[i] = table.atom_index(rel, tuple);
            }
            for (const auto& [mask, w] : d.worlds()) {
                std::uint64_t permuted = 0;
                for (std::size_t i = 0; i < table.size(); ++i)
                    if (mask >> i & 1) permuted |= std::uint64_t(1) << image[i];
                Rational pw = d.prob_world(permuted);
                if (pw != w) {
                    report.holds = false;
                    report.witness =
                        ExchangeabilityWitness{n, table.structure_of(mask), perm, w, pw};
                    return report;
                }
            }
        }
    }
    return report;
}

namespace {

constexpr std::size_t kMaxSupport = std::size_t(1) << 16;

// One literal schema over variable slots 0..k-1, instantiated later by a
// block assignment.
struct TemplateLiteral {
    bool is_eq = false;
    bool negated = false;
    std::string pred;
    std::vector<int> vars;
};

// Canonical pool: relations in vocabulary order, argument tuples in
// lexicographic order, each literal immediately followed by its negation;
// equalities after all atoms. Candidate order (and so witness choice)
// derives from this.
std::vector<TemplateLiteral> literal_pool(const Vocabulary& vocab, int k) {
    std::vector<TemplateLiteral> pool;
    for (const auto& r : vocab.relations()) {
        std::vector<int> tuple(static_cast<std::size_t>(r.arity), 0);
        while (true) {
            for (bool neg : {false, true}) {
                TemplateLiteral l;
                l.pred = r.name;
                l.vars = tuple;
                l.negated = neg;
                pool.push_back(std::move(l));
            }
            int i = r.arity - 1;
            while (i >= 0 && tuple[static_cast<std::size_t>(i)] == k - 1)
                tuple[static_cast<std::size_t>(i--)] = 0;
            if (i < 0) break;
            ++tuple[static_cast<std::size_t>(i)];
        }
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            for (bool neg : {false, true}) {
                TemplateLiteral l;
                l.is_eq = true;
                l.negated = neg;
                l.vars = {i, j};
                pool.push_back(std::move(l));
            }
    return pool;
}

// Index subsets of size 1..max_literals, smaller sizes first, lexicographic
// within a size. Subsets holding a literal and its own negation (adjacent
// pool slots) are contradictions and skipped.
std::vector<std::vector<int>> candidate_sets(std::size_t pool, int max_literals) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto build = [&](auto&& self, int next, int remaining) -> void {
        if (remaining == 0) {
            out.push_back(cur);
            return;
        }
        for (int i = next; i + remaining <= static_cast<int>(pool); ++i) {
            if (!cur.empty() && cur.back() % 2 == 0 && i == cur.back() + 1) continue;
            cur.push_back(i);
            self(self, i + 1, remaining - 1);
            cur.pop_back();
        }
    };
    for (int size = 1; size <= max_literals; ++size) build(build, 0, size);
    return out;
}

std::string var_name(int v) { return "x" + std::to_string(v + 1); }

logic::FormulaPtr candidate_formula(const std::vector<TemplateLiteral>& pool,
                                    const std::vector<int>& cand) {
    std::vector<logic::FormulaPtr> parts;
    for (int idx : cand) {
        const auto& l = pool[static_cast<std::size_t>(idx)];
        logic::FormulaPtr f;
        if (l.is_eq) {
            f = logic::equal(logic::var(var_name(l.vars[0])), logic::var(var_name(l.vars[1])));
        } else {
            std::vector<logic::Term> args;
            for (int v : l.vars) args.push_back(logic::var(var_name(v)));
            f = logic::atom(l.pred, std::move(args));
        }
        if (l.negated) f = logic::negation(std::move(f));
        parts.push_back(std::move(f));
    }
    return logic::conj_all(parts);
}

// The candidate instantiated by mapping variable slot v to elems[v]:
// satisfaction bitset over the support plus its total probability.
struct Event {
    std::vector<bool> sat;
    Rational prob;
};

Event instantiate_event(const WorldDistribution& d, const std::vector<TemplateLiteral>& pool,
                        const std::vector<int>& cand, const std::vector<int>& elems) {
    std::uint64_t pos = 0, neg = 0;
    bool feasible = true;
    for (int idx : cand) {
        const auto& l = pool[static_cast<std::size_t>(idx)];
        if (l.is_eq) {
            bool holds = elems[static_cast<std::size_t>(l.vars[0])] ==
                         elems[static_cast<std::size_t>(l.vars[1])];
            if (holds == l.negated) feasible = false;
            continue;
        }
        int rel = d.atoms().relation_index(l.pred);
        std::vector<int> tuple;
        for (int v : l.vars) tuple.push_back(elems[static_cast<std::size_t>(v)]);
        std::uint64_t bit = std::uint64_t(1)
                            << d.atoms().atom_index(static_cast<std::size_t>(rel), tuple);
        (l.negated ? neg : pos) |= bit;
    }
    Event e;
    e.sat.assign(d.worlds().size(), false);
    e.prob = 0;
    if (!feasible || (pos & neg)) return e;
    for (std::size_t i = 0; i < d.worlds().size(); ++i) {
        const auto& [mask, w] = d.worlds()[i];
        if ((mask & pos) == pos && (mask & neg) == 0) {
            e.sat[i] = true;
            e.prob += w;
        }
    }
    return e;
}

// Worlds quotiented by their restriction to the atoms over one element
// block. Block events are functions of this restriction, so the pair sweep
// can run over realized patterns instead of the full support.
struct PatternSpace {
    std::vector<std::size_t> atoms;          // table indices inside the block
    std::vector<std::uint64_t> realized;     // sorted distinct patterns
    std::vector<std::size_t> world_pattern;  // support index -> realized slot
};

PatternSpace pattern_space(const WorldDistribution& d, const std::vector<int>& elems) {
    PatternSpace ps;
    const GroundAtomTable& table = d.atoms();
    std::set<int> block(elems.begin(), elems.end());
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto [rel, tuple] = table.decode(i);
        bool inside = true;
        for (int t : tuple) inside = inside && block.count(t) > 0;
        if (inside) ps.atoms.push_back(i);
    }
    if (ps.atoms.size() > 20) throw ScaleError("too many block atoms in the independence sweep");
    auto extract = [&](std::uint64_t mask) {
        std::uint64_t p = 0;
        for (std::size_t k = 0; k < ps.atoms.size(); ++k)
            if (mask >> ps.atoms[k] & 1) p |= std::uint64_t(1) << k;
        return p;
    };
    std::set<std::uint64_t> seen;
    for (const auto& [mask, w] : d.worlds()) seen.insert(extract(mask));
    ps.realized.assign(seen.begin(), seen.end());
    ps.world_pattern.resize(d.worlds().size());
    for (std::size_t i = 0; i < d.worlds().size(); ++i) {
        std::uint64_t p = extract(d.worlds()[i].first);
        ps.world_pattern[i] = static_cast<std::size_t>(
            std::lower_bound(ps.realized.begin(), ps.realized.end(), p) - ps.realized.begin());
    }
    return ps;
}

struct QuotientEvents {
    std::vector<std::vector<bool>> sets;  // over realized patterns
    std::vector<std::string> names;
    std::vector<Rational> probs;
};

// Budgeted candidates instantiated on one block, deduplicated by satisfying
// set; the first formula reaching an event names it.
QuotientEvents quotient_events(const WorldDistribution& d, const PatternSpace& ps, int k,
                               const std::vector<int>& elems, const FormulaBudget& budget,
                               const std::vector<Rational>& pattern_weight) {
    QuotientEvents out;
    auto pool = literal_pool(d.vocab(), k);
    std::set<std::vector<bool>> seen;
    for (const auto& cand : candidate_sets(pool.size(), budget.max_literals)) {
        std::uint64_t pos = 0, neg = 0;
        bool feasible = true;
        for (int idx : cand) {
            const auto& l = pool[static_cast<std::size_t>(idx)];
            if (l.is_eq) {
                bool holds = elems[static_cast<std::size_t>(l.vars[0])] ==
                             elems[static_cast<std::size_t>(l.vars[1])];
                if (holds == l.negated) feasible = false;
                continue;
            }
            int rel = d.atoms().relation_index(l.pred);
            std::vector<int> tuple;
            for (int v : l.vars) tuple.push_back(elems[static_cast<std::size_t>(v)]);
            std::size_t table_idx =
                d.atoms().atom_index(static_cast<std::size_t>(rel), tuple);
            std::size_t slot = static_cast<std::size_t>(
                std::lower_bound(ps.atoms.begin(), ps.atoms.end(), table_idx) -
                ps.atoms.begin());
            std::uint64_t bit = std::uint64_t(1) << slot;
            (l.negated ? neg : pos) |= bit;
        }
        std::vector<bool> sat(ps.realized.size(), false);
        Rational prob = 0;
        if (feasible && !(pos & neg)) {
            for (std::size_t i = 0; i < ps.realized.size(); ++i) {
                std::uint64_t p = ps.realized[i];
                if ((p & pos) == pos && (p & neg) == 0) {
                    sat[i] = true;
                    prob += pattern_weight[i];
                }
            }
        }
        if (!seen.insert(sat).second) continue;
        out.names.push_back(logic::pretty(*candidate_formula(pool, cand)));
        out.sets.push_back(std::move(sat));
        out.probs.push_back(std::move(prob));
    }
    return out;
}

}  // namespace

IndependenceReport check_IP(const FamilyAccessor& family, int n_max,
                            const FormulaBudget& budget) {
    IndependenceReport report;
    report.n_max = n_max;
    report.projective = check_projective(family, n_max).holds;
    FamilyCache cache(family);
    for (int total = 2; total <= n_max; ++total) {
        const WorldDistribution& d = cache.at(total);
        if (d.worlds().size() > kMaxSupport)
            throw ScaleError("support too large for the independence sweep");
        for (int nb = 1; nb < total; ++nb) {
            int mb = total - nb;
            if (nb > budget.max_vars || mb > budget.max_vars) continue;
            std::vector<int> left_elems, right_elems;
            for (int i = 1; i <= nb; ++i) left_elems.push_back(i);
            for (int i = nb + 1; i <= total; ++i) right_elems.push_back(i);
            PatternSpace psa = pattern_space(d, left_elems);
            PatternSpace psb = pattern_space(d, right_elems);

            // joint weight of (left pattern, right pattern), plus marginals
            std::vector<std::map<std::size_t, Rational>> joint_w(psa.realized.size());
            std::vector<Rational> wa(psa.realized.size(), Rational(0));
            std::vector<Rational> wb(psb.realized.size(), Rational(0));
            for (std::size_t i = 0; i < d.worlds().size(); ++i) {
                const Rational& wt = d.worlds()[i].second;
                joint_w[psa.world_pattern[i]][psb.world_pattern[i]] += wt;
                wa[psa.world_pattern[i]] += wt;
                wb[psb.world_pattern[i]] += wt;
            }
            QuotientEvents left = quotient_events(d, psa, nb, left_elems, budget, wa);
            QuotientEvents right = quotient_events(d, psb, mb, right_elems, budget, wb);

            for (std::size_t b = 0; b < right.sets.size(); ++b) {
                // per left pattern, the weight it shares with this right event
                std::vector<Rational> col(psa.realized.size(), Rational(0));
                for (std::size_t a = 0; a < psa.realized.size(); ++a)
                    for (const auto& [bp, wt] : joint_w[a])
                        if (right.sets[b][bp]) col[a] += wt;
                for (std::size_t a = 0; a < left.sets.size(); ++a) {
                    Rational joint = 0;
                    for (std::size_t ap = 0; ap < psa.realized.size(); ++ap)
                        if (left.sets[a][ap]) joint += col[ap];
                    if (joint != left.probs[a] * right.probs[b]) {
                        report.holds = false;
                        report.witness = IndependenceWitness{
                            nb,    mb,           left.names[a], right.names[b],
                            joint, left.probs[a], right.probs[b]};
                        return report;
                    }
                }
            }
        }
    }
    return report;
}

ConditionalReport check_CIP(const FamilyAccessor& family, int n_max, const FormulaBudget& budget) {
    ConditionalReport report;
    report.n_max = n_max;
    report.projective = check_projective(family, n_max).holds;
    FamilyCache cache(family);
    for (int n = 1; n <= budget.max_vars && n + 1 <= n_max; ++n) {
        const WorldDistribution& d = cache.at(n + 1);
        if (d.worlds().size() > kMaxSupport)
            throw ScaleError("support too large for the independence sweep");
        const GroundAtomTable& table = d.atoms();

        // atoms whose arguments all lie in the shared prefix {1..n-1};
        // nullary atoms always qualify
        std::vector<std::size_t> shared;
        for (std::size_t i = 0; i < table.size(); ++i) {
            auto [rel, tuple] = table.decode(i);
            bool inside = true;
            for (int t : tuple) inside = inside && t <= n - 1;
            if (inside) shared.push_back(i);
        }
        if (shared.size() > 20) throw ScaleError("too many shared atoms in the conditioning sweep");
        std::vector<std::uint64_t> pattern(d.worlds().size());
        for (std::size_t i = 0; i < d.worlds().size(); ++i) {
            std::uint64_t p = 0;
            for (std::size_t k = 0; k < shared.size(); ++k)
                if (d.worlds()[i].first >> shared[k] & 1) p |= std::uint64_t(1) << k;
            pattern[i] = p;
        }
        std::vector<Rational> pattern_prob(std::size_t(1) << shared.size());
        for (std::size_t i = 0; i < d.worlds().size(); ++i)
            pattern_prob[pattern[i]] += d.worlds()[i].second;

        std::vector<int> elems_a, elems_b;
        for (int i = 1; i <= n; ++i) elems_a.push_back(i);
        for (int i = 1; i < n; ++i) elems_b.push_back(i);
        elems_b.push_back(n + 1);

        auto pool = literal_pool(d.vocab(), n);
        std::set<std::pair<std::vector<bool>, std::vector<bool>>> seen;
        for (const auto& cand : candidate_sets(pool.size(), budget.max_literals)) {
            Event ea = instantiate_event(d, pool, cand, elems_a);
            Event eb = instantiate_event(d, pool, cand, elems_b);
            if (!seen.insert({ea.sat, eb.sat}).second) continue;
            for (std::uint64_t w = 0; w < (std::uint64_t(1) << shared.size()); ++w) {
                if (pattern_prob[w] == 0) continue;
                Rational joint = 0, lefts = 0, rights = 0;
                for (std::size_t i = 0; i < d.worlds().size(); ++i) {
                    if (pattern[i] != w) continue;
                    const Rational& wt = d.worlds()[i].second;
                    if (ea.sat[i] && eb.sat[i]) joint += wt;
                    if (ea.sat[i]) lefts += wt;
                    if (eb.sat[i]) rights += wt;
                }
                // cross-multiplied conditional independence given the pattern
                if (joint * pattern_prob[w] != lefts * rights) {
                    report.holds = false;
                    FiniteStructure given;
                    given.vocab = d.vocab();
                    given.n = n - 1;
                    for (const auto& rel : given.vocab.relations()) given.extensions[rel.name];
                    for (std::size_t k = 0; k < shared.size(); ++k)
                        if (w >> k & 1) {
                            auto [rel, tuple] = table.decode(shared[k]);
                            given.extensions[table.relation(rel).name].insert(tuple);
                        }
                    report.witness = ConditionalWitness{
                        n,     std::move(given), logic::pretty(*candidate_formula(pool, cand)),
                        joint, lefts,            rights,
                        pattern_prob[w]};
                    return report;
                }
            }
        }
    }
    return report;
}

WorldDistribution m_star(int n) {
    if (n < 1) throw ProgramError("the reference family starts at domain size 1");
    if (n > 20) throw ScaleError("reference family enumeration beyond n = 20");
    Vocabulary v;
    v.add_relation("r", 1);
    GroundAtomTable table(v, n);
    std::vector<BigInt> choose(static_cast<std::size_t>(n) + 1);
    choose[0] = 1;
    for (int k = 1; k <= n; ++k)
        choose[static_cast<std::size_t>(k)] =
            choose[static_cast<std::size_t>(k - 1)] * (n - k + 1) / k;
    std::vector<std::pair<std::uint64_t, Rational>> worlds;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
        int k = std::popcount(mask);
        // uniform over the n+1 isomorphism classes, uniform inside a class
        Rational w = Rational(1) / (Rational(n + 1) * Rational(choose[static_cast<std::size_t>(k)]));
        worlds.emplace_back(mask, std::move(w));
    }
    return WorldDistribution(std::move(table), std::move(worlds));
}

FamilyAccessor m_star_family() {
    FamilyAccessor f;
    f.vocab.add_relation("r", 1);
    f.at = [](int n) { return m_star(n); };
    return f;
}

Rational m_star_conditional(int n, const std::set<int>& I) {
    if (n < 0) throw ProgramError("negative prior count");
    for (int i : I)
        if (i < 1 || i > n) throw ProgramError("conditioning index outside {1.." +
                                               std::to_string(n) + "}");
    WorldDistribution d = m_star(n + 1);
    std::uint64_t want = 0;
    for (int i : I) want |= std::uint64_t(1) << (i - 1);
    std::uint64_t prefix = (std::uint64_t(1) << n) - 1;
    Rational pc = 0, pboth = 0;
    for (const auto& [mask, w] : d.worlds()) {
        if ((mask & prefix) != want) continue;
        pc += w;
        if (mask >> n & 1) pboth += w;
    }
    return pboth / pc;
}

}  // namespace plp
