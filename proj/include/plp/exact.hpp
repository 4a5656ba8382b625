#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "plp/logic/formula.hpp"
#include "plp/logic/structure.hpp"
#include "plp/program.hpp"
#include "plp/rational.hpp"

namespace plp {

// Desk-scale guards. Enumerations refuse loudly instead of sampling.
struct Limits {
    std::size_t max_fact_atoms = 25;  // 2^this worlds enumerated at most
};

// Sparse exact distribution over the worlds of one vocabulary and domain
// size. Worlds are canonical atom-table masks; zero weights are omitted and
// masks are kept sorted, so equal distributions compare equal.
class WorldDistribution {
public:
    WorldDistribution(logic::GroundAtomTable table,
                      std::vector<std::pair<std::uint64_t, Rational>> weights);

    const logic::GroundAtomTable& atoms() const { return table_; }
    const logic::Vocabulary& vocab() const { return table_.vocab(); }
    int domain_size() const { return table_.domain_size(); }

    const std::vector<std::pair<std::uint64_t, Rational>>& worlds() const { return worlds_; }
    Rational total() const;
    Rational prob_world(std::uint64_t mask) const;
    Rational prob(const std::function<bool(std::uint64_t)>& event) const;
    // Probability of a ground quantifier-free formula.
    Rational prob_formula(const logic::Formula& query) const;

private:
    logic::GroundAtomTable table_;
    std::vector<std::pair<std::uint64_t, Rational>> worlds_;
};

// Truth of a quantifier-free formula on a world mask. Constants must be
// numerals denoting elements of {1..n}; variables resolve via `assignment`.
bool mask_eval(const logic::Formula& f, const logic::GroundAtomTable& table, std::uint64_t mask,
               const std::map<std::string, int>& assignment = {});

// The distribution induced by a program on {1..n}: fact atoms are
// independent coins, worlds disagreeing with the stratified closure of their
// fact part have weight zero. Rejects constants, relations without a
// declared probability, and fact spaces beyond the guard.
WorldDistribution world_distribution(const ProbProgram& p, int n, const Limits& limits = {});

// Probability of a ground quantifier-free query without materializing the
// full distribution: only the fact atoms the query depends on (through the
// ground rule graph) are enumerated.
Rational query_prob(const ProbProgram& p, int n, const logic::Formula& query,
                    const Limits& limits = {});

// Pushforward along the reduct map (forgets relations outside `target`).
WorldDistribution reduct_distribution(const WorldDistribution& d,
                                      const logic::Vocabulary& target);

// Pushforward along the substructure map onto {1..m}.
WorldDistribution marginal_distribution(const WorldDistribution& d, int m);

// Half the L1 distance; equals the maximum disagreement over events.
Rational tv_distance(const WorldDistribution& a, const WorldDistribution& b);

// Total variation between the distributions induced by two programs on
// {1..n}. When the programs share their vocabulary and fact declarations
// this is the probability that the two closures of a common fact world
// differ, computed per independent component of the ground rule graph, so it
// scales past the full-enumeration guard. Otherwise both distributions are
// materialized, reduced to the common vocabulary, and compared directly.
Rational program_tv(const ProbProgram& a, const ProbProgram& b, int n,
                    const Limits& limits = {});

// Total variation between the two reducts onto `target`, component-factored
// like program_tv (exact; the product over components is materialized, which
// the guard keeps finite).
Rational reduct_program_tv(const ProbProgram& a, const ProbProgram& b, int n,
                           const logic::Vocabulary& target, const Limits& limits = {});

// One distribution per domain size over a fixed vocabulary.
struct FamilyAccessor {
    logic::Vocabulary vocab;
    std::function<WorldDistribution(int)> at;
};

FamilyAccessor program_family(ProbProgram p, Limits limits = {});
FamilyAccessor reduct_family(FamilyAccessor base, logic::Vocabulary target);

// {"n":…, "vocabulary":["r/1",…], "worlds":[{"atoms":["r(1)",…],
//  "weight":"num/den"}]} — weights exact, order canonical.
std::string distribution_json(const WorldDistribution& d);

}  // namespace plp
