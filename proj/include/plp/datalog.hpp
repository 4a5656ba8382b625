#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plp/analysis.hpp"
#include "plp/logic/structure.hpp"
#include "plp/program.hpp"

namespace plp {

// One ground rule: fire when every pos bit is set and every neg bit clear.
struct GroundRule {
    int head_bit = 0;
    std::uint64_t pos_mask = 0;
    std::uint64_t neg_mask = 0;
};

// A program grounded over {1..n} into the canonical atom bit space. Equality
// and inequality literals are resolved during grounding; rules whose body is
// unsatisfiable are dropped. Requires at most 64 ground atoms.
class GroundProgram {
public:
    GroundProgram(const ProbProgram& p, int n,
                  const std::map<std::string, int>& constant_values = {});

    const logic::GroundAtomTable& atoms() const { return table_; }
    const Stratification& strata() const { return strata_; }
    int domain_size() const { return n_; }

    // bits of fact relations / of all extensional relations / of rule heads
    std::uint64_t fact_mask() const { return fact_mask_; }
    std::uint64_t extensional_mask() const { return extensional_mask_; }
    std::uint64_t derived_mask() const { return ~extensional_mask_ & used_mask_; }

    const std::vector<std::vector<GroundRule>>& rules_by_level() const { return rules_; }

    // The unique stratified model extending the extensional bits of `world`;
    // derived bits of the input are ignored.
    std::uint64_t closure(std::uint64_t world) const;

private:
    int n_ = 0;
    logic::GroundAtomTable table_;
    Stratification strata_;
    std::uint64_t fact_mask_ = 0;
    std::uint64_t extensional_mask_ = 0;
    std::uint64_t used_mask_ = 0;
    std::vector<std::vector<GroundRule>> rules_;
};

// Evaluates the stratified program on an input structure interpreting
// exactly the extensional vocabulary (plus interpretations for any program
// constants). Returns the extension over the full vocabulary.
logic::FiniteStructure datalog_eval(const ProbProgram& p, const logic::FiniteStructure& ext);

bool datalog_formula_holds(const ProbProgram& p, const std::string& pred,
                           const std::vector<int>& tuple, const logic::FiniteStructure& ext);

}  // namespace plp
