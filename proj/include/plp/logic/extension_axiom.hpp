#pragma once

#include <string>
#include <vector>

#include "plp/logic/formula.hpp"
#include "plp/logic/vocabulary.hpp"

namespace plp::logic {

// An atom shape over the variables v1..v(r+1): relation index into the
// vocabulary plus a tuple of variable indices (1-based).
struct AtomShape {
    std::string rel;
    std::vector<int> var_indices;
    auto operator<=>(const AtomShape&) const = default;
};

// All atoms over v1..v(r+1) that mention v(r+1), in canonical order. This is
// the pool an extension axiom selects its positive part from.
std::vector<AtomShape> delta_atoms(const Vocabulary& vocab, int r);

// One extension axiom: for all distinct v1..vr there is a fresh v(r+1)
// realizing exactly `positive` out of delta_atoms(vocab, r). The family of
// all such axioms (over all r and all subsets) axiomatizes the almost-sure
// theory driving every asymptotic computation in this toolkit.
struct ExtensionAxiom {
    Vocabulary vocab;
    int r = 0;
    std::vector<AtomShape> positive;  // subset of delta_atoms(vocab, r)

    void validate() const;

    // The axiom as a closed first-order formula over variables "v1".."v<r+1>".
    FormulaPtr formula() const;
};

}  // namespace plp::logic
