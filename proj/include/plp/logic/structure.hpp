#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "plp/logic/vocabulary.hpp"

namespace plp::logic {

// A finite structure over domain {1..n}. Extensions are keyed by relation
// name and hold sorted tuple sets; constants map to domain elements.
struct FiniteStructure {
    Vocabulary vocab;
    int n = 0;
    std::map<std::string, std::set<std::vector<int>>> extensions;
    std::map<std::string, int> constant_values;

    bool holds(const std::string& rel, const std::vector<int>& tuple) const {
        auto it = extensions.find(rel);
        return it != extensions.end() && it->second.count(tuple) > 0;
    }

    // Checks domain bounds, arities, and that every vocabulary symbol is
    // interpreted. Throws on violation.
    void validate() const;

    auto operator<=>(const FiniteStructure&) const = default;
    bool operator==(const FiniteStructure&) const = default;
};

// Canonical indexing of all ground atoms of a vocabulary over {1..n}:
// relations sorted by (name, arity), tuples in lexicographic order. This
// ordering is the backbone of world bit-vectors, structure enumeration and
// deterministic output everywhere.
class GroundAtomTable {
public:
    GroundAtomTable() = default;
    GroundAtomTable(const Vocabulary& vocab, int n);

    const Vocabulary& vocab() const { return vocab_; }
    int domain_size() const { return n_; }
    std::size_t size() const { return total_; }

    std::size_t relation_count() const { return rels_.size(); }
    const Relation& relation(std::size_t i) const { return rels_[i]; }
    std::size_t relation_offset(std::size_t i) const { return offsets_[i]; }
    std::size_t relation_block_size(std::size_t i) const;
    int relation_index(const std::string& name) const;  // -1 if absent

    std::size_t atom_index(std::size_t rel_idx, const std::vector<int>& tuple) const;
    std::pair<std::size_t, std::vector<int>> decode(std::size_t atom_idx) const;
    std::string atom_name(std::size_t atom_idx) const;  // "r(1,2)"

    // Bit-vector round trips (require size() <= 64).
    std::uint64_t mask_of(const FiniteStructure& s) const;
    FiniteStructure structure_of(std::uint64_t mask) const;

private:
    Vocabulary vocab_;
    int n_ = 0;
    std::vector<Relation> rels_;
    std::vector<std::size_t> offsets_;
    std::size_t total_ = 0;
};

// All structures over the vocabulary with domain {1..n}, visited in canonical
// mask order (so 2^(number of ground atoms) many). Constant symbols are
// rejected: enumeration is a purely relational notion here.
// The callback returns false to stop early.
void for_each_structure(const Vocabulary& vocab, int n,
                        const std::function<bool(const FiniteStructure&)>& fn);

// Convenience wrapper materializing the full list. Guarded: refuses more
// than 2^22 structures.
std::vector<FiniteStructure> enumerate_structures(const Vocabulary& vocab, int n);

// The induced substructure on elements {1..m}, m <= n.
FiniteStructure substructure(const FiniteStructure& s, int m);

// Forgets relations/constants outside `target` (which must be a subset).
FiniteStructure reduct_structure(const FiniteStructure& s, const Vocabulary& target);

// Image of s under a permutation of {1..n}; perm[i-1] is the image of i.
FiniteStructure permute_structure(const FiniteStructure& s, const std::vector<int>& perm);

bool isomorphic(const FiniteStructure& a, const FiniteStructure& b);

// Number of distinct structures isomorphic to s (orbit size under S_n).
std::uint64_t count_isomorphic(const FiniteStructure& s);

std::string to_sexpr(const FiniteStructure& s);

}  // namespace plp::logic
