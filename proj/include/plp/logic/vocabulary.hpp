#pragma once

#include <algorithm>
#include <compare>
#include <string>
#include <vector>

#include "plp/errors.hpp"

namespace plp::logic {

struct Relation {
    std::string name;
    int arity = 0;
    auto operator<=>(const Relation&) const = default;
};

// A finite relational vocabulary plus optional constant symbols. Relation
// names are unique; relations are kept sorted by (name, arity) so that every
// derived ordering (ground atoms, worlds, emitted clauses) is canonical.
class Vocabulary {
public:
    Vocabulary() = default;

    void add_relation(const std::string& name, int arity) {
        if (arity < 0) throw Error("negative arity for relation " + name);
        if (has_relation(name)) throw Error("duplicate relation symbol: " + name);
        relations_.insert(
            std::upper_bound(relations_.begin(), relations_.end(), Relation{name, arity}),
            Relation{name, arity});
    }

    void add_constant(const std::string& name) {
        if (has_constant(name)) throw Error("duplicate constant symbol: " + name);
        constants_.insert(std::upper_bound(constants_.begin(), constants_.end(), name), name);
    }

    bool has_relation(const std::string& name) const {
        return arity_of(name) >= 0;
    }

    // -1 when the symbol is absent.
    int arity_of(const std::string& name) const {
        for (const auto& r : relations_)
            if (r.name == name) return r.arity;
        return -1;
    }

    bool has_constant(const std::string& name) const {
        return std::binary_search(constants_.begin(), constants_.end(), name);
    }

    const std::vector<Relation>& relations() const { return relations_; }
    const std::vector<std::string>& constants() const { return constants_; }

    bool subset_of(const Vocabulary& other) const {
        for (const auto& r : relations_)
            if (other.arity_of(r.name) != r.arity) return false;
        for (const auto& c : constants_)
            if (!other.has_constant(c)) return false;
        return true;
    }

    auto operator<=>(const Vocabulary&) const = default;
    bool operator==(const Vocabulary&) const = default;

private:
    std::vector<Relation> relations_;
    std::vector<std::string> constants_;
};

}  // namespace plp::logic
