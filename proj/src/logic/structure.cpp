#include "plp/logic/structure.hpp"

#include <algorithm>

namespace plp::logic {

void FiniteStructure::validate() const {
    if (n < 1) throw Error("structure domain must be nonempty");
    for (const auto& r : vocab.relations()) {
        auto it = extensions.find(r.name);
        if (it == extensions.end()) throw Error("relation " + r.name + " not interpreted");
        for (const auto& tuple : it->second) {
            if (static_cast<int>(tuple.size()) != r.arity)
                throw Error("arity mismatch in extension of " + r.name);
            for (int e : tuple)
                if (e < 1 || e > n) throw Error("element out of domain in " + r.name);
        }
    }
    for (const auto& [name, ext] : extensions) {
        (void)ext;
        if (!vocab.has_relation(name)) throw Error("extension for undeclared relation " + name);
    }
    for (const auto& c : vocab.constants()) {
        auto it = constant_values.find(c);
        if (it == constant_values.end()) throw Error("constant " + c + " not interpreted");
        if (it->second < 1 || it->second > n) throw Error("constant " + c + " out of domain");
    }
}

GroundAtomTable::GroundAtomTable(const Vocabulary& vocab, int n) : vocab_(vocab), n_(n) {
    if (n < 1) throw Error("ground atom table needs domain size >= 1");
    if (!vocab.constants().empty())
        throw ConstantsError("ground atom indexing is defined for constant-free vocabularies");
    rels_ = vocab.relations();  // already sorted by (name, arity)
    offsets_.reserve(rels_.size());
    std::size_t off = 0;
    for (const auto& r : rels_) {
        offsets_.push_back(off);
        std::size_t block = 1;
        for (int i = 0; i < r.arity; ++i) block *= static_cast<std::size_t>(n);
        off += block;
    }
    total_ = off;
}

std::size_t GroundAtomTable::relation_block_size(std::size_t i) const {
    std::size_t block = 1;
    for (int a = 0; a < rels_[i].arity; ++a) block *= static_cast<std::size_t>(n_);
    return block;
}

int GroundAtomTable::relation_index(const std::string& name) const {
    for (std::size_t i = 0; i < rels_.size(); ++i)
        if (rels_[i].name == name) return static_cast<int>(i);
    return -1;
}

std::size_t GroundAtomTable::atom_index(std::size_t rel_idx, const std::vector<int>& tuple) const {
    const Relation& r = rels_[rel_idx];
    if (tuple.size() != static_cast<std::size_t>(r.arity))
        throw Error("arity mismatch indexing atom of " + r.name);
    std::size_t idx = 0;
    for (int e : tuple) {
        if (e < 1 || e > n_) throw Error("element out of domain indexing atom of " + r.name);
        idx = idx * static_cast<std::size_t>(n_) + static_cast<std::size_t>(e - 1);
    }
    return offsets_[rel_idx] + idx;
}

std::pair<std::size_t, std::vector<int>> GroundAtomTable::decode(std::size_t atom_idx) const {
    if (atom_idx >= total_) throw Error("atom index out of range");
    std::size_t rel_idx = rels_.size() - 1;
    while (offsets_[rel_idx] > atom_idx) --rel_idx;
    std::size_t rest = atom_idx - offsets_[rel_idx];
    int arity = rels_[rel_idx].arity;
    std::vector<int> tuple(static_cast<std::size_t>(arity));
    for (int i = arity - 1; i >= 0; --i) {
        tuple[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(n_)) + 1;
        rest /= static_cast<std::size_t>(n_);
    }
    return {rel_idx, tuple};
}

std::string GroundAtomTable::atom_name(std::size_t atom_idx) const {
    auto [rel_idx, tuple] = decode(atom_idx);
    std::string s = rels_[rel_idx].name;
    if (!tuple.empty()) {
        s += "(";
        for (std::size_t i = 0; i < tuple.size(); ++i)
            s += (i ? "," : "") + std::to_string(tuple[i]);
        s += ")";
    }
    return s;
}

std::uint64_t GroundAtomTable::mask_of(const FiniteStructure& s) const {
    if (total_ > 64) throw ScaleError("more than 64 ground atoms; bit-vector worlds unavailable");
    if (s.n != n_ || !(s.vocab == vocab_)) throw Error("structure does not match atom table");
    std::uint64_t mask = 0;
    for (std::size_t ri = 0; ri < rels_.size(); ++ri) {
        auto it = s.extensions.find(rels_[ri].name);
        if (it == s.extensions.end()) continue;
        for (const auto& tuple : it->second) mask |= std::uint64_t{1} << atom_index(ri, tuple);
    }
    return mask;
}

FiniteStructure GroundAtomTable::structure_of(std::uint64_t mask) const {
    if (total_ > 64) throw ScaleError("more than 64 ground atoms; bit-vector worlds unavailable");
    FiniteStructure s;
    s.vocab = vocab_;
    s.n = n_;
    for (const auto& r : rels_) s.extensions[r.name];
    for (std::size_t i = 0; i < total_; ++i) {
        if (mask >> i & 1) {
            auto [rel_idx, tuple] = decode(i);
            s.extensions[rels_[rel_idx].name].insert(std::move(tuple));
        }
    }
    return s;
}

void for_each_structure(const Vocabulary& vocab, int n,
                        const std::function<bool(const FiniteStructure&)>& fn) {
    if (!vocab.constants().empty())
        throw ConstantsError("structure enumeration is defined for constant-free vocabularies");
    GroundAtomTable table(vocab, n);
    if (table.size() > 62)
        throw ScaleError("structure enumeration over " + std::to_string(table.size()) +
                         " ground atoms refused");
    std::uint64_t count = std::uint64_t{1} << table.size();
    for (std::uint64_t mask = 0; mask < count; ++mask)
        if (!fn(table.structure_of(mask))) return;
}

std::vector<FiniteStructure> enumerate_structures(const Vocabulary& vocab, int n) {
    GroundAtomTable table(vocab, n);
    if (table.size() > 22)
        throw ScaleError("refusing to materialize 2^" + std::to_string(table.size()) +
                         " structures");
    std::vector<FiniteStructure> out;
    out.reserve(std::size_t{1} << table.size());
    for_each_structure(vocab, n, [&](const FiniteStructure& s) {
        out.push_back(s);
        return true;
    });
    return out;
}

FiniteStructure substructure(const FiniteStructure& s, int m) {
    if (m < 1 || m > s.n) throw Error("substructure domain out of range");
    for (const auto& [name, e] : s.constant_values)
        if (e > m) throw Error("constant " + name + " falls outside the substructure domain");
    FiniteStructure out;
    out.vocab = s.vocab;
    out.n = m;
    out.constant_values = s.constant_values;
    for (const auto& [rel, ext] : s.extensions) {
        auto& target = out.extensions[rel];
        for (const auto& tuple : ext) {
            bool inside = std::all_of(tuple.begin(), tuple.end(), [m](int e) { return e <= m; });
            if (inside) target.insert(tuple);
        }
    }
    return out;
}

FiniteStructure reduct_structure(const FiniteStructure& s, const Vocabulary& target) {
    if (!target.subset_of(s.vocab)) throw Error("reduct target is not a subvocabulary");
    FiniteStructure out;
    out.vocab = target;
    out.n = s.n;
    for (const auto& r : target.relations()) out.extensions[r.name] = s.extensions.at(r.name);
    for (const auto& c : target.constants()) out.constant_values[c] = s.constant_values.at(c);
    return out;
}

FiniteStructure permute_structure(const FiniteStructure& s, const std::vector<int>& perm) {
    if (perm.size() != static_cast<std::size_t>(s.n)) throw Error("permutation size mismatch");
    FiniteStructure out;
    out.vocab = s.vocab;
    out.n = s.n;
    for (const auto& [name, e] : s.constant_values)
        out.constant_values[name] = perm[static_cast<std::size_t>(e - 1)];
    for (const auto& [rel, ext] : s.extensions) {
        auto& target = out.extensions[rel];
        for (const auto& tuple : ext) {
            std::vector<int> image(tuple.size());
            for (std::size_t i = 0; i < tuple.size(); ++i)
                image[i] = perm[static_cast<std::size_t>(tuple[i] - 1)];
            target.insert(std::move(image));
        }
    }
    return out;
}

namespace {

template <typename Fn>
void for_each_permutation(int n, Fn&& fn) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
    do {
        fn(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace

bool isomorphic(const FiniteStructure& a, const FiniteStructure& b) {
    if (a.n != b.n || !(a.vocab == b.vocab)) return false;
    bool found = false;
    for_each_permutation(a.n, [&](const std::vector<int>& perm) {
        if (!found && permute_structure(a, perm) == b) found = true;
    });
    return found;
}

std::uint64_t count_isomorphic(const FiniteStructure& s) {
    std::set<FiniteStructure> images;
    for_each_permutation(s.n, [&](const std::vector<int>& perm) {
        images.insert(permute_structure(s, perm));
    });
    return images.size();
}

std::string to_sexpr(const FiniteStructure& s) {
    std::string out = "(structure " + std::to_string(s.n);
    for (const auto& r : s.vocab.relations()) {
        out += " (" + r.name;
        auto it = s.extensions.find(r.name);
        if (it != s.extensions.end()) {
            for (const auto& tuple : it->second) {
                out += " (";
                for (std::size_t i = 0; i < tuple.size(); ++i)
                    out += (i ? " " : "") + std::to_string(tuple[i]);
                out += ")";
            }
        }
        out += ")";
    }
    for (const auto& [name, e] : s.constant_values)
        out += " (const " + name + " " + std::to_string(e) + ")";
    return out + ")";
}

}  // namespace plp::logic
