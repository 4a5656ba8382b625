#include "plp/logic/extension_axiom.hpp"

#include <algorithm>

namespace plp::logic {

namespace {

std::string var_name(int i) { return "v" + std::to_string(i); }

}  // namespace

std::vector<AtomShape> delta_atoms(const Vocabulary& vocab, int r) {
    if (r < 0) throw Error("delta atoms need r >= 0");
    std::vector<AtomShape> out;
    for (const auto& rel : vocab.relations()) {
        if (rel.arity == 0) continue;  // nullary atoms cannot mention v(r+1)
        std::vector<int> idx(static_cast<std::size_t>(rel.arity), 1);
        while (true) {
            if (std::find(idx.begin(), idx.end(), r + 1) != idx.end())
                out.push_back({rel.name, idx});
            std::size_t pos = idx.size();
            bool done = false;
            while (pos > 0) {
                --pos;
                if (idx[pos] < r + 1) {
                    ++idx[pos];
                    for (std::size_t j = pos + 1; j < idx.size(); ++j) idx[j] = 1;
                    break;
                }
                if (pos == 0) done = true;
            }
            if (done) break;
        }
    }
    return out;
}

void ExtensionAxiom::validate() const {
    auto pool = delta_atoms(vocab, r);
    for (const auto& a : positive) {
        if (std::find(pool.begin(), pool.end(), a) == pool.end())
            throw Error("axiom atom " + a.rel + " is not a delta atom for r=" + std::to_string(r));
    }
}

FormulaPtr ExtensionAxiom::formula() const {
    validate();
    auto pool = delta_atoms(vocab, r);

    auto shape_atom = [](const AtomShape& a) {
        std::vector<Term> args;
        args.reserve(a.var_indices.size());
        for (int vi : a.var_indices) args.push_back(var(var_name(vi)));
        return atom(a.rel, std::move(args));
    };

    std::vector<FormulaPtr> body;
    for (int i = 1; i <= r; ++i)
        body.push_back(negation(equal(var(var_name(i)), var(var_name(r + 1)))));
    for (const auto& a : pool) {
        bool pos = std::find(positive.begin(), positive.end(), a) != positive.end();
        body.push_back(pos ? shape_atom(a) : negation(shape_atom(a)));
    }
    FormulaPtr inner = exists(var_name(r + 1), conj_all(body));

    if (r == 0) return inner;

    std::vector<FormulaPtr> distinct;
    for (int i = 1; i <= r; ++i)
        for (int j = i + 1; j <= r; ++j)
            distinct.push_back(negation(equal(var(var_name(i)), var(var_name(j)))));
    FormulaPtr guarded = distinct.empty() ? inner : implies(conj_all(distinct), inner);
    for (int i = r; i >= 1; --i) guarded = forall(var_name(i), guarded);
    return guarded;
}

}  // namespace plp::logic
