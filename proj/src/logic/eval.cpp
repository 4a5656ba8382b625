#include "plp/logic/eval.hpp"

namespace plp::logic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int term_value(const FiniteStructure& s, const Term& t, const Assignment& env) {
    if (t.kind == TermKind::Variable) {
        auto it = env.find(t.name);
        if (it == env.end()) throw EvalError("unbound variable: " + t.name);
        return it->second;
    }
    auto it = s.constant_values.find(t.name);
    if (it == s.constant_values.end()) throw EvalError("unknown constant: " + t.name);
    return it->second;
}

struct Evaluator {
    const FiniteStructure& s;

    bool eval(const Formula& f, Assignment& env, RelationBindings& rels) {
        return std::visit(
            overloaded{
                [&](const Truth& t) { return t.value; },
                [&](const Atom& a) {
                    std::vector<int> tuple;
                    tuple.reserve(a.args.size());
                    for (const auto& t : a.args) tuple.push_back(term_value(s, t, env));
                    if (auto it = rels.find(a.pred); it != rels.end()) {
                        return it->second.count(tuple) > 0;
                    }
                    int arity = s.vocab.arity_of(a.pred);
                    if (arity < 0)
                        throw EvalError("unknown relation or free second-order variable: " +
                                        a.pred);
                    if (arity != static_cast<int>(a.args.size()))
                        throw EvalError("arity mismatch on " + a.pred);
                    return s.holds(a.pred, tuple);
                },
                [&](const Equality& e) {
                    return term_value(s, e.lhs, env) == term_value(s, e.rhs, env);
                },
                [&](const Not& n) { return !eval(*n.body, env, rels); },
                [&](const And& n) {
                    return eval(*n.lhs, env, rels) && eval(*n.rhs, env, rels);
                },
                [&](const Or& n) { return eval(*n.lhs, env, rels) || eval(*n.rhs, env, rels); },
                [&](const Implies& n) {
                    return !eval(*n.lhs, env, rels) || eval(*n.rhs, env, rels);
                },
                [&](const Exists& n) {
                    auto saved = env.find(n.variable);
                    int old = saved == env.end() ? 0 : saved->second;
                    bool had = saved != env.end();
                    bool found = false;
                    for (int e = 1; e <= s.n && !found; ++e) {
                        env[n.variable] = e;
                        found = eval(*n.body, env, rels);
                    }
                    if (had)
                        env[n.variable] = old;
                    else
                        env.erase(n.variable);
                    return found;
                },
                [&](const ForAll& n) {
                    auto saved = env.find(n.variable);
                    int old = saved == env.end() ? 0 : saved->second;
                    bool had = saved != env.end();
                    bool all = true;
                    for (int e = 1; e <= s.n && all; ++e) {
                        env[n.variable] = e;
                        all = eval(*n.body, env, rels);
                    }
                    if (had)
                        env[n.variable] = old;
                    else
                        env.erase(n.variable);
                    return all;
                },
                [&](const Lfp& n) {
                    auto fixpoint = compute_lfp(n, env, rels);
                    std::vector<int> tuple;
                    tuple.reserve(n.args.size());
                    for (const auto& t : n.args) tuple.push_back(term_value(s, t, env));
                    return fixpoint.count(tuple) > 0;
                },
            },
            f.node());
    }

    std::set<std::vector<int>> apply_operator(const std::vector<std::string>& vars,
                                              const std::string& rel_var, const Formula& body,
                                              const std::set<std::vector<int>>& current,
                                              Assignment& env, RelationBindings& rels) {
        // Bind the stage relation, then sweep all tuples.
        auto saved_rel = rels.find(rel_var);
        std::set<std::vector<int>> saved_value;
        bool had_rel = saved_rel != rels.end();
        if (had_rel) saved_value = saved_rel->second;
        rels[rel_var] = current;

        std::vector<std::pair<bool, int>> saved_vars;
        saved_vars.reserve(vars.size());
        for (const auto& v : vars) {
            auto it = env.find(v);
            saved_vars.emplace_back(it != env.end(), it != env.end() ? it->second : 0);
        }

        std::set<std::vector<int>> out;
        std::vector<int> tuple(vars.size(), 1);
        bool done = false;
        if (vars.empty()) {
            if (eval(body, env, rels)) out.insert({});
        } else {
            while (!done) {
                for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = tuple[i];
                if (eval(body, env, rels)) out.insert(tuple);
                // odometer increment
                std::size_t pos = vars.size();
                while (pos > 0) {
                    --pos;
                    if (tuple[pos] < s.n) {
                        ++tuple[pos];
                        for (std::size_t j = pos + 1; j < vars.size(); ++j) tuple[j] = 1;
                        break;
                    }
                    if (pos == 0) done = true;
                }
            }
        }

        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (saved_vars[i].first)
                env[vars[i]] = saved_vars[i].second;
            else
                env.erase(vars[i]);
        }
        if (had_rel)
            rels[rel_var] = saved_value;
        else
            rels.erase(rel_var);
        return out;
    }

    std::set<std::vector<int>> compute_lfp(const Lfp& n, Assignment& env,
                                           RelationBindings& rels) {
        std::set<std::vector<int>> stage;
        while (true) {
            auto next = apply_operator(n.vars, n.rel_var, *n.body, stage, env, rels);
            if (next == stage) return stage;
            stage = std::move(next);
        }
    }
};

}  // namespace

bool eval_formula(const FiniteStructure& s, const Formula& f, const Assignment& assignment,
                  const RelationBindings& rels) {
    Assignment env = assignment;
    RelationBindings r = rels;
    return Evaluator{s}.eval(f, env, r);
}

std::set<std::vector<int>> lfp_step(const FiniteStructure& s, const std::vector<std::string>& vars,
                                    const std::string& rel_var, const Formula& body,
                                    const std::set<std::vector<int>>& current,
                                    const Assignment& params, const RelationBindings& rel_params) {
    if (!positive_in(body, rel_var))
        throw EvalError("operator body is not positive in " + rel_var);
    for (const auto& tuple : current)
        if (tuple.size() != vars.size()) throw EvalError("stage relation arity mismatch");
    Assignment env = params;
    RelationBindings rels = rel_params;
    return Evaluator{s}.apply_operator(vars, rel_var, body, current, env, rels);
}

}  // namespace plp::logic
