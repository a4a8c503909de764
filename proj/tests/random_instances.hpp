#pragma once
// Random small models and specifications for property tests.

#include <random>
#include <string>
#include <vector>

#include "hypersynth/family.hpp"
#include "hypersynth/model.hpp"
#include "hypersynth/spec.hpp"

namespace gen {

using namespace hypersynth;

struct Shape {
    std::size_t min_states = 2;
    std::size_t max_states = 6;
    std::size_t max_actions = 3;
    bool rewards = true;
};

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

inline bool coin(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

inline std::vector<Transition> random_distribution(std::mt19937_64& rng, std::size_t n) {
    const std::size_t k = pick(rng, 1, std::min<std::size_t>(3, n));
    std::vector<Transition> dist;
    std::vector<std::size_t> weights;
    std::size_t total = 0;
    for (std::size_t i = 0; i < k; ++i) {
        weights.push_back(pick(rng, 1, 4));
        total += weights.back();
    }
    for (std::size_t i = 0; i < k; ++i) {
        dist.push_back({static_cast<StateId>(pick(rng, 0, n - 1)),
                        static_cast<double>(weights[i]) / static_cast<double>(total)});
    }
    return dist;
}

/// Labels `t` and `u` are nonempty; rewards are small integers.
inline Mdp random_mdp(std::mt19937_64& rng, const Shape& shape, std::vector<std::size_t> menu_sizes = {}) {
    const std::size_t n = menu_sizes.empty() ? pick(rng, shape.min_states, shape.max_states) : menu_sizes.size();
    std::vector<std::vector<Choice>> rows(n);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t actions = menu_sizes.empty() ? pick(rng, 1, shape.max_actions) : menu_sizes[s];
        for (std::size_t a = 0; a < actions; ++a) {
            Choice c;
            c.id = static_cast<ActionId>(a);
            c.distribution = random_distribution(rng, n);
            c.reward = shape.rewards ? static_cast<double>(pick(rng, 0, 3)) : 0.0;
            rows[s].push_back(std::move(c));
        }
    }
    std::map<std::string, StateSet> labels;
    for (const char* name : {"t", "u"}) {
        StateSet set(n);
        set.insert(static_cast<StateId>(pick(rng, 0, n - 1)));
        for (StateId s = 0; s < n; ++s) {
            if (coin(rng, 0.2)) set.insert(s);
        }
        labels.emplace(name, set);
    }
    return Mdp(std::move(rows), std::move(labels), shape.rewards);
}

inline Mc random_mc(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::size_t> sizes(n, 1);
    Shape shape;
    shape.rewards = true;
    return Mc(random_mdp(rng, shape, sizes));
}

/// Acyclic chain: every state moves to higher-numbered states; the last one absorbs.
inline Mc random_acyclic_mc(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::vector<Choice>> rows(n);
    for (std::size_t s = 0; s + 1 < n; ++s) {
        const std::size_t k = pick(rng, 1, std::min<std::size_t>(3, n - 1 - s));
        Choice c;
        std::size_t total = 0;
        std::vector<std::size_t> w;
        for (std::size_t i = 0; i < k; ++i) {
            w.push_back(pick(rng, 1, 5));
            total += w.back();
        }
        for (std::size_t i = 0; i < k; ++i) {
            c.distribution.push_back({static_cast<StateId>(pick(rng, s + 1, n - 1)), double(w[i]) / double(total)});
        }
        rows[s].push_back(std::move(c));
    }
    rows[n - 1].push_back(Choice{0, "", {{static_cast<StateId>(n - 1), 1.0}}, 0.0});
    return Mc(Mdp(std::move(rows), {}, false));
}

inline std::vector<StateId> random_states(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::vector<StateId> out;
    while (out.size() < k) {
        const auto s = static_cast<StateId>(pick(rng, 0, n - 1));
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Leaves are numbered in preorder, matching the parser's atom order.
inline BoolExpr random_bool(std::mt19937_64& rng, std::size_t& atoms, int depth) {
    if (depth == 0 || coin(rng, 0.45)) {
        if (coin(rng, 0.03)) return BoolExpr::constant(coin(rng, 0.5));
        return BoolExpr::leaf(atoms++);
    }
    const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
    if (roll < 0.2) return BoolExpr{BoolExpr::Kind::Not, 0, {random_bool(rng, atoms, depth - 1)}};
    BoolExpr e{roll < 0.6 ? BoolExpr::Kind::And : BoolExpr::Kind::Or, 0, {}};
    for (std::size_t i = 0, k = pick(rng, 2, 3); i < k; ++i) e.children.push_back(random_bool(rng, atoms, depth - 1));
    return e;
}

/// A well-formed specification over `m` using every language feature at random.
inline HyperSpec random_spec(std::mt19937_64& rng, const Mdp& m, std::size_t max_controllers = 2) {
    const std::size_t n = m.state_count();
    HyperSpec spec;
    const std::size_t controllers = pick(rng, 1, max_controllers);
    for (std::size_t i = 0; i < controllers; ++i) spec.controllers.push_back("c" + std::to_string(i));

    if (coin(rng, 0.5)) {
        const std::size_t k = pick(rng, 1, 2);
        for (std::size_t i = 0; i < k; ++i) {
            if (controllers > 1 && coin(rng, 0.5)) {
                spec.structure.push_back(SameConstraint{static_cast<StateId>(pick(rng, 0, n - 1)), spec.controllers});
            } else {
                // obs over states with the same menu size (ids 0..k-1, no names).
                const auto s = static_cast<StateId>(pick(rng, 0, n - 1));
                std::vector<StateId> group{s};
                for (StateId t = 0; t < n; ++t) {
                    if (t != s && m.menu_size(t) == m.menu_size(s) && coin(rng, 0.5)) group.push_back(t);
                }
                std::sort(group.begin(), group.end());
                spec.structure.push_back(ObsConstraint{group, spec.controllers[pick(rng, 0, controllers - 1)]});
            }
        }
    }
    const std::size_t vars = pick(rng, 1, 2);
    for (std::size_t i = 0; i < vars; ++i) {
        StateQuantifier q;
        q.quantifier = coin(rng, 0.6) ? Quantifier::Forall : Quantifier::Exists;
        q.variable = i == 0 ? "x" : "y";
        q.domain = random_states(rng, n, pick(rng, 1, std::min<std::size_t>(2, n)));
        q.controller = spec.controllers[i < controllers ? i : pick(rng, 0, controllers - 1)];
        spec.quantifiers.push_back(std::move(q));
    }
    std::size_t atoms = 0;
    spec.prob = random_bool(rng, atoms, 2);
    for (std::size_t i = 0; i < atoms; ++i) {
        ProbAtom a;
        a.kind = m.has_rewards() && coin(rng, 0.3) ? QueryKind::Reward : QueryKind::Reach;
        const char* labels[] = {"t", "u"};
        a.left = SideRef{spec.quantifiers[pick(rng, 0, vars - 1)].variable, labels[pick(rng, 0, 1)]};
        a.relation = static_cast<Relation>(pick(rng, 0, 4));
        if (coin(rng, 0.5)) {
            a.right = SideRef{spec.quantifiers[pick(rng, 0, vars - 1)].variable, labels[pick(rng, 0, 1)]};
        } else if (a.kind == QueryKind::Reach) {
            a.right = coin(rng, 0.5) ? static_cast<double>(pick(rng, 0, 4)) / 4.0
                                     : std::uniform_real_distribution<double>(0, 1)(rng);
        } else {
            a.right = static_cast<double>(pick(rng, 0, 8)) / 2.0;
        }
        if (a.relation == Relation::Equal && coin(rng, 0.5)) {
            a.equality_epsilon = coin(rng, 0.5) ? 0.05 : 0.2;
            a.explicit_epsilon = true;
        }
        spec.atoms.push_back(std::move(a));
    }
    if (atoms == 0) {
        // Constant formula: still give the spec one atom.
        spec.prob = BoolExpr{BoolExpr::Kind::And, 0, {spec.prob, BoolExpr::leaf(0)}};
        ProbAtom a;
        a.left = SideRef{"x", "t"};
        a.right = 0.5;
        spec.atoms.push_back(a);
    }
    return spec;
}

/// Parameters whose domain offers a real choice.
inline std::size_t free_parameters(const ParameterSpace& ps) {
    std::size_t k = 0;
    for (std::size_t p = 0; p < ps.parameter_count(); ++p) k += ps.domain(p).size() > 1 ? 1 : 0;
    return k;
}

}  // namespace gen
