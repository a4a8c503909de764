#pragma once
// Explicit-state MDPs and Markov chains, controllers, restriction and memory unfolding.
//
// Action identity: every action carries the ordinal it had in the unrestricted model.
// Restriction keeps those ordinals, so a controller picked on a restricted model is a
// controller of the original one without translation. Ordinal order is the tie-break
// order everywhere.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hypersynth {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

/// Probability sums must be within this distance from 1.
inline constexpr double kProbabilitySumTolerance = 1e-9;

struct Transition {
    StateId target = 0;
    double probability = 0.0;

    bool operator==(const Transition&) const = default;
};

struct Choice {
    ActionId id = 0;
    std::string name;
    std::vector<Transition> distribution;  // sorted by target, positive entries only
    double reward = 0.0;

    bool operator==(const Choice&) const = default;
};

/// Dense state set over a fixed universe.
class StateSet {
public:
    StateSet() = default;
    explicit StateSet(std::size_t universe) : bits_(universe, false) {}
    static StateSet of(std::size_t universe, std::span<const StateId> members);

    std::size_t universe() const noexcept { return bits_.size(); }
    bool contains(StateId s) const { return s < bits_.size() && bits_[s]; }
    void insert(StateId s) { bits_.at(s) = true; }
    void erase(StateId s) { bits_.at(s) = false; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    std::vector<StateId> members() const;

    bool operator==(const StateSet&) const = default;

private:
    std::vector<bool> bits_;
};

class Mdp {
public:
    Mdp() = default;

    /// Validates and normalises: choices sorted by id, duplicate targets merged,
    /// zero-probability entries dropped, sums within tolerance renormalised.
    /// Throws ModelError on any violated invariant.
    Mdp(std::vector<std::vector<Choice>> choices, std::map<std::string, StateSet> labels, bool has_rewards);

    std::size_t state_count() const noexcept { return choices_.size(); }
    std::span<const Choice> actions(StateId s) const { return choices_.at(s); }
    std::size_t menu_size(StateId s) const { return choices_.at(s).size(); }
    /// nullptr when `a` is not enabled in `s`.
    const Choice* find_action(StateId s, ActionId a) const;
    std::size_t choice_count() const;

    const std::map<std::string, StateSet>& labels() const noexcept { return labels_; }
    bool has_label(const std::string& name) const { return labels_.count(name) != 0; }
    /// Throws ModelError for unknown labels.
    const StateSet& label(const std::string& name) const;

    bool has_rewards() const noexcept { return has_rewards_; }
    bool is_chain() const;

    bool operator==(const Mdp&) const = default;

private:
    std::vector<std::vector<Choice>> choices_;
    std::map<std::string, StateSet> labels_;
    bool has_rewards_ = false;
};

/// An MDP with exactly one action per state.
class Mc {
public:
    explicit Mc(Mdp model);

    std::size_t state_count() const noexcept { return model_.state_count(); }
    std::span<const Transition> row(StateId s) const { return model_.actions(s).front().distribution; }
    double reward(StateId s) const { return model_.actions(s).front().reward; }
    ActionId action(StateId s) const { return model_.actions(s).front().id; }
    const Mdp& model() const noexcept { return model_; }

    bool operator==(const Mc&) const = default;

private:
    Mdp model_;
};

/// Deterministic memoryless controller: one action id per state.
struct Controller {
    std::vector<ActionId> choice;

    bool operator==(const Controller&) const = default;
};

struct TargetSet {
    std::string name;
    StateSet states;

    static TargetSet from_label(const Mdp& m, const std::string& label);
};

/// Per-state allowed actions; states absent keep their full menu.
using ActionRestriction = std::map<StateId, std::vector<ActionId>>;

/// M^sigma. Throws InvalidControllerError when sigma picks a disabled action.
Mc impose(const Mdp& m, const Controller& c);

/// Shrinks action menus. Throws ModelError on an empty allowed set or an action not enabled.
Mdp restrict(const Mdp& m, const ActionRestriction& allowed);

/// Enumerates the controllers of an MDP in lexicographic order (state 0 slowest).
/// Intended for small models; returns false from `visit` to stop early.
template <typename Visit>
void for_each_controller(const Mdp& m, Visit&& visit);

inline constexpr unsigned kMaxMemoryBits = 2;

/// Product with a controller-updated memory of `bits` bits. State (s, mem) has index
/// s * 2^bits + mem; action (a, next) has id a * 2^bits + next. Throws ModelError
/// when bits exceeds `cap`.
Mdp unfold_memory(const Mdp& m, unsigned bits, unsigned cap = kMaxMemoryBits);

/// Index of the copy of `s` with memory value `mem` in an unfolded model.
inline StateId memory_state(StateId s, unsigned mem, unsigned bits) {
    return static_cast<StateId>((static_cast<std::size_t>(s) << bits) + mem);
}

template <typename Visit>
void for_each_controller(const Mdp& m, Visit&& visit) {
    const std::size_t n = m.state_count();
    std::vector<std::size_t> pos(n, 0);
    Controller c;
    c.choice.resize(n);
    for (StateId s = 0; s < n; ++s) c.choice[s] = m.actions(s).front().id;
    while (true) {
        if (!visit(static_cast<const Controller&>(c))) return;
        std::size_t s = n;
        while (s > 0) {
            --s;
            if (++pos[s] < m.menu_size(static_cast<StateId>(s))) {
                c.choice[s] = m.actions(static_cast<StateId>(s))[pos[s]].id;
                break;
            }
            pos[s] = 0;
            c.choice[s] = m.actions(static_cast<StateId>(s)).front().id;
            if (s == 0) return;
        }
        if (n == 0) return;
    }
}

}  // namespace hypersynth
