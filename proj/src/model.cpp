#include "hypersynth/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypersynth/errors.hpp"

namespace hypersynth {

namespace {

// Sums this close to 1 are left untouched so that renormalised data stays bit-stable.
constexpr double kExactSumSlack = 1e-12;

void normalise_distribution(std::vector<Transition>& dist, std::size_t state_count, StateId s, ActionId a) {
    for (const auto& t : dist) {
        if (t.target >= state_count) {
            throw ModelError("transition from state " + std::to_string(s) + " action " + std::to_string(a) +
                             " targets unknown state " + std::to_string(t.target));
        }
        if (!(t.probability >= 0.0 && t.probability <= 1.0)) {
            throw ModelError("probability outside [0,1] at state " + std::to_string(s) + " action " +
                             std::to_string(a));
        }
    }
    std::sort(dist.begin(), dist.end(), [](const Transition& x, const Transition& y) { return x.target < y.target; });
    std::vector<Transition> merged;
    merged.reserve(dist.size());
    for (const auto& t : dist) {
        if (!merged.empty() && merged.back().target == t.target) {
            merged.back().probability += t.probability;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const Transition& t) { return t.probability == 0.0; });
    double sum = 0.0;
    for (const auto& t : merged) sum += t.probability;
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
        throw ModelError("distribution of state " + std::to_string(s) + " action " + std::to_string(a) +
                         " sums to " + std::to_string(sum));
    }
    if (std::abs(sum - 1.0) > kExactSumSlack) {
        for (auto& t : merged) t.probability /= sum;
    }
    dist = std::move(merged);
}

}  // namespace

StateSet StateSet::of(std::size_t universe, std::span<const StateId> members) {
    StateSet set(universe);
    for (StateId s : members) set.insert(s);
    return set;
}

std::size_t StateSet::count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }

std::vector<StateId> StateSet::members() const {
    std::vector<StateId> out;
    for (std::size_t s = 0; s < bits_.size(); ++s) {
        if (bits_[s]) out.push_back(static_cast<StateId>(s));
    }
    return out;
}

Mdp::Mdp(std::vector<std::vector<Choice>> choices, std::map<std::string, StateSet> labels, bool has_rewards)
    : choices_(std::move(choices)), labels_(std::move(labels)), has_rewards_(has_rewards) {
    const std::size_t n = choices_.size();
    for (std::size_t s = 0; s < n; ++s) {
        auto& menu = choices_[s];
        if (menu.empty()) throw ModelError("state " + std::to_string(s) + " has no enabled action");
        std::sort(menu.begin(), menu.end(), [](const Choice& x, const Choice& y) { return x.id < y.id; });
        for (std::size_t j = 1; j < menu.size(); ++j) {
            if (menu[j].id == menu[j - 1].id) {
                throw ModelError("state " + std::to_string(s) + " declares action " + std::to_string(menu[j].id) +
                                 " twice");
            }
        }
        for (auto& choice : menu) {
            normalise_distribution(choice.distribution, n, static_cast<StateId>(s), choice.id);
            if (!(choice.reward >= 0.0) || std::isinf(choice.reward)) {
                throw ModelError("reward of state " + std::to_string(s) + " action " + std::to_string(choice.id) +
                                 " must be a finite nonnegative number");
            }
            if (!has_rewards_ && choice.reward != 0.0) {
                throw ModelError("reward given but model declared without rewards");
            }
        }
    }
    for (auto& [name, set] : labels_) {
        if (set.universe() != n) {
            // Accept smaller universes as long as no member is out of range.
            if (set.universe() > n) {
                for (std::size_t s = n; s < set.universe(); ++s) {
                    if (set.contains(static_cast<StateId>(s))) {
                        throw ModelError("label " + name + " contains unknown state " + std::to_string(s));
                    }
                }
            }
            StateSet resized(n);
            for (StateId s : set.members()) {
                if (s < n) resized.insert(s);
            }
            set = std::move(resized);
        }
    }
}

const Choice* Mdp::find_action(StateId s, ActionId a) const {
    const auto& menu = choices_.at(s);
    auto it = std::lower_bound(menu.begin(), menu.end(), a, [](const Choice& c, ActionId id) { return c.id < id; });
    if (it == menu.end() || it->id != a) return nullptr;
    return &*it;
}

std::size_t Mdp::choice_count() const {
    std::size_t total = 0;
    for (const auto& menu : choices_) total += menu.size();
    return total;
}

const StateSet& Mdp::label(const std::string& name) const {
    auto it = labels_.find(name);
    if (it == labels_.end()) throw ModelError("unknown label '" + name + "'");
    return it->second;
}

bool Mdp::is_chain() const {
    return std::all_of(choices_.begin(), choices_.end(), [](const auto& menu) { return menu.size() == 1; });
}

Mc::Mc(Mdp model) : model_(std::move(model)) {
    if (!model_.is_chain()) throw ModelError("Markov chain requires exactly one action per state");
}

TargetSet TargetSet::from_label(const Mdp& m, const std::string& label) { return TargetSet{label, m.label(label)}; }

Mc impose(const Mdp& m, const Controller& c) {
    const std::size_t n = m.state_count();
    if (c.choice.size() != n) {
        throw InvalidControllerError("controller covers " + std::to_string(c.choice.size()) + " states, model has " +
                                     std::to_string(n));
    }
    std::vector<std::vector<Choice>> rows(n);
    for (StateId s = 0; s < n; ++s) {
        const Choice* chosen = m.find_action(s, c.choice[s]);
        if (chosen == nullptr) {
            throw InvalidControllerError("action " + std::to_string(c.choice[s]) + " is not enabled in state " +
                                         std::to_string(s));
        }
        rows[s].push_back(*chosen);
    }
    return Mc(Mdp(std::move(rows), m.labels(), m.has_rewards()));
}

Mdp restrict(const Mdp& m, const ActionRestriction& allowed) {
    const std::size_t n = m.state_count();
    std::vector<std::vector<Choice>> menus(n);
    for (StateId s = 0; s < n; ++s) {
        auto it = allowed.find(s);
        if (it == allowed.end()) {
            menus[s].assign(m.actions(s).begin(), m.actions(s).end());
            continue;
        }
        if (it->second.empty()) throw ModelError("empty action restriction for state " + std::to_string(s));
        std::vector<ActionId> keep = it->second;
        std::sort(keep.begin(), keep.end());
        keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
        for (ActionId a : keep) {
            const Choice* choice = m.find_action(s, a);
            if (choice == nullptr) {
                throw ModelError("restriction keeps action " + std::to_string(a) + " not enabled in state " +
                                 std::to_string(s));
            }
            menus[s].push_back(*choice);
        }
    }
    for (auto it = allowed.begin(); it != allowed.end(); ++it) {
        if (it->first >= n) throw ModelError("restriction names unknown state " + std::to_string(it->first));
    }
    return Mdp(std::move(menus), m.labels(), m.has_rewards());
}

Mdp unfold_memory(const Mdp& m, unsigned bits, unsigned cap) {
    if (bits > cap) {
        throw ModelError("memory of " + std::to_string(bits) + " bits exceeds the cap of " + std::to_string(cap));
    }
    const std::size_t copies = std::size_t{1} << bits;
    const std::size_t n = m.state_count();
    std::vector<std::vector<Choice>> menus(n * copies);
    for (StateId s = 0; s < n; ++s) {
        for (unsigned mem = 0; mem < copies; ++mem) {
            auto& menu = menus[memory_state(s, mem, bits)];
            for (const Choice& original : m.actions(s)) {
                for (unsigned next = 0; next < copies; ++next) {
                    Choice lifted;
                    lifted.id = static_cast<ActionId>(original.id * copies + next);
                    lifted.name = bits == 0 ? original.name
                                            : (original.name.empty() ? std::to_string(original.id) : original.name) +
                                                  "/m" + std::to_string(next);
                    lifted.reward = original.reward;
                    for (const auto& t : original.distribution) {
                        lifted.distribution.push_back({memory_state(t.target, next, bits), t.probability});
                    }
                    menu.push_back(std::move(lifted));
                }
            }
        }
    }
    std::map<std::string, StateSet> labels;
    for (const auto& [name, set] : m.labels()) {
        StateSet lifted(n * copies);
        for (StateId s : set.members()) {
            for (unsigned mem = 0; mem < copies; ++mem) lifted.insert(memory_state(s, mem, bits));
        }
        labels.emplace(name, std::move(lifted));
    }
    return Mdp(std::move(menus), std::move(labels), m.has_rewards());
}

}  // namespace hypersynth
