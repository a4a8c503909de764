#pragma once
// Symbolic families of n-controllers.
//
// Every (controller i, state s) pair is a raw parameter name. obs/same constraints merge
// names into synonym classes; each class is one parameter whose value is an action shared
// by all its members. Parameters are numbered by their smallest raw index i * |S| + s.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "hypersynth/analysis.hpp"
#include "hypersynth/model.hpp"
#include "hypersynth/spec.hpp"

namespace hypersynth {

using FamilySize = boost::multiprecision::cpp_int;

struct RawName {
    std::size_t controller = 0;
    StateId state = 0;

    bool operator==(const RawName&) const = default;
};

class ParameterSpace {
public:
    ParameterSpace() = default;
    ParameterSpace(std::size_t controllers, std::size_t states, std::vector<std::size_t> class_of,
                   std::vector<std::vector<ActionId>> domains);

    std::size_t controllers() const noexcept { return controllers_; }
    std::size_t states() const noexcept { return states_; }
    std::size_t parameter_count() const noexcept { return domains_.size(); }
    std::size_t parameter_of(std::size_t controller, StateId s) const { return class_of_.at(controller * states_ + s); }
    const std::vector<RawName>& members(std::size_t k) const { return members_.at(k); }
    const std::vector<ActionId>& domain(std::size_t k) const { return domains_.at(k); }
    FamilySize size() const;

private:
    std::size_t controllers_ = 0;
    std::size_t states_ = 0;
    std::vector<std::size_t> class_of_;
    std::vector<std::vector<RawName>> members_;
    std::vector<std::vector<ActionId>> domains_;
};

/// Throws IncompatibleObservationError when an obs() class spans states with different
/// menus, SpecError on out-of-range states or unknown controllers.
ParameterSpace build_parameter_space(const Mdp& m, const std::vector<std::string>& controllers,
                                     const std::vector<StructuralConstraint>& structure);

/// A subfamily: per-parameter sorted action subsets.
struct FamilyNode {
    std::vector<std::vector<ActionId>> domains;

    static FamilyNode root(const ParameterSpace& ps);
    FamilySize size() const;
    bool is_singleton() const;
    bool contains(const std::vector<ActionId>& assignment) const;

    bool operator==(const FamilyNode&) const = default;
};

/// Total assignment parameter -> action.
struct Realisation {
    std::vector<ActionId> assignment;

    bool operator==(const Realisation&) const = default;
};

std::vector<Controller> induce(const ParameterSpace& ps, const Realisation& r);

/// The realisation of a singleton node.
Realisation only_member(const FamilyNode& node);

/// Visits every realisation of `node` in lexicographic order; `visit` returns false to stop.
template <typename Visit>
void for_each_realisation(const FamilyNode& node, Visit&& visit);

/// Checks the structural constraints directly on an n-controller.
bool satisfies_structure(const std::vector<Controller>& controllers, const std::vector<std::string>& names,
                         const std::vector<StructuralConstraint>& structure);

/// Menus of controller `i` cut to the node's domains.
Mdp node_restrict(const Mdp& m, const ParameterSpace& ps, const FamilyNode& node, std::size_t controller);

/// Values fixed for some parameters; R[sigma] of an extremal controller.
struct PartialAssignment {
    std::map<std::size_t, ActionId> fixed;

    bool operator==(const PartialAssignment&) const = default;
};

struct IntersectResult {
    std::optional<PartialAssignment> merged;
    std::optional<std::size_t> disagreement;  // smallest parameter with different values
    std::vector<ActionId> disagreeing_actions;  // the two values, sorted
};

IntersectResult intersect(const PartialAssignment& a, const PartialAssignment& b);

/// Completes `partial` with the first domain value of every free parameter.
Realisation complete(const FamilyNode& node, const PartialAssignment& partial);

struct Conflict {
    std::size_t parameter = 0;
    std::vector<ActionId> actions;  // sorted, size >= 2
    std::vector<StateId> states;    // relevant member states of the controller
};

/// Classes in which `c` picks different actions at relevant states of controller `i`.
std::vector<Conflict> consistency_conflicts(const ParameterSpace& ps, std::size_t controller, const Controller& c,
                                            const StateSet& relevant);

/// R[c]: fixes the parameter of every relevant state of controller `i` to c's choice.
/// Only meaningful when consistency_conflicts is empty.
PartialAssignment fix_controller(const ParameterSpace& ps, std::size_t controller, const Controller& c,
                                 const StateSet& relevant);

/// States reachable from `from` in `mc` without passing through `stop`; `stop` excluded.
StateSet relevant_states(const Mc& mc, StateId from, const StateSet& stop);

/// gamma(s,a) = exp(s) * (rew(s,a) [reward kind] + sum_s' P(s,a,s') val(s')).
double impact(const Mdp& m, StateId s, ActionId a, double visits, const std::vector<double>& values, QueryKind kind);

/// gamma for every enabled (s,a) of `m`, with exp and val taken from `mc` (a controller of m)
/// started at `from`, targets made absorbing.
std::map<std::pair<StateId, ActionId>, double> immediate_impact(const Mdp& m, const Mc& mc, StateId from,
                                                                QueryKind kind, const StateSet& target);

/// Average over a conflict's states of the gamma range over its actions.
double split_score(const Conflict& conflict, const std::map<std::pair<StateId, ActionId>, double>& gamma);

/// k*: the conflict with the highest split score, ties to the lowest parameter.
/// `gammas[i]` holds the impacts for `conflicts[i]`.
std::size_t select_split(const std::vector<Conflict>& conflicts,
                         const std::vector<const std::map<std::pair<StateId, ActionId>, double>*>& gammas);

/// Singletons of `actions` inside the parameter's domain followed by the remainder (if any).
std::vector<FamilyNode> split(const FamilyNode& node, std::size_t parameter, const std::vector<ActionId>& actions);

/// Box complement of the sub-box that fixes `fixed` inside `node`: at most |fixed| disjoint
/// boxes, parameters taken in ascending order.
std::vector<FamilyNode> box_complement(const FamilyNode& node, const PartialAssignment& fixed);

template <typename Visit>
void for_each_realisation(const FamilyNode& node, Visit&& visit) {
    const std::size_t k = node.domains.size();
    std::vector<std::size_t> pos(k, 0);
    Realisation r;
    r.assignment.resize(k);
    for (std::size_t i = 0; i < k; ++i) r.assignment[i] = node.domains[i].front();
    while (true) {
        if (!visit(static_cast<const Realisation&>(r))) return;
        std::size_t i = k;
        while (true) {
            if (i == 0) return;
            --i;
            if (++pos[i] < node.domains[i].size()) {
                r.assignment[i] = node.domains[i][pos[i]];
                break;
            }
            pos[i] = 0;
            r.assignment[i] = node.domains[i].front();
        }
    }
}

}  // namespace hypersynth
