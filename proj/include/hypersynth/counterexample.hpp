#pragma once
// Family-aware counterexamples for reach-vs-reach atoms.
//
// A counterexample for a violated comparison `L <= R + slack` is a pair of state sets
// (C1, C2). States outside C1 are short-cut to the top/bottom sinks with a family lower
// bound on L's side, states outside C2 with a family upper bound on R's side. If the
// short-cut chains still violate the comparison, every realisation that agrees with the
// sampled one on the parameters of C1 and C2 violates it too.

#include <optional>
#include <vector>

#include "hypersynth/family.hpp"
#include "hypersynth/model.hpp"

namespace hypersynth {

struct DeflatedMc {
    Mc chain;
    StateId bottom = 0;  // s_bot == original state count
    StateId top = 0;     // s_top == original state count + 1
    StateSet target;     // original target plus s_top
};

/// Keeps the rows of `keep`; every other non-target state branches to s_top with
/// probability bounds[s] and to s_bot otherwise. Target states become absorbing.
DeflatedMc build_deflated(const Mc& mc, const StateSet& keep, const std::vector<double>& bounds,
                          const StateSet& target);

/// One side of a violated comparison: a reach query on a member MC with per-state family
/// bounds, or a constant.
struct CeSide {
    const Mc* mc = nullptr;  // null for a constant side
    StateId initial = 0;
    StateSet target;
    std::vector<double> bounds;  // lower bounds for the large side, upper bounds for the small side
    double constant = 0.0;
};

struct CePair {
    StateSet large;  // C1
    StateSet small;  // C2
};

/// Grows (C1, C2) greedily until the deflated chains certify `large > small + slack`
/// (or `>=` when `strict_violation`) by more than `guard`. Expansion picks, across both
/// frontiers, the state with the fewest actions in `m`; ties go to the lower state, then
/// to the large side. Returns nothing when full expansion does not certify.
std::optional<CePair> grow_ce(const Mdp& m, const CeSide& large, const CeSide& small, double slack,
                              bool strict_violation, double guard);

/// Deflated value of one side for a given kept set.
double deflated_value(const CeSide& side, const StateSet& keep);

/// Removes the realisations agreeing with `r` on `conflict` and returns the remaining boxes.
std::vector<FamilyNode> prune_by_conflict(const FamilyNode& node, const Realisation& r,
                                          const std::vector<std::size_t>& conflict);

}  // namespace hypersynth
