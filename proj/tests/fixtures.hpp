#pragma once
// Small hand-built models shared by several tests.

#include "hypersynth/model.hpp"

namespace fixtures {

using namespace hypersynth;

/// Two states with actions alpha/beta, a target s2 and a sink s3. Only the controller
/// choosing beta in both states keeps P(F s2) <= 0.6 from s0 and s1.
inline Mdp two_choice_mdp() {
    std::vector<std::vector<Choice>> rows(4);
    rows[0] = {Choice{0, "alpha", {{2, 0.7}, {3, 0.3}}, 0.0}, Choice{1, "beta", {{1, 0.5}, {3, 0.5}}, 0.0}};
    rows[1] = {Choice{0, "alpha", {{2, 0.8}, {3, 0.2}}, 0.0}, Choice{1, "beta", {{2, 0.4}, {3, 0.6}}, 0.0}};
    rows[2] = {Choice{0, "", {{2, 1.0}}, 0.0}};
    rows[3] = {Choice{0, "", {{3, 1.0}}, 0.0}};
    return Mdp(std::move(rows), {{"two", StateSet::of(4, std::vector<StateId>{2})}}, false);
}

inline const char* two_choice_spec() { return "exists sigma : forall x in {0, 1}[sigma] : P(x, F two) <= 0.6"; }

/// Chain s0 -> s1 -> s2 -> t with unit rewards.
inline Mdp unit_chain() {
    std::vector<std::vector<Choice>> rows(4);
    for (StateId s = 0; s < 3; ++s) rows[s] = {Choice{0, "", {{s + 1, 1.0}}, 1.0}};
    rows[3] = {Choice{0, "", {{3, 1.0}}, 0.0}};
    return Mdp(std::move(rows), {{"t", StateSet::of(4, std::vector<StateId>{3})}}, true);
}

}  // namespace fixtures
