#include "hypersynth/counterexample.hpp"

#include <algorithm>
#include <tuple>

#include "hypersynth/analysis.hpp"

namespace hypersynth {

DeflatedMc build_deflated(const Mc& mc, const StateSet& keep, const std::vector<double>& bounds,
                          const StateSet& target) {
    const std::size_t n = mc.state_count();
    const auto bottom = static_cast<StateId>(n);
    const auto top = static_cast<StateId>(n + 1);
    std::vector<std::vector<Choice>> rows(n + 2);
    for (StateId s = 0; s < n; ++s) {
        Choice c;
        c.id = mc.action(s);
        if (target.contains(s)) {
            c.distribution = {{s, 1.0}};
        } else if (keep.contains(s)) {
            c.distribution.assign(mc.row(s).begin(), mc.row(s).end());
        } else {
            const double p = std::clamp(bounds.at(s), 0.0, 1.0);
            c.distribution = {{bottom, 1.0 - p}, {top, p}};
        }
        rows[s].push_back(std::move(c));
    }
    rows[bottom].push_back(Choice{0, "", {{bottom, 1.0}}, 0.0});
    rows[top].push_back(Choice{0, "", {{top, 1.0}}, 0.0});
    StateSet goal(n + 2);
    for (StateId s : target.members()) goal.insert(s);
    goal.insert(top);
    return DeflatedMc{Mc(Mdp(std::move(rows), {}, false)), bottom, top, goal};
}

double deflated_value(const CeSide& side, const StateSet& keep) {
    if (side.mc == nullptr) return side.constant;
    const DeflatedMc d = build_deflated(*side.mc, keep, side.bounds, side.target);
    return mc_reach(d.chain, d.target).at(side.initial);
}

std::optional<CePair> grow_ce(const Mdp& m, const CeSide& large, const CeSide& small, double slack,
                              bool strict_violation, double guard) {
    const std::size_t n = m.state_count();
    CePair pair{StateSet(n), StateSet(n)};
    auto certified = [&] {
        const double l = deflated_value(large, pair.large);
        const double r = deflated_value(small, pair.small) + slack + guard;
        return strict_violation ? l >= r : l > r;
    };
    // Frontier of one side: the initial state, then successors of kept states.
    auto frontier = [&](const CeSide& side, const StateSet& kept) {
        std::vector<StateId> out;
        if (side.mc == nullptr) return out;
        StateSet seen(n);
        auto offer = [&](StateId s) {
            if (!kept.contains(s) && !side.target.contains(s) && !seen.contains(s)) {
                seen.insert(s);
                out.push_back(s);
            }
        };
        offer(side.initial);
        for (StateId s : kept.members()) {
            for (const auto& t : side.mc->row(s)) offer(t.target);
        }
        return out;
    };
    while (true) {
        if (certified()) return pair;
        // (menu size, state, side) minimal; side 0 is the large side.
        std::optional<std::tuple<std::size_t, StateId, int>> best;
        for (int side = 0; side < 2; ++side) {
            for (StateId s : frontier(side == 0 ? large : small, side == 0 ? pair.large : pair.small)) {
                auto key = std::make_tuple(m.menu_size(s), s, side);
                if (!best || key < *best) best = key;
            }
        }
        if (!best) return std::nullopt;
        (std::get<2>(*best) == 0 ? pair.large : pair.small).insert(std::get<1>(*best));
    }
}

std::vector<FamilyNode> prune_by_conflict(const FamilyNode& node, const Realisation& r,
                                          const std::vector<std::size_t>& conflict) {
    PartialAssignment fixed;
    for (std::size_t k : conflict) fixed.fixed.emplace(k, r.assignment.at(k));
    return box_complement(node, fixed);
}

}  // namespace hypersynth
