#include "hypersynth/spec.hpp"

#include <algorithm>

#include "hypersynth/errors.hpp"

namespace hypersynth {

std::optional<std::size_t> HyperSpec::controller_index(const std::string& name) const {
    auto it = std::find(controllers.begin(), controllers.end(), name);
    if (it == controllers.end()) return std::nullopt;
    return static_cast<std::size_t>(it - controllers.begin());
}

const StateQuantifier* HyperSpec::quantifier_of(const std::string& variable) const {
    for (const auto& q : quantifiers) {
        if (q.variable == variable) return &q;
    }
    return nullptr;
}

std::string to_string(Relation r) {
    switch (r) {
        case Relation::Less: return "<";
        case Relation::LessEq: return "<=";
        case Relation::Equal: return "=";
        case Relation::Greater: return ">";
        case Relation::GreaterEq: return ">=";
    }
    return "?";
}

void validate_against(const HyperSpec& spec, const Mdp& m) {
    const std::size_t n = m.state_count();
    auto check_state = [&](StateId s, const char* where) {
        if (s >= n) throw SpecError(std::string(where) + " refers to unknown state " + std::to_string(s));
    };
    if (spec.controllers.empty()) throw SpecError("no controller declared");
    for (const auto& c : spec.structure) {
        if (const auto* same = std::get_if<SameConstraint>(&c)) {
            check_state(same->state, "same()");
            for (const auto& name : same->controllers) {
                if (!spec.controller_index(name)) throw SpecError("undeclared controller '" + name + "'");
            }
        } else {
            const auto& obs = std::get<ObsConstraint>(c);
            for (StateId s : obs.states) check_state(s, "obs()");
            if (!spec.controller_index(obs.controller)) throw SpecError("undeclared controller '" + obs.controller + "'");
        }
    }
    for (const auto& q : spec.quantifiers) {
        if (q.domain.empty()) throw SpecError("empty domain for '" + q.variable + "'");
        for (StateId s : q.domain) check_state(s, "quantifier domain");
        if (!spec.controller_index(q.controller)) throw SpecError("undeclared controller '" + q.controller + "'");
    }
    auto check_side = [&](const ProbAtom& a, const SideRef& side) {
        if (spec.quantifier_of(side.variable) == nullptr) {
            throw SpecError("undeclared state variable '" + side.variable + "'");
        }
        if (!m.has_label(side.target)) throw SpecError("unknown label '" + side.target + "'");
        if (a.kind == QueryKind::Reward && !m.has_rewards()) {
            throw MissingRewardsError("reward atom on a model without rewards");
        }
    };
    for (const auto& a : spec.atoms) {
        check_side(a, a.left);
        if (const auto* r = std::get_if<SideRef>(&a.right)) {
            check_side(a, *r);
        } else {
            double bound = std::get<double>(a.right);
            if (a.kind == QueryKind::Reach && !(bound >= 0.0 && bound <= 1.0)) {
                throw SpecError("probability bound outside [0,1]");
            }
            if (a.kind == QueryKind::Reward && !(bound >= 0.0)) throw SpecError("negative reward bound");
        }
        if (!(a.equality_epsilon >= 0.0)) throw SpecError("negative equality tolerance");
    }
}

HyperSpec lift_to_memory(const HyperSpec& spec, unsigned bits) {
    HyperSpec lifted = spec;
    const unsigned copies = 1u << bits;
    lifted.structure.clear();
    for (const auto& c : spec.structure) {
        for (unsigned mem = 0; mem < copies; ++mem) {
            if (const auto* same = std::get_if<SameConstraint>(&c)) {
                lifted.structure.push_back(SameConstraint{memory_state(same->state, mem, bits), same->controllers});
            } else {
                const auto& obs = std::get<ObsConstraint>(c);
                ObsConstraint copy{{}, obs.controller};
                for (StateId s : obs.states) copy.states.push_back(memory_state(s, mem, bits));
                lifted.structure.push_back(std::move(copy));
            }
        }
    }
    for (auto& q : lifted.quantifiers) {
        for (auto& s : q.domain) s = memory_state(s, 0, bits);
    }
    return lifted;
}

}  // namespace hypersynth
