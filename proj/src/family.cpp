#include "hypersynth/family.hpp"

#include <algorithm>
#include <numeric>

#include "hypersynth/errors.hpp"

namespace hypersynth {

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Keeps the smaller index as representative.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

std::vector<ActionId> menu_ids(const Mdp& m, StateId s) {
    std::vector<ActionId> ids;
    for (const Choice& c : m.actions(s)) ids.push_back(c.id);
    return ids;
}

std::size_t controller_slot(const std::vector<std::string>& controllers, const std::string& name) {
    auto it = std::find(controllers.begin(), controllers.end(), name);
    if (it == controllers.end()) throw SpecError("undeclared controller '" + name + "'");
    return static_cast<std::size_t>(it - controllers.begin());
}

// Treats +inf as a large finite number so that ranges stay comparable.
double finite(double v) { return std::min(v, 1e12); }

}  // namespace

ParameterSpace::ParameterSpace(std::size_t controllers, std::size_t states, std::vector<std::size_t> class_of,
                               std::vector<std::vector<ActionId>> domains)
    : controllers_(controllers), states_(states), class_of_(std::move(class_of)), domains_(std::move(domains)) {
    members_.resize(domains_.size());
    for (std::size_t raw = 0; raw < class_of_.size(); ++raw) {
        members_.at(class_of_[raw]).push_back(RawName{raw / states_, static_cast<StateId>(raw % states_)});
    }
}

FamilySize ParameterSpace::size() const {
    FamilySize total = 1;
    for (const auto& d : domains_) total *= d.size();
    return total;
}

ParameterSpace build_parameter_space(const Mdp& m, const std::vector<std::string>& controllers,
                                     const std::vector<StructuralConstraint>& structure) {
    const std::size_t n = controllers.size();
    const std::size_t states = m.state_count();
    UnionFind uf(n * states);
    auto raw = [&](std::size_t i, StateId s) {
        if (s >= states) throw SpecError("structural constraint refers to unknown state " + std::to_string(s));
        return i * states + s;
    };
    for (const auto& c : structure) {
        if (const auto* same = std::get_if<SameConstraint>(&c)) {
            if (same->controllers.empty()) continue;
            const std::size_t first = raw(controller_slot(controllers, same->controllers.front()), same->state);
            for (const auto& name : same->controllers) uf.unite(first, raw(controller_slot(controllers, name), same->state));
        } else {
            const auto& obs = std::get<ObsConstraint>(c);
            if (obs.states.empty()) continue;
            const std::size_t i = controller_slot(controllers, obs.controller);
            const auto reference = menu_ids(m, obs.states.front());
            for (StateId s : obs.states) {
                const std::size_t r = raw(i, s);
                bool same_menu = m.menu_size(s) == m.menu_size(obs.states.front());
                for (std::size_t j = 0; same_menu && j < m.menu_size(s); ++j) {
                    same_menu = m.actions(s)[j].id == reference[j] &&
                                m.actions(s)[j].name == m.actions(obs.states.front())[j].name;
                }
                if (!same_menu) {
                    throw IncompatibleObservationError("obs() groups states " + std::to_string(obs.states.front()) +
                                                       " and " + std::to_string(s) + " with different action menus");
                }
                uf.unite(raw(i, obs.states.front()), r);
            }
        }
    }
    // Number classes by their smallest raw index and intersect member menus.
    std::vector<std::size_t> class_of(n * states);
    std::vector<std::size_t> index_of_root(n * states, static_cast<std::size_t>(-1));
    std::vector<std::vector<ActionId>> domains;
    for (std::size_t r = 0; r < n * states; ++r) {
        const std::size_t root = uf.find(r);
        const auto menu = menu_ids(m, static_cast<StateId>(r % states));
        if (index_of_root[root] == static_cast<std::size_t>(-1)) {
            index_of_root[root] = domains.size();
            domains.push_back(menu);
        } else {
            auto& d = domains[index_of_root[root]];
            std::vector<ActionId> common;
            std::set_intersection(d.begin(), d.end(), menu.begin(), menu.end(), std::back_inserter(common));
            d = std::move(common);
        }
        class_of[r] = index_of_root[root];
    }
    for (std::size_t k = 0; k < domains.size(); ++k) {
        if (domains[k].empty()) {
            throw IncompatibleObservationError("structural constraints leave parameter " + std::to_string(k) +
                                               " without a common action");
        }
    }
    return ParameterSpace(n, states, std::move(class_of), std::move(domains));
}

FamilyNode FamilyNode::root(const ParameterSpace& ps) {
    FamilyNode node;
    for (std::size_t k = 0; k < ps.parameter_count(); ++k) node.domains.push_back(ps.domain(k));
    return node;
}

FamilySize FamilyNode::size() const {
    FamilySize total = 1;
    for (const auto& d : domains) total *= d.size();
    return total;
}

bool FamilyNode::is_singleton() const {
    return std::all_of(domains.begin(), domains.end(), [](const auto& d) { return d.size() == 1; });
}

bool FamilyNode::contains(const std::vector<ActionId>& assignment) const {
    if (assignment.size() != domains.size()) return false;
    for (std::size_t k = 0; k < domains.size(); ++k) {
        if (!std::binary_search(domains[k].begin(), domains[k].end(), assignment[k])) return false;
    }
    return true;
}

std::vector<Controller> induce(const ParameterSpace& ps, const Realisation& r) {
    std::vector<Controller> out(ps.controllers());
    for (std::size_t i = 0; i < ps.controllers(); ++i) {
        out[i].choice.resize(ps.states());
        for (StateId s = 0; s < ps.states(); ++s) out[i].choice[s] = r.assignment.at(ps.parameter_of(i, s));
    }
    return out;
}

Realisation only_member(const FamilyNode& node) {
    Realisation r;
    for (const auto& d : node.domains) r.assignment.push_back(d.front());
    return r;
}

bool satisfies_structure(const std::vector<Controller>& controllers, const std::vector<std::string>& names,
                         const std::vector<StructuralConstraint>& structure) {
    for (const auto& c : structure) {
        if (const auto* same = std::get_if<SameConstraint>(&c)) {
            std::optional<ActionId> seen;
            for (const auto& name : same->controllers) {
                ActionId a = controllers.at(controller_slot(names, name)).choice.at(same->state);
                if (seen && *seen != a) return false;
                seen = a;
            }
        } else {
            const auto& obs = std::get<ObsConstraint>(c);
            const Controller& ctl = controllers.at(controller_slot(names, obs.controller));
            for (StateId s : obs.states) {
                if (ctl.choice.at(s) != ctl.choice.at(obs.states.front())) return false;
            }
        }
    }
    return true;
}

Mdp node_restrict(const Mdp& m, const ParameterSpace& ps, const FamilyNode& node, std::size_t controller) {
    ActionRestriction allowed;
    for (StateId s = 0; s < m.state_count(); ++s) {
        const auto& d = node.domains.at(ps.parameter_of(controller, s));
        if (d.size() != m.menu_size(s)) allowed.emplace(s, d);
    }
    if (allowed.empty()) return m;
    return restrict(m, allowed);
}

IntersectResult intersect(const PartialAssignment& a, const PartialAssignment& b) {
    IntersectResult result;
    PartialAssignment merged = a;
    for (const auto& [k, v] : b.fixed) {
        auto [it, inserted] = merged.fixed.emplace(k, v);
        if (!inserted && it->second != v) {
            // Report the smallest disagreeing parameter.
            for (const auto& [k2, v2] : a.fixed) {
                auto other = b.fixed.find(k2);
                if (other != b.fixed.end() && other->second != v2) {
                    result.disagreement = k2;
                    result.disagreeing_actions = {std::min(v2, other->second), std::max(v2, other->second)};
                    return result;
                }
            }
        }
    }
    result.merged = std::move(merged);
    return result;
}

Realisation complete(const FamilyNode& node, const PartialAssignment& partial) {
    Realisation r = only_member(node);
    for (const auto& [k, v] : partial.fixed) r.assignment.at(k) = v;
    return r;
}

std::vector<Conflict> consistency_conflicts(const ParameterSpace& ps, std::size_t controller, const Controller& c,
                                            const StateSet& relevant) {
    std::map<std::size_t, Conflict> per_class;
    for (StateId s : relevant.members()) {
        const std::size_t k = ps.parameter_of(controller, s);
        auto& entry = per_class[k];
        entry.parameter = k;
        entry.actions.push_back(c.choice.at(s));
        entry.states.push_back(s);
    }
    std::vector<Conflict> out;
    for (auto& [k, entry] : per_class) {
        std::sort(entry.actions.begin(), entry.actions.end());
        entry.actions.erase(std::unique(entry.actions.begin(), entry.actions.end()), entry.actions.end());
        if (entry.actions.size() > 1) out.push_back(std::move(entry));
    }
    return out;
}

PartialAssignment fix_controller(const ParameterSpace& ps, std::size_t controller, const Controller& c,
                                 const StateSet& relevant) {
    PartialAssignment p;
    for (StateId s : relevant.members()) p.fixed.emplace(ps.parameter_of(controller, s), c.choice.at(s));
    return p;
}

StateSet relevant_states(const Mc& mc, StateId from, const StateSet& stop) {
    StateSet seen(mc.state_count());
    if (stop.contains(from)) return seen;
    std::vector<StateId> queue{from};
    seen.insert(from);
    for (std::size_t i = 0; i < queue.size(); ++i) {
        for (const auto& t : mc.row(queue[i])) {
            if (!seen.contains(t.target) && !stop.contains(t.target)) {
                seen.insert(t.target);
                queue.push_back(t.target);
            }
        }
    }
    return seen;
}

double impact(const Mdp& m, StateId s, ActionId a, double visits, const std::vector<double>& values, QueryKind kind) {
    const Choice* c = m.find_action(s, a);
    if (c == nullptr) throw InvalidControllerError("action not enabled in impact computation");
    double sum = kind == QueryKind::Reward ? c->reward : 0.0;
    for (const auto& t : c->distribution) sum += t.probability * finite(values.at(t.target));
    return visits * sum;
}

std::map<std::pair<StateId, ActionId>, double> immediate_impact(const Mdp& m, const Mc& mc, StateId from,
                                                                QueryKind kind, const StateSet& target) {
    const std::size_t n = mc.state_count();
    std::vector<std::vector<Choice>> rows(n);
    for (StateId s = 0; s < n; ++s) {
        Choice c = mc.model().actions(s).front();
        if (target.contains(s)) c.distribution = {Transition{s, 1.0}};
        rows[s].push_back(std::move(c));
    }
    const Mc absorbing(Mdp(std::move(rows), mc.model().labels(), mc.model().has_rewards()));
    const auto visits = expected_visits(absorbing, from);
    const auto values = mc_values(mc, kind, target);
    std::map<std::pair<StateId, ActionId>, double> gamma;
    for (StateId s = 0; s < m.state_count(); ++s) {
        for (const Choice& c : m.actions(s)) gamma[{s, c.id}] = impact(m, s, c.id, visits[s], values, kind);
    }
    return gamma;
}

double split_score(const Conflict& conflict, const std::map<std::pair<StateId, ActionId>, double>& gamma) {
    if (conflict.states.empty()) return 0.0;
    double total = 0.0;
    for (StateId s : conflict.states) {
        double lo = kInfinity;
        double hi = -kInfinity;
        for (ActionId a : conflict.actions) {
            auto it = gamma.find({s, a});
            if (it == gamma.end()) continue;
            lo = std::min(lo, it->second);
            hi = std::max(hi, it->second);
        }
        if (hi >= lo) total += hi - lo;
    }
    return total / static_cast<double>(conflict.states.size());
}

std::size_t select_split(const std::vector<Conflict>& conflicts,
                         const std::vector<const std::map<std::pair<StateId, ActionId>, double>*>& gammas) {
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < conflicts.size(); ++i) {
        const double score = split_score(conflicts[i], *gammas.at(i));
        if (i == 0 || score > best_score ||
            (score == best_score && conflicts[i].parameter < conflicts[best].parameter)) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

std::vector<FamilyNode> split(const FamilyNode& node, std::size_t parameter, const std::vector<ActionId>& actions) {
    const auto& domain = node.domains.at(parameter);
    std::vector<FamilyNode> children;
    std::vector<ActionId> rest;
    for (ActionId a : domain) {
        if (std::find(actions.begin(), actions.end(), a) == actions.end()) rest.push_back(a);
    }
    for (ActionId a : domain) {
        if (std::find(actions.begin(), actions.end(), a) == actions.end()) continue;
        FamilyNode child = node;
        child.domains[parameter] = {a};
        children.push_back(std::move(child));
    }
    if (!rest.empty()) {
        FamilyNode child = node;
        child.domains[parameter] = std::move(rest);
        children.push_back(std::move(child));
    }
    return children;
}

std::vector<FamilyNode> box_complement(const FamilyNode& node, const PartialAssignment& fixed) {
    std::vector<FamilyNode> out;
    FamilyNode prefix = node;
    for (const auto& [k, v] : fixed.fixed) {
        const auto& d = node.domains.at(k);
        if (!std::binary_search(d.begin(), d.end(), v)) {
            // The removed box is empty: everything remaining is the current prefix box.
            out.push_back(prefix);
            return out;
        }
        std::vector<ActionId> others;
        for (ActionId a : d) {
            if (a != v) others.push_back(a);
        }
        if (!others.empty()) {
            FamilyNode box = prefix;
            box.domains[k] = std::move(others);
            out.push_back(std::move(box));
        }
        prefix.domains[k] = {v};
    }
    return out;
}

}  // namespace hypersynth
