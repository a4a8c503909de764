#include "hypersynth/analysis.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "hypersynth/errors.hpp"

namespace hypersynth {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

double expectation(const Choice& c, const std::vector<double>& x) {
    double sum = 0.0;
    for (const auto& t : c.distribution) sum += t.probability * x[t.target];
    return sum;
}

bool any_successor_in(const Choice& c, const StateSet& set) {
    return std::any_of(c.distribution.begin(), c.distribution.end(),
                       [&](const Transition& t) { return set.contains(t.target); });
}

bool all_successors_in(const Choice& c, const StateSet& set) {
    return std::all_of(c.distribution.begin(), c.distribution.end(),
                       [&](const Transition& t) { return set.contains(t.target); });
}

// States that can reach `goal` via edges of any action, moving only through `through`.
StateSet backward_reach(const Mdp& m, const StateSet& goal, const StateSet* through) {
    StateSet reached = goal;
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId s = 0; s < m.state_count(); ++s) {
            if (reached.contains(s) || (through != nullptr && !through->contains(s))) continue;
            for (const Choice& c : m.actions(s)) {
                if (any_successor_in(c, reached)) {
                    reached.insert(s);
                    changed = true;
                    break;
                }
            }
        }
    }
    return reached;
}

StateSet complement(const StateSet& set) {
    StateSet out(set.universe());
    for (StateId s = 0; s < set.universe(); ++s) {
        if (!set.contains(s)) out.insert(s);
    }
    return out;
}

StateSet prob0_max(const Mdp& m, const StateSet& target) { return complement(backward_reach(m, target, nullptr)); }

StateSet prob0_min(const Mdp& m, const StateSet& target) {
    // Complement of the states forced to reach the target with positive probability.
    StateSet forced = target;
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId s = 0; s < m.state_count(); ++s) {
            if (forced.contains(s)) continue;
            bool all = true;
            for (const Choice& c : m.actions(s)) {
                if (!any_successor_in(c, forced)) {
                    all = false;
                    break;
                }
            }
            if (all) {
                forced.insert(s);
                changed = true;
            }
        }
    }
    return complement(forced);
}

StateSet prob1_max(const Mdp& m, const StateSet& target) {
    StateSet u = StateSet(m.state_count());
    for (StateId s = 0; s < m.state_count(); ++s) u.insert(s);
    while (true) {
        StateSet r = target;
        bool changed = true;
        while (changed) {
            changed = false;
            for (StateId s = 0; s < m.state_count(); ++s) {
                if (r.contains(s) || !u.contains(s)) continue;
                for (const Choice& c : m.actions(s)) {
                    if (all_successors_in(c, u) && any_successor_in(c, r)) {
                        r.insert(s);
                        changed = true;
                        break;
                    }
                }
            }
        }
        if (r == u) return u;
        u = std::move(r);
    }
}

// Graph-based controller for the complement of prob1_min: stays inside prob0_min where
// possible and otherwise moves towards it. Also returns the complement set itself.
std::pair<StateSet, std::vector<std::optional<ActionId>>> escape_controller(const Mdp& m, const StateSet& target) {
    const StateSet avoid = prob0_min(m, target);
    std::vector<std::optional<ActionId>> choice(m.state_count());
    for (StateId s : avoid.members()) {
        for (const Choice& c : m.actions(s)) {
            if (all_successors_in(c, avoid)) {
                choice[s] = c.id;
                break;
            }
        }
    }
    StateSet escape = avoid;
    std::vector<StateId> layer = avoid.members();
    while (!layer.empty()) {
        StateSet frontier = escape;
        std::vector<StateId> next;
        for (StateId s = 0; s < m.state_count(); ++s) {
            if (escape.contains(s) || target.contains(s)) continue;
            for (const Choice& c : m.actions(s)) {
                if (any_successor_in(c, frontier)) {
                    choice[s] = c.id;
                    next.push_back(s);
                    break;
                }
            }
        }
        for (StateId s : next) escape.insert(s);
        layer = std::move(next);
    }
    return {escape, choice};
}

// Layered attractor towards `target` using, in each state, only the actions accepted by `usable`.
template <typename Usable>
std::vector<std::optional<ActionId>> attractor(const Mdp& m, const StateSet& target, const StateSet& domain,
                                               Usable&& usable) {
    std::vector<std::optional<ActionId>> choice(m.state_count());
    StateSet attracted = target;
    while (true) {
        const StateSet frontier = attracted;
        std::vector<StateId> added;
        for (StateId s = 0; s < m.state_count(); ++s) {
            if (attracted.contains(s) || !domain.contains(s)) continue;
            for (const Choice& c : m.actions(s)) {
                if (usable(s, c) && any_successor_in(c, frontier)) {
                    choice[s] = c.id;
                    added.push_back(s);
                    break;
                }
            }
        }
        if (added.empty()) break;
        for (StateId s : added) attracted.insert(s);
    }
    return choice;
}

template <typename Update>
void gauss_seidel(std::vector<double>& x, const std::vector<StateId>& states, const SolverOptions& opts,
                  ValueVector& out, Update&& update) {
    out.iterations = 0;
    out.residual = 0.0;
    out.converged = true;
    if (states.empty()) return;
    while (true) {
        double residual = 0.0;
        for (StateId s : states) {
            double v = update(s);
            double diff = std::abs(v - x[s]);
            if (diff > residual) residual = diff;
            x[s] = v;
        }
        ++out.iterations;
        out.residual = residual;
        if (residual < opts.tolerance) return;
        if (out.iterations >= opts.max_sweeps) {
            out.converged = false;
            return;
        }
    }
}

ActionId first_action(const Mdp& m, StateId s) { return m.actions(s).front().id; }

// Solves (I - A) x = b over `unknowns` where A holds the MC transitions among them.
std::vector<double> solve_transient(const Mc& mc, const std::vector<StateId>& unknowns,
                                    const std::vector<double>& rhs, bool transpose) {
    const std::size_t n = mc.state_count();
    std::vector<long> index(n, -1);
    for (std::size_t i = 0; i < unknowns.size(); ++i) index[unknowns[i]] = static_cast<long>(i);
    const long k = static_cast<long>(unknowns.size());
    std::vector<Eigen::Triplet<double>> entries;
    for (long i = 0; i < k; ++i) {
        entries.emplace_back(i, i, 1.0);
        for (const auto& t : mc.row(unknowns[i])) {
            long j = index[t.target];
            if (j < 0) continue;
            if (transpose) {
                entries.emplace_back(j, i, -t.probability);
            } else {
                entries.emplace_back(i, j, -t.probability);
            }
        }
    }
    SparseMatrix a(k, k);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("singular linear system in Markov chain solve");
    Eigen::VectorXd b(k);
    for (long i = 0; i < k; ++i) b[i] = rhs[i];
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw std::runtime_error("Markov chain solve failed");
    return std::vector<double>(x.data(), x.data() + k);
}

// Bottom SCC membership via iterative Tarjan.
std::vector<bool> bottom_scc_states(const Mc& mc) {
    const std::size_t n = mc.state_count();
    std::vector<long> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<StateId> stack;
    long counter = 0;
    long components = 0;
    struct Frame {
        StateId state;
        std::size_t edge;
    };
    for (StateId root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            auto row = mc.row(f.state);
            if (f.edge < row.size()) {
                StateId t = row[f.edge++].target;
                if (index[t] < 0) {
                    index[t] = low[t] = counter++;
                    stack.push_back(t);
                    on_stack[t] = true;
                    call.push_back({t, 0});
                } else if (on_stack[t]) {
                    low[f.state] = std::min(low[f.state], index[t]);
                }
                continue;
            }
            StateId s = f.state;
            call.pop_back();
            if (!call.empty()) low[call.back().state] = std::min(low[call.back().state], low[s]);
            if (low[s] == index[s]) {
                while (true) {
                    StateId w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = components;
                    if (w == s) break;
                }
                ++components;
            }
        }
    }
    std::vector<bool> leaves(static_cast<std::size_t>(components), true);
    for (StateId s = 0; s < n; ++s) {
        for (const auto& t : mc.row(s)) {
            if (comp[t.target] != comp[s]) leaves[static_cast<std::size_t>(comp[s])] = false;
        }
    }
    std::vector<bool> bottom(n);
    for (StateId s = 0; s < n; ++s) bottom[s] = leaves[static_cast<std::size_t>(comp[s])];
    return bottom;
}

}  // namespace

QualitativeSets qualitative_states(const Mdp& m, const StateSet& target, Direction dir) {
    if (dir == Direction::Max) return {prob0_max(m, target), prob1_max(m, target)};
    return {prob0_min(m, target), complement(escape_controller(m, target).first)};
}

namespace {

constexpr std::size_t kMaxPolishRounds = 64;

// Policy iteration seeded with the value-iteration witness. Each round evaluates the witness
// exactly and switches only on strict improvement; at a fixed point the values are exact.
// `usable` filters the actions a state may switch to.
template <typename Usable>
void polish(const Mdp& m, const StateSet& target, QueryKind kind, Direction dir, const std::vector<StateId>& free,
            ExtremalResult& result, Usable&& usable) {
    if (free.empty()) return;
    auto& x = result.values.values;
    Controller current = result.witness;
    for (std::size_t round = 0; round < kMaxPolishRounds; ++round) {
        const auto exact = mc_values(impose(m, current), kind, target);
        std::vector<double> trial = x;
        for (StateId s : free) {
            if (std::isinf(exact[s])) return;  // improper switch: keep the last good result
            trial[s] = exact[s];
        }
        x = trial;
        result.witness = current;
        bool changed = false;
        for (StateId s : free) {
            const double slack = 1e-12 * std::max(1.0, std::abs(x[s]));
            double best = x[s];
            for (const Choice& c : m.actions(s)) {
                if (!usable(c)) continue;
                const double v = (kind == QueryKind::Reward ? c.reward : 0.0) + expectation(c, x);
                const bool better = dir == Direction::Max ? v > best + slack : v < best - slack;
                if (better) {
                    best = v;
                    current.choice[s] = c.id;
                    changed = true;
                }
            }
        }
        if (!changed) return;
    }
}

}  // namespace

ExtremalResult extremal_reach(const Mdp& m, const TargetSet& t, Direction dir, const SolverOptions& opts) {
    const std::size_t n = m.state_count();
    const StateSet& target = t.states;
    const QualitativeSets q = qualitative_states(m, target, dir);

    ExtremalResult result;
    result.values.kind = QueryKind::Reach;
    result.values.direction = dir;
    auto& x = result.values.values;
    x.assign(n, 0.0);
    std::vector<StateId> maybe;
    for (StateId s = 0; s < n; ++s) {
        if (q.prob1.contains(s)) {
            x[s] = 1.0;
        } else if (!q.prob0.contains(s)) {
            maybe.push_back(s);
        }
    }
    gauss_seidel(x, maybe, opts, result.values, [&](StateId s) {
        double best = dir == Direction::Max ? 0.0 : 1.0;
        for (const Choice& c : m.actions(s)) {
            double v = expectation(c, x);
            best = dir == Direction::Max ? std::max(best, v) : std::min(best, v);
        }
        return best;
    });

    auto& witness = result.witness.choice;
    witness.assign(n, 0);
    const double delta = std::max(opts.tolerance, 1e-12);
    if (dir == Direction::Max) {
        StateSet positive(n);
        for (StateId s = 0; s < n; ++s) {
            if (!q.prob0.contains(s) && !target.contains(s)) positive.insert(s);
        }
        auto optimal = attractor(m, target, positive,
                                 [&](StateId s, const Choice& c) { return expectation(c, x) >= x[s] - delta; });
        for (StateId s = 0; s < n; ++s) {
            if (optimal[s]) {
                witness[s] = *optimal[s];
                continue;
            }
            witness[s] = first_action(m, s);
            if (positive.contains(s)) {
                double best = -1.0;
                for (const Choice& c : m.actions(s)) {
                    double v = expectation(c, x);
                    if (v > best + 1e-12) {
                        best = v;
                        witness[s] = c.id;
                    }
                }
            }
        }
    } else {
        for (StateId s = 0; s < n; ++s) {
            witness[s] = first_action(m, s);
            if (target.contains(s)) continue;
            if (q.prob0.contains(s)) {
                for (const Choice& c : m.actions(s)) {
                    if (all_successors_in(c, q.prob0)) {
                        witness[s] = c.id;
                        break;
                    }
                }
                continue;
            }
            double best = 2.0;
            for (const Choice& c : m.actions(s)) {
                double v = expectation(c, x);
                if (v < best - 1e-12) {
                    best = v;
                    witness[s] = c.id;
                }
            }
        }
    }
    polish(m, target, QueryKind::Reach, dir, maybe, result, [](const Choice&) { return true; });
    return result;
}

ExtremalResult extremal_reward(const Mdp& m, const TargetSet& t, Direction dir, const SolverOptions& opts) {
    if (!m.has_rewards()) throw MissingRewardsError("reward query on a model without rewards");
    const std::size_t n = m.state_count();
    const StateSet& target = t.states;

    ExtremalResult result;
    result.values.kind = QueryKind::Reward;
    result.values.direction = dir;
    auto& x = result.values.values;
    x.assign(n, 0.0);
    auto& witness = result.witness.choice;
    witness.assign(n, 0);
    for (StateId s = 0; s < n; ++s) witness[s] = first_action(m, s);
    const double delta = std::max(opts.tolerance, 1e-12);

    if (dir == Direction::Max) {
        auto [escape, escape_choice] = escape_controller(m, target);
        std::vector<StateId> finite;
        for (StateId s = 0; s < n; ++s) {
            if (escape.contains(s)) {
                x[s] = kInfinity;
                if (escape_choice[s]) witness[s] = *escape_choice[s];
            } else if (!target.contains(s)) {
                finite.push_back(s);
            }
        }
        gauss_seidel(x, finite, opts, result.values, [&](StateId s) {
            double best = 0.0;
            for (const Choice& c : m.actions(s)) best = std::max(best, c.reward + expectation(c, x));
            return best;
        });
        for (StateId s : finite) {
            double best = -1.0;
            for (const Choice& c : m.actions(s)) {
                double v = c.reward + expectation(c, x);
                if (v > best + 1e-12 * std::max(1.0, std::abs(best))) {
                    best = v;
                    witness[s] = c.id;
                }
            }
        }
        polish(m, target, QueryKind::Reward, dir, finite, result, [](const Choice&) { return true; });
        return result;
    }

    const StateSet proper = prob1_max(m, target);
    StateSet inside(n);
    for (StateId s : proper.members()) {
        if (!target.contains(s)) inside.insert(s);
    }
    auto keeps = [&](const Choice& c) { return all_successors_in(c, proper); };
    auto initial = attractor(m, target, inside, [&](StateId, const Choice& c) { return keeps(c); });
    Controller start;
    start.choice.resize(n);
    for (StateId s = 0; s < n; ++s) start.choice[s] = initial[s] ? *initial[s] : first_action(m, s);
    x = mc_reward(impose(m, start), target);

    std::vector<StateId> finite = inside.members();
    gauss_seidel(x, finite, opts, result.values, [&](StateId s) {
        double best = x[s];
        for (const Choice& c : m.actions(s)) {
            if (keeps(c)) best = std::min(best, c.reward + expectation(c, x));
        }
        return best;
    });
    auto optimal = attractor(m, target, inside, [&](StateId s, const Choice& c) {
        return keeps(c) && c.reward + expectation(c, x) <= x[s] + delta * std::max(1.0, std::abs(x[s]));
    });
    for (StateId s : finite) witness[s] = optimal[s] ? *optimal[s] : start.choice[s];
    polish(m, target, QueryKind::Reward, dir, finite, result, keeps);
    return result;
}

std::vector<double> mc_reach(const Mc& mc, const StateSet& target) {
    const std::size_t n = mc.state_count();
    const StateSet can_reach = backward_reach(mc.model(), target, nullptr);
    std::vector<double> x(n, 0.0);
    std::vector<StateId> unknowns;
    for (StateId s = 0; s < n; ++s) {
        if (target.contains(s)) {
            x[s] = 1.0;
        } else if (can_reach.contains(s)) {
            unknowns.push_back(s);
        }
    }
    if (unknowns.empty()) return x;
    std::vector<double> rhs(unknowns.size(), 0.0);
    for (std::size_t i = 0; i < unknowns.size(); ++i) {
        for (const auto& t : mc.row(unknowns[i])) {
            if (target.contains(t.target)) rhs[i] += t.probability;
        }
    }
    auto solved = solve_transient(mc, unknowns, rhs, false);
    for (std::size_t i = 0; i < unknowns.size(); ++i) x[unknowns[i]] = std::clamp(solved[i], 0.0, 1.0);
    return x;
}

std::vector<double> mc_reward(const Mc& mc, const StateSet& target) {
    if (!mc.model().has_rewards()) throw MissingRewardsError("reward query on a model without rewards");
    const std::size_t n = mc.state_count();
    const StateSet almost_sure = prob1_max(mc.model(), target);
    std::vector<double> x(n, 0.0);
    std::vector<StateId> unknowns;
    for (StateId s = 0; s < n; ++s) {
        if (!almost_sure.contains(s)) {
            x[s] = kInfinity;
        } else if (!target.contains(s)) {
            unknowns.push_back(s);
        }
    }
    if (unknowns.empty()) return x;
    std::vector<double> rhs(unknowns.size());
    for (std::size_t i = 0; i < unknowns.size(); ++i) rhs[i] = mc.reward(unknowns[i]);
    auto solved = solve_transient(mc, unknowns, rhs, false);
    for (std::size_t i = 0; i < unknowns.size(); ++i) x[unknowns[i]] = std::max(solved[i], 0.0);
    return x;
}

std::vector<double> expected_visits(const Mc& mc, StateId from) {
    const std::size_t n = mc.state_count();
    if (from >= n) throw std::out_of_range("expected_visits: unknown state");
    const std::vector<bool> bottom = bottom_scc_states(mc);
    std::vector<double> visits(n, 0.0);

    // Forward reachability from `from`.
    std::vector<bool> seen(n, false);
    std::vector<StateId> queue{from};
    seen[from] = true;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        for (const auto& t : mc.row(queue[i])) {
            if (!seen[t.target]) {
                seen[t.target] = true;
                queue.push_back(t.target);
            }
        }
    }
    std::vector<StateId> transient;
    for (StateId s = 0; s < n; ++s) {
        if (!seen[s]) continue;
        if (bottom[s]) {
            visits[s] = kVisitCap;
        } else {
            transient.push_back(s);
        }
    }
    if (bottom[from] || transient.empty()) return visits;
    // Row `from` of the fundamental matrix: (I - Q)^T y = e_from.
    std::vector<double> rhs(transient.size(), 0.0);
    auto pos = std::lower_bound(transient.begin(), transient.end(), from) - transient.begin();
    rhs[static_cast<std::size_t>(pos)] = 1.0;
    auto solved = solve_transient(mc, transient, rhs, true);
    for (std::size_t i = 0; i < transient.size(); ++i) visits[transient[i]] = std::max(solved[i], 0.0);
    return visits;
}

std::vector<double> mc_values(const Mc& mc, QueryKind kind, const StateSet& target) {
    return kind == QueryKind::Reach ? mc_reach(mc, target) : mc_reward(mc, target);
}

CheckResult check_mc(std::span<const Mc> mcs, const InstantiatedFormula& f) {
    std::map<std::tuple<std::size_t, QueryKind, std::string>, std::vector<double>> cache;
    auto value = [&](const Operand& op) -> double {
        if (!op.is_query()) return op.constant;
        const GroundQuery& q = *op.query;
        if (q.slot >= mcs.size()) throw std::out_of_range("check_mc: missing Markov chain for controller slot");
        const Mc& mc = mcs[q.slot];
        auto key = std::make_tuple(q.slot, q.kind, q.target);
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(key, mc_values(mc, q.kind, mc.model().label(q.target))).first;
        }
        return it->second.at(q.state);
    };
    CheckResult result;
    std::vector<bool> truth;
    for (const auto& atom : f.atoms) {
        AtomValues v;
        v.left = value(atom.left);
        v.right = value(atom.right);
        v.holds = holds(atom, v.left, v.right);
        truth.push_back(v.holds);
        result.atoms.push_back(v);
    }
    result.holds = evaluate(f.root, truth);
    return result;
}

}  // namespace hypersynth
