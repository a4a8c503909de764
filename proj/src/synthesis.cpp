#include "hypersynth/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "hypersynth/counterexample.hpp"
#include "hypersynth/errors.hpp"

namespace hypersynth {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Feasibility: return "feasibility";
        case Mode::Complete: return "complete";
        case Mode::Optimal: return "optimal";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Feasible: return "feasible";
        case Verdict::Unfeasible: return "unfeasible";
        case Verdict::Unknown: return "unknown";
    }
    return "?";
}

std::string to_string(Tag t) {
    switch (t) {
        case Tag::AllSat: return "all-sat";
        case Tag::AllUnsat: return "all-unsat";
        case Tag::Ambiguous3: return "ambiguous-3";
        case Tag::Ambiguous4: return "ambiguous-4";
        case Tag::Ambiguous5: return "ambiguous-5";
    }
    return "?";
}

Problem Problem::make(const Mdp& m, const HyperSpec& spec, unsigned memory_bits) {
    validate_against(spec, m);
    Problem p;
    p.memory_bits = memory_bits;
    if (memory_bits > 0) {
        p.model = unfold_memory(m, memory_bits);
        p.spec = lift_to_memory(spec, memory_bits);
    } else {
        p.model = m;
        p.spec = spec;
    }
    p.space = build_parameter_space(p.model, p.spec.controllers, p.spec.structure);
    p.formula = instantiate(p.spec);
    return p;
}

// ---------------------------------------------------------------------------
// Node analysis

NodeAnalysis::NodeAnalysis(const Problem& problem, const FamilyNode& node, const SolverOptions& opts)
    : problem_(problem), node_(node), opts_(opts) {}

const Mdp& NodeAnalysis::restricted(std::size_t slot) {
    auto it = restricted_.find(slot);
    if (it == restricted_.end()) {
        it = restricted_.emplace(slot, node_restrict(problem_.model, problem_.space, node_, slot)).first;
    }
    return it->second;
}

const ExtremalResult& NodeAnalysis::extremal(std::size_t slot, QueryKind kind, const std::string& target,
                                             Direction dir) {
    auto key = std::make_tuple(slot, kind, target, dir);
    auto it = extremal_.find(key);
    if (it == extremal_.end()) {
        const Mdp& m = restricted(slot);
        const TargetSet t = TargetSet::from_label(m, target);
        it = extremal_
                 .emplace(key, kind == QueryKind::Reach ? extremal_reach(m, t, dir, opts_)
                                                        : extremal_reward(m, t, dir, opts_))
                 .first;
    }
    return it->second;
}

StateSet NodeAnalysis::relevant(const GroundQuery& q, const Controller& c) {
    const Mdp& m = restricted(q.slot);
    return relevant_states(impose(m, c), q.state, m.label(q.target));
}

namespace {

struct Side {
    bool is_query = false;
    GroundQuery query;
    double lo = 0.0;
    double hi = 0.0;
    const ExtremalResult* min = nullptr;
    const ExtremalResult* max = nullptr;
};

Side bound_side(NodeAnalysis& na, const Operand& op) {
    Side side;
    if (!op.is_query()) {
        side.lo = side.hi = op.constant;
        return side;
    }
    side.is_query = true;
    side.query = *op.query;
    side.min = &na.extremal(op.query->slot, op.query->kind, op.query->target, Direction::Min);
    side.max = &na.extremal(op.query->slot, op.query->kind, op.query->target, Direction::Max);
    side.lo = side.min->values.values.at(op.query->state);
    side.hi = side.max->values.values.at(op.query->state);
    if (side.lo > side.hi) side.lo = side.hi;
    return side;
}

struct Extremal {
    Controller controller;
    StateSet relevant;
    std::vector<Conflict> conflicts;
};

Extremal analyse_controller(NodeAnalysis& na, const GroundQuery& q, const Controller& c) {
    Extremal e;
    e.controller = c;
    e.relevant = na.relevant(q, c);
    e.conflicts = consistency_conflicts(na.problem().space, q.slot, c, e.relevant);
    return e;
}

void append_sources(std::vector<ConflictSource>& out, const Extremal& e, const GroundQuery& q) {
    for (const auto& c : e.conflicts) out.push_back({c, q, e.controller});
}

}  // namespace

IntervalVerdict atom_bounds(NodeAnalysis& na, const CanonicalAtom& atom, double guard) {
    const Side left = bound_side(na, atom.left);
    const Side right = bound_side(na, atom.right);
    IntervalVerdict v;
    v.lb1 = left.lo;
    v.ub1 = left.hi;
    v.lb2 = right.lo;
    v.ub2 = right.hi;
    const double lb2 = right.lo + atom.slack;
    const double ub2 = right.hi + atom.slack;
    // `a` is below `b` with margin g (negative g relaxes).
    auto below = [&](double a, double b, double g) { return atom.strict ? a < b - g : a <= b - g; };

    if (below(v.ub1, lb2, guard)) {
        v.tag = Tag::AllSat;
        return v;
    }
    if (atom.strict ? v.lb1 >= ub2 + guard : v.lb1 > ub2 + guard) {
        v.tag = Tag::AllUnsat;
        return v;
    }
    if (lb2 <= v.lb1 && v.lb1 <= ub2 && ub2 <= v.ub1) {
        v.tag = Tag::Ambiguous5;
    } else if (v.lb1 <= lb2) {
        v.tag = Tag::Ambiguous3;
    } else {
        v.tag = Tag::Ambiguous4;
    }

    std::optional<Extremal> l_min, l_max, r_min, r_max;
    if (left.is_query) {
        l_min = analyse_controller(na, left.query, left.min->witness);
        l_max = analyse_controller(na, left.query, left.max->witness);
    }
    if (right.is_query) {
        r_min = analyse_controller(na, right.query, right.min->witness);
        r_max = analyse_controller(na, right.query, right.max->witness);
    }
    const ParameterSpace& ps = na.problem().space;
    std::optional<Candidate> a, b, c;
    if (l_min && l_min->conflicts.empty() && below(v.lb1, lb2, -guard)) {
        a = Candidate{fix_controller(ps, left.query.slot, l_min->controller, l_min->relevant), below(v.lb1, lb2, guard)};
    }
    if (r_max && r_max->conflicts.empty() && below(v.ub1, ub2, -guard)) {
        b = Candidate{fix_controller(ps, right.query.slot, r_max->controller, r_max->relevant),
                      below(v.ub1, ub2, guard)};
    }
    if (l_min && r_max && l_min->conflicts.empty() && r_max->conflicts.empty() && below(v.lb1, ub2, -guard)) {
        auto merged = intersect(fix_controller(ps, left.query.slot, l_min->controller, l_min->relevant),
                                fix_controller(ps, right.query.slot, r_max->controller, r_max->relevant));
        if (merged.merged) {
            c = Candidate{*merged.merged, below(v.lb1, ub2, guard)};
        } else {
            v.incompatible = Conflict{*merged.disagreement, merged.disagreeing_actions, {}};
        }
    }
    std::vector<std::optional<Candidate>*> order;
    switch (v.tag) {
        case Tag::Ambiguous4: order = {&b, &a, &c}; break;
        case Tag::Ambiguous5: order = {&c, &a, &b}; break;
        default: order = {&a, &b, &c}; break;
    }
    for (auto* cand : order) {
        if (*cand) v.candidates.push_back(**cand);
    }

    const bool uses_min = v.tag != Tag::Ambiguous4;
    const bool uses_max = v.tag != Tag::Ambiguous3;
    if (l_min) append_sources(uses_min ? v.conflicts : v.other_conflicts, *l_min, left.query);
    if (r_max) append_sources(uses_max ? v.conflicts : v.other_conflicts, *r_max, right.query);
    if (l_max) append_sources(v.other_conflicts, *l_max, left.query);
    if (r_min) append_sources(v.other_conflicts, *r_min, right.query);
    return v;
}

// ---------------------------------------------------------------------------
// Compose

namespace {

struct Composer {
    const std::vector<IntervalVerdict>& verdicts;
    std::size_t cap;
    std::optional<Conflict> disagreement;

    std::vector<Candidate> run(const GroundFormula& f) {
        switch (f.kind) {
            case GroundFormula::Kind::True: return {Candidate{{}, true}};
            case GroundFormula::Kind::False: return {};
            case GroundFormula::Kind::Atom: {
                const IntervalVerdict& v = verdicts.at(f.atom);
                if (v.tag == Tag::AllSat) return {Candidate{{}, true}};
                if (v.tag == Tag::AllUnsat) return {};
                if (v.incompatible && !disagreement) disagreement = v.incompatible;
                return v.candidates;
            }
            case GroundFormula::Kind::Or: {
                std::vector<Candidate> out;
                for (const auto& child : f.children) {
                    for (auto& alt : run(child)) {
                        if (out.size() >= cap) return out;
                        out.push_back(std::move(alt));
                    }
                }
                return out;
            }
            case GroundFormula::Kind::And: {
                std::vector<Candidate> acc{Candidate{{}, true}};
                for (const auto& child : f.children) {
                    const auto alts = run(child);
                    std::vector<Candidate> next;
                    for (const auto& x : acc) {
                        for (const auto& y : alts) {
                            if (next.size() >= cap) break;
                            auto merged = intersect(x.assignment, y.assignment);
                            if (merged.merged) {
                                next.push_back(Candidate{std::move(*merged.merged), x.certain && y.certain});
                            } else if (!disagreement) {
                                disagreement = Conflict{*merged.disagreement, merged.disagreeing_actions, {}};
                            }
                        }
                    }
                    acc = std::move(next);
                    if (acc.empty()) break;
                }
                return acc;
            }
        }
        return {};
    }
};

}  // namespace

ComposeResult compose(const GroundFormula& f, const std::vector<IntervalVerdict>& verdicts, std::size_t cap) {
    Composer composer{verdicts, std::max<std::size_t>(cap, 1), std::nullopt};
    ComposeResult result;
    result.alternatives = composer.run(f);
    result.disagreement = composer.disagreement;
    return result;
}

// ---------------------------------------------------------------------------
// Checks and objective

CheckResult check_realisation(const Problem& p, const Realisation& r) {
    const auto controllers = induce(p.space, r);
    std::vector<Mc> mcs;
    mcs.reserve(controllers.size());
    for (const auto& c : controllers) mcs.push_back(impose(p.model, c));
    return check_mc(mcs, p.formula);
}

bool verify(const Problem& p, const Realisation& r) {
    const auto controllers = induce(p.space, r);
    if (!satisfies_structure(controllers, p.spec.controllers, p.spec.structure)) return false;
    return check_realisation(p, r).holds;
}

std::vector<std::pair<std::size_t, std::size_t>> distance_pairs(const Problem& p, std::size_t a, std::size_t b) {
    if (a >= p.space.controllers() || b >= p.space.controllers() || a == b) {
        throw SpecError("distance objective needs two different declared controllers");
    }
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (StateId s = 0; s < p.model.state_count(); ++s) {
        if (p.model.menu_size(s) < 2) continue;
        const std::size_t ka = p.space.parameter_of(a, s);
        const std::size_t kb = p.space.parameter_of(b, s);
        if (ka != kb) pairs.emplace(ka, kb);
    }
    return {pairs.begin(), pairs.end()};
}

std::size_t distance(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const Realisation& r) {
    std::size_t d = 0;
    for (const auto& [ka, kb] : pairs) d += r.assignment.at(ka) != r.assignment.at(kb) ? 1 : 0;
    return d;
}

std::size_t distance_bound(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const FamilyNode& node) {
    std::size_t d = 0;
    for (const auto& [ka, kb] : pairs) {
        const auto& da = node.domains.at(ka);
        const auto& db = node.domains.at(kb);
        const bool fixed_equal = da.size() == 1 && db.size() == 1 && da.front() == db.front();
        d += fixed_equal ? 0 : 1;
    }
    return d;
}

// ---------------------------------------------------------------------------
// AR loop

namespace {

using Clock = std::chrono::steady_clock;

double to_double(const FamilySize& v) { return v.convert_to<double>(); }

struct Entry {
    FamilyNode node;
    bool known_sat = false;
};

// Atoms that are false in `f` under the member's truth values, enough to falsify `f`.
void falsifying_core(const GroundFormula& f, const std::vector<bool>& truth, std::set<std::size_t>& core) {
    switch (f.kind) {
        case GroundFormula::Kind::Atom: core.insert(f.atom); return;
        case GroundFormula::Kind::And:
            for (const auto& c : f.children) {
                if (!evaluate(c, truth)) {
                    falsifying_core(c, truth, core);
                    return;
                }
            }
            return;
        case GroundFormula::Kind::Or:
            for (const auto& c : f.children) falsifying_core(c, truth, core);
            return;
        default: return;
    }
}

class Runner {
public:
    Runner(const Problem& p, const SynthesisOptions& opts) : p_(p), opts_(opts), start_(Clock::now()) {
        out_.stats.family_size = p_.space.size();
        if (opts_.mode == Mode::Optimal) pairs_ = distance_pairs(p_, opts_.distance_a, opts_.distance_b);
    }

    SynthesisOutcome run() {
        stack_.push_back({FamilyNode::root(p_.space), false});
        while (!stack_.empty()) {
            if (limit_hit()) {
                out_.limit_exceeded = true;
                return finish(Verdict::Unknown);
            }
            Entry entry = std::move(stack_.back());
            stack_.pop_back();
            ++out_.stats.iterations;
            if (process(entry)) return finish(Verdict::Feasible);
        }
        if (opts_.mode == Mode::Feasibility) return finish(Verdict::Unfeasible);
        if (opts_.mode == Mode::Complete) return finish(out_.satisfying.empty() ? Verdict::Unfeasible : Verdict::Feasible);
        return finish(out_.best_value ? Verdict::Feasible : Verdict::Unfeasible);
    }

private:
    bool limit_hit() const {
        if (opts_.max_iterations > 0 && out_.stats.iterations >= opts_.max_iterations) return true;
        if (opts_.time_limit > 0.0) {
            double elapsed = std::chrono::duration<double>(Clock::now() - start_).count();
            if (elapsed > opts_.time_limit) return true;
        }
        return false;
    }

    SynthesisOutcome finish(Verdict verdict) {
        out_.verdict = verdict;
        auto& st = out_.stats;
        st.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
        st.average_decided_size = st.decided_families == 0 ? 0.0 : to_double(st.decided_members) / st.decided_families;
        if (!out_.limit_exceeded && opts_.mode != Mode::Feasibility) {
            st.explored_fraction = 1.0;
        } else if (verdict == Verdict::Unfeasible) {
            st.explored_fraction = 1.0;
        } else {
            st.explored_fraction = std::min(1.0, to_double(st.decided_members) / to_double(st.family_size));
        }
        if (out_.witness) out_.controllers = induce(p_.space, *out_.witness);
        FamilySize count = 0;
        for (const auto& box : out_.satisfying) count += box.size();
        out_.satisfying_count = count;
        return std::move(out_);
    }

    void decided(const FamilySize& members) {
        ++out_.stats.decided_families;
        out_.stats.decided_members += members;
    }

    void push_all(std::vector<FamilyNode> nodes, bool known_sat) {
        for (auto& n : nodes) stack_.push_back({std::move(n), known_sat});
    }

    // Returns true when feasibility mode has found its witness.
    bool accept(const Realisation& r) {
        if (opts_.mode == Mode::Feasibility) {
            out_.witness = r;
            return true;
        }
        if (opts_.mode == Mode::Optimal) {
            const std::size_t d = distance(pairs_, r);
            if (!out_.best_value || d > *out_.best_value) {
                out_.best_value = d;
                out_.witness = r;
            }
        }
        return false;
    }

    bool process(Entry& entry) {
        const FamilyNode& node = entry.node;
        if (opts_.mode == Mode::Optimal && out_.best_value && distance_bound(pairs_, node) <= *out_.best_value) {
            decided(node.size());
            return false;
        }
        if (entry.known_sat) {
            refine_objective(node);
            return false;
        }
        if (node.is_singleton()) {
            const Realisation r = only_member(node);
            decided(1);
            if (!verify(p_, r)) return false;
            if (opts_.mode == Mode::Complete) out_.satisfying.push_back(node);
            return accept(r);
        }

        NodeAnalysis na(p_, node, opts_.solver);
        const auto& atoms = p_.formula.atoms;
        std::vector<IntervalVerdict> verdicts;
        verdicts.reserve(atoms.size());
        for (const auto& atom : atoms) verdicts.push_back(atom_bounds(na, atom, opts_.guard()));
        if (out_.stats.iterations == 1) out_.root_bounds = verdicts;

        std::vector<std::optional<bool>> decided_truth(atoms.size());
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (verdicts[i].tag == Tag::AllSat) decided_truth[i] = true;
            if (verdicts[i].tag == Tag::AllUnsat) decided_truth[i] = false;
        }
        const auto residual = simplify(p_.formula.root, decided_truth);
        if (residual == Residual::False) {
            decided(node.size());
            return false;
        }
        if (residual == Residual::True) {
            switch (opts_.mode) {
                case Mode::Feasibility: {
                    const Realisation r = only_member(node);
                    if (verify(p_, r)) {
                        decided(node.size());
                        return accept(r);
                    }
                    break;  // numerical disagreement: keep splitting
                }
                case Mode::Complete:
                    decided(node.size());
                    out_.satisfying.push_back(node);
                    return false;
                case Mode::Optimal:
                    refine_objective(node);
                    return false;
            }
        }

        if (opts_.hybrid && try_counterexample(na, node, verdicts)) return out_.witness.has_value() && opts_.mode == Mode::Feasibility;

        const ComposeResult composed = compose(p_.formula.root, verdicts, opts_.compose_cap);
        for (const auto& alt : composed.alternatives) {
            const Realisation r = complete(node, alt.assignment);
            if (!verify(p_, r)) continue;
            if (opts_.mode == Mode::Feasibility) {
                decided(node.size());
                return accept(r);
            }
            if (opts_.mode == Mode::Complete) {
                if (!alt.certain) continue;
                FamilyNode box = node;
                for (const auto& [k, a] : alt.assignment.fixed) box.domains.at(k) = {a};
                decided(box.size());
                out_.satisfying.push_back(box);
                push_all(box_complement(node, alt.assignment), false);
                return false;
            }
            accept(r);
            break;
        }
        split_node(na, node, verdicts, composed);
        return false;
    }

    enum class Residual { True, False, Open };

    static Residual simplify(const GroundFormula& f, const std::vector<std::optional<bool>>& truth) {
        switch (f.kind) {
            case GroundFormula::Kind::True: return Residual::True;
            case GroundFormula::Kind::False: return Residual::False;
            case GroundFormula::Kind::Atom:
                if (!truth.at(f.atom)) return Residual::Open;
                return *truth.at(f.atom) ? Residual::True : Residual::False;
            case GroundFormula::Kind::And: {
                Residual r = Residual::True;
                for (const auto& c : f.children) {
                    Residual x = simplify(c, truth);
                    if (x == Residual::False) return Residual::False;
                    if (x == Residual::Open) r = Residual::Open;
                }
                return r;
            }
            case GroundFormula::Kind::Or: {
                Residual r = Residual::False;
                for (const auto& c : f.children) {
                    Residual x = simplify(c, truth);
                    if (x == Residual::True) return Residual::True;
                    if (x == Residual::Open) r = Residual::Open;
                }
                return r;
            }
        }
        return Residual::Open;
    }

    void split_node(NodeAnalysis& na, const FamilyNode& node, const std::vector<IntervalVerdict>& verdicts,
                    const ComposeResult& composed) {
        // First ambiguous atom (in atom order) whose extremal controllers conflict.
        const std::vector<ConflictSource>* sources = nullptr;
        for (const auto& v : verdicts) {
            if (v.tag == Tag::AllSat || v.tag == Tag::AllUnsat) continue;
            if (!v.conflicts.empty()) {
                sources = &v.conflicts;
                break;
            }
            if (!v.other_conflicts.empty()) {
                sources = &v.other_conflicts;
                break;
            }
        }
        if (sources != nullptr) {
            std::map<std::tuple<std::size_t, StateId, std::string, QueryKind, std::vector<ActionId>>,
                     std::map<std::pair<StateId, ActionId>, double>>
                impacts;
            std::vector<Conflict> conflicts;
            std::vector<const std::map<std::pair<StateId, ActionId>, double>*> gammas;
            for (const auto& src : *sources) {
                const auto key = std::make_tuple(src.query.slot, src.query.state, src.query.target, src.query.kind,
                                                 src.controller.choice);
                auto it = impacts.find(key);
                if (it == impacts.end()) {
                    const Mdp& m = na.restricted(src.query.slot);
                    it = impacts
                             .emplace(key, immediate_impact(m, impose(m, src.controller), src.query.state,
                                                            src.query.kind, m.label(src.query.target)))
                             .first;
                }
                conflicts.push_back(src.conflict);
                gammas.push_back(&it->second);
            }
            const ConflictSource* best = &(*sources)[select_split(conflicts, gammas)];
            push_all(split(node, best->conflict.parameter, best->conflict.actions), false);
            return;
        }
        if (composed.disagreement) {
            push_all(split(node, composed.disagreement->parameter, composed.disagreement->actions), false);
            return;
        }
        // Fallback: a parameter with a real choice, preferring ones the candidates care about.
        std::optional<std::size_t> pick;
        for (const auto& v : verdicts) {
            for (const auto& cand : v.candidates) {
                for (const auto& [k, a] : cand.assignment.fixed) {
                    if (node.domains[k].size() > 1 && (!pick || k < *pick)) pick = k;
                }
            }
            if (pick) break;
        }
        if (!pick) {
            for (std::size_t k = 0; k < node.domains.size(); ++k) {
                if (node.domains[k].size() > 1) {
                    pick = k;
                    break;
                }
            }
        }
        const auto& d = node.domains.at(*pick);
        push_all(split(node, *pick, {d[0], d[1]}), false);
    }

    // All members of `node` satisfy the formula; search it for the best distance.
    void refine_objective(const FamilyNode& node) {
        const std::size_t bound = distance_bound(pairs_, node);
        Realisation r = only_member(node);
        std::size_t value = distance(pairs_, r);
        bool improved = true;
        while (improved && value < bound) {
            improved = false;
            for (std::size_t k = 0; k < node.domains.size(); ++k) {
                for (ActionId a : node.domains[k]) {
                    const ActionId old = r.assignment[k];
                    if (a == old) continue;
                    r.assignment[k] = a;
                    const std::size_t d = distance(pairs_, r);
                    if (d > value) {
                        value = d;
                        improved = true;
                    } else {
                        r.assignment[k] = old;
                    }
                }
            }
        }
        if (verify(p_, r)) {
            accept(r);
        } else {
            // Guarded bounds disagree with the exact check; fall back to plain splitting.
            value = 0;
        }
        if (node.is_singleton() || (value == bound && out_.best_value && *out_.best_value >= bound)) {
            decided(node.size());
            return;
        }
        // Split a parameter of a pair that could still differ.
        std::optional<std::size_t> pick;
        for (const auto& [ka, kb] : pairs_) {
            if (r.assignment[ka] != r.assignment[kb]) continue;
            if (node.domains[ka].size() > 1) {
                pick = ka;
                break;
            }
            if (node.domains[kb].size() > 1) {
                pick = kb;
                break;
            }
        }
        if (!pick) {
            for (std::size_t k = 0; k < node.domains.size(); ++k) {
                if (node.domains[k].size() > 1) {
                    pick = k;
                    break;
                }
            }
        }
        push_all(split(node, *pick, node.domains[*pick]), true);
    }

    // Samples the first member; on violation, prunes every member sharing a certified
    // counterexample. Returns true when the node has been handled.
    bool try_counterexample(NodeAnalysis& na, const FamilyNode& node, const std::vector<IntervalVerdict>& verdicts) {
        const Realisation r = only_member(node);
        const CheckResult check = check_realisation(p_, r);
        if (check.holds) {
            if (opts_.mode == Mode::Feasibility && verify(p_, r)) {
                decided(node.size());
                accept(r);
                return true;
            }
            return false;
        }
        std::vector<bool> truth;
        for (const auto& a : check.atoms) truth.push_back(a.holds);
        std::set<std::size_t> core;
        falsifying_core(p_.formula.root, truth, core);

        const auto controllers = induce(p_.space, r);
        std::set<std::size_t> conflict;
        for (std::size_t i : core) {
            if (verdicts[i].tag == Tag::AllUnsat) continue;
            const CanonicalAtom& atom = p_.formula.atoms[i];
            std::vector<Mc> mcs;
            auto make_side = [&](const Operand& op, Direction dir, CeSide& side) -> bool {
                if (!op.is_query()) {
                    side.constant = op.constant;
                    return true;
                }
                if (op.query->kind != QueryKind::Reach) return false;
                side.initial = op.query->state;
                side.target = p_.model.label(op.query->target);
                side.bounds = na.extremal(op.query->slot, QueryKind::Reach, op.query->target, dir).values.values;
                return true;
            };
            CeSide large, small;
            if (!make_side(atom.left, Direction::Min, large) || !make_side(atom.right, Direction::Max, small)) {
                return false;
            }
            std::optional<Mc> large_mc, small_mc;
            if (atom.left.is_query()) {
                large_mc.emplace(impose(p_.model, controllers.at(atom.left.query->slot)));
                large.mc = &*large_mc;
            }
            if (atom.right.is_query()) {
                small_mc.emplace(impose(p_.model, controllers.at(atom.right.query->slot)));
                small.mc = &*small_mc;
            }
            auto ce = grow_ce(p_.model, large, small, atom.slack, atom.strict, opts_.guard());
            if (!ce) return false;
            auto add = [&](const Operand& op, const StateSet& kept) {
                if (!op.is_query()) return;
                for (StateId s : kept.members()) {
                    const std::size_t k = p_.space.parameter_of(op.query->slot, s);
                    if (node.domains[k].size() > 1) conflict.insert(k);
                }
            };
            add(atom.left, ce->large);
            add(atom.right, ce->small);
        }
        const std::vector<std::size_t> kc(conflict.begin(), conflict.end());
        auto rest = prune_by_conflict(node, r, kc);
        FamilySize remaining = 0;
        for (const auto& box : rest) remaining += box.size();
        decided(node.size() - remaining);
        ++out_.stats.ce_prunes;
        push_all(std::move(rest), false);
        return true;
    }

    const Problem& p_;
    const SynthesisOptions& opts_;
    Clock::time_point start_;
    std::vector<Entry> stack_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
    SynthesisOutcome out_;
};

}  // namespace

SynthesisOutcome ar_loop(const Problem& p, const SynthesisOptions& opts) { return Runner(p, opts).run(); }

SynthesisOutcome enumerate_oracle(const Problem& p, const SynthesisOptions& opts) {
    const auto start = Clock::now();
    SynthesisOutcome out;
    out.stats.family_size = p.space.size();
    if (to_double(out.stats.family_size) > opts.enumeration_cap) {
        throw CapExceededError("family of " + out.stats.family_size.str() + " members exceeds the enumeration cap");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (opts.mode == Mode::Optimal) pairs = distance_pairs(p, opts.distance_a, opts.distance_b);
    for_each_realisation(FamilyNode::root(p.space), [&](const Realisation& r) {
        ++out.stats.iterations;
        if (!verify(p, r)) return true;
        FamilyNode single;
        for (ActionId a : r.assignment) single.domains.push_back({a});
        switch (opts.mode) {
            case Mode::Feasibility:
                out.witness = r;
                return false;
            case Mode::Complete:
                if (!out.witness) out.witness = r;
                out.satisfying.push_back(std::move(single));
                return true;
            case Mode::Optimal: {
                const std::size_t d = distance(pairs, r);
                if (!out.best_value || d > *out.best_value) {
                    out.best_value = d;
                    out.witness = r;
                }
                return true;
            }
        }
        return true;
    });
    out.verdict = out.witness ? Verdict::Feasible : Verdict::Unfeasible;
    if (out.witness) out.controllers = induce(p.space, *out.witness);
    out.satisfying_count = out.satisfying.size();
    out.stats.decided_families = out.stats.iterations;
    out.stats.decided_members = out.stats.iterations;
    out.stats.average_decided_size = 1.0;
    out.stats.explored_fraction =
        out.verdict == Verdict::Unfeasible ? 1.0 : to_double(out.stats.decided_members) / to_double(out.stats.family_size);
    if (opts.mode != Mode::Feasibility) out.stats.explored_fraction = 1.0;
    out.stats.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
}

}  // namespace hypersynth
