#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "hypersynth/analysis.hpp"
#include "hypersynth/counterexample.hpp"
#include "hypersynth/synthesis.hpp"
#include "hypersynth/textio.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace hypersynth;

namespace {

StateSet random_subset(std::mt19937_64& rng, std::size_t n, double p) {
    StateSet set(n);
    for (StateId s = 0; s < n; ++s) {
        if (gen::coin(rng, p)) set.insert(s);
    }
    return set;
}

}  // namespace

TEST_CASE("deflated chain layout") {
    const Mdp m = fixtures::two_choice_mdp();
    const Mc mc = impose(m, Controller{{0, 0, 0, 0}});
    const DeflatedMc d = build_deflated(mc, StateSet::of(4, std::vector<StateId>{0}), {0.9, 0.25, 1.0, 0.0},
                                        m.label("two"));
    CHECK(d.bottom == 4);
    CHECK(d.top == 5);
    REQUIRE(d.chain.state_count() == 6);
    CHECK(std::vector<Transition>(d.chain.row(0).begin(), d.chain.row(0).end()) ==
          std::vector<Transition>(mc.row(0).begin(), mc.row(0).end()));
    CHECK(std::vector<Transition>(d.chain.row(1).begin(), d.chain.row(1).end()) ==
          std::vector<Transition>{{4, 0.75}, {5, 0.25}});
    CHECK(std::vector<Transition>(d.chain.row(2).begin(), d.chain.row(2).end()) == std::vector<Transition>{{2, 1.0}});
    CHECK(d.target.contains(2));
    CHECK(d.target.contains(5));
    CHECK_FALSE(d.target.contains(4));
}

TEST_CASE("keeping every state changes nothing; keeping none returns the bound") {
    std::mt19937_64 rng(31);
    for (int round = 0; round < 200; ++round) {
        const Mc mc = gen::random_mc(rng, gen::pick(rng, 2, 8));
        const std::size_t n = mc.state_count();
        const StateSet& target = mc.model().label("t");
        std::vector<double> bounds(n);
        for (auto& b : bounds) b = std::uniform_real_distribution<double>(0, 1)(rng);
        const auto truth = mc_reach(mc, target);
        const StateId init = static_cast<StateId>(rng() % n);
        CeSide side{&mc, init, target, bounds, 0.0};
        StateSet all(n);
        for (StateId s = 0; s < n; ++s) all.insert(s);
        CHECK(deflated_value(side, all) == doctest::Approx(truth[init]).epsilon(1e-12));
        const double none = deflated_value(side, StateSet(n));
        CHECK(none == doctest::Approx(target.contains(init) ? 1.0 : bounds[init]).epsilon(1e-12));
    }
}

TEST_CASE("upper-bound deflation over-approximates, lower-bound deflation under-approximates") {
    std::mt19937_64 rng(32);
    for (int round = 0; round < 500; ++round) {
        const Mc mc = gen::random_mc(rng, gen::pick(rng, 2, 8));
        const std::size_t n = mc.state_count();
        const std::vector<ActionId> choice(n, 0);
        const auto truth = oracle::values(mc.model(), choice, QueryKind::Reach, oracle::mask(mc.model(), "t"));
        std::vector<double> ub(n), lb(n);
        for (StateId s = 0; s < n; ++s) {
            const double u = std::uniform_real_distribution<double>(0, 1)(rng);
            ub[s] = gen::coin(rng, 0.3) ? truth[s] : truth[s] + (1.0 - truth[s]) * u;
            lb[s] = gen::coin(rng, 0.3) ? truth[s] : truth[s] * u;
        }
        const StateSet keep = random_subset(rng, n, 0.5);
        const StateSet& target = mc.model().label("t");
        const auto up = mc_reach(build_deflated(mc, keep, ub, target).chain, build_deflated(mc, keep, ub, target).target);
        const DeflatedMc low = build_deflated(mc, keep, lb, target);
        const auto down = mc_reach(low.chain, low.target);
        for (StateId s = 0; s < n; ++s) {
            CHECK(up[s] >= truth[s] - 1e-10);
            CHECK(down[s] <= truth[s] + 1e-10);
        }
    }
}

TEST_CASE("notes example: the counterexample of sigma0 prunes sigma0 and sigma1") {
    const Problem p = Problem::make(fixtures::two_choice_mdp(), parse_spec(fixtures::two_choice_spec()));
    const Realisation sigma0{{0, 0, 0, 0}};
    const Mc mc = impose(p.model, induce(p.space, sigma0)[0]);
    NodeAnalysis na(p, FamilyNode::root(p.space), SolverOptions{});
    const auto& lower = na.extremal(0, QueryKind::Reach, "two", Direction::Min).values.values;
    CHECK(lower[0] == doctest::Approx(0.2));
    CHECK(lower[1] == doctest::Approx(0.4));
    CeSide large{&mc, 0, p.model.label("two"), lower, 0.0};
    CeSide small;
    small.constant = 0.6;
    const auto ce = grow_ce(p.model, large, small, 0.0, false, SynthesisOptions{}.guard());
    REQUIRE(ce.has_value());
    CHECK(ce->large.members() == std::vector<StateId>{0});
    const std::size_t k = p.space.parameter_of(0, 0);
    const auto rest = prune_by_conflict(FamilyNode::root(p.space), sigma0, {k});
    FamilySize left = 0;
    std::set<std::vector<ActionId>> survivors;
    for (const auto& box : rest) {
        left += box.size();
        for_each_realisation(box, [&](const Realisation& r) {
            survivors.insert(r.assignment);
            return true;
        });
    }
    CHECK(left == 2);
    for (const auto& r : survivors) CHECK(r[k] == 1);  // beta at s0 only
}

TEST_CASE("a certified counterexample holds for every member it prunes") {
    std::mt19937_64 rng(33);
    const double guard = SynthesisOptions{}.guard();
    std::size_t certified = 0;
    for (int round = 0; round < 400; ++round) {
        gen::Shape shape;
        shape.max_states = 7;
        shape.rewards = false;
        const Mdp m = gen::random_mdp(rng, shape);
        const Problem p = Problem::make(m, gen::random_spec(rng, m));
        if (p.space.size() > 3000) continue;
        const FamilyNode root = FamilyNode::root(p.space);
        NodeAnalysis na(p, root, SolverOptions{});
        Realisation r;
        for (const auto& d : root.domains) r.assignment.push_back(d[rng() % d.size()]);
        const auto ctl = induce(p.space, r);
        for (const CanonicalAtom& atom : p.formula.atoms) {
            std::optional<Mc> lmc, rmc;
            CeSide large, small;
            if (atom.left.is_query()) {
                const GroundQuery& q = *atom.left.query;
                lmc.emplace(impose(p.model, ctl[q.slot]));
                large = CeSide{&*lmc, q.state, p.model.label(q.target),
                               na.extremal(q.slot, QueryKind::Reach, q.target, Direction::Min).values.values, 0.0};
            } else {
                large.constant = atom.left.constant;
            }
            if (atom.right.is_query()) {
                const GroundQuery& q = *atom.right.query;
                rmc.emplace(impose(p.model, ctl[q.slot]));
                small = CeSide{&*rmc, q.state, p.model.label(q.target),
                               na.extremal(q.slot, QueryKind::Reach, q.target, Direction::Max).values.values, 0.0};
            } else {
                small.constant = atom.right.constant;
            }
            const auto ce = grow_ce(p.model, large, small, atom.slack, atom.strict, guard);
            if (!ce) continue;
            ++certified;
            std::set<std::size_t> conflict;
            if (atom.left.is_query()) {
                for (StateId s : ce->large.members()) conflict.insert(p.space.parameter_of(atom.left.query->slot, s));
            }
            if (atom.right.is_query()) {
                for (StateId s : ce->small.members()) conflict.insert(p.space.parameter_of(atom.right.query->slot, s));
            }
            const std::vector<std::size_t> kc(conflict.begin(), conflict.end());
            // Members agreeing with r on the conflict violate the atom.
            std::size_t agreeing = 0;
            for_each_realisation(root, [&](const Realisation& other) {
                for (std::size_t k : kc) {
                    if (other.assignment[k] != r.assignment[k]) return true;
                }
                ++agreeing;
                const auto oc = induce(p.space, other);
                auto value = [&](const Operand& op) {
                    if (!op.is_query()) return op.constant;
                    const GroundQuery& q = *op.query;
                    return oracle::values(p.model, oc[q.slot].choice, q.kind, oracle::mask(p.model, q.target))[q.state];
                };
                CHECK_FALSE(holds(atom, value(atom.left), value(atom.right)));
                return true;
            });
            // The pruned boxes keep exactly the disagreeing members.
            FamilySize kept = 0;
            for (const auto& box : prune_by_conflict(root, r, kc)) kept += box.size();
            CHECK(kept + agreeing == root.size());
        }
    }
    CHECK(certified > 50);
}

TEST_CASE("prune_by_conflict edge cases") {
    const FamilyNode node{{{0, 1}, {0, 1, 2}, {3}}};
    const Realisation r{{1, 2, 3}};
    CHECK(prune_by_conflict(node, r, {}).empty());
    FamilySize total = 0;
    for (const auto& box : prune_by_conflict(node, r, {0, 1, 2})) {
        total += box.size();
        CHECK_FALSE(box.contains(r.assignment));
    }
    CHECK(total == node.size() - 1);
    // A singleton parameter adds no box.
    CHECK(prune_by_conflict(node, r, {2}).empty());
    CHECK(prune_by_conflict(node, r, {1}).size() == 1);
}
