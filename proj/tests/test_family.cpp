#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "hypersynth/analysis.hpp"
#include "hypersynth/errors.hpp"
#include "hypersynth/family.hpp"
#include "hypersynth/generators.hpp"
#include "hypersynth/textio.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace hypersynth;

namespace {

Mdp uniform_mdp(std::size_t states, std::size_t actions) {
    std::vector<std::vector<Choice>> rows(states);
    for (StateId s = 0; s < states; ++s) {
        for (ActionId a = 0; a < actions; ++a) rows[s].push_back(Choice{a, "", {{s, 1.0}}, 0.0});
    }
    return Mdp(std::move(rows), {}, false);
}

std::set<std::vector<ActionId>> members(const FamilyNode& node) {
    std::set<std::vector<ActionId>> out;
    for_each_realisation(node, [&](const Realisation& r) {
        out.insert(r.assignment);
        return true;
    });
    return out;
}

FamilyNode random_node(std::mt19937_64& rng, std::size_t params, std::size_t max_actions) {
    FamilyNode node;
    for (std::size_t k = 0; k < params; ++k) {
        std::vector<ActionId> d;
        for (ActionId a = 0; a < max_actions; ++a) {
            if (gen::coin(rng, 0.6)) d.push_back(a);
        }
        if (d.empty()) d.push_back(static_cast<ActionId>(rng() % max_actions));
        node.domains.push_back(std::move(d));
    }
    return node;
}

/// Random MDP whose actions only move to higher states; the last state absorbs and is the target.
Mdp forward_mdp(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::vector<Choice>> rows(n);
    for (StateId s = 0; s + 1 < n; ++s) {
        for (ActionId a = 0, k = static_cast<ActionId>(gen::pick(rng, 1, 3)); a < k; ++a) {
            Choice c{a, "", {}, static_cast<double>(gen::pick(rng, 0, 3))};
            const std::size_t w1 = gen::pick(rng, 1, 4), w2 = gen::pick(rng, 1, 4);
            const auto t1 = static_cast<StateId>(gen::pick(rng, s + 1, n - 1));
            const auto t2 = static_cast<StateId>(gen::pick(rng, s + 1, n - 1));
            c.distribution = {{t1, double(w1) / double(w1 + w2)}, {t2, double(w2) / double(w1 + w2)}};
            rows[s].push_back(std::move(c));
        }
    }
    rows[n - 1].push_back(Choice{0, "", {{static_cast<StateId>(n - 1), 1.0}}, 0.0});
    return Mdp(std::move(rows), {{"t", StateSet::of(n, std::vector<StateId>{static_cast<StateId>(n - 1)})}}, true);
}

}  // namespace

TEST_CASE("family sizes") {
    const Mdp m = uniform_mdp(3, 2);
    CHECK(build_parameter_space(m, {"c"}, {}).size() == 8);
    CHECK(build_parameter_space(m, {"c", "d"}, {}).size() == 64);
    const ParameterSpace obs = build_parameter_space(m, {"c"}, {ObsConstraint{{0, 1}, "c"}});
    CHECK(obs.size() == 4);
    CHECK(obs.parameter_count() == 2);
    CHECK(obs.parameter_of(0, 0) == obs.parameter_of(0, 1));
    const ParameterSpace same = build_parameter_space(m, {"c", "d"}, {SameConstraint{2, {"c", "d"}}});
    CHECK(same.size() == 32);
    CHECK(same.parameter_of(0, 2) == same.parameter_of(1, 2));
    CHECK(same.members(same.parameter_of(1, 2)).size() == 2);
}

TEST_CASE("obs across different menus is rejected") {
    Mdp m({{Choice{0, "", {{0, 1.0}}, 0.0}, Choice{1, "", {{0, 1.0}}, 0.0}}, {Choice{0, "", {{1, 1.0}}, 0.0}}}, {},
          false);
    CHECK_THROWS_AS(build_parameter_space(m, {"c"}, {ObsConstraint{{0, 1}, "c"}}), IncompatibleObservationError);
    CHECK_THROWS_AS(build_parameter_space(m, {"c"}, {ObsConstraint{{0, 5}, "c"}}), SpecError);
    CHECK_THROWS_AS(build_parameter_space(m, {"c"}, {ObsConstraint{{0}, "d"}}), SpecError);
}

TEST_CASE("die family sizes") {
    for (auto [stages, size] : {std::pair{"1", 156}, std::pair{"2", 6084}}) {
        const Benchmark b = generate("knuth-yao-pc", {{"stages", stages}});
        const ParameterSpace ps = build_parameter_space(b.model, b.spec.controllers, b.spec.structure);
        CHECK(ps.size() == size);
    }
}

TEST_CASE("induce hits exactly the structure-respecting n-controllers") {
    std::mt19937_64 rng(7);
    int checked = 0;
    for (int round = 0; round < 300 && checked < 150; ++round) {
        gen::Shape shape;
        shape.max_states = 3;
        const Mdp m = gen::random_mdp(rng, shape);
        const HyperSpec spec = gen::random_spec(rng, m);
        const ParameterSpace ps = build_parameter_space(m, spec.controllers, spec.structure);
        if (ps.size() > 2000) continue;
        ++checked;
        std::set<std::vector<std::vector<ActionId>>> image;
        for_each_realisation(FamilyNode::root(ps), [&](const Realisation& r) {
            std::vector<std::vector<ActionId>> tuple;
            for (const auto& c : induce(ps, r)) tuple.push_back(c.choice);
            CHECK(oracle::structure_holds(spec, tuple));
            image.insert(tuple);
            return true;
        });
        CHECK(FamilySize(image.size()) == ps.size());
        // Every structure-respecting tuple is in the image.
        std::vector<std::vector<ActionId>> all;
        oracle::enumerate_controllers(m, [&](const auto& c) { all.push_back(c); });
        std::size_t respecting = 0;
        std::vector<std::size_t> idx(spec.controllers.size(), 0);
        while (true) {
            std::vector<std::vector<ActionId>> tuple;
            for (std::size_t i : idx) tuple.push_back(all[i]);
            if (oracle::structure_holds(spec, tuple)) {
                ++respecting;
                CHECK(image.count(tuple) == 1);
            }
            std::size_t i = 0;
            while (i < idx.size() && ++idx[i] == all.size()) idx[i++] = 0;
            if (i == idx.size()) break;
        }
        CHECK(respecting == image.size());
    }
    CHECK(checked >= 100);
}

TEST_CASE("node restriction exposes the node's members") {
    std::mt19937_64 rng(8);
    for (int round = 0; round < 100; ++round) {
        gen::Shape shape;
        shape.max_states = 3;
        const Mdp m = gen::random_mdp(rng, shape);
        const HyperSpec spec = gen::random_spec(rng, m);
        const ParameterSpace ps = build_parameter_space(m, spec.controllers, spec.structure);
        FamilyNode node = FamilyNode::root(ps);
        for (auto& d : node.domains) {
            if (d.size() > 1 && gen::coin(rng, 0.5)) d.erase(d.begin() + static_cast<long>(rng() % d.size()));
        }
        CHECK(node_restrict(m, ps, FamilyNode::root(ps), 0) == m);
        for (std::size_t i = 0; i < ps.controllers(); ++i) {
            std::set<std::vector<ActionId>> expected, got;
            for_each_realisation(node, [&](const Realisation& r) {
                expected.insert(induce(ps, r)[i].choice);
                return true;
            });
            oracle::enumerate_controllers(node_restrict(m, ps, node, i), [&](const auto& c) { got.insert(c); });
            // An MDP cannot tie states together, so obs classes only give a superset.
            bool tied = false;
            for (const auto& sc : spec.structure) {
                const auto* obs = std::get_if<ObsConstraint>(&sc);
                tied = tied || (obs && obs->states.size() > 1 && obs->controller == spec.controllers[i]);
            }
            if (tied) {
                for (const auto& c : expected) CHECK(got.count(c) == 1);
            } else {
                CHECK(got == expected);
            }
        }
    }
}

TEST_CASE("fixing one die parameter leaves one pair at that state") {
    const Benchmark b = generate("knuth-yao-pc", {{"stages", "1"}});
    const ParameterSpace ps = build_parameter_space(b.model, b.spec.controllers, b.spec.structure);
    FamilyNode node = FamilyNode::root(ps);
    std::size_t k = 0;
    while (node.domains[k].size() < 2) ++k;
    node.domains[k] = {node.domains[k].back()};
    const Mdp r = node_restrict(b.model, ps, node, 0);
    for (const RawName& raw : ps.members(k)) CHECK(r.menu_size(raw.state) == 1);
}

TEST_CASE("consistency conflicts follow the definition") {
    std::mt19937_64 rng(9);
    for (int round = 0; round < 500; ++round) {
        gen::Shape shape;
        shape.max_states = 5;
        const Mdp m = gen::random_mdp(rng, shape);
        const HyperSpec spec = gen::random_spec(rng, m);
        const ParameterSpace ps = build_parameter_space(m, spec.controllers, spec.structure);
        const std::size_t i = rng() % ps.controllers();
        Controller c;
        StateSet relevant(m.state_count());
        for (StateId s = 0; s < m.state_count(); ++s) {
            c.choice.push_back(m.actions(s)[rng() % m.menu_size(s)].id);
            if (gen::coin(rng, 0.7)) relevant.insert(s);
        }
        std::map<std::size_t, std::set<ActionId>> expected;
        for (StateId s : relevant.members()) expected[ps.parameter_of(i, s)].insert(c.choice[s]);
        std::map<std::size_t, std::set<ActionId>> got;
        for (const Conflict& k : consistency_conflicts(ps, i, c, relevant)) {
            CHECK(std::is_sorted(k.actions.begin(), k.actions.end()));
            got[k.parameter] = std::set<ActionId>(k.actions.begin(), k.actions.end());
            for (StateId s : k.states) {
                CHECK(relevant.contains(s));
                CHECK(ps.parameter_of(i, s) == k.parameter);
            }
        }
        std::size_t conflicting = 0;
        for (const auto& [k, acts] : expected) {
            if (acts.size() > 1) {
                ++conflicting;
                CHECK(got[k] == acts);
            }
        }
        CHECK(got.size() == conflicting);
        if (conflicting == 0) {
            const PartialAssignment fixed = fix_controller(ps, i, c, relevant);
            CHECK(fixed.fixed.size() == expected.size());
            for (const auto& [k, acts] : expected) CHECK(fixed.fixed.at(k) == *acts.begin());
        }
    }
}

TEST_CASE("observation conflict in a maze cell pair") {
    const Mdp m = uniform_mdp(4, 4);  // up, down, left, right
    const ParameterSpace ps = build_parameter_space(m, {"c"}, {ObsConstraint{{2, 3}, "c"}});
    const Controller c{{0, 0, 0, 2}};
    const auto conflicts = consistency_conflicts(ps, 0, c, StateSet::of(4, std::vector<StateId>{0, 1, 2, 3}));
    REQUIRE(conflicts.size() == 1);
    CHECK(conflicts[0].actions == std::vector<ActionId>{0, 2});
    CHECK(conflicts[0].states == std::vector<StateId>{2, 3});
    CHECK(consistency_conflicts(build_parameter_space(m, {"c"}, {}), 0, c, StateSet::of(4, std::vector<StateId>{0, 1, 2, 3}))
              .empty());
}

TEST_CASE("split examples") {
    FamilyNode node{{{0, 1}, {0, 1, 2}}};
    const auto two = split(node, 0, {0, 1});
    REQUIRE(two.size() == 2);
    CHECK(two[0].domains[0] == std::vector<ActionId>{0});
    CHECK(two[1].domains[0] == std::vector<ActionId>{1});
    const auto three = split(node, 1, {0, 1});
    REQUIRE(three.size() == 3);
    CHECK(three[2].domains[1] == std::vector<ActionId>{2});
}

TEST_CASE("split is a partition that separates the conflicting actions") {
    std::mt19937_64 rng(10);
    for (int round = 0; round < 500; ++round) {
        const FamilyNode node = random_node(rng, gen::pick(rng, 1, 4), 4);
        std::vector<std::size_t> candidates;
        for (std::size_t k = 0; k < node.domains.size(); ++k) {
            if (node.domains[k].size() > 1) candidates.push_back(k);
        }
        if (candidates.empty()) continue;
        const std::size_t k = candidates[rng() % candidates.size()];
        std::vector<ActionId> conflict;
        for (ActionId a : node.domains[k]) {
            if (conflict.size() < 2 || gen::coin(rng, 0.5)) conflict.push_back(a);
        }
        const auto children = split(node, k, conflict);
        std::multiset<std::vector<ActionId>> covered;
        FamilySize total = 0;
        for (const auto& child : children) {
            total += child.size();
            for (const auto& r : members(child)) covered.insert(r);
            std::size_t hits = 0;
            for (ActionId a : conflict) hits += std::count(child.domains[k].begin(), child.domains[k].end(), a);
            CHECK(hits <= 1);
        }
        CHECK(total == node.size());
        const auto all = members(node);
        CHECK(covered.size() == all.size());
        CHECK(std::set<std::vector<ActionId>>(covered.begin(), covered.end()) == all);
    }
}

TEST_CASE("box complement removes exactly the fixed sub-box") {
    std::mt19937_64 rng(12);
    for (int round = 0; round < 500; ++round) {
        const FamilyNode node = random_node(rng, gen::pick(rng, 1, 4), 3);
        PartialAssignment fixed;
        for (std::size_t k = 0; k < node.domains.size(); ++k) {
            if (gen::coin(rng, 0.6)) {
                fixed.fixed[k] = gen::coin(rng, 0.9) ? node.domains[k][rng() % node.domains[k].size()]
                                                     : static_cast<ActionId>(rng() % 3);
            }
        }
        const auto boxes = box_complement(node, fixed);
        CHECK(boxes.size() <= std::max<std::size_t>(fixed.fixed.size(), 1));
        std::set<std::vector<ActionId>> expected;
        for (const auto& r : members(node)) {
            bool inside = true;
            for (const auto& [k, v] : fixed.fixed) inside = inside && r[k] == v;
            if (!inside) expected.insert(r);
        }
        std::multiset<std::vector<ActionId>> got;
        for (const auto& b : boxes) {
            for (const auto& r : members(b)) got.insert(r);
        }
        CHECK(got.size() == expected.size());
        CHECK(std::set<std::vector<ActionId>>(got.begin(), got.end()) == expected);
    }
}

TEST_CASE("partial assignment intersection") {
    std::mt19937_64 rng(13);
    auto random_partial = [&] {
        PartialAssignment p;
        for (std::size_t k = 0; k < 4; ++k) {
            if (gen::coin(rng, 0.5)) p.fixed[k] = static_cast<ActionId>(rng() % 2);
        }
        return p;
    };
    for (int round = 0; round < 500; ++round) {
        const auto a = random_partial(), b = random_partial(), c = random_partial();
        const auto ab = intersect(a, b), ba = intersect(b, a);
        std::optional<std::size_t> first;
        for (const auto& [k, v] : a.fixed) {
            if (b.fixed.count(k) && b.fixed.at(k) != v) {
                first = k;
                break;
            }
        }
        CHECK(ab.merged.has_value() == !first.has_value());
        CHECK(ab.merged == ba.merged);
        CHECK(ab.disagreement == first);
        CHECK(ba.disagreement == first);
        if (first) {
            CHECK(ab.disagreeing_actions == std::vector<ActionId>{0, 1});
        } else {
            for (const auto& [k, v] : a.fixed) CHECK(ab.merged->fixed.at(k) == v);
            for (const auto& [k, v] : b.fixed) CHECK(ab.merged->fixed.at(k) == v);
            CHECK(ab.merged->fixed.size() <= a.fixed.size() + b.fixed.size());
            const auto left = ab.merged ? intersect(*ab.merged, c) : IntersectResult{};
            const auto bc = intersect(b, c);
            const auto right = bc.merged ? intersect(a, *bc.merged) : IntersectResult{};
            CHECK(left.merged == right.merged);
        }
    }
}

TEST_CASE("complete fills free parameters with their first value") {
    const FamilyNode node{{{1, 2}, {0, 3}, {4}}};
    CHECK(complete(node, PartialAssignment{{{1, 3}}}).assignment == std::vector<ActionId>{1, 3, 4});
    CHECK(only_member(FamilyNode{{{2}, {5}}}).assignment == std::vector<ActionId>{2, 5});
}

TEST_CASE("relevant states stop at the target") {
    const Mdp m = fixtures::two_choice_mdp();
    const Mc beta = impose(m, Controller{{1, 1, 0, 0}});
    CHECK(relevant_states(beta, 0, m.label("two")).members() == std::vector<StateId>{0, 1, 3});
    const Mc alpha = impose(m, Controller{{0, 0, 0, 0}});
    CHECK(relevant_states(alpha, 0, m.label("two")).members() == std::vector<StateId>{0, 3});
}

TEST_CASE("immediate impact by hand") {
    // s0: a -> {s0 1/2, s1 1/4, s3 1/4}, b -> {s2 1/2, s3 1/2}; s1: a -> {s0 1/2, s2 1/2}, b -> s3.
    Mdp m({{Choice{0, "a", {{0, 0.5}, {1, 0.25}, {3, 0.25}}, 0.0}, Choice{1, "b", {{2, 0.5}, {3, 0.5}}, 0.0}},
           {Choice{0, "a", {{0, 0.5}, {2, 0.5}}, 0.0}, Choice{1, "b", {{3, 1.0}}, 0.0}},
           {Choice{0, "", {{2, 1.0}}, 0.0}},
           {Choice{0, "", {{3, 1.0}}, 0.0}}},
          {{"T", StateSet::of(4, std::vector<StateId>{2})}}, false);
    const Mc mc = impose(m, Controller{{0, 0, 0, 0}});
    // val = (1/3, 2/3, 1, 0); exp(s0) = 1 / (1 - 1/2 - 1/4 * 1/2) = 8/3, exp(s1) = 8/3 * 1/4.
    const auto gamma = immediate_impact(m, mc, 0, QueryKind::Reach, m.label("T"));
    CHECK(gamma.at({0, 0}) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(gamma.at({0, 1}) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(gamma.at({1, 0}) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(gamma.at({1, 1}) == 0.0);
    const Conflict c0{0, {0, 1}, {0}}, c1{1, {0, 1}, {1}};
    CHECK(split_score(c0, gamma) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(split_score(c1, gamma) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    // Equal scores: the lower parameter wins regardless of order.
    CHECK(select_split({c1, c0}, {&gamma, &gamma}) == 1);
    CHECK(select_split({c0, c1}, {&gamma, &gamma}) == 0);
}

TEST_CASE("impact formula edge cases") {
    const Mdp chain = fixtures::unit_chain();
    const std::vector<double> zeros(chain.state_count(), 0.0);
    CHECK(impact(chain, 0, 0, 1.0, zeros, QueryKind::Reward) == 1.0);
    CHECK(impact(chain, 0, 0, 1.0, zeros, QueryKind::Reach) == 0.0);
    CHECK(impact(chain, 0, 0, 2.0, {0.0, 0.5, 0.0, 0.0}, QueryKind::Reward) == 3.0);
}

TEST_CASE("immediate impact matches the formula on forward models") {
    std::mt19937_64 rng(14);
    for (int round = 0; round < 300; ++round) {
        const Mdp m = forward_mdp(rng, gen::pick(rng, 2, 7));
        Controller c;
        for (StateId s = 0; s < m.state_count(); ++s) c.choice.push_back(m.actions(s)[rng() % m.menu_size(s)].id);
        const Mc mc = impose(m, c);
        const QueryKind kind = round % 2 ? QueryKind::Reach : QueryKind::Reward;
        const auto gamma = immediate_impact(m, mc, 0, kind, m.label("t"));
        const auto visits = oracle::path_visits(mc.model(), 0);
        const auto val = oracle::values(m, c.choice, kind, oracle::mask(m, "t"));
        for (StateId s = 0; s + 1 < m.state_count(); ++s) {
            for (const Choice& ch : m.actions(s)) {
                double expected = kind == QueryKind::Reward ? ch.reward : 0.0;
                for (const auto& t : ch.distribution) expected += t.probability * val[t.target];
                expected *= visits[s];
                CHECK(gamma.at({s, ch.id}) == doctest::Approx(expected).epsilon(1e-10));
            }
        }
    }
}
