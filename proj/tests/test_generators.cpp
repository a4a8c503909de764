#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hypersynth/analysis.hpp"
#include "hypersynth/family.hpp"
#include "hypersynth/generators.hpp"
#include "hypersynth/synthesis.hpp"
#include "hypersynth/textio.hpp"

using namespace hypersynth;

namespace {

FamilySize family(const Benchmark& b) {
    return build_parameter_space(b.model, b.spec.controllers, b.spec.structure).size();
}

}  // namespace

TEST_CASE("every generator emits parseable, consistent text") {
    for (const auto& id : generator_ids()) {
        CAPTURE(id);
        GeneratorParams params;
        if (id == "thread-scheduling") params = {{"h1", "10"}, {"h2", "20"}};
        const Benchmark b = generate(id, params);
        CHECK(parse_model(b.model_text) == b.model);
        CHECK(parse_spec(b.spec_text) == b.spec);
        CHECK_NOTHROW(validate_against(b.spec, b.model));
        CHECK(write_model(b.model) == b.model_text);
    }
}

TEST_CASE("generation is deterministic") {
    const Benchmark a = generate("maze-sd", {{"variant", "random"}, {"size", "6"}}, 17);
    const Benchmark b = generate("maze-sd", {{"variant", "random"}, {"size", "6"}}, 17);
    const Benchmark c = generate("maze-sd", {{"variant", "random"}, {"size", "6"}}, 18);
    CHECK(a.model_text == b.model_text);
    CHECK(a.spec_text == b.spec_text);
    CHECK(a.model_text != c.model_text);
}

TEST_CASE("family sizes") {
    CHECK(family(generate("knuth-yao-pc", {{"stages", "1"}})) == 156);
    CHECK(family(generate("knuth-yao-pc", {{"stages", "2"}})) == 78 * 78);
    const Benchmark simple = generate("maze-sd", {{"variant", "simple"}});
    CHECK(simple.model.state_count() == 10);
    CHECK(family(simple) == 16384);
    const Benchmark ni = generate("maze-noninterference", {{"variant", "larger-4"}});
    CHECK(ni.model.state_count() == 55);
    CHECK(family(ni) == FamilySize(107495424));
    CHECK(generate("maze-opacity", {{"variant", "larger-5"}}).model.state_count() == 216);
}

TEST_CASE("die implementation controller gives one sixth per face") {
    const Benchmark b = generate("knuth-yao-pc", {{"stages", "1"}});
    REQUIRE(b.controller_text.has_value());
    const PartialController pc = parse_controller(*b.controller_text, b.model.state_count());
    Controller c;
    for (StateId s = 0; s < b.model.state_count(); ++s) {
        c.choice.push_back(pc.choice[s] ? *pc.choice[s] : b.model.actions(s).front().id);
    }
    const Mc mc = impose(b.model, c);
    for (int face = 1; face <= 6; ++face) {
        CHECK(mc_reach(mc, b.model.label("die" + std::to_string(face)))[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    }
}

TEST_CASE("timing attack: padding hides the secret") {
    const Benchmark b = generate("timing-attack", {{"bits", "2"}});
    const Problem p = Problem::make(b.model, b.spec);
    const SynthesisOutcome out = ar_loop(p, SynthesisOptions{});
    CHECK(out.verdict == Verdict::Feasible);
}

TEST_CASE("parameter errors") {
    CHECK_THROWS_AS(generate("no-such-benchmark", {}), std::invalid_argument);
    CHECK_THROWS_AS(generate("maze-sd", {{"variant", "nope"}}), std::invalid_argument);
    CHECK_THROWS_AS(generate("maze-sd", {{"colour", "red"}}), std::invalid_argument);
    CHECK_THROWS_AS(generate("knuth-yao-pc", {{"stages", "x"}}), std::invalid_argument);
    CHECK_THROWS_AS(generate("knuth-yao-pc", {{"stages", "0"}}), std::invalid_argument);
    CHECK_THROWS_AS(generate("maze-sd", {{"slip", "0.5"}}), std::invalid_argument);
}
