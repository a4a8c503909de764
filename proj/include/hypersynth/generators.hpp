#pragma once
// Benchmark generators. Every generator is a pure function of (id, parameters, seed).
//
//   knuth-yao-pc          stages=N            die MC + Knuth-Yao implementation MDP
//   maze-sd               variant=simple|larger-1|larger-2|larger-3|random [slip=X] [size=N]
//   maze-noninterference  variant=larger-4|larger-5 [threshold=X] [eps=X] [error=X]
//   maze-opacity          variant=larger-4|larger-5 [threshold=X] [eps=X] [error=X]
//   timing-attack         bits=N [h1=A] [h2=B]
//   thread-scheduling     h1=A h2=B

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypersynth/model.hpp"
#include "hypersynth/spec.hpp"

namespace hypersynth {

struct Benchmark {
    Mdp model;
    HyperSpec spec;
    std::string model_text;
    std::string spec_text;
    std::optional<std::string> controller_text;  // a known satisfying controller, when one exists
};

using GeneratorParams = std::map<std::string, std::string>;

/// Throws std::invalid_argument for unknown ids or invalid parameters.
Benchmark generate(const std::string& id, const GeneratorParams& params, std::uint64_t seed = 0);

std::vector<std::string> generator_ids();

/// Number of implementation-side actions of a nondeterministic Knuth-Yao stage.
inline constexpr std::size_t kKnuthYaoPairs = 78;

}  // namespace hypersynth
