#pragma once
// Numerical analysis of MDPs and Markov chains.
//
// MDP extremal values use Gauss-Seidel value iteration on top of graph-based 0/1
// precomputation. Markov chain queries are solved exactly with a sparse LU factorisation.

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "hypersynth/formula.hpp"
#include "hypersynth/model.hpp"

namespace hypersynth {

enum class Direction { Min, Max };

inline constexpr double kDefaultTolerance = 1e-8;
inline constexpr std::size_t kDefaultMaxSweeps = 1'000'000;
/// Stand-in for the (infinite) expected visits of recurrent states.
inline constexpr double kVisitCap = 1e6;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct SolverOptions {
    double tolerance = kDefaultTolerance;
    std::size_t max_sweeps = kDefaultMaxSweeps;
};

struct ValueVector {
    std::vector<double> values;
    QueryKind kind = QueryKind::Reach;
    Direction direction = Direction::Max;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

struct ExtremalResult {
    ValueVector values;
    Controller witness;
};

struct QualitativeSets {
    StateSet prob0;
    StateSet prob1;
};

/// States with extremal reach probability exactly 0 and exactly 1, by graph analysis only.
QualitativeSets qualitative_states(const Mdp& m, const StateSet& target, Direction dir);

ExtremalResult extremal_reach(const Mdp& m, const TargetSet& t, Direction dir, const SolverOptions& opts = {});

/// Expected reward accumulated before reaching `t`. Infinite where target reachability
/// with probability one fails (for max: under some controller, for min: under every one).
/// Throws MissingRewardsError when `m` has no rewards.
ExtremalResult extremal_reward(const Mdp& m, const TargetSet& t, Direction dir, const SolverOptions& opts = {});

/// Exact reach probabilities in a Markov chain.
std::vector<double> mc_reach(const Mc& mc, const StateSet& target);

/// Exact expected reward before reaching the target; +inf where reach probability < 1.
std::vector<double> mc_reward(const Mc& mc, const StateSet& target);

/// Expected number of visits to each state starting from `from`. States of bottom SCCs
/// reachable from `from` get kVisitCap.
std::vector<double> expected_visits(const Mc& mc, StateId from);

/// Value of a ground query on an MC.
std::vector<double> mc_values(const Mc& mc, QueryKind kind, const StateSet& target);

struct AtomValues {
    double left = 0.0;
    double right = 0.0;
    bool holds = false;
};

struct CheckResult {
    bool holds = false;
    std::vector<AtomValues> atoms;
};

/// Evaluates a ground formula on one Markov chain per controller slot.
CheckResult check_mc(std::span<const Mc> mcs, const InstantiatedFormula& f);

}  // namespace hypersynth
