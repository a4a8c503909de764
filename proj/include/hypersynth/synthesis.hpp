#pragma once
// Abstraction-refinement synthesis over a family of n-controllers.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "hypersynth/analysis.hpp"
#include "hypersynth/family.hpp"
#include "hypersynth/formula.hpp"
#include "hypersynth/spec.hpp"

namespace hypersynth {

enum class Mode { Feasibility, Complete, Optimal };
enum class Verdict { Feasible, Unfeasible, Unknown };

/// Interval cases: 1 all SAT, 2 all UNSAT, 3-5 ambiguous.
enum class Tag { AllSat, AllUnsat, Ambiguous3, Ambiguous4, Ambiguous5 };

std::string to_string(Mode m);
std::string to_string(Verdict v);
std::string to_string(Tag t);

/// Model, specification and everything derived from them.
struct Problem {
    Mdp model;  // memory-unfolded when memory_bits > 0
    HyperSpec spec;
    ParameterSpace space;
    InstantiatedFormula formula;
    unsigned memory_bits = 0;

    /// Validates `spec` against `m`, unfolds memory and builds the parameter space.
    static Problem make(const Mdp& m, const HyperSpec& spec, unsigned memory_bits = 0);
};

/// Per-node cache of restricted MDPs and extremal analyses.
class NodeAnalysis {
public:
    NodeAnalysis(const Problem& problem, const FamilyNode& node, const SolverOptions& opts);

    const Problem& problem() const { return problem_; }
    const FamilyNode& node() const { return node_; }
    const Mdp& restricted(std::size_t slot);
    const ExtremalResult& extremal(std::size_t slot, QueryKind kind, const std::string& target, Direction dir);
    /// States that decide the value of `q` under controller `c`.
    StateSet relevant(const GroundQuery& q, const Controller& c);

private:
    const Problem& problem_;
    FamilyNode node_;
    SolverOptions opts_;
    std::map<std::size_t, Mdp> restricted_;
    std::map<std::tuple<std::size_t, QueryKind, std::string, Direction>, ExtremalResult> extremal_;
};

struct Candidate {
    PartialAssignment assignment;
    bool certain = false;  // every member of the box satisfies the atom, guard band included
};

/// A conflict together with the extremal controller that produced it.
struct ConflictSource {
    Conflict conflict;
    GroundQuery query;
    Controller controller;
};

struct IntervalVerdict {
    Tag tag = Tag::Ambiguous3;
    double lb1 = 0.0, ub1 = 0.0, lb2 = 0.0, ub2 = 0.0;  // right side without slack
    std::vector<Candidate> candidates;
    std::vector<ConflictSource> conflicts;        // controllers the tag relies on
    std::vector<ConflictSource> other_conflicts;  // remaining extremal controllers
    std::optional<Conflict> incompatible;         // sigma1_min vs sigma2_max disagreement
};

/// Bounds both sides over the node and classifies the atom. `guard` widens every decisive
/// comparison towards "ambiguous".
IntervalVerdict atom_bounds(NodeAnalysis& na, const CanonicalAtom& atom, double guard);

struct ComposeResult {
    std::vector<Candidate> alternatives;
    std::optional<Conflict> disagreement;  // first failed intersection
};

/// Combines per-atom candidates along the formula; decided atoms contribute their truth.
ComposeResult compose(const GroundFormula& f, const std::vector<IntervalVerdict>& verdicts, std::size_t cap);

struct SynthesisOptions {
    Mode mode = Mode::Feasibility;
    bool hybrid = false;
    SolverOptions solver;
    std::size_t max_iterations = 0;  // 0: unlimited
    double time_limit = 0.0;         // seconds, 0: unlimited
    std::size_t compose_cap = 64;
    std::size_t distance_a = 0;      // controllers compared by the distance objective
    std::size_t distance_b = 1;
    double enumeration_cap = 1e6;

    double guard() const { return 10.0 * solver.tolerance; }
};

struct SynthesisStats {
    std::size_t iterations = 0;
    std::size_t decided_families = 0;
    FamilySize family_size = 0;
    FamilySize decided_members = 0;
    double average_decided_size = 0.0;
    double explored_fraction = 0.0;
    double wall_time = 0.0;
    std::size_t ce_prunes = 0;
};

struct SynthesisOutcome {
    Verdict verdict = Verdict::Unknown;
    bool limit_exceeded = false;
    std::optional<Realisation> witness;
    std::vector<Controller> controllers;       // induced by the witness
    std::vector<FamilyNode> satisfying;        // complete mode: disjoint boxes
    FamilySize satisfying_count = 0;
    std::optional<std::size_t> best_value;     // optimal mode
    std::vector<IntervalVerdict> root_bounds;  // per ground atom
    SynthesisStats stats;
};

/// Independent end-to-end check of a realisation: structure, then every atom on the MCs.
CheckResult check_realisation(const Problem& p, const Realisation& r);
bool verify(const Problem& p, const Realisation& r);

/// Distinct parameter pairs (k_a(s), k_b(s)) over states with a real choice.
std::vector<std::pair<std::size_t, std::size_t>> distance_pairs(const Problem& p, std::size_t a, std::size_t b);
std::size_t distance(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const Realisation& r);
/// Number of pairs whose domains allow different values.
std::size_t distance_bound(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const FamilyNode& node);

SynthesisOutcome ar_loop(const Problem& p, const SynthesisOptions& opts);

/// Checks every realisation. Throws CapExceededError above opts.enumeration_cap members.
SynthesisOutcome enumerate_oracle(const Problem& p, const SynthesisOptions& opts);

}  // namespace hypersynth
