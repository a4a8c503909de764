#pragma once
// Hyperspecification AST: controller quantifiers, structural constraints, state quantifiers
// with explicit initial-state domains and a Boolean combination of reach/reward atoms.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hypersynth/model.hpp"

namespace hypersynth {

enum class Quantifier { Forall, Exists };
enum class Relation { Less, LessEq, Equal, Greater, GreaterEq };
enum class QueryKind { Reach, Reward };

inline constexpr double kDefaultEqualityEpsilon = 1e-6;

/// `P(x, F target)` or `R(x, F target)`: a quantity evaluated from the state bound to `variable`.
struct SideRef {
    std::string variable;
    std::string target;

    bool operator==(const SideRef&) const = default;
};

struct ProbAtom {
    QueryKind kind = QueryKind::Reach;
    SideRef left;
    Relation relation = Relation::LessEq;
    std::variant<double, SideRef> right = 0.0;
    double equality_epsilon = kDefaultEqualityEpsilon;
    bool explicit_epsilon = false;

    bool operator==(const ProbAtom&) const = default;
};

/// Boolean structure over atom indices.
struct BoolExpr {
    enum class Kind { True, False, Atom, Not, And, Or };

    Kind kind = Kind::True;
    std::size_t atom = 0;
    std::vector<BoolExpr> children;

    static BoolExpr constant(bool value) { return BoolExpr{value ? Kind::True : Kind::False, 0, {}}; }
    static BoolExpr leaf(std::size_t atom_index) { return BoolExpr{Kind::Atom, atom_index, {}}; }

    bool operator==(const BoolExpr&) const = default;
};

/// same(s, {sigma_i, ...}): the listed controllers agree in state s.
struct SameConstraint {
    StateId state = 0;
    std::vector<std::string> controllers;

    bool operator==(const SameConstraint&) const = default;
};

/// obs({s, ...}, sigma): the controller takes one action in all listed states.
struct ObsConstraint {
    std::vector<StateId> states;
    std::string controller;

    bool operator==(const ObsConstraint&) const = default;
};

using StructuralConstraint = std::variant<SameConstraint, ObsConstraint>;

struct StateQuantifier {
    Quantifier quantifier = Quantifier::Forall;
    std::string variable;
    std::vector<StateId> domain;
    std::string controller;

    bool operator==(const StateQuantifier&) const = default;
};

struct HyperSpec {
    std::vector<std::string> controllers;
    std::vector<StructuralConstraint> structure;
    std::vector<StateQuantifier> quantifiers;
    std::vector<ProbAtom> atoms;
    BoolExpr prob;

    std::optional<std::size_t> controller_index(const std::string& name) const;
    const StateQuantifier* quantifier_of(const std::string& variable) const;

    bool operator==(const HyperSpec&) const = default;
};

/// Checks that every state, label and reward reference fits `m`. Throws SpecError.
void validate_against(const HyperSpec& spec, const Mdp& m);

/// Lifts a specification to a memory-unfolded model: quantifier domains move to memory
/// value 0, obs/same constraints are replicated per memory value.
HyperSpec lift_to_memory(const HyperSpec& spec, unsigned bits);

std::string to_string(Relation r);

}  // namespace hypersynth
