#pragma once
// Ground formulas: quantifiers expanded, negations pushed to the atoms, every atom in the
// canonical shape `L <= R + slack` or `L < R + slack`.

#include <optional>
#include <string>
#include <vector>

#include "hypersynth/model.hpp"
#include "hypersynth/spec.hpp"

namespace hypersynth {

/// A quantity evaluated on the MC of controller `slot` from `state`.
struct GroundQuery {
    QueryKind kind = QueryKind::Reach;
    StateId state = 0;
    std::string target;
    std::size_t slot = 0;

    auto operator<=>(const GroundQuery&) const = default;
};

/// One side of a canonical atom: a query or a constant.
struct Operand {
    std::optional<GroundQuery> query;
    double constant = 0.0;

    bool is_query() const { return query.has_value(); }
    auto operator<=>(const Operand&) const = default;
};

struct CanonicalAtom {
    Operand left;
    Operand right;
    bool strict = false;  // `<` instead of `<=`
    double slack = 0.0;

    auto operator<=>(const CanonicalAtom&) const = default;
};

/// Truth of `l <= r + slack` (or `<`) with IEEE semantics for infinite rewards.
inline bool holds(const CanonicalAtom& a, double l, double r) {
    return a.strict ? l < r + a.slack : l <= r + a.slack;
}

/// Negation-free formula over canonical atoms.
struct GroundFormula {
    enum class Kind { True, False, Atom, And, Or };

    Kind kind = Kind::True;
    std::size_t atom = 0;
    std::vector<GroundFormula> children;

    static GroundFormula constant(bool value) { return {value ? Kind::True : Kind::False, 0, {}}; }
    static GroundFormula leaf(std::size_t a) { return {Kind::Atom, a, {}}; }

    bool operator==(const GroundFormula&) const = default;
};

struct InstantiatedFormula {
    std::vector<CanonicalAtom> atoms;  // deduplicated
    GroundFormula root;
    std::size_t slots = 1;
};

/// Expands the state quantifiers and normalises the Boolean structure.
InstantiatedFormula instantiate(const HyperSpec& spec);

/// Evaluates the formula under a truth assignment of its atoms.
bool evaluate(const GroundFormula& f, const std::vector<bool>& atom_truth);

std::string to_string(const GroundQuery& q);
std::string to_string(const CanonicalAtom& a);

}  // namespace hypersynth
