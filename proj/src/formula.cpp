#include "hypersynth/formula.hpp"

#include <charconv>
#include <map>

#include "hypersynth/errors.hpp"

namespace hypersynth {

namespace {

using Binding = std::map<std::string, StateId>;

class Instantiator {
public:
    explicit Instantiator(const HyperSpec& spec) : spec_(spec) {}

    InstantiatedFormula run() {
        InstantiatedFormula out;
        out.slots = spec_.controllers.size();
        Binding binding;
        out.root = expand(0, binding);
        out.atoms = std::move(atoms_);
        return out;
    }

private:
    GroundFormula expand(std::size_t depth, Binding& binding) {
        if (depth == spec_.quantifiers.size()) return normalise(spec_.prob, binding, true);
        const StateQuantifier& q = spec_.quantifiers[depth];
        if (q.domain.empty()) throw SpecError("empty domain for '" + q.variable + "'");
        const bool forall = q.quantifier == Quantifier::Forall;
        std::vector<GroundFormula> parts;
        for (StateId s : q.domain) {
            binding[q.variable] = s;
            parts.push_back(expand(depth + 1, binding));
        }
        binding.erase(q.variable);
        return combine(forall ? GroundFormula::Kind::And : GroundFormula::Kind::Or, std::move(parts));
    }

    GroundQuery query(QueryKind kind, const SideRef& side, const Binding& binding) const {
        const StateQuantifier* q = spec_.quantifier_of(side.variable);
        if (q == nullptr) throw SpecError("undeclared state variable '" + side.variable + "'");
        auto slot = spec_.controller_index(q->controller);
        if (!slot) throw SpecError("undeclared controller '" + q->controller + "'");
        return GroundQuery{kind, binding.at(side.variable), side.target, *slot};
    }

    GroundFormula leaf(CanonicalAtom atom) {
        auto [it, inserted] = index_.try_emplace(atom, atoms_.size());
        if (inserted) atoms_.push_back(atom);
        return GroundFormula::leaf(it->second);
    }

    static CanonicalAtom negate(const CanonicalAtom& a) { return CanonicalAtom{a.right, a.left, !a.strict, -a.slack}; }

    GroundFormula atom(const ProbAtom& a, const Binding& binding, bool positive) {
        Operand left{query(a.kind, a.left, binding), 0.0};
        Operand right;
        if (const auto* side = std::get_if<SideRef>(&a.right)) {
            right.query = query(a.kind, *side, binding);
        } else {
            right.constant = std::get<double>(a.right);
        }
        auto emit = [&](CanonicalAtom c) { return leaf(positive ? c : negate(c)); };
        switch (a.relation) {
            case Relation::LessEq: return emit({left, right, false, 0.0});
            case Relation::Less: return emit({left, right, true, 0.0});
            case Relation::GreaterEq: return emit({right, left, false, 0.0});
            case Relation::Greater: return emit({right, left, true, 0.0});
            case Relation::Equal: {
                std::vector<GroundFormula> parts;
                parts.push_back(emit({left, right, false, a.equality_epsilon}));
                parts.push_back(emit({right, left, false, a.equality_epsilon}));
                return combine(positive ? GroundFormula::Kind::And : GroundFormula::Kind::Or, std::move(parts));
            }
        }
        throw SpecError("unknown relation");
    }

    GroundFormula normalise(const BoolExpr& e, const Binding& binding, bool positive) {
        switch (e.kind) {
            case BoolExpr::Kind::True: return GroundFormula::constant(positive);
            case BoolExpr::Kind::False: return GroundFormula::constant(!positive);
            case BoolExpr::Kind::Atom: return atom(spec_.atoms.at(e.atom), binding, positive);
            case BoolExpr::Kind::Not: return normalise(e.children.at(0), binding, !positive);
            case BoolExpr::Kind::And:
            case BoolExpr::Kind::Or: {
                const bool conj = (e.kind == BoolExpr::Kind::And) == positive;
                std::vector<GroundFormula> parts;
                for (const auto& child : e.children) parts.push_back(normalise(child, binding, positive));
                return combine(conj ? GroundFormula::Kind::And : GroundFormula::Kind::Or, std::move(parts));
            }
        }
        throw SpecError("malformed formula");
    }

    const HyperSpec& spec_;
    std::vector<CanonicalAtom> atoms_;
    std::map<CanonicalAtom, std::size_t> index_;

public:
    // Flattens nested connectives of the same kind and folds constants.
    static GroundFormula combine(GroundFormula::Kind kind, std::vector<GroundFormula> parts) {
        const bool conj = kind == GroundFormula::Kind::And;
        const auto absorbing = conj ? GroundFormula::Kind::False : GroundFormula::Kind::True;
        const auto neutral = conj ? GroundFormula::Kind::True : GroundFormula::Kind::False;
        GroundFormula out{kind, 0, {}};
        for (auto& p : parts) {
            if (p.kind == absorbing) return GroundFormula::constant(!conj);
            if (p.kind == neutral) continue;
            if (p.kind == kind) {
                for (auto& c : p.children) out.children.push_back(std::move(c));
            } else {
                out.children.push_back(std::move(p));
            }
        }
        if (out.children.empty()) return GroundFormula::constant(conj);
        if (out.children.size() == 1) return std::move(out.children.front());
        return out;
    }
};

std::string number(double v) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return ec == std::errc{} ? std::string(buffer, end) : std::string("?");
}

std::string operand(const Operand& op) { return op.is_query() ? to_string(*op.query) : number(op.constant); }

}  // namespace

InstantiatedFormula instantiate(const HyperSpec& spec) { return Instantiator(spec).run(); }

bool evaluate(const GroundFormula& f, const std::vector<bool>& atom_truth) {
    switch (f.kind) {
        case GroundFormula::Kind::True: return true;
        case GroundFormula::Kind::False: return false;
        case GroundFormula::Kind::Atom: return atom_truth.at(f.atom);
        case GroundFormula::Kind::And:
            for (const auto& c : f.children) {
                if (!evaluate(c, atom_truth)) return false;
            }
            return true;
        case GroundFormula::Kind::Or:
            for (const auto& c : f.children) {
                if (evaluate(c, atom_truth)) return true;
            }
            return false;
    }
    return false;
}

std::string to_string(const GroundQuery& q) {
    return std::string(q.kind == QueryKind::Reach ? "P" : "R") + "[" + std::to_string(q.slot) + "](" +
           std::to_string(q.state) + ", F " + q.target + ")";
}

std::string to_string(const CanonicalAtom& a) {
    std::string out = operand(a.left) + (a.strict ? " < " : " <= ") + operand(a.right);
    if (a.slack > 0) out += " + " + number(a.slack);
    if (a.slack < 0) out += " - " + number(-a.slack);
    return out;
}

}  // namespace hypersynth
