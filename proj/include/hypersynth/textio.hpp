#pragma once
// Line-oriented model format, the specification language and controller files.
//
// Model format (`#` starts a comment):
//   mdp
//   states N
//   action s idx [name]      optional display name for an action
//   trans s a s' p           p is a decimal or an exact fraction num/den
//   label NAME s...
//   rew s a r
//
// Specification grammar:
//   spec   := "exists" ids ":" [struc] quants ":" prob
//   struc  := constr {"&" constr} ";"
//   constr := "same(" INT "," "{" ids "}" ")" | "obs(" "{" ints "}" "," id ")"
//   quants := quant {"," quant}
//   quant  := ("forall"|"exists") id "in" "{" ints "}" "[" id "]"
//   prob   := conj {"|" conj} ;  conj := unary {"&" unary}
//   unary  := "!" unary | "(" prob ")" | "true" | "false" | atom
//   atom   := side REL (NUMBER | side) ["~" NUMBER]
//   side   := ("P"|"R") "(" id "," "F" LABEL ")"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypersynth/model.hpp"
#include "hypersynth/spec.hpp"

namespace hypersynth {

/// Upper bound on `states N` accepted by the parser.
inline constexpr std::size_t kMaxParsedStates = 1'000'000;

Mdp parse_model(std::string_view text);
std::string write_model(const Mdp& m);

HyperSpec parse_spec(std::string_view text);
std::string write_spec(const HyperSpec& spec);
std::string write_atom(const ProbAtom& atom);

/// Controller file: one `state action` pair per line. States not listed stay unset.
struct PartialController {
    std::vector<std::optional<ActionId>> choice;
};

PartialController parse_controller(std::string_view text, std::size_t state_count);
std::string write_controller(const Controller& c);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace hypersynth
