#include "hypersynth/textio.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "hypersynth/errors.hpp"

namespace hypersynth {

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

std::string format_double(double value) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) throw std::runtime_error("cannot format number");
    return std::string(buffer, end);
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

bool is_identifier(std::string_view s) {
    if (s.empty() || !is_ident_start(s.front())) return false;
    for (char c : s) {
        if (!is_ident_char(c)) return false;
    }
    return true;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::optional<double> parse_decimal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    if (s.empty() || s.front() == '-' || s.front() == '+') return std::nullopt;
    // from_chars also accepts "inf"/"nan"; only plain decimals are allowed here.
    for (char c : s) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '-' || c == '+')) {
            return std::nullopt;
        }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

// Decimal or exact fraction num/den with both parts below 2^53, so the quotient is
// rounded once by the division.
std::optional<double> parse_probability(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return parse_decimal(s);
    auto num = parse_uint(s.substr(0, slash));
    auto den = parse_uint(s.substr(slash + 1));
    constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 53;
    if (!num || !den || *den == 0 || *num > kExactLimit || *den > kExactLimit) return std::nullopt;
    return static_cast<double>(*num) / static_cast<double>(*den);
}

struct Word {
    std::string_view text;
    std::size_t column;  // 1-based
};

std::vector<Word> split_words(std::string_view line) {
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) != 0) ++i;
        if (i >= line.size() || line[i] == '#') break;
        std::size_t start = i;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) == 0 && line[i] != '#') ++i;
        words.push_back({line.substr(start, i - start), start + 1});
        if (i < line.size() && line[i] == '#') break;
    }
    return words;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 1;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(line, line_no);
        if (end == text.size()) break;
        start = end + 1;
        ++line_no;
    }
}

// ---------------------------------------------------------------------------
// Model format

struct Location {
    std::size_t line = 0;
    std::size_t column = 0;
};

struct PendingAction {
    std::string name;
    std::map<StateId, double> transitions;
    std::optional<double> reward;
    Location first_seen;
};

}  // namespace

Mdp parse_model(std::string_view text) {
    bool seen_header = false;
    std::optional<std::size_t> state_count;
    std::vector<std::map<ActionId, PendingAction>> actions;
    std::map<std::string, StateSet> labels;
    std::vector<std::tuple<StateId, ActionId, double, Location>> rewards;

    auto need_states = [&](const Word& w, std::size_t line_no) {
        if (!state_count) throw ParseError("'states N' must precede '" + std::string(w.text) + "'", line_no, w.column);
    };
    auto state_arg = [&](const Word& w, std::size_t line_no) -> StateId {
        auto v = parse_uint(w.text);
        if (!v) throw ParseError("expected a state index, got '" + std::string(w.text) + "'", line_no, w.column);
        if (*v >= *state_count) throw ParseError("unknown state " + std::string(w.text), line_no, w.column);
        return static_cast<StateId>(*v);
    };
    auto action_arg = [&](const Word& w, std::size_t line_no) -> ActionId {
        auto v = parse_uint(w.text);
        if (!v || *v > 0x7fffffffULL) {
            throw ParseError("expected an action index, got '" + std::string(w.text) + "'", line_no, w.column);
        }
        return static_cast<ActionId>(*v);
    };

    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        auto words = split_words(line);
        if (words.empty()) return;
        const std::string_view keyword = words[0].text;
        auto arity = [&](std::size_t min_args, std::size_t max_args) {
            const std::size_t args = words.size() - 1;
            if (args < min_args || args > max_args) {
                throw ParseError("wrong number of arguments for '" + std::string(keyword) + "'", line_no,
                                 words[0].column);
            }
        };
        if (!seen_header) {
            if (keyword != "mdp" || words.size() != 1) throw ParseError("expected 'mdp' header", line_no, words[0].column);
            seen_header = true;
            return;
        }
        if (keyword == "mdp") throw ParseError("duplicate 'mdp' header", line_no, words[0].column);
        if (keyword == "states") {
            arity(1, 1);
            if (state_count) throw ParseError("duplicate 'states' line", line_no, words[0].column);
            auto n = parse_uint(words[1].text);
            if (!n || *n == 0) throw ParseError("expected a positive state count", line_no, words[1].column);
            if (*n > kMaxParsedStates) throw ParseError("state count exceeds parser limit", line_no, words[1].column);
            state_count = static_cast<std::size_t>(*n);
            actions.resize(*state_count);
            return;
        }
        if (keyword == "action") {
            need_states(words[0], line_no);
            arity(2, 3);
            StateId s = state_arg(words[1], line_no);
            ActionId a = action_arg(words[2], line_no);
            auto& pending = actions[s][a];
            if (pending.first_seen.line == 0) pending.first_seen = {line_no, words[0].column};
            if (words.size() == 4) {
                if (!pending.name.empty()) throw ParseError("action named twice", line_no, words[3].column);
                pending.name = std::string(words[3].text);
            }
            return;
        }
        if (keyword == "trans") {
            need_states(words[0], line_no);
            arity(4, 4);
            StateId s = state_arg(words[1], line_no);
            ActionId a = action_arg(words[2], line_no);
            StateId t = state_arg(words[3], line_no);
            auto p = parse_probability(words[4].text);
            if (!p || *p < 0.0 || *p > 1.0) {
                throw ParseError("expected a probability in [0,1], got '" + std::string(words[4].text) + "'", line_no,
                                 words[4].column);
            }
            auto& pending = actions[s][a];
            if (pending.first_seen.line == 0) pending.first_seen = {line_no, words[0].column};
            if (!pending.transitions.emplace(t, *p).second) {
                throw ParseError("duplicate transition", line_no, words[0].column);
            }
            return;
        }
        if (keyword == "label") {
            need_states(words[0], line_no);
            if (words.size() < 2) throw ParseError("label needs a name", line_no, words[0].column);
            if (!is_identifier(words[1].text)) throw ParseError("invalid label name", line_no, words[1].column);
            auto [it, inserted] = labels.try_emplace(std::string(words[1].text), StateSet(*state_count));
            (void)inserted;
            for (std::size_t i = 2; i < words.size(); ++i) it->second.insert(state_arg(words[i], line_no));
            return;
        }
        if (keyword == "rew") {
            need_states(words[0], line_no);
            arity(3, 3);
            StateId s = state_arg(words[1], line_no);
            ActionId a = action_arg(words[2], line_no);
            auto r = parse_decimal(words[3].text);
            if (!r || *r < 0.0) throw ParseError("expected a nonnegative reward", line_no, words[3].column);
            rewards.emplace_back(s, a, *r, Location{line_no, words[0].column});
            return;
        }
        throw ParseError("unknown directive '" + std::string(keyword) + "'", line_no, words[0].column);
    });

    if (!seen_header) throw ParseError("empty model: expected 'mdp' header", 1, 1);
    if (!state_count) throw ParseError("missing 'states N' line", 1, 1);

    for (auto& [s, a, r, loc] : rewards) {
        auto it = actions[s].find(a);
        if (it == actions[s].end()) throw ParseError("reward for undeclared action", loc.line, loc.column);
        if (it->second.reward) throw ParseError("duplicate reward", loc.line, loc.column);
        it->second.reward = r;
    }

    std::vector<std::vector<Choice>> choices(*state_count);
    for (std::size_t s = 0; s < *state_count; ++s) {
        if (actions[s].empty()) throw ParseError("state " + std::to_string(s) + " has no enabled action", 1, 1);
        for (auto& [a, pending] : actions[s]) {
            double sum = 0.0;
            for (const auto& [t, p] : pending.transitions) sum += p;
            if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
                throw ParseError("distribution of state " + std::to_string(s) + " action " + std::to_string(a) +
                                     " sums to " + format_double(sum),
                                 pending.first_seen.line, pending.first_seen.column);
            }
            Choice choice;
            choice.id = a;
            choice.name = pending.name;
            choice.reward = pending.reward.value_or(0.0);
            for (const auto& [t, p] : pending.transitions) choice.distribution.push_back({t, p});
            choices[s].push_back(std::move(choice));
        }
    }
    try {
        return Mdp(std::move(choices), std::move(labels), !rewards.empty());
    } catch (const ModelError& e) {
        throw ParseError(e.what(), 1, 1);
    }
}

std::string write_model(const Mdp& m) {
    std::ostringstream out;
    out << "mdp\nstates " << m.state_count() << '\n';
    for (StateId s = 0; s < m.state_count(); ++s) {
        for (const Choice& c : m.actions(s)) {
            if (!c.name.empty()) out << "action " << s << ' ' << c.id << ' ' << c.name << '\n';
        }
    }
    for (StateId s = 0; s < m.state_count(); ++s) {
        for (const Choice& c : m.actions(s)) {
            for (const auto& t : c.distribution) {
                out << "trans " << s << ' ' << c.id << ' ' << t.target << ' ' << format_double(t.probability) << '\n';
            }
        }
    }
    for (const auto& [name, set] : m.labels()) {
        out << "label " << name;
        for (StateId s : set.members()) out << ' ' << s;
        out << '\n';
    }
    if (m.has_rewards()) {
        for (StateId s = 0; s < m.state_count(); ++s) {
            for (const Choice& c : m.actions(s)) {
                out << "rew " << s << ' ' << c.id << ' ' << format_double(c.reward) << '\n';
            }
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Specification language

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
            ++i;
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = column;
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && is_ident_char(text[j])) ++j;
            tok.kind = Tok::Ident;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') {
            std::size_t j = i;
            while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) != 0 || text[j] == '.')) ++j;
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k])) != 0) {
                    j = k;
                    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])) != 0) ++j;
                }
            }
            tok.kind = Tok::Number;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else {
            static constexpr std::string_view kTwoChar[] = {"<=", ">="};
            tok.kind = Tok::Punct;
            bool matched = false;
            for (auto op : kTwoChar) {
                if (text.substr(i, 2) == op) {
                    tok.text = std::string(op);
                    advance(2);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                static constexpr std::string_view kSingle = ",:;&|!(){}[]<>=~";
                if (kSingle.find(c) == std::string_view::npos) {
                    throw ParseError(std::string("unexpected character '") +
                                         (std::isprint(static_cast<unsigned char>(c)) != 0 ? std::string(1, c)
                                                                                           : std::string("\\x?")) +
                                         "'",
                                     line, column);
                }
                tok.text = std::string(1, c);
                advance(1);
            }
        }
        tokens.push_back(std::move(tok));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.column = column;
    tokens.push_back(end);
    return tokens;
}

class SpecParser {
public:
    explicit SpecParser(std::string_view text) : tokens_(tokenize(text)) {}

    HyperSpec parse() {
        HyperSpec spec;
        expect_ident("exists");
        spec.controllers.push_back(identifier("controller name"));
        while (accept(",")) spec.controllers.push_back(identifier("controller name"));
        expect(":");
        if (peek_ident("same") || peek_ident("obs")) {
            spec.structure.push_back(constraint());
            while (accept("&")) spec.structure.push_back(constraint());
            expect(";");
        }
        spec.quantifiers.push_back(quantifier());
        while (accept(",")) spec.quantifiers.push_back(quantifier());
        expect(":");
        atoms_ = &spec.atoms;
        spec.prob = disjunction();
        if (current().kind != Tok::End) fail("unexpected '" + current().text + "' after formula");
        validate(spec);
        return spec;
    }

private:
    const Token& current() const { return tokens_[pos_]; }

    [[noreturn]] void fail(const std::string& message) const { fail_at(message, current()); }
    [[noreturn]] static void fail_at(const std::string& message, const Token& at) {
        throw ParseError(message, at.line, at.column);
    }

    bool accept(std::string_view punct) {
        if (current().kind == Tok::Punct && current().text == punct) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(std::string_view punct) {
        if (!accept(punct)) fail("expected '" + std::string(punct) + "'");
    }
    bool peek_ident(std::string_view word) const { return current().kind == Tok::Ident && current().text == word; }
    void expect_ident(std::string_view word) {
        if (!peek_ident(word)) fail("expected '" + std::string(word) + "'");
        ++pos_;
    }
    std::string identifier(const char* what) {
        if (current().kind != Tok::Ident) fail(std::string("expected ") + what);
        return tokens_[pos_++].text;
    }
    StateId state_index() {
        if (current().kind != Tok::Number) fail("expected a state index");
        auto v = parse_uint(current().text);
        if (!v || *v > 0xffffffffULL) fail("invalid state index '" + current().text + "'");
        ++pos_;
        return static_cast<StateId>(*v);
    }
    double number() {
        if (current().kind != Tok::Number) fail("expected a number");
        auto v = parse_decimal(current().text);
        if (!v) fail("invalid number '" + current().text + "'");
        ++pos_;
        return *v;
    }
    std::vector<StateId> state_list() {
        expect("{");
        std::vector<StateId> states;
        states.push_back(state_index());
        while (accept(",")) states.push_back(state_index());
        expect("}");
        return states;
    }

    StructuralConstraint constraint() {
        const Token start = current();
        if (peek_ident("same")) {
            ++pos_;
            expect("(");
            SameConstraint same;
            same.state = state_index();
            expect(",");
            expect("{");
            same.controllers.push_back(identifier("controller name"));
            while (accept(",")) same.controllers.push_back(identifier("controller name"));
            expect("}");
            expect(")");
            locations_.push_back(start);
            return same;
        }
        expect_ident("obs");
        expect("(");
        ObsConstraint obs;
        obs.states = state_list();
        expect(",");
        obs.controller = identifier("controller name");
        expect(")");
        locations_.push_back(start);
        return obs;
    }

    StateQuantifier quantifier() {
        StateQuantifier q;
        if (peek_ident("forall")) {
            q.quantifier = Quantifier::Forall;
        } else if (peek_ident("exists")) {
            q.quantifier = Quantifier::Exists;
        } else {
            fail("expected 'forall' or 'exists'");
        }
        quantifier_tokens_.push_back(current());
        ++pos_;
        q.variable = identifier("state variable");
        expect_ident("in");
        q.domain = state_list();
        expect("[");
        q.controller = identifier("controller name");
        expect("]");
        return q;
    }

    BoolExpr disjunction() {
        BoolExpr first = conjunction();
        if (!(current().kind == Tok::Punct && current().text == "|")) return first;
        BoolExpr node{BoolExpr::Kind::Or, 0, {std::move(first)}};
        while (accept("|")) node.children.push_back(conjunction());
        return node;
    }

    BoolExpr conjunction() {
        BoolExpr first = unary();
        if (!(current().kind == Tok::Punct && current().text == "&")) return first;
        BoolExpr node{BoolExpr::Kind::And, 0, {std::move(first)}};
        while (accept("&")) node.children.push_back(unary());
        return node;
    }

    BoolExpr unary() {
        if (accept("!")) return BoolExpr{BoolExpr::Kind::Not, 0, {unary()}};
        if (accept("(")) {
            BoolExpr inner = disjunction();
            expect(")");
            return inner;
        }
        if (peek_ident("true")) {
            ++pos_;
            return BoolExpr::constant(true);
        }
        if (peek_ident("false")) {
            ++pos_;
            return BoolExpr::constant(false);
        }
        return BoolExpr::leaf(atom());
    }

    std::pair<QueryKind, SideRef> side() {
        QueryKind kind;
        if (peek_ident("P")) {
            kind = QueryKind::Reach;
        } else if (peek_ident("R")) {
            kind = QueryKind::Reward;
        } else {
            fail("expected 'P(' or 'R(' starting an atom");
        }
        ++pos_;
        expect("(");
        SideRef ref;
        ref.variable = identifier("state variable");
        expect(",");
        expect_ident("F");
        ref.target = identifier("target label");
        expect(")");
        return {kind, ref};
    }

    std::size_t atom() {
        const Token start = current();
        ProbAtom a;
        auto [kind, left] = side();
        a.kind = kind;
        a.left = std::move(left);
        if (accept("<=")) {
            a.relation = Relation::LessEq;
        } else if (accept(">=")) {
            a.relation = Relation::GreaterEq;
        } else if (accept("<")) {
            a.relation = Relation::Less;
        } else if (accept(">")) {
            a.relation = Relation::Greater;
        } else if (accept("=")) {
            a.relation = Relation::Equal;
        } else {
            fail("expected a comparison operator");
        }
        if (current().kind == Tok::Number) {
            const Token at = current();
            double bound = number();
            if (a.kind == QueryKind::Reach && (bound < 0.0 || bound > 1.0)) {
                fail_at("probability bound must lie in [0,1]", at);
            }
            if (a.kind == QueryKind::Reward && bound < 0.0) fail_at("reward bound must be nonnegative", at);
            a.right = bound;
        } else {
            const Token at = current();
            auto [rkind, right] = side();
            if (rkind != a.kind) fail_at("both sides of an atom must be of the same kind", at);
            a.right = std::move(right);
        }
        if (accept("~")) {
            if (a.relation != Relation::Equal) fail("'~eps' is only allowed on '=' atoms");
            const Token at = current();
            a.equality_epsilon = number();
            if (!(a.equality_epsilon >= 0.0)) fail_at("equality tolerance must be nonnegative", at);
            a.explicit_epsilon = true;
        }
        atoms_->push_back(std::move(a));
        atom_tokens_.push_back(start);
        return atoms_->size() - 1;
    }

    void validate(const HyperSpec& spec) const {
        auto declared = [&](const std::string& name) {
            return std::find(spec.controllers.begin(), spec.controllers.end(), name) != spec.controllers.end();
        };
        for (std::size_t i = 0; i < spec.controllers.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (spec.controllers[i] == spec.controllers[j]) {
                    fail_at("controller '" + spec.controllers[i] + "' declared twice", tokens_[0]);
                }
            }
        }
        for (std::size_t i = 0; i < spec.structure.size(); ++i) {
            const Token& at = locations_[i];
            if (const auto* same = std::get_if<SameConstraint>(&spec.structure[i])) {
                for (const auto& name : same->controllers) {
                    if (!declared(name)) fail_at("undeclared controller '" + name + "'", at);
                }
            } else {
                const auto& obs = std::get<ObsConstraint>(spec.structure[i]);
                if (!declared(obs.controller)) fail_at("undeclared controller '" + obs.controller + "'", at);
            }
        }
        for (std::size_t i = 0; i < spec.quantifiers.size(); ++i) {
            const auto& q = spec.quantifiers[i];
            if (!declared(q.controller)) fail_at("undeclared controller '" + q.controller + "'", quantifier_tokens_[i]);
            for (std::size_t j = 0; j < i; ++j) {
                if (spec.quantifiers[j].variable == q.variable) {
                    fail_at("state variable '" + q.variable + "' quantified twice", quantifier_tokens_[i]);
                }
            }
        }
        auto bound = [&](const std::string& var) {
            for (const auto& q : spec.quantifiers) {
                if (q.variable == var) return true;
            }
            return false;
        };
        for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
            const auto& a = spec.atoms[i];
            if (!bound(a.left.variable)) fail_at("undeclared state variable '" + a.left.variable + "'", atom_tokens_[i]);
            if (const auto* r = std::get_if<SideRef>(&a.right); r != nullptr && !bound(r->variable)) {
                fail_at("undeclared state variable '" + r->variable + "'", atom_tokens_[i]);
            }
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<ProbAtom>* atoms_ = nullptr;
    std::vector<Token> locations_;
    std::vector<Token> quantifier_tokens_;
    std::vector<Token> atom_tokens_;
};

void write_expr(std::ostringstream& out, const HyperSpec& spec, const BoolExpr& e, bool nested) {
    switch (e.kind) {
        case BoolExpr::Kind::True:
            out << "true";
            return;
        case BoolExpr::Kind::False:
            out << "false";
            return;
        case BoolExpr::Kind::Atom:
            out << write_atom(spec.atoms.at(e.atom));
            return;
        case BoolExpr::Kind::Not:
            out << "!(";
            write_expr(out, spec, e.children.at(0), false);
            out << ')';
            return;
        case BoolExpr::Kind::And:
        case BoolExpr::Kind::Or: {
            if (nested) out << '(';
            const char* sep = e.kind == BoolExpr::Kind::And ? " & " : " | ";
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i > 0) out << sep;
                write_expr(out, spec, e.children[i], true);
            }
            if (nested) out << ')';
            return;
        }
    }
}

void write_states(std::ostringstream& out, const std::vector<StateId>& states) {
    out << '{';
    for (std::size_t i = 0; i < states.size(); ++i) out << (i ? ", " : "") << states[i];
    out << '}';
}

std::string write_side(QueryKind kind, const SideRef& side) {
    return std::string(kind == QueryKind::Reach ? "P(" : "R(") + side.variable + ", F " + side.target + ")";
}

}  // namespace

HyperSpec parse_spec(std::string_view text) { return SpecParser(text).parse(); }

std::string write_atom(const ProbAtom& atom) {
    std::string out = write_side(atom.kind, atom.left) + " " + to_string(atom.relation) + " ";
    if (const auto* bound = std::get_if<double>(&atom.right)) {
        out += format_double(*bound);
    } else {
        out += write_side(atom.kind, std::get<SideRef>(atom.right));
    }
    if (atom.explicit_epsilon) out += " ~" + format_double(atom.equality_epsilon);
    return out;
}

std::string write_spec(const HyperSpec& spec) {
    std::ostringstream out;
    out << "exists ";
    for (std::size_t i = 0; i < spec.controllers.size(); ++i) out << (i ? ", " : "") << spec.controllers[i];
    out << " :\n";
    if (!spec.structure.empty()) {
        out << "  ";
        for (std::size_t i = 0; i < spec.structure.size(); ++i) {
            if (i > 0) out << "\n  & ";
            if (const auto* same = std::get_if<SameConstraint>(&spec.structure[i])) {
                out << "same(" << same->state << ", {";
                for (std::size_t j = 0; j < same->controllers.size(); ++j) {
                    out << (j ? ", " : "") << same->controllers[j];
                }
                out << "})";
            } else {
                const auto& obs = std::get<ObsConstraint>(spec.structure[i]);
                out << "obs(";
                write_states(out, obs.states);
                out << ", " << obs.controller << ')';
            }
        }
        out << " ;\n";
    }
    for (std::size_t i = 0; i < spec.quantifiers.size(); ++i) {
        const auto& q = spec.quantifiers[i];
        out << (i ? ",\n  " : "  ") << (q.quantifier == Quantifier::Forall ? "forall " : "exists ") << q.variable
            << " in ";
        write_states(out, q.domain);
        out << " [" << q.controller << ']';
    }
    out << " :\n  ";
    write_expr(out, spec, spec.prob, false);
    out << '\n';
    return out.str();
}

PartialController parse_controller(std::string_view text, std::size_t state_count) {
    PartialController pc;
    pc.choice.assign(state_count, std::nullopt);
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        auto words = split_words(line);
        if (words.empty()) return;
        if (words.size() != 2) throw ParseError("expected 'state action'", line_no, words[0].column);
        auto s = parse_uint(words[0].text);
        if (!s || *s >= state_count) throw ParseError("unknown state '" + std::string(words[0].text) + "'", line_no, words[0].column);
        auto a = parse_uint(words[1].text);
        if (!a || *a > 0x7fffffffULL) throw ParseError("invalid action '" + std::string(words[1].text) + "'", line_no, words[1].column);
        if (pc.choice[*s]) throw ParseError("state listed twice", line_no, words[0].column);
        pc.choice[*s] = static_cast<ActionId>(*a);
    });
    return pc;
}

std::string write_controller(const Controller& c) {
    std::ostringstream out;
    for (std::size_t s = 0; s < c.choice.size(); ++s) out << s << ' ' << c.choice[s] << '\n';
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << contents;
}

}  // namespace hypersynth
