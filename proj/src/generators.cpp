#include "hypersynth/generators.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hypersynth/textio.hpp"

namespace hypersynth {

namespace {

class Params {
public:
    Params(const std::string& id, const GeneratorParams& raw, std::set<std::string> known) : id_(id), raw_(raw) {
        for (const auto& [key, value] : raw_) {
            if (!known.count(key)) throw std::invalid_argument(id_ + ": unknown parameter '" + key + "'");
        }
    }

    long integer(const std::string& key, long fallback, long lo, long hi) const {
        auto it = raw_.find(key);
        if (it == raw_.end()) return fallback;
        long v = 0;
        const auto& s = it->second;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || v < lo || v > hi) {
            throw std::invalid_argument(id_ + ": parameter " + key + " must be an integer in [" + std::to_string(lo) +
                                        ", " + std::to_string(hi) + "]");
        }
        return v;
    }

    double real(const std::string& key, double fallback, double lo, double hi) const {
        auto it = raw_.find(key);
        if (it == raw_.end()) return fallback;
        double v = 0.0;
        const auto& s = it->second;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !(v >= lo && v <= hi)) {
            throw std::invalid_argument(id_ + ": parameter " + key + " must be a number in [" + fmt(lo) + ", " +
                                        fmt(hi) + "]");
        }
        return v;
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = raw_.find(key);
        return it == raw_.end() ? fallback : it->second;
    }

    static std::string fmt(double v) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, ptr);
    }

private:
    std::string id_;
    const GeneratorParams& raw_;
};

Choice choice(ActionId id, std::string name, std::vector<Transition> dist, double reward = 0.0) {
    return Choice{id, std::move(name), std::move(dist), reward};
}

Choice self_loop(StateId s) { return choice(0, "", {{s, 1.0}}); }

StateSet set_of(std::size_t n, std::initializer_list<StateId> members) {
    StateSet out(n);
    for (StateId s : members) out.insert(s);
    return out;
}

Benchmark finish(std::vector<std::vector<Choice>> rows, std::map<std::string, StateSet> labels, bool rewards,
                 const std::string& spec_text) {
    Benchmark b;
    b.model = Mdp(std::move(rows), std::move(labels), rewards);
    b.model_text = write_model(b.model);
    b.spec_text = spec_text;
    b.spec = parse_spec(spec_text);
    validate_against(b.spec, b.model);
    return b;
}

// ---------------------------------------------------------------------------
// Knuth-Yao probabilistic conformance
//
// States 0..6: the die (0 rolls, 1..6 outcomes). States 7..19: the implementation,
// local index j at global 7 + j; j = 0..6 are the coin states, j = 7..12 the outcomes.

constexpr std::size_t kImplStates = 13;

std::size_t pair_index(std::size_t i, std::size_t j) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < i; ++a) idx += kImplStates - 1 - a;
    return idx + (j - i - 1);
}

Choice coin(ActionId id, std::size_t i, std::size_t j) {
    return choice(id, "p" + std::to_string(i) + "_" + std::to_string(j),
                  {{static_cast<StateId>(7 + i), 0.5}, {static_cast<StateId>(7 + j), 0.5}});
}

Benchmark knuth_yao(const Params& params) {
    const auto stages = static_cast<std::size_t>(params.integer("stages", 1, 1, 7));
    constexpr std::array<std::array<std::size_t, 2>, 7> kKy = {
        {{1, 2}, {3, 4}, {5, 6}, {1, 7}, {8, 9}, {10, 11}, {2, 12}}};
    const std::size_t n = 7 + kImplStates;
    std::vector<std::vector<Choice>> rows(n);
    std::vector<ActionId> ky_controller(n, 0);

    std::vector<Transition> roll;
    for (StateId k = 1; k <= 6; ++k) roll.push_back({k, 1.0 / 6.0});
    rows[0].push_back(choice(0, "roll", roll));
    for (StateId k = 1; k <= 6; ++k) rows[k].push_back(self_loop(k));

    for (std::size_t j = 0; j < 7; ++j) {
        auto& menu = rows[7 + j];
        const auto [ky_a, ky_b] = kKy[j];
        if (j < stages) {
            ActionId id = 0;
            for (std::size_t a = 0; a < kImplStates; ++a) {
                for (std::size_t b = a + 1; b < kImplStates; ++b) menu.push_back(coin(id++, a, b));
            }
            ky_controller[7 + j] = static_cast<ActionId>(pair_index(ky_a, ky_b));
        } else if (stages == 1 && j == 1) {
            // The single-stage instance also lets state 1 pick between two pairs.
            menu.push_back(coin(0, ky_a, ky_b));
            menu.push_back(coin(1, 3, 5));
        } else {
            menu.push_back(coin(0, ky_a, ky_b));
        }
    }
    for (std::size_t j = 7; j < kImplStates; ++j) rows[7 + j].push_back(self_loop(static_cast<StateId>(7 + j)));

    std::map<std::string, StateSet> labels;
    std::ostringstream spec;
    spec << "exists sigma :\n  forall x in {0}[sigma], forall y in {7}[sigma] :\n";
    for (StateId k = 1; k <= 6; ++k) {
        const std::string name = "die" + std::to_string(k);
        labels.emplace(name, set_of(n, {k, static_cast<StateId>(13 + k)}));
        spec << (k == 1 ? "    " : "  & ") << "P(x, F " << name << ") = P(y, F " << name << ")\n";
    }
    Benchmark b = finish(std::move(rows), std::move(labels), false, spec.str());
    b.controller_text = write_controller(Controller{ky_controller});
    return b;
}

// ---------------------------------------------------------------------------
// Grid mazes

struct Grid {
    std::vector<std::string> rows;

    std::size_t height() const { return rows.size(); }
    std::size_t width() const { return rows.front().size(); }
    char at(long r, long c) const {
        if (r < 0 || c < 0 || r >= static_cast<long>(height()) || c >= static_cast<long>(width())) return '#';
        return rows[r][c];
    }
};

constexpr std::array<const char*, 4> kDirNames = {"up", "down", "left", "right"};
constexpr std::array<int, 4> kDr = {-1, 1, 0, 0};
constexpr std::array<int, 4> kDc = {0, 0, -1, 1};

Grid sd_layout(const std::string& variant, const Params& params, std::uint64_t seed) {
    if (variant == "simple") return {{"a...b", "T..TG"}};
    if (variant == "larger-1") return {{"a...b", ".T.T.", "..T..", ".T...", "...TG"}};
    if (variant == "larger-2") return {{"a...b", ".T.T.", "..T..", ".T.T.", "...TG"}};
    if (variant == "larger-3") return {{"....a", ".T.T.", "b.T..", ".T.T.", "T...G"}};
    if (variant == "random") {
        const auto size = static_cast<std::size_t>(params.integer("size", 4, 2, 12));
        std::mt19937_64 rng(seed);
        Grid g;
        g.rows.assign(size, std::string(size, '.'));
        for (auto& row : g.rows) {
            for (char& cell : row) cell = rng() % 100 < 15 ? 'T' : '.';
        }
        g.rows[0][0] = 'a';
        g.rows[0][size - 1] = 'b';
        g.rows[size - 1][size - 1] = 'G';
        return g;
    }
    throw std::invalid_argument("maze-sd: unknown variant '" + variant + "'");
}

// Traps and the goal absorb; every free cell offers all four moves. A move succeeds with
// probability 1 - 3 * slip and slips into each other direction with probability slip.
// Moving into the border keeps the robot in place.
Benchmark maze_sd(const Params& params, std::uint64_t seed) {
    const Grid g = sd_layout(params.text("variant", "simple"), params, seed);
    const double slip = params.real("slip", 0.1, 1e-6, 0.25);
    const std::size_t n = g.height() * g.width();
    auto id_of = [&](long r, long c) { return static_cast<StateId>(r * static_cast<long>(g.width()) + c); };

    std::vector<std::vector<Choice>> rows(n);
    std::map<std::string, StateSet> labels{{"goal", StateSet(n)}, {"trap", StateSet(n)}};
    std::optional<StateId> a, b;
    for (long r = 0; r < static_cast<long>(g.height()); ++r) {
        for (long c = 0; c < static_cast<long>(g.width()); ++c) {
            const StateId s = id_of(r, c);
            const char cell = g.at(r, c);
            if (cell == 'T' || cell == 'G') {
                labels.at(cell == 'T' ? "trap" : "goal").insert(s);
                rows[s].push_back(self_loop(s));
                continue;
            }
            if (cell == 'a') a = s;
            if (cell == 'b') b = s;
            for (ActionId d = 0; d < 4; ++d) {
                std::vector<Transition> dist;
                for (std::size_t e = 0; e < 4; ++e) {
                    const long nr = r + kDr[e], nc = c + kDc[e];
                    const StateId dest = g.at(nr, nc) == '#' ? s : id_of(nr, nc);
                    dist.push_back({dest, e == d ? 1.0 - 3.0 * slip : slip});
                }
                rows[s].push_back(choice(d, kDirNames[d], std::move(dist)));
            }
        }
    }
    const std::string spec = "exists sigma :\n  forall x in {" + std::to_string(*a) + "}[sigma], forall y in {" +
                             std::to_string(*b) + "}[sigma] :\n    P(x, F goal) >= P(y, F goal)\n";
    return finish(std::move(rows), std::move(labels), false, spec);
}

// Checkpoint mazes with partial observability. A state is a cell plus the last checkpoint
// passed; entering a different checkpoint earns reward 1. Every move fails into the
// absorbing `done` state with probability `error`. The robot only observes which
// directions are open, hence one obs() class per direction pattern and controller.
Grid checkpoint_layout(const std::string& variant) {
    if (variant == "larger-4") return {{"a.C.b", ".#.#.", "C.S.C", ".#.#.", "..C.."}};
    if (variant == "larger-5") {
        return {{"a..C..b", ".#.#.#.", "C..S..C", ".#.#.#.", "...S...", ".#.#.#.", "C.....C"}};
    }
    throw std::invalid_argument("unknown checkpoint maze variant '" + variant + "'");
}

Benchmark checkpoint_maze(const Params& params, bool opacity) {
    const Grid g = checkpoint_layout(params.text("variant", "larger-4"));
    const double threshold = params.real("threshold", 0.0, 0.0, 1e9);
    const double eps = params.real("eps", 1e-2, 0.0, 1e9);
    const double error = params.real("error", 0.05, 1e-6, 0.5);

    std::map<std::pair<long, long>, int> checkpoint;
    std::pair<long, long> start_a{-1, -1}, start_b{-1, -1};
    for (long r = 0; r < static_cast<long>(g.height()); ++r) {
        for (long c = 0; c < static_cast<long>(g.width()); ++c) {
            const char cell = g.at(r, c);
            if (cell == 'C') checkpoint.emplace(std::make_pair(r, c), static_cast<int>(checkpoint.size()));
            if (cell == 'a') start_a = {r, c};
            if (cell == 'b') start_b = {r, c};
        }
    }
    // Reachable (cell, last checkpoint) pairs, numbered in sorted order.
    using Key = std::tuple<long, long, int>;
    std::set<Key> seen{{start_a.first, start_a.second, -1}, {start_b.first, start_b.second, -1}};
    std::vector<Key> work(seen.begin(), seen.end());
    auto step = [&](const Key& k, int d) -> std::optional<Key> {
        const auto [r, c, last] = k;
        const long nr = r + kDr[d], nc = c + kDc[d];
        if (g.at(nr, nc) == '#') return std::nullopt;
        auto it = checkpoint.find({nr, nc});
        return Key{nr, nc, it == checkpoint.end() ? last : it->second};
    };
    while (!work.empty()) {
        const Key k = work.back();
        work.pop_back();
        for (int d = 0; d < 4; ++d) {
            if (auto next = step(k, d); next && seen.insert(*next).second) work.push_back(*next);
        }
    }
    const std::vector<Key> states(seen.begin(), seen.end());
    const std::size_t n = states.size() + 1;
    const auto done = static_cast<StateId>(states.size());
    auto index = [&](const Key& k) {
        return static_cast<StateId>(std::lower_bound(states.begin(), states.end(), k) - states.begin());
    };

    std::vector<std::vector<Choice>> rows(n);
    std::map<std::vector<int>, std::vector<StateId>> by_pattern;
    std::vector<StateId> sensitive;
    for (StateId s = 0; s < states.size(); ++s) {
        const Key& k = states[s];
        std::vector<int> pattern;
        for (int d = 0; d < 4; ++d) {
            auto next = step(k, d);
            if (!next) continue;
            pattern.push_back(d);
            const int last = std::get<2>(k);
            const int reached = std::get<2>(*next);
            const double reward = reached != last && checkpoint.count({std::get<0>(*next), std::get<1>(*next)}) ? 1.0 : 0.0;
            rows[s].push_back(choice(static_cast<ActionId>(pattern.size() - 1), kDirNames[d],
                                     {{index(*next), 1.0 - error}, {done, error}}, reward));
        }
        if (pattern.size() > 1) by_pattern[pattern].push_back(s);
        if (g.at(std::get<0>(k), std::get<1>(k)) == 'S') sensitive.push_back(s);
    }
    rows[done].push_back(self_loop(done));

    const StateId a = index({start_a.first, start_a.second, -1});
    const StateId b = index({start_b.first, start_b.second, -1});
    std::map<std::string, StateSet> labels{{"done", set_of(n, {done})}};

    std::ostringstream spec;
    spec << "exists s1, s2 :\n";
    std::vector<std::string> constraints;
    for (const auto& [pattern, members] : by_pattern) {
        if (members.size() < 2) continue;
        std::string list;
        for (StateId s : members) list += (list.empty() ? "" : ", ") + std::to_string(s);
        for (const char* ctl : {"s1", "s2"}) constraints.push_back("obs({" + list + "}, " + ctl + ")");
    }
    if (!opacity) {
        for (StateId s : sensitive) constraints.push_back("same(" + std::to_string(s) + ", {s1, s2})");
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        spec << "  " << (i == 0 ? "  " : "& ") << constraints[i] << "\n";
    }
    if (!constraints.empty()) spec << "  ;\n";
    const StateId y_state = opacity ? a : b;
    spec << "  forall x in {" << a << "}[s1], forall y in {" << y_state << "}[s2] :\n"
         << "    R(x, F done) >= " << Params::fmt(threshold) << "\n"
         << "  & R(y, F done) >= " << Params::fmt(threshold) << "\n"
         << "  & R(x, F done) = R(y, F done) ~ " << Params::fmt(eps) << "\n";
    return finish(std::move(rows), std::move(labels), true, spec.str());
}

// ---------------------------------------------------------------------------
// Timing attack: an n-bit secret is processed bit by bit. The `direct` action spends one
// extra time unit on every set bit; `padded` takes one or two units with equal probability
// regardless of the secret. Final states are labelled with the observable time.
Benchmark timing_attack(const Params& params) {
    const auto bits = static_cast<int>(params.integer("bits", 2, 1, 6));
    const long max_secret = (1L << bits) - 1;
    const long h1 = params.integer("h1", 0, 0, max_secret);
    const long h2 = params.integer("h2", max_secret, 0, max_secret);

    using Key = std::tuple<long, int, int>;  // secret, bit, time
    std::set<Key> seen;
    std::vector<Key> work;
    for (long h = 0; h <= max_secret; ++h) {
        seen.insert({h, 0, 0});
        work.push_back({h, 0, 0});
    }
    while (!work.empty()) {
        const auto [h, i, t] = work.back();
        work.pop_back();
        if (i == bits) continue;
        const int cost = 1 + static_cast<int>((h >> i) & 1);
        for (Key next : {Key{h, i + 1, t + cost}, Key{h, i + 1, t + 1}, Key{h, i + 1, t + 2}}) {
            if (seen.insert(next).second) work.push_back(next);
        }
    }
    const std::vector<Key> states(seen.begin(), seen.end());
    const std::size_t n = states.size();
    auto index = [&](const Key& k) {
        return static_cast<StateId>(std::lower_bound(states.begin(), states.end(), k) - states.begin());
    };
    std::vector<std::vector<Choice>> rows(n);
    std::map<std::string, StateSet> labels;
    for (StateId s = 0; s < n; ++s) {
        const auto [h, i, t] = states[s];
        if (i == bits) {
            rows[s].push_back(self_loop(s));
            const std::string name = "time" + std::to_string(t);
            labels.try_emplace(name, StateSet(n)).first->second.insert(s);
            continue;
        }
        const int cost = 1 + static_cast<int>((h >> i) & 1);
        rows[s].push_back(choice(0, "direct", {{index({h, i + 1, t + cost}), 1.0}}));
        rows[s].push_back(choice(1, "padded", {{index({h, i + 1, t + 1}), 0.5}, {index({h, i + 1, t + 2}), 0.5}}));
    }
    std::ostringstream spec;
    spec << "exists sigma :\n  forall x in {" << index({h1, 0, 0}) << "}[sigma], forall y in {" << index({h2, 0, 0})
         << "}[sigma] :\n";
    bool first = true;
    for (const auto& [name, members] : labels) {
        spec << (first ? "    " : "  | ") << "!(P(x, F " << name << ") = P(y, F " << name << "))\n";
        first = false;
    }
    return finish(std::move(rows), std::move(labels), false, spec.str());
}

// ---------------------------------------------------------------------------
// Thread scheduling: from A_i the scheduler picks a success probability of 0.5 or 0.6 for
// advancing to A_{i+1}; failures fall into a slow chain B that ends in l2. The secret h
// selects the start A_h, so a lower h needs more consecutive successes to reach l1.
Benchmark thread_scheduling(const Params& params) {
    const long h1 = params.integer("h1", 10, 0, 200);
    const long h2 = params.integer("h2", 20, 0, 200);
    const auto top = static_cast<StateId>(std::max(h1, h2));
    const std::size_t n = 2 * static_cast<std::size_t>(top) + 5;
    auto A = [](StateId i) { return i; };
    auto B = [&](StateId i) { return static_cast<StateId>(top + 1 + i); };
    const auto W = static_cast<StateId>(2 * top + 2);
    const auto L1 = static_cast<StateId>(2 * top + 3);
    const auto L2 = static_cast<StateId>(2 * top + 4);

    std::vector<std::vector<Choice>> rows(n);
    for (StateId i = 0; i <= top; ++i) {
        const StateId next = i == top ? L1 : A(i + 1);
        rows[A(i)].push_back(choice(0, "p50", {{next, 0.5}, {B(i), 0.5}}));
        rows[A(i)].push_back(choice(1, "p60", {{next, 0.6}, {B(i), 0.4}}));
        rows[B(i)].push_back(choice(0, "", {{i == top ? W : B(i + 1), 1.0}}));
    }
    rows[W].push_back(choice(0, "", {{L2, 1.0}}));
    rows[L1].push_back(self_loop(L1));
    rows[L2].push_back(self_loop(L2));
    std::map<std::string, StateSet> labels{{"l1", set_of(n, {L1})}, {"l2", set_of(n, {L2})}};
    const std::string spec = "exists sigma :\n  forall x in {" + std::to_string(h1) + "}[sigma], forall y in {" +
                             std::to_string(h2) + "}[sigma] :\n    !(P(x, F l1) = P(y, F l1))\n";
    return finish(std::move(rows), std::move(labels), false, spec);
}

}  // namespace

std::vector<std::string> generator_ids() {
    return {"knuth-yao-pc", "maze-sd", "maze-noninterference", "maze-opacity", "timing-attack", "thread-scheduling"};
}

Benchmark generate(const std::string& id, const GeneratorParams& params, std::uint64_t seed) {
    if (id == "knuth-yao-pc") return knuth_yao(Params(id, params, {"stages"}));
    if (id == "maze-sd") return maze_sd(Params(id, params, {"variant", "slip", "size"}), seed);
    if (id == "maze-noninterference" || id == "maze-opacity") {
        return checkpoint_maze(Params(id, params, {"variant", "threshold", "eps", "error"}), id == "maze-opacity");
    }
    if (id == "timing-attack") return timing_attack(Params(id, params, {"bits", "h1", "h2"}));
    if (id == "thread-scheduling") return thread_scheduling(Params(id, params, {"h1", "h2"}));
    throw std::invalid_argument("unknown benchmark '" + id + "'");
}

}  // namespace hypersynth
