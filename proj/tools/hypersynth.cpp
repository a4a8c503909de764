// Command-line driver: synth | check | enumerate | generate.
//
// Exit codes: 0 feasible / holds, 1 unfeasible / violated, 2 bad input, 3 limit exceeded.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "hypersynth/errors.hpp"
#include "hypersynth/generators.hpp"
#include "hypersynth/stats.hpp"
#include "hypersynth/synthesis.hpp"
#include "hypersynth/textio.hpp"

namespace hs = hypersynth;

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitUnfeasible = 1;
constexpr int kExitInput = 2;
constexpr int kExitLimit = 3;

struct Common {
    std::string model_path;
    std::string spec_path;
    std::string mode = "feasibility";
    std::string method = "ar";
    unsigned memory_bits = 0;
    double tol = hs::kDefaultTolerance;
    double eps_eq = -1.0;
    std::size_t max_iters = 0;
    double time_limit = 0.0;
    std::string stats_out;
    std::string distance = "0,1";
    double cap = 1e6;
};

hs::Mode parse_mode(const std::string& s) {
    if (s == "complete") return hs::Mode::Complete;
    if (s == "optimal") return hs::Mode::Optimal;
    return hs::Mode::Feasibility;
}

hs::HyperSpec load_spec(const Common& c) {
    hs::HyperSpec spec = hs::parse_spec(hs::read_file(c.spec_path));
    if (c.eps_eq >= 0.0) {
        for (auto& atom : spec.atoms) {
            if (!atom.explicit_epsilon) atom.equality_epsilon = c.eps_eq;
        }
    }
    return spec;
}

hs::SynthesisOptions options(const Common& c, const hs::HyperSpec& spec) {
    hs::SynthesisOptions o;
    o.mode = parse_mode(c.mode);
    o.hybrid = c.method == "hybrid";
    o.solver.tolerance = c.tol;
    o.max_iterations = c.max_iters;
    o.time_limit = c.time_limit;
    o.enumeration_cap = c.cap;
    const auto comma = c.distance.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("--distance expects A,B");
    auto slot = [&](const std::string& name) {
        if (auto idx = spec.controller_index(name)) return *idx;
        return static_cast<std::size_t>(std::stoul(name));
    };
    o.distance_a = slot(c.distance.substr(0, comma));
    o.distance_b = slot(c.distance.substr(comma + 1));
    if (o.mode == hs::Mode::Optimal && (o.distance_a >= spec.controllers.size() || o.distance_b >= spec.controllers.size())) {
        throw std::invalid_argument("--distance refers to an undeclared controller");
    }
    return o;
}

void print_outcome(const hs::Problem& p, const hs::SynthesisOutcome& out) {
    std::cout << "verdict: " << hs::to_string(out.verdict) << (out.limit_exceeded ? " (limit exceeded)" : "") << "\n";
    const auto& st = out.stats;
    std::cout << "family size: " << st.family_size << "\n"
              << "iterations: " << st.iterations << "\n"
              << "decided families: " << st.decided_families << "\n"
              << "average decided size: " << st.average_decided_size << "\n"
              << "explored fraction: " << st.explored_fraction << "\n"
              << "wall time: " << st.wall_time << " s\n";
    if (!out.satisfying.empty()) {
        std::cout << "satisfying members: " << out.satisfying_count << " in " << out.satisfying.size() << " families\n";
    }
    if (out.best_value) std::cout << "best distance: " << *out.best_value << "\n";
    for (std::size_t i = 0; i < out.controllers.size(); ++i) {
        std::cout << "controller " << p.spec.controllers.at(i) << ":\n";
        const auto& choice = out.controllers[i].choice;
        for (hs::StateId s = 0; s < choice.size(); ++s) {
            const hs::Choice* c = p.model.find_action(s, choice[s]);
            if (p.model.menu_size(s) < 2) continue;
            std::cout << "  " << s << " -> " << choice[s];
            if (c != nullptr && !c->name.empty()) std::cout << " (" << c->name << ")";
            std::cout << "\n";
        }
    }
}

int exit_code(const hs::SynthesisOutcome& out) {
    if (out.limit_exceeded) return kExitLimit;
    return out.verdict == hs::Verdict::Feasible ? kExitFeasible : kExitUnfeasible;
}

int cmd_synth(const Common& c, const std::string& command) {
    const hs::Mdp model = hs::parse_model(hs::read_file(c.model_path));
    const hs::HyperSpec spec = load_spec(c);
    const hs::Problem p = hs::Problem::make(model, spec, c.memory_bits);
    const hs::SynthesisOptions opts = options(c, spec);
    const bool oracle = command == "enumerate" || c.method == "oracle";
    hs::SynthesisOutcome out = oracle ? hs::enumerate_oracle(p, opts) : hs::ar_loop(p, opts);
    print_outcome(p, out);
    if (!c.stats_out.empty()) {
        hs::RunInfo info{command, oracle ? "oracle" : c.method, opts.mode};
        hs::write_file(c.stats_out, hs::write_stats(p, out, info));
    }
    return exit_code(out);
}

// Fills states a controller file leaves out: first from another listed member of the same
// parameter class, otherwise with the lowest action of the class domain.
std::vector<hs::Controller> load_controllers(const hs::Problem& p, const std::vector<std::string>& paths) {
    const auto& ps = p.space;
    if (paths.size() != ps.controllers()) {
        throw hs::SpecError("expected " + std::to_string(ps.controllers()) + " controller files, got " +
                            std::to_string(paths.size()));
    }
    std::vector<hs::PartialController> partial;
    for (const auto& path : paths) partial.push_back(hs::parse_controller(hs::read_file(path), ps.states()));
    std::vector<hs::Controller> out(ps.controllers());
    for (std::size_t i = 0; i < ps.controllers(); ++i) {
        out[i].choice.resize(ps.states());
        for (hs::StateId s = 0; s < ps.states(); ++s) {
            if (partial[i].choice[s]) {
                out[i].choice[s] = *partial[i].choice[s];
                continue;
            }
            const std::size_t k = ps.parameter_of(i, s);
            std::optional<hs::ActionId> repaired;
            for (const auto& member : ps.members(k)) {
                if (auto a = partial[member.controller].choice[member.state]) {
                    repaired = *a;
                    break;
                }
            }
            out[i].choice[s] = repaired.value_or(ps.domain(k).front());
        }
    }
    return out;
}

int cmd_check(const Common& c, const std::vector<std::string>& controller_paths) {
    const hs::Mdp model = hs::parse_model(hs::read_file(c.model_path));
    const hs::HyperSpec spec = load_spec(c);
    const hs::Problem p = hs::Problem::make(model, spec, 0);
    const auto controllers = load_controllers(p, controller_paths);
    if (!hs::satisfies_structure(controllers, p.spec.controllers, p.spec.structure)) {
        std::cout << "structural constraints violated\n";
        return kExitUnfeasible;
    }
    std::vector<hs::Mc> mcs;
    for (const auto& ctl : controllers) mcs.push_back(hs::impose(p.model, ctl));
    const hs::CheckResult result = hs::check_mc(mcs, p.formula);
    for (std::size_t i = 0; i < result.atoms.size(); ++i) {
        const auto& a = result.atoms[i];
        std::cout << hs::to_string(p.formula.atoms[i]) << ": " << a.left << " vs " << a.right << " -> "
                  << (a.holds ? "true" : "false") << "\n";
    }
    std::cout << "result: " << (result.holds ? "true" : "false") << "\n";
    return result.holds ? kExitFeasible : kExitUnfeasible;
}

int cmd_generate(const std::string& id, const std::vector<std::string>& sets, std::uint64_t seed,
                 const std::string& out_dir) {
    hs::GeneratorParams params;
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    const hs::Benchmark b = hs::generate(id, params, seed);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    hs::write_file((dir / "model.txt").string(), b.model_text);
    hs::write_file((dir / "spec.txt").string(), b.spec_text);
    if (b.controller_text) hs::write_file((dir / "controller.txt").string(), *b.controller_text);
    const hs::Problem p = hs::Problem::make(b.model, b.spec, 0);
    std::cout << id << ": " << b.model.state_count() << " states, " << p.space.parameter_count()
              << " parameters, family size " << p.space.size() << "\n";
    return 0;
}

void add_common(CLI::App* app, Common& c, bool modes) {
    app->add_option("--model", c.model_path, "model file")->required();
    app->add_option("--spec", c.spec_path, "specification file")->required();
    app->add_option("--tol", c.tol, "value iteration tolerance")->check(CLI::PositiveNumber);
    app->add_option("--eps-eq", c.eps_eq, "default tolerance of equality atoms")->check(CLI::NonNegativeNumber);
    if (!modes) return;
    app->add_option("--mode", c.mode, "feasibility|complete|optimal")
        ->check(CLI::IsMember({"feasibility", "complete", "optimal"}));
    app->add_option("--memory-bits", c.memory_bits, "controller memory bits")->check(CLI::Range(0u, hs::kMaxMemoryBits));
    app->add_option("--stats-out", c.stats_out, "write a JSON stats document");
    app->add_option("--distance", c.distance, "controllers compared by the optimal-mode distance, A,B");
    app->add_option("--cap", c.cap, "largest family the oracle enumerates")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthesis of controllers for probabilistic hyperproperties"};
    app.require_subcommand(1);

    Common synth_opts, check_opts, enum_opts;
    auto* synth = app.add_subcommand("synth", "synthesise controllers");
    add_common(synth, synth_opts, true);
    synth->add_option("--method", synth_opts.method, "ar|hybrid|oracle")->check(CLI::IsMember({"ar", "hybrid", "oracle"}));
    synth->add_option("--max-iters", synth_opts.max_iters, "iteration limit (0: none)");
    synth->add_option("--time-limit", synth_opts.time_limit, "time limit in seconds (0: none)")
        ->check(CLI::NonNegativeNumber);

    std::vector<std::string> controller_paths;
    auto* check = app.add_subcommand("check", "check given controllers");
    add_common(check, check_opts, false);
    check->add_option("--controller", controller_paths, "controller file, one per declared controller")->required();

    auto* enumerate = app.add_subcommand("enumerate", "check every member of the family");
    add_common(enumerate, enum_opts, true);

    std::string gen_id, out_dir = ".";
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    auto* generate = app.add_subcommand("generate", "write a benchmark model and specification");
    generate->add_option("id", gen_id, "benchmark id")->required()->check(CLI::IsMember(hs::generator_ids()));
    generate->add_option("--set", sets, "generator parameter key=value");
    generate->add_option("--seed", seed, "seed for randomised variants");
    generate->add_option("--out-dir", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*synth) return cmd_synth(synth_opts, "synth");
        if (*check) return cmd_check(check_opts, controller_paths);
        if (*enumerate) return cmd_synth(enum_opts, "enumerate");
        return cmd_generate(gen_id, sets, seed, out_dir);
    } catch (const hs::CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLimit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
