#include "hypersynth/stats.hpp"

#include <cmath>

#include <json.hpp>

namespace hypersynth {

namespace {

nlohmann::json finite_or_string(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

std::string write_stats(const Problem& p, const SynthesisOutcome& outcome, const RunInfo& info) {
    using nlohmann::json;
    json doc;
    doc["schema"] = kStatsSchema;
    doc["command"] = info.command;
    doc["method"] = info.method;
    doc["mode"] = to_string(info.mode);
    doc["verdict"] = to_string(outcome.verdict);
    doc["limit_exceeded"] = outcome.limit_exceeded;
    doc["mdp_states"] = p.model.state_count();
    doc["memory_bits"] = p.memory_bits;
    doc["parameters"] = p.space.parameter_count();

    const auto& st = outcome.stats;
    doc["family_size"] = st.family_size.str();
    doc["iterations"] = st.iterations;
    doc["decided_families"] = st.decided_families;
    doc["decided_members"] = st.decided_members.str();
    doc["average_decided_size"] = st.average_decided_size;
    doc["explored_fraction"] = st.explored_fraction;
    doc["wall_time"] = st.wall_time;
    doc["ce_prunes"] = st.ce_prunes;
    doc["satisfying_count"] = outcome.satisfying_count.str();
    doc["satisfying_families"] = outcome.satisfying.size();
    if (outcome.best_value) doc["best_value"] = *outcome.best_value;

    if (outcome.witness) {
        doc["realisation"] = outcome.witness->assignment;
        json tables = json::object();
        for (std::size_t i = 0; i < outcome.controllers.size(); ++i) {
            json table = json::object();
            const auto& choice = outcome.controllers[i].choice;
            for (std::size_t s = 0; s < choice.size(); ++s) table[std::to_string(s)] = choice[s];
            tables[p.spec.controllers.at(i)] = std::move(table);
        }
        doc["witness"] = std::move(tables);
    } else {
        doc["witness"] = nullptr;
    }

    json atoms = json::array();
    for (std::size_t i = 0; i < outcome.root_bounds.size(); ++i) {
        const auto& v = outcome.root_bounds[i];
        atoms.push_back({{"atom", to_string(p.formula.atoms.at(i))},
                         {"tag", to_string(v.tag)},
                         {"lb1", finite_or_string(v.lb1)},
                         {"ub1", finite_or_string(v.ub1)},
                         {"lb2", finite_or_string(v.lb2)},
                         {"ub2", finite_or_string(v.ub2)}});
    }
    doc["atoms"] = std::move(atoms);
    return doc.dump(2) + "\n";
}

}  // namespace hypersynth
