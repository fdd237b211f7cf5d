#pragma once

// JSON / CSV serialization. Rationals are always written as exact strings
// ("3", "-7/2"); floats never appear in machine formats.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynamics.hpp"
#include "error.hpp"
#include "game.hpp"
#include "generators.hpp"
#include "hardness.hpp"
#include "solver.hpp"
#include "verify.hpp"

namespace congestion::io {

using json = nlohmann::ordered_json;

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw validation_error(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline rational read_rational(const json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return rational(j.get<long>());
    throw validation_error("expected a rational as string or integer, got " + j.dump());
}

inline std::size_t read_index(const json& j, const char* what) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw validation_error(std::string("expected a non-negative integer ") + what + ", got " + j.dump());
    return j.get<std::size_t>();
}

} // namespace detail

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write " + path);
    out << text;
}

inline json parse(const std::string& text, const std::string& origin = "input") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error(origin + ": " + e.what());
    }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Instances

inline json to_json(const congestion_game& game) {
    json j;
    j["mode"] = to_string(game.mode());
    json resources = json::array();
    for (const auto& f : game.resources()) {
        json coeffs = json::array();
        for (const auto& c : f.coefficients()) coeffs.push_back(to_string(c));
        resources.push_back({{"coeffs", coeffs}});
    }
    j["resources"] = resources;
    json players = json::array();
    for (const auto& p : game.players()) players.push_back({{"strategies", p.strategies}});
    j["players"] = players;
    if (!game.player_labels.empty() || !game.resource_labels.empty() || !game.strategy_labels.empty()) {
        json labels;
        if (!game.player_labels.empty()) labels["players"] = game.player_labels;
        if (!game.resource_labels.empty()) labels["resources"] = game.resource_labels;
        if (!game.strategy_labels.empty()) labels["strategies"] = game.strategy_labels;
        j["labels"] = labels;
    }
    return j;
}

inline congestion_game game_from_json(const json& j) {
    game_mode mode = game_mode::standard;
    if (j.contains("mode")) {
        const auto m = j.at("mode").get<std::string>();
        if (m == "standard") mode = game_mode::standard;
        else if (m == "hardness") mode = game_mode::hardness;
        else throw validation_error("unknown mode '" + m + "'");
    }
    std::vector<latency_function> resources;
    for (const auto& r : detail::field(j, "resources")) {
        std::vector<rational> coeffs;
        for (const auto& c : detail::field(r, "coeffs")) coeffs.push_back(detail::read_rational(c));
        if (coeffs.empty()) throw validation_error("resource with no coefficients");
        resources.emplace_back(std::move(coeffs));
    }
    std::vector<player> players;
    for (const auto& p : detail::field(j, "players")) {
        player pl;
        for (const auto& s : detail::field(p, "strategies")) {
            strategy st;
            for (const auto& e : s) st.push_back(detail::read_index(e, "resource index"));
            pl.strategies.push_back(std::move(st));
        }
        players.push_back(std::move(pl));
    }
    congestion_game game(mode, std::move(resources), std::move(players));
    if (j.contains("labels")) {
        const auto& l = j.at("labels");
        if (l.contains("players")) game.player_labels = l.at("players").get<std::vector<std::string>>();
        if (l.contains("resources")) game.resource_labels = l.at("resources").get<std::vector<std::string>>();
        if (l.contains("strategies"))
            game.strategy_labels = l.at("strategies").get<std::vector<std::vector<std::string>>>();
    }
    return game;
}

inline congestion_game load_game(const std::string& path) { return game_from_json(parse(read_file(path), path)); }

// ---------------------------------------------------------------------------
// States

inline json to_json(const state& s) { return json{{"state", s.choice}}; }

inline state state_from_json(const json& j) {
    const json& arr = j.is_array() ? j : detail::field(j, "state");
    state s;
    for (const auto& v : arr) s.choice.push_back(detail::read_index(v, "strategy index"));
    return s;
}

inline state load_state(const std::string& path) { return state_from_json(parse(read_file(path), path)); }

// ---------------------------------------------------------------------------
// Traces

inline json to_json(const run_trace& t) {
    json moves = json::array();
    for (std::size_t k = 0; k < t.moves.size(); ++k) {
        const auto& m = t.moves[k];
        json r{{"step", k + 1},
               {"player", m.player},
               {"from", m.from},
               {"to", m.to},
               {"cost_before", to_string(m.cost_before)},
               {"cost_after", to_string(m.cost_after)},
               {"potential_before", to_string(m.potential_before)},
               {"potential_after", to_string(m.potential_after)}};
        r["phase"] = m.phase ? json(*m.phase) : json(nullptr);
        moves.push_back(std::move(r));
    }
    json phases = json::array();
    for (const auto& p : t.phases) phases.push_back({{"i", p.index}, {"block_size", p.block_size}, {"moves", p.moves}});
    json j;
    j["initial_state"] = t.initial_state.choice;
    j["moves"] = moves;
    j["phases"] = phases;
    j["summary"] = {{"moves", t.moves.size()},
                    {"final_potential", to_string(t.final_potential)},
                    {"final_state", t.final_state.choice},
                    {"truncated", t.truncated}};
    return j;
}

inline std::string trace_csv(const run_trace& t) {
    std::string out = "step,player,cost_before,cost_after,potential\n";
    for (std::size_t k = 0; k < t.moves.size(); ++k) {
        const auto& m = t.moves[k];
        out += std::to_string(k + 1) + "," + std::to_string(m.player) + "," + to_string(m.cost_before) + "," +
               to_string(m.cost_after) + "," + to_string(m.potential_after) + "\n";
    }
    return out;
}

inline json to_json(const solve_result& r) {
    json j = to_json(r.trace);
    j["parameters"] = {{"psi", r.psi},
                       {"degree", r.degree},
                       {"q", to_string(r.params.q)},
                       {"p", to_string(r.params.p)},
                       {"theta", to_string(r.params.theta)},
                       {"bound", to_string(r.bound)}};
    json bounds = json::array();
    for (const auto& b : r.partition.boundaries) bounds.push_back(to_string(b));
    j["blocks"] = {{"base", to_string(r.partition.base)},
                   {"count", r.partition.block_count},
                   {"boundaries", bounds},
                   {"block_of", r.partition.block_of}};
    return j;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const approx_report& r) {
    json per = json::array();
    for (const auto& f : r.per_player) per.push_back(to_string(f));
    return {{"factor", to_string(r.factor)},
            {"witness_player", r.witness_player},
            {"witness_strategy", r.witness_strategy},
            {"per_player", per}};
}

inline json counterexample(const congestion_game& game, const state& s) {
    return {{"instance", to_json(game)}, {"state", s.choice}};
}

inline json to_json(const audit_counter& c, const congestion_game& game) {
    json v = json::array();
    for (const auto& x : c.violations)
        v.push_back({{"check", x.check}, {"detail", x.detail}, {"counterexample", counterexample(game, x.at)}});
    return {{"trials", c.trials}, {"violations", v}};
}

inline json to_json(const audit_report& r, const congestion_game& game) {
    json j{{"clean", r.clean()},
           {"rosenthal", to_json(r.rosenthal, game)},
           {"sandwich", to_json(r.sandwich, game)},
           {"subadditivity", to_json(r.subadditivity, game)},
           {"potential_ratio", to_json(r.potential_ratio, game)}};
    j["max_potential_ratio"] = r.max_potential_ratio ? json(to_string(*r.max_potential_ratio)) : json(nullptr);
    return j;
}

inline json to_json(const hardness::structural_report& r, const congestion_game& game) {
    json j{{"pass", r.pass}, {"max_players", r.max_players}};
    if (r.crowded_resource) {
        const std::size_t e = *r.crowded_resource;
        j["crowded_resource"] = {{"index", e},
                                 {"players", r.players_per_resource[e]},
                                 {"label", e < game.resource_labels.size() ? game.resource_labels[e] : ""}};
    }
    json neg = json::array();
    for (auto [e, x] : r.negative_latencies) neg.push_back({{"resource", e}, {"load", x}});
    j["negative_latencies"] = neg;
    return j;
}

// ---------------------------------------------------------------------------
// Generator specs

inline gen_spec gen_spec_from_json(const json& j) {
    gen_spec s;
    auto get = [&](const char* key, auto& into) {
        if (j.contains(key)) into = j.at(key).get<std::remove_reference_t<decltype(into)>>();
    };
    get("seed", s.seed);
    get("players", s.players);
    get("resources", s.resources);
    get("strategies_per_player", s.strategies_per_player);
    get("min_strategy_size", s.min_strategy_size);
    get("max_strategy_size", s.max_strategy_size);
    get("degree", s.degree);
    get("coeff_min", s.coeff_min);
    get("coeff_max", s.coeff_max);
    get("symmetric", s.symmetric);
    return s;
}

// ---------------------------------------------------------------------------
// Flip circuits and bundles

namespace detail {

inline json wire_to_json(const hardness::wire& w) {
    using kind = hardness::wire::kind;
    switch (w.type) {
    case kind::input: return {{"x", w.index}};
    case kind::feedback: return {{"y", w.index}};
    case kind::gate: return {{"g", w.index}};
    case kind::constant: return {{"const", w.index}};
    }
    return nullptr;
}

inline hardness::wire wire_from_json(const json& j) {
    if (!j.is_object() || j.size() != 1) throw validation_error("wire reference must be a one-key object: " + j.dump());
    if (j.contains("x")) return hardness::wire::x(read_index(j.at("x"), "input index"));
    if (j.contains("y")) return hardness::wire::y(read_index(j.at("y"), "feedback index"));
    if (j.contains("g")) return hardness::wire::g(read_index(j.at("g"), "gate index"));
    if (j.contains("const")) {
        auto v = read_index(j.at("const"), "constant");
        if (v > 1) throw validation_error("constant wire must be 0 or 1");
        return hardness::wire::constant(v == 1);
    }
    throw validation_error("unknown wire reference " + j.dump());
}

inline json gates_to_json(const std::vector<hardness::nand_gate>& gates) {
    json out = json::array();
    for (const auto& g : gates) out.push_back({{"a", wire_to_json(g.a)}, {"b", wire_to_json(g.b)}});
    return out;
}

inline std::vector<hardness::nand_gate> gates_from_json(const json& j) {
    std::vector<hardness::nand_gate> out;
    for (const auto& g : j) out.push_back({wire_from_json(field(g, "a")), wire_from_json(field(g, "b"))});
    return out;
}

} // namespace detail

inline json to_json(const hardness::flip_instance& c) {
    return {{"inputs", c.inputs}, {"gates", detail::gates_to_json(c.gates)}, {"outputs", c.outputs}};
}

inline hardness::flip_instance flip_from_json(const json& j) {
    hardness::flip_instance c;
    c.inputs = detail::read_index(detail::field(j, "inputs"), "input count");
    c.gates = detail::gates_from_json(detail::field(j, "gates"));
    for (const auto& o : detail::field(j, "outputs")) c.outputs.push_back(detail::read_index(o, "output gate"));
    hardness::validate(c);
    return c;
}

inline json to_json(const hardness::gadget_circuit& c) {
    return {{"gates", detail::gates_to_json(c.gates)}, {"output", detail::wire_to_json(c.output)}};
}

inline hardness::gadget_circuit gadget_circuit_from_json(const json& j) {
    return {detail::gates_from_json(detail::field(j, "gates")), detail::wire_from_json(detail::field(j, "output"))};
}

/// flips are listed in (i, j, b) lexicographic order, all 0-based.
inline json to_json(const hardness::circuit_bundle& b) {
    json flips = json::array();
    for (const auto& c : b.flips) flips.push_back(to_json(c));
    return {{"inputs", b.inputs}, {"outputs", b.outputs}, {"base", to_json(b.base)}, {"flips", flips}};
}

inline hardness::circuit_bundle bundle_from_json(const json& j) {
    hardness::circuit_bundle b;
    b.inputs = detail::read_index(detail::field(j, "inputs"), "input count");
    b.outputs = detail::read_index(detail::field(j, "outputs"), "output count");
    b.base = gadget_circuit_from_json(detail::field(j, "base"));
    for (const auto& c : detail::field(j, "flips")) b.flips.push_back(gadget_circuit_from_json(c));
    hardness::validate(b);
    return b;
}

} // namespace congestion::io
