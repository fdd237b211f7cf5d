#pragma once

// Flip local search and its reduction to congestion games whose resources are
// each shared by at most two players and whose latencies are affine with
// possibly negative offsets.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"
#include "game.hpp"
#include "rational.hpp"

namespace congestion::hardness {

// ---------------------------------------------------------------------------
// Circuits

/// A gate input or circuit output: circuit input x_i, feedback bit y_j (the
/// value held by output player Y_j), an earlier gate, or a constant.
struct wire {
    enum class kind { input, feedback, gate, constant };
    kind type = kind::input;
    std::size_t index = 0;  // constants store their bit here

    static wire x(std::size_t i) { return {kind::input, i}; }
    static wire y(std::size_t j) { return {kind::feedback, j}; }
    static wire g(std::size_t k) { return {kind::gate, k}; }
    static wire constant(bool bit) { return {kind::constant, bit ? 1u : 0u}; }

    bool is_constant() const noexcept { return type == kind::constant; }
    friend auto operator<=>(const wire&, const wire&) = default;
};

struct nand_gate {
    wire a;
    wire b;
};

/// Flip instance: n inputs, NAND gates over inputs and earlier gates, and m
/// designated output gates y_1..y_m (y_1 least significant).
struct flip_instance {
    std::size_t inputs = 0;
    std::vector<nand_gate> gates;
    std::vector<std::size_t> outputs;
};

using bit_vector = std::vector<bool>;

inline void validate(const flip_instance& c) {
    auto check = [&](const wire& w, std::size_t k) {
        if (w.type == wire::kind::input) {
            if (w.index >= c.inputs)
                throw validation_error("gate " + std::to_string(k) + " reads missing input " + std::to_string(w.index));
        } else if (w.type == wire::kind::gate) {
            if (w.index >= k)
                throw validation_error("gate " + std::to_string(k) + " reads gate " + std::to_string(w.index) +
                                       "; fan-ins must reference earlier gates");
        } else {
            throw validation_error("gate " + std::to_string(k) + " of a flip instance may only read inputs and gates");
        }
    };
    for (std::size_t k = 0; k < c.gates.size(); ++k) {
        check(c.gates[k].a, k);
        check(c.gates[k].b, k);
    }
    if (c.outputs.empty()) throw validation_error("flip instance has no outputs");
    if (c.outputs.size() > 63) throw validation_error("flip objective supports at most 63 outputs");
    for (std::size_t o : c.outputs)
        if (o >= c.gates.size()) throw validation_error("output references missing gate " + std::to_string(o));
}

/// Gate values in topological order.
inline bit_vector evaluate_gates(const flip_instance& c, const bit_vector& x) {
    if (x.size() != c.inputs)
        throw validation_error("bit vector has length " + std::to_string(x.size()) + ", circuit has " +
                               std::to_string(c.inputs) + " inputs");
    bit_vector g(c.gates.size());
    auto value = [&](const wire& w) { return w.type == wire::kind::input ? x[w.index] : g[w.index]; };
    for (std::size_t k = 0; k < c.gates.size(); ++k) g[k] = !(value(c.gates[k].a) && value(c.gates[k].b));
    return g;
}

/// sum_i y_i 2^{i-1}.
inline std::uint64_t flip_objective(const flip_instance& c, const bit_vector& x) {
    auto g = evaluate_gates(c, x);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < c.outputs.size(); ++i)
        if (g[c.outputs[i]]) total |= std::uint64_t{1} << i;
    return total;
}

struct local_min_result {
    bool local_min = true;
    std::optional<bit_vector> improving_neighbor;  // first improving flip, by bit index
};

inline local_min_result flip_is_local_min(const flip_instance& c, const bit_vector& x) {
    const std::uint64_t here = flip_objective(c, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        bit_vector y = x;
        y[i] = !y[i];
        if (flip_objective(c, y) < here) return {false, std::move(y)};
    }
    return {};
}

// ---------------------------------------------------------------------------
// Latency pairs

/// Latency a with one user and b with two.
struct latency_pair {
    rational one;
    rational two;
};

/// f(x) = (b - a) x + 2a - b, so f(1) = a and f(2) = b.
inline latency_function pair_to_linear(const latency_pair& p) {
    return latency_function({2 * p.one - p.two, p.two - p.one});
}

struct gadget_params {
    rational alpha;
    rational beta;
    rational gamma;
    rational big_m;
    rational rho;
};

/// beta = alpha^{2K+1}, gamma = 2 alpha beta, M = alpha^6 gamma^{m+1} unless overridden.
inline gadget_params make_params(const rational& alpha, const rational& rho, std::size_t total_gates,
                                 std::size_t outputs, std::optional<rational> big_m = std::nullopt) {
    gadget_params p;
    p.alpha = alpha;
    p.rho = rho;
    p.beta = pow(alpha, 2 * total_gates + 1);
    p.gamma = 2 * alpha * p.beta;
    p.big_m = big_m ? *big_m : pow(alpha, 6) * pow(p.gamma, outputs + 1);
    return p;
}

inline void validate(const gadget_params& p, std::size_t total_gates) {
    if (p.alpha < 2 || p.alpha < p.rho)
        throw validation_error("alpha must be at least max(rho, 2); alpha=" + to_string(p.alpha) +
                               " rho=" + to_string(p.rho));
    if (!is_integer(p.alpha) || !is_integer(p.big_m))
        throw validation_error("hardness latencies must be integers: alpha and M must be integral");
    if (p.beta != pow(p.alpha, 2 * total_gates + 1))
        throw validation_error("beta must equal alpha^(2K+1) with K=" + std::to_string(total_gates));
    if (p.gamma != 2 * p.alpha * p.beta) throw validation_error("gamma must equal 2 alpha beta");
    if (!(p.alpha < p.beta && p.beta < p.gamma && p.gamma < p.big_m))
        throw validation_error("gadget parameters must satisfy alpha < beta < gamma < M");
}

// ---------------------------------------------------------------------------
// Circuit bundles

/// A circuit read by the game: NAND gates over inputs, feedback bits and
/// earlier gates, with a single output wire (possibly constant).
struct gadget_circuit {
    std::vector<nand_gate> gates;
    wire output = wire::constant(false);
};

/// S_0 plus one circuit S^j_{i,b} per input i, output j and bit b (0-based).
struct circuit_bundle {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    gadget_circuit base;
    std::vector<gadget_circuit> flips;  // index flip_index(i, j, b)

    std::size_t flip_index(std::size_t i, std::size_t j, int b) const { return (i * outputs + j) * 2 + (b ? 1 : 0); }
    const gadget_circuit& flip(std::size_t i, std::size_t j, int b) const { return flips.at(flip_index(i, j, b)); }

    std::size_t total_gates() const {
        std::size_t k = base.gates.size();
        for (const auto& c : flips) k += c.gates.size();
        return k;
    }
};

inline void validate(const gadget_circuit& c, std::size_t inputs, std::size_t outputs, const std::string& name) {
    auto check = [&](const wire& w, std::size_t limit_gate, bool allow_constant) {
        switch (w.type) {
        case wire::kind::input:
            if (w.index >= inputs) throw validation_error(name + ": missing input x" + std::to_string(w.index + 1));
            break;
        case wire::kind::feedback:
            if (w.index >= outputs) throw validation_error(name + ": missing feedback y" + std::to_string(w.index + 1));
            break;
        case wire::kind::gate:
            if (w.index >= limit_gate) throw validation_error(name + ": gate reference out of order");
            break;
        case wire::kind::constant:
            if (!allow_constant) throw validation_error(name + ": constant gate inputs are not supported");
            if (w.index > 1) throw validation_error(name + ": constant must be 0 or 1");
            break;
        }
    };
    for (std::size_t k = 0; k < c.gates.size(); ++k) {
        check(c.gates[k].a, k, false);
        check(c.gates[k].b, k, false);
    }
    check(c.output, c.gates.size(), true);
}

inline std::string flip_name(std::size_t i, std::size_t j, int b) {
    return "S^" + std::to_string(j + 1) + "_" + std::to_string(i + 1) + "," + std::to_string(b);
}

inline void validate(const circuit_bundle& bundle) {
    if (bundle.inputs == 0 || bundle.outputs == 0) throw validation_error("bundle needs inputs and outputs");
    if (bundle.flips.size() != 2 * bundle.inputs * bundle.outputs)
        throw validation_error("bundle must supply a circuit S^j_{i,b} for every i, j, b");
    validate(bundle.base, bundle.inputs, bundle.outputs, "S_0");
    for (std::size_t i = 0; i < bundle.inputs; ++i)
        for (std::size_t j = 0; j < bundle.outputs; ++j)
            for (int b = 0; b < 2; ++b)
                validate(bundle.flip(i, j, b), bundle.inputs, bundle.outputs, flip_name(i, j, b));
}

inline bool evaluate(const gadget_circuit& c, const bit_vector& x, const bit_vector& y) {
    std::vector<bool> g(c.gates.size());
    auto value = [&](const wire& w) -> bool {
        switch (w.type) {
        case wire::kind::input: return x.at(w.index);
        case wire::kind::feedback: return y.at(w.index);
        case wire::kind::gate: return g[w.index];
        case wire::kind::constant: return w.index != 0;
        }
        return false;
    };
    for (std::size_t k = 0; k < c.gates.size(); ++k) g[k] = !(value(c.gates[k].a) && value(c.gates[k].b));
    return value(c.output);
}

namespace detail {

// NAND builder with constant folding, double-negation removal and structural
// hashing; dead gates are dropped by finish().
class circuit_builder {
public:
    wire nand(wire a, wire b) {
        if (b < a) std::swap(a, b);
        if (a.is_constant() && a.index == 0) return wire::constant(true);
        if (b.is_constant() && b.index == 0) return wire::constant(true);
        if (a.is_constant()) return negate(b);
        if (b.is_constant()) return negate(a);
        if (complementary(a, b)) return wire::constant(true);
        return make(a, b);
    }

    wire negate(wire a) {
        if (a.is_constant()) return wire::constant(a.index == 0);
        if (a.type == wire::kind::gate) {
            const auto& g = gates_[a.index];
            if (g.a == g.b) return g.a;
        }
        return make(a, a);
    }

    wire conj(wire a, wire b) { return negate(nand(a, b)); }
    wire disj(wire a, wire b) { return nand(negate(a), negate(b)); }
    wire equal(wire a, wire b) { return disj(conj(a, b), conj(negate(a), negate(b))); }

    gadget_circuit finish(wire output) const {
        gadget_circuit out;
        if (output.type != wire::kind::gate) {
            out.output = output;
            return out;
        }
        std::vector<bool> live(gates_.size(), false);
        live[output.index] = true;
        for (std::size_t k = gates_.size(); k-- > 0;) {
            if (!live[k]) continue;
            for (const wire& w : {gates_[k].a, gates_[k].b})
                if (w.type == wire::kind::gate) live[w.index] = true;
        }
        std::vector<std::size_t> renumber(gates_.size(), 0);
        for (std::size_t k = 0; k < gates_.size(); ++k) {
            if (!live[k]) continue;
            renumber[k] = out.gates.size();
            auto remap = [&](wire w) { return w.type == wire::kind::gate ? wire::g(renumber[w.index]) : w; };
            out.gates.push_back({remap(gates_[k].a), remap(gates_[k].b)});
        }
        out.output = wire::g(renumber[output.index]);
        return out;
    }

private:
    bool complementary(const wire& a, const wire& b) const {
        auto is_not_of = [&](const wire& maybe_not, const wire& other) {
            if (maybe_not.type != wire::kind::gate) return false;
            const auto& g = gates_[maybe_not.index];
            return g.a == g.b && g.a == other;
        };
        return is_not_of(a, b) || is_not_of(b, a);
    }

    wire make(wire a, wire b) {
        auto key = std::make_pair(a, b);
        if (auto it = memo_.find(key); it != memo_.end()) return wire::g(it->second);
        gates_.push_back({a, b});
        memo_.emplace(key, gates_.size() - 1);
        return wire::g(gates_.size() - 1);
    }

    std::vector<nand_gate> gates_;
    std::map<std::pair<wire, wire>, std::size_t> memo_;
};

// Output wires of C with inputs given by `x` (constants allowed).
inline std::vector<wire> instantiate(circuit_builder& b, const flip_instance& c, const std::vector<wire>& x) {
    std::vector<wire> g(c.gates.size());
    auto value = [&](const wire& w) { return w.type == wire::kind::input ? x[w.index] : g[w.index]; };
    for (std::size_t k = 0; k < c.gates.size(); ++k) g[k] = b.nand(value(c.gates[k].a), value(c.gates[k].b));
    std::vector<wire> out;
    for (std::size_t o : c.outputs) out.push_back(g[o]);
    return out;
}

} // namespace detail

/// Non-normative bundle for a Flip instance C with m outputs:
///   S_0(x, y)            = [ c(x) <= y ]   (y read as an m-bit number)
///   S^j_{i,b}(x_{-i}, y) = [ C(x with x_i = b) has bit j clear and agrees
///                            with y on every bit above j ]
/// S^j_{i,b} never reads x_i, y_j or lower feedback bits, since those players
/// move while the circuit is locked.
inline circuit_bundle derive_subcircuits(const flip_instance& c) {
    validate(c);
    circuit_bundle bundle;
    bundle.inputs = c.inputs;
    bundle.outputs = c.outputs.size();
    const std::size_t n = c.inputs;
    const std::size_t m = c.outputs.size();

    {
        detail::circuit_builder b;
        std::vector<wire> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = wire::x(i);
        auto out = detail::instantiate(b, c, x);
        wire greater = wire::constant(false);
        wire equal_above = wire::constant(true);
        for (std::size_t j = m; j-- > 0;) {
            wire bit_gt = b.conj(out[j], b.negate(wire::y(j)));
            greater = b.disj(greater, b.conj(equal_above, bit_gt));
            equal_above = b.conj(equal_above, b.equal(out[j], wire::y(j)));
        }
        bundle.base = b.finish(b.negate(greater));
    }

    bundle.flips.resize(2 * n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (int bit = 0; bit < 2; ++bit) {
                detail::circuit_builder b;
                std::vector<wire> x(n);
                for (std::size_t k = 0; k < n; ++k) x[k] = k == i ? wire::constant(bit != 0) : wire::x(k);
                auto out = detail::instantiate(b, c, x);
                wire fire = b.negate(out[j]);
                for (std::size_t h = j + 1; h < m; ++h) fire = b.conj(fire, b.equal(out[h], wire::y(h)));
                bundle.flips[bundle.flip_index(i, j, bit)] = b.finish(fire);
            }
    return bundle;
}

// ---------------------------------------------------------------------------
// Game construction

namespace detail {

class game_builder {
public:
    std::size_t resource(const std::string& name, const latency_pair& pair) {
        if (auto it = index_.find(name); it != index_.end()) {
            const auto& old = pairs_[it->second];
            if (old.one != pair.one || old.two != pair.two)
                throw std::logic_error("resource " + name + " declared with two latency pairs");
            return it->second;
        }
        index_.emplace(name, names_.size());
        names_.push_back(name);
        pairs_.push_back(pair);
        return names_.size() - 1;
    }

    std::size_t add_player(std::string label) {
        player_labels_.push_back(std::move(label));
        players_.emplace_back();
        strategy_labels_.emplace_back();
        return players_.size() - 1;
    }

    void add_strategy(std::size_t p, std::string label, std::vector<std::size_t> resources) {
        std::sort(resources.begin(), resources.end());
        resources.erase(std::unique(resources.begin(), resources.end()), resources.end());
        players_[p].strategies.push_back(std::move(resources));
        strategy_labels_[p].push_back(player_labels_[p] + "." + std::move(label));
    }

    congestion_game build() const {
        std::vector<latency_function> fs;
        fs.reserve(pairs_.size());
        for (const auto& p : pairs_) fs.push_back(pair_to_linear(p));
        congestion_game g(game_mode::hardness, std::move(fs), players_);
        g.player_labels = player_labels_;
        g.resource_labels = names_;
        g.strategy_labels = strategy_labels_;
        return g;
    }

private:
    std::map<std::string, std::size_t> index_;
    std::vector<std::string> names_;
    std::vector<latency_pair> pairs_;
    std::vector<player> players_;
    std::vector<std::string> player_labels_;
    std::vector<std::vector<std::string>> strategy_labels_;
};

inline std::string idx(std::size_t i) { return std::to_string(i); }

} // namespace detail

/// Players in emission order: Controller, X_1..X_n, Y_1..Y_m, then G_k and
/// LockG_k for every gate. Gates of all circuits share one numbering k = K..1
/// in bundle order (S_0 first), so a gate's successors always carry a
/// smaller k and hence lighter Bit latencies alpha^{2k}.
struct flip_game_layout {
    std::size_t controller = 0;
    std::vector<std::size_t> x_players;
    std::vector<std::size_t> y_players;
    std::vector<std::size_t> gate_players;  // by global gate position
    std::vector<std::size_t> lock_players;
    std::size_t total_gates = 0;
};

inline flip_game_layout layout_of(const circuit_bundle& bundle) {
    flip_game_layout l;
    std::size_t next = 1;
    for (std::size_t i = 0; i < bundle.inputs; ++i) l.x_players.push_back(next++);
    for (std::size_t j = 0; j < bundle.outputs; ++j) l.y_players.push_back(next++);
    l.total_gates = bundle.total_gates();
    for (std::size_t k = 0; k < l.total_gates; ++k) {
        l.gate_players.push_back(next++);
        l.lock_players.push_back(next++);
    }
    return l;
}

/// Bit vector held by the X players (strategy index 0 = One, 1 = Zero).
inline bit_vector read_inputs(const circuit_bundle& bundle, const state& s) {
    auto l = layout_of(bundle);
    bit_vector x(bundle.inputs);
    for (std::size_t i = 0; i < bundle.inputs; ++i) x[i] = s[l.x_players[i]] == 0;
    return x;
}

/// Materialises the Controller, gate (G), input (X), lock (LockG) and output (Y)
/// player tables. Where the published tables would place a resource in three
/// or more players' strategies, each sharing pair gets its own copy (suffix
/// "(Y_j)" etc.); every resource is used by at most two players. Each circuit
/// output is wired to the Controller's lock strategy for that circuit through
/// an Output resource that the output gate pays for when it reads 0.
inline congestion_game build_flip_game(const circuit_bundle& bundle, const gadget_params& params) {
    validate(bundle);
    const std::size_t n = bundle.inputs;
    const std::size_t m = bundle.outputs;
    const std::size_t total = bundle.total_gates();
    validate(params, total);

    using detail::idx;
    const rational& a = params.alpha;
    const rational& beta = params.beta;
    const rational& gamma = params.gamma;
    const rational& big_m = params.big_m;
    const latency_pair m2{0, pow(big_m, 2)}, m3{0, pow(big_m, 3)}, m4{0, pow(big_m, 4)}, m5{0, pow(big_m, 5)};
    const latency_pair lock_gate_pair{0, big_m};
    auto constant = [](const rational& v) { return latency_pair{v, v}; };
    auto bit_pair = [&](std::size_t k) { return latency_pair{0, pow(a, 2 * k)}; };
    auto trigger_y_pair = [&](std::size_t j) { return latency_pair{0, 5 * pow(a, 5) * pow(gamma, j + 1)}; };
    const latency_pair trigger_lock_pair{0, a * a};
    const latency_pair trigger_unlock_pair{a, pow(a, 3)};

    // Flatten circuits: circuit 0 is S_0, circuit 1 + flip_index(i,j,b) is S^j_{i,b}.
    std::vector<const gadget_circuit*> circuits{&bundle.base};
    std::vector<std::string> circuit_names{"S_0"};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (int b = 0; b < 2; ++b) {
                circuits.push_back(&bundle.flip(i, j, b));
                circuit_names.push_back(flip_name(i, j, b));
            }
    std::vector<std::size_t> first_gate(circuits.size());  // global position of gate 0
    {
        std::size_t pos = 0;
        for (std::size_t c = 0; c < circuits.size(); ++c) {
            first_gate[c] = pos;
            pos += circuits[c]->gates.size();
        }
    }
    auto weight_index = [&](std::size_t pos) { return total - pos; };  // k in 1..K

    struct reader {
        std::size_t gate_pos;
        char side;
    };
    std::vector<std::vector<reader>> readers_of_gate(total), readers_of_x(n), readers_of_y(m);
    std::vector<std::size_t> circuit_of_gate(total);
    std::vector<std::vector<std::string>> outputs_of_gate(total), outputs_of_x(n), outputs_of_y(m);

    for (std::size_t c = 0; c < circuits.size(); ++c) {
        const auto& circ = *circuits[c];
        for (std::size_t g = 0; g < circ.gates.size(); ++g) {
            const std::size_t pos = first_gate[c] + g;
            circuit_of_gate[pos] = c;
            for (auto [w, side] : {std::pair{circ.gates[g].a, 'a'}, std::pair{circ.gates[g].b, 'b'}}) {
                if (w.type == wire::kind::gate) readers_of_gate[first_gate[c] + w.index].push_back({pos, side});
                else if (w.type == wire::kind::input) readers_of_x[w.index].push_back({pos, side});
                else if (w.type == wire::kind::feedback) readers_of_y[w.index].push_back({pos, side});
            }
        }
        const std::string out_name = "Output(" + circuit_names[c] + ")";
        switch (circ.output.type) {
        case wire::kind::gate: outputs_of_gate[first_gate[c] + circ.output.index].push_back(out_name); break;
        case wire::kind::input: outputs_of_x[circ.output.index].push_back(out_name); break;
        case wire::kind::feedback: outputs_of_y[circ.output.index].push_back(out_name); break;
        case wire::kind::constant: break;
        }
    }

    detail::game_builder gb;
    auto R = [&](const std::string& name, const latency_pair& p) { return gb.resource(name, p); };

    // Names of per-gate resources; k is the weight index.
    auto gate_label = [&](std::size_t pos) { return "G_" + idx(weight_index(pos)); };
    auto lock_label = [&](std::size_t pos) { return "LockG_" + idx(weight_index(pos)); };
    auto bit_name = [&](int value, char side, std::size_t pos) {
        return "Bit" + idx(value) + side + "_" + idx(weight_index(pos));
    };
    auto lock_name = [&](int value, char side, std::size_t pos, const std::string& owner) {
        return "Lock" + idx(value) + side + "_" + idx(weight_index(pos)) + "(" + owner + ")";
    };
    auto lockgate_name = [&](std::size_t input_pos, const std::string& holder) {
        return "LockGate_" + idx(weight_index(input_pos)) + "(" + holder + ")";
    };
    auto y_label = [&](std::size_t j) { return "Y_" + idx(j + 1); };
    auto x_label = [&](std::size_t i) { return "X_" + idx(i + 1); };

    // Resources a provider (gate, X or Y player) uses when signalling `value`.
    auto signal = [&](const std::vector<reader>& readers, int value, const std::string& owner,
                      std::vector<std::size_t>& into) {
        for (const auto& r : readers) {
            into.push_back(R(bit_name(value, r.side, r.gate_pos), bit_pair(weight_index(r.gate_pos))));
            into.push_back(R(lock_name(value, r.side, r.gate_pos, owner), m3));
        }
    };

    auto provider_label = [&](std::size_t c, const wire& w) -> std::string {
        switch (w.type) {
        case wire::kind::gate: return gate_label(first_gate[c] + w.index);
        case wire::kind::input: return x_label(w.index);
        case wire::kind::feedback: return y_label(w.index);
        default: return "";
        }
    };

    auto is_base_gate = [&](std::size_t pos) { return circuit_of_gate[pos] == 0; };

    // --- Controller
    const std::size_t controller = gb.add_player("Controller");
    {
        std::vector<std::size_t> s;
        s.push_back(R("Lock_0", constant(beta)));
        for (std::size_t j = 0; j < m; ++j) s.push_back(R("BlockS_0(" + y_label(j) + ")", m2));
        for (std::size_t pos = 0; pos < total; ++pos) {
            if (is_base_gate(pos)) s.push_back(R(lockgate_name(pos, "Controller"), m2));
            else s.push_back(R("TriggerLockG_" + idx(weight_index(pos)), trigger_lock_pair));
        }
        if (circuits[0]->output.is_constant() && circuits[0]->output.index == 0)
            s.push_back(R("Output(S_0)", constant(pow(big_m, 2))));
        else if (!circuits[0]->output.is_constant())
            s.push_back(R("Output(S_0)", m2));
        gb.add_strategy(controller, "LockS_0", std::move(s));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (int b = 0; b < 2; ++b) {
                const std::size_t c = 1 + bundle.flip_index(i, j, b);
                std::vector<std::size_t> s;
                for (std::size_t jj = 0; jj < m; ++jj) {
                    s.push_back(R("TriggerController(" + y_label(jj) + ")", latency_pair{1, beta * beta}));
                    s.push_back(R("BlockS^" + circuit_names[c].substr(2) + "(" + y_label(jj) + ")", m2));
                }
                s.push_back(R("BlockY_" + idx(j + 1), m2));
                for (std::size_t g = 0; g < circuits[c]->gates.size(); ++g)
                    s.push_back(R(lockgate_name(first_gate[c] + g, "Controller"), m2));
                const wire& out = circuits[c]->output;
                const std::string out_name = "Output(" + circuit_names[c] + ")";
                if (out.is_constant()) {
                    if (out.index == 0) s.push_back(R(out_name, constant(pow(big_m, 2))));
                } else {
                    s.push_back(R(out_name, m2));
                }
                gb.add_strategy(controller, "Lock" + circuit_names[c], std::move(s));
            }
    {
        std::vector<std::size_t> s{R("Reset1", constant(2 * big_m))};
        for (std::size_t j = 0; j < m; ++j) s.push_back(R("TriggerY_" + idx(j + 1) + "(Controller)", trigger_y_pair(j)));
        for (std::size_t pos = 0; pos < total; ++pos)
            s.push_back(R("TriggerUnlockG_" + idx(weight_index(pos)), trigger_unlock_pair));
        gb.add_strategy(controller, "Reset1", std::move(s));
    }
    {
        std::vector<std::size_t> s{R("Reset2", constant(big_m))};
        for (std::size_t j = 0; j < m; ++j) s.push_back(R("ResetDone_" + idx(j + 1), m5));
        for (std::size_t pos = 0; pos < total; ++pos)
            if (is_base_gate(pos)) s.push_back(R("TriggerLockG_" + idx(weight_index(pos)), trigger_lock_pair));
        gb.add_strategy(controller, "Reset2", std::move(s));
    }

    // --- X players: strategy 0 = One, 1 = Zero
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = gb.add_player(x_label(i));
        for (int value : {1, 0}) {
            std::vector<std::size_t> s;
            for (std::size_t j = 0; j < m; ++j) {
                const std::string yj = "(" + y_label(j) + ")";
                s.push_back(R("TriggerX_" + idx(i + 1) + "," + idx(1 - value) + yj, latency_pair{0, a * beta}));
                s.push_back(R("BlockX_" + idx(i + 1) + "," + idx(value) + yj, m4));
            }
            signal(readers_of_x[i], value, x_label(i), s);
            if (value == 0)
                for (const auto& o : outputs_of_x[i]) s.push_back(R(o, m2));
            gb.add_strategy(p, value ? "One" : "Zero", std::move(s));
        }
    }

    // --- Y players: One, Change^j_{i,b}..., Check^j_{i,b}..., Zero
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t p = gb.add_player(y_label(j));
        const std::string yj = "(" + y_label(j) + ")";
        std::vector<std::size_t> trigger_self{R("TriggerY_" + idx(j + 1) + "(Controller)", trigger_y_pair(j))};
        for (std::size_t jj = j + 1; jj < m; ++jj)
            trigger_self.push_back(R("TriggerY_" + idx(j + 1) + "(" + y_label(jj) + ")", trigger_y_pair(j)));
        auto others_blocked = [&](std::size_t i, int b, std::vector<std::size_t>& s) {
            for (std::size_t i2 = 0; i2 < n; ++i2)
                for (std::size_t j2 = 0; j2 < m; ++j2)
                    for (int b2 = 0; b2 < 2; ++b2)
                        if (std::tie(i2, j2, b2) != std::tie(i, j, b))
                            s.push_back(R("BlockS^" + flip_name(i2, j2, b2).substr(2) + yj, m2));
        };
        {
            std::vector<std::size_t> s{R("One_" + idx(j + 1), constant(4 * pow(a, 4) * pow(gamma, j + 1)))};
            signal(readers_of_y[j], 1, y_label(j), s);
            gb.add_strategy(p, "One", std::move(s));
        }
        for (std::size_t i = 0; i < n; ++i)
            for (int b = 0; b < 2; ++b) {
                std::vector<std::size_t> s{R("Change_" + idx(j + 1), constant(3 * pow(a, 3) * pow(gamma, j + 1))),
                                           R("BlockS_0" + yj, m2),
                                           R("TriggerX_" + idx(i + 1) + "," + idx(b) + yj, latency_pair{0, a * beta}),
                                           R("ResetDone_" + idx(j + 1), m5)};
                s.insert(s.end(), trigger_self.begin(), trigger_self.end());
                for (std::size_t jj = 0; jj < j; ++jj)
                    s.push_back(R("TriggerY_" + idx(jj + 1) + yj, trigger_y_pair(jj)));
                others_blocked(i, b, s);
                signal(readers_of_y[j], 1, y_label(j), s);
                gb.add_strategy(p, "Change^" + flip_name(i, j, b).substr(2), std::move(s));
            }
        for (std::size_t i = 0; i < n; ++i)
            for (int b = 0; b < 2; ++b) {
                std::vector<std::size_t> s{R("Check_" + idx(j + 1), constant(2 * a * a * pow(gamma, j + 1))),
                                           R("BlockX_" + idx(i + 1) + "," + idx(1 - b) + yj, m4),
                                           R("TriggerController" + yj, latency_pair{1, beta * beta}),
                                           R("ResetDone_" + idx(j + 1), m5)};
                s.insert(s.end(), trigger_self.begin(), trigger_self.end());
                for (std::size_t jj = 0; jj < j; ++jj) s.push_back(R("TriggerDoneY_" + idx(jj + 1) + yj, m4));
                others_blocked(i, b, s);
                signal(readers_of_y[j], 0, y_label(j), s);
                for (const auto& o : outputs_of_y[j]) s.push_back(R(o, m2));
                for (std::size_t pos = 0; pos < total; ++pos)
                    if (is_base_gate(pos))
                        s.push_back(R("TriggerLockG_" + idx(weight_index(pos)) + yj, trigger_lock_pair));
                gb.add_strategy(p, "Check^" + flip_name(i, j, b).substr(2), std::move(s));
            }
        {
            std::vector<std::size_t> s{R("BlockY_" + idx(j + 1), m2), R("ResetDone_" + idx(j + 1), m5)};
            s.insert(s.end(), trigger_self.begin(), trigger_self.end());
            for (std::size_t jj = j + 1; jj < m; ++jj)
                s.push_back(R("TriggerDoneY_" + idx(j + 1) + "(" + y_label(jj) + ")", m4));
            signal(readers_of_y[j], 0, y_label(j), s);
            for (const auto& o : outputs_of_y[j]) s.push_back(R(o, m2));
            gb.add_strategy(p, "Zero", std::move(s));
        }
    }

    // --- Gate and lock players
    for (std::size_t c = 0; c < circuits.size(); ++c) {
        const auto& circ = *circuits[c];
        for (std::size_t g = 0; g < circ.gates.size(); ++g) {
            const std::size_t pos = first_gate[c] + g;
            const std::size_t k = weight_index(pos);
            const std::string self = gate_label(pos);
            const std::size_t gp = gb.add_player(self);

            for (char side : {'a', 'b'}) {
                std::vector<std::size_t> s{R(bit_name(1, side, pos), bit_pair(k)), R(lock_name(1, side, pos, self), m3)};
                signal(readers_of_gate[pos], 1, self, s);
                gb.add_strategy(gp, side == 'a' ? "OneA" : "OneB", std::move(s));
            }
            {
                std::vector<std::size_t> s{R(bit_name(0, 'a', pos), bit_pair(k)), R(bit_name(0, 'b', pos), bit_pair(k)),
                                           R(lock_name(0, 'a', pos, self), m3), R(lock_name(0, 'b', pos, self), m3)};
                signal(readers_of_gate[pos], 0, self, s);
                for (const auto& o : outputs_of_gate[pos]) s.push_back(R(o, m2));
                gb.add_strategy(gp, "Zero", std::move(s));
            }

            const std::string lock_self = lock_label(pos);
            const std::size_t lp = gb.add_player(lock_self);
            const nand_gate& gate = circ.gates[g];
            struct variant {
                int va, vb, out;
            };
            for (variant v : {variant{0, 0, 1}, variant{1, 0, 1}, variant{0, 1, 1}, variant{1, 1, 0}}) {
                std::vector<std::size_t> s{R("TriggerUnlockG_" + idx(k), trigger_unlock_pair)};
                const int forbid_out = 1 - v.out;
                s.push_back(R(lock_name(forbid_out, 'a', pos, self), m3));
                s.push_back(R(lock_name(forbid_out, 'b', pos, self), m3));
                for (auto [w, side, value] : {std::tuple{gate.a, 'a', v.va}, std::tuple{gate.b, 'b', v.vb}}) {
                    s.push_back(R(lock_name(1 - value, side, pos, provider_label(c, w)), m3));
                    if (w.type == wire::kind::gate)
                        s.push_back(R(lockgate_name(first_gate[c] + w.index, lock_self), lock_gate_pair));
                }
                gb.add_strategy(lp, "Lock" + idx(v.va) + idx(v.vb) + idx(v.out), std::move(s));
            }
            {
                std::vector<std::size_t> s{R(lockgate_name(pos, "Controller"), m2),
                                           R("TriggerLockG_" + idx(k), trigger_lock_pair)};
                if (is_base_gate(pos))
                    for (std::size_t j = 0; j < m; ++j)
                        s.push_back(R("TriggerLockG_" + idx(k) + "(" + y_label(j) + ")", trigger_lock_pair));
                for (const auto& r : readers_of_gate[pos]) s.push_back(R(lockgate_name(pos, lock_label(r.gate_pos)), lock_gate_pair));
                gb.add_strategy(lp, "Unlock", std::move(s));
            }
        }
    }

    return gb.build();
}

// ---------------------------------------------------------------------------
// Rescaling and structural checks

/// f(1) = 0 becomes 1; every other value at loads 1 and 2 is multiplied by
/// |E| * alpha. Requires integral latencies at loads 1 and 2.
inline congestion_game positivize(const congestion_game& game, const rational& alpha,
                                  std::optional<std::size_t> resource_count = std::nullopt) {
    if (alpha < 2) throw validation_error("positivize needs alpha >= 2");
    const rational scale = rational(static_cast<unsigned long>(resource_count.value_or(game.resource_count()))) * alpha;
    std::vector<latency_function> fs;
    fs.reserve(game.resource_count());
    for (std::size_t e = 0; e < game.resource_count(); ++e) {
        const auto& f = game.resource(e);
        rational one = f(1), two = f(2);
        if (!is_integer(one) || !is_integer(two))
            throw validation_error("positivize needs integral latencies; resource " + std::to_string(e) + " is not");
        latency_pair p{sgn(one) == 0 ? rational(1) : one * scale, two * scale};
        fs.push_back(pair_to_linear(p));
    }
    congestion_game out(game.mode(), std::move(fs), game.players());
    out.player_labels = game.player_labels;
    out.resource_labels = game.resource_labels;
    out.strategy_labels = game.strategy_labels;
    return out;
}

struct structural_report {
    bool pass = true;
    std::vector<std::size_t> players_per_resource;
    std::size_t max_players = 0;
    std::optional<std::size_t> crowded_resource;  // first resource above two players
    std::vector<std::pair<std::size_t, std::int64_t>> negative_latencies;  // (resource, load)
};

/// Every resource in at most two players' strategy sets, and f(1), f(2) >= 0.
inline structural_report structural_check(const congestion_game& game) {
    structural_report r;
    r.players_per_resource.assign(game.resource_count(), 0);
    std::vector<std::size_t> last_seen(game.resource_count(), SIZE_MAX);
    for (std::size_t u = 0; u < game.player_count(); ++u)
        for (const auto& s : game.strategies(u))
            for (std::size_t e : s)
                if (last_seen[e] != u) {
                    last_seen[e] = u;
                    ++r.players_per_resource[e];
                }
    for (std::size_t e = 0; e < game.resource_count(); ++e) {
        r.max_players = std::max(r.max_players, r.players_per_resource[e]);
        if (r.players_per_resource[e] > 2 && !r.crowded_resource) r.crowded_resource = e;
        for (std::int64_t x : {1, 2})
            if (sgn(game.resource(e)(x)) < 0) r.negative_latencies.emplace_back(e, x);
    }
    r.pass = r.max_players <= 2 && r.negative_latencies.empty();
    return r;
}

} // namespace congestion::hardness
