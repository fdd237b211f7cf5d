#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "game.hpp"

namespace congestion {

struct strategy_choice {
    std::size_t index = 0;
    rational cost;
};

/// Minimum cost u could have with nobody else in the game, and the strategy
/// attaining it (lowest index on ties). This is BR_u(0).
inline strategy_choice optimistic_cost(const congestion_game& game, std::size_t u) {
    const auto& strategies = game.strategies(u);
    strategy_choice best;
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        rational cost(0);
        for (std::size_t e : strategies[s]) cost += game.latency(e, 1);
        if (s == 0 || cost < best.cost) best = {s, cost};
    }
    return best;
}

/// Exhaustive best response; ties go to the lowest strategy index.
template <cost_model M>
strategy_choice best_response(const M& model, const state& s, const load_vector& loads, std::size_t u) {
    const auto& strategies = model.strategies(u);
    strategy_choice best;
    for (std::size_t alt = 0; alt < strategies.size(); ++alt) {
        rational cost = deviation_cost(model, s, loads, u, alt);
        if (alt == 0 || cost < best.cost) best = {alt, std::move(cost)};
    }
    return best;
}

template <cost_model M>
strategy_choice best_response(const M& model, const state& s, std::size_t u) {
    return best_response(model, s, load_profile(model, s), u);
}

struct threshold_move {
    std::size_t to = 0;
    rational cost_before;
    rational cost_after;
};

inline void require_threshold(const rational& q) {
    if (q < 1) throw config_error("move threshold q must be at least 1, got " + to_string(q));
}

/// The best response of u when its cost is strictly below c_u(S)/q, otherwise
/// nothing. A player at cost zero never has such a move.
template <cost_model M>
std::optional<threshold_move> find_threshold_move(const M& model, const state& s, const load_vector& loads,
                                                  std::size_t u, const rational& q) {
    require_threshold(q);
    rational current = player_cost(model, s, loads, u);
    if (sgn(current) <= 0) return std::nullopt;
    auto br = best_response(model, s, loads, u);
    // br < current / q  <=>  br * q < current, q > 0
    if (br.cost * q < current) return threshold_move{br.index, std::move(current), std::move(br.cost)};
    return std::nullopt;
}

template <cost_model M>
std::optional<threshold_move> find_threshold_move(const M& model, const state& s, std::size_t u, const rational& q) {
    return find_threshold_move(model, s, load_profile(model, s), u, q);
}

struct move_record {
    std::size_t player = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    rational cost_before;
    rational cost_after;
    rational potential_before;
    rational potential_after;
    std::optional<std::size_t> phase;
};

struct phase_summary {
    std::size_t index = 0;
    std::size_t block_size = 0;
    std::size_t moves = 0;
};

struct run_trace {
    state initial_state;
    std::vector<move_record> moves;
    std::vector<phase_summary> phases;
    state final_state;
    rational final_potential;
    bool truncated = false;
};

enum class player_order { round_robin, seeded_random };

struct dynamics_config {
    rational epsilon{1, 10};
    std::uint64_t move_cap = 100000;
    player_order order = player_order::round_robin;
    std::uint64_t seed = 0;
};

/// Baseline (1+eps)-improvement dynamics. Players are scanned in order; the
/// first one holding a (1+eps)-move plays its best response. Stops when a full
/// pass finds nobody, or at the move cap (truncated flag set).
inline run_trace epsilon_br_dynamics(const congestion_game& game, const state& start, const dynamics_config& config) {
    if (game.mode() != game_mode::standard)
        throw config_error("improvement dynamics requires a standard-mode game");
    if (sgn(config.epsilon) <= 0) throw config_error("epsilon must be positive");
    const rational q = 1 + config.epsilon;

    tracked_state current(game, start);
    run_trace trace;
    trace.initial_state = start;
    rational phi = rosenthal_potential(game, current.loads());

    const std::size_t n = game.player_count();
    std::vector<std::size_t> order(n);
    for (std::size_t u = 0; u < n; ++u) order[u] = u;
    std::mt19937_64 rng(config.seed);

    // Distinct players checked without a move since the last move; a reshuffle
    // can revisit a player before everyone has been looked at.
    std::vector<bool> idle_seen(n, false);
    std::size_t idle = 0;
    std::size_t cursor = 0;
    while (n > 0 && idle < n) {
        if (cursor == 0 && config.order == player_order::seeded_random) std::shuffle(order.begin(), order.end(), rng);
        std::size_t u = order[cursor];
        cursor = (cursor + 1) % n;
        auto move = find_threshold_move(game, current.current(), current.loads(), u, q);
        if (!move) {
            if (!idle_seen[u]) {
                idle_seen[u] = true;
                ++idle;
            }
            continue;
        }
        if (trace.moves.size() >= config.move_cap) {
            trace.truncated = true;
            break;
        }
        idle = 0;
        std::fill(idle_seen.begin(), idle_seen.end(), false);
        move_record rec;
        rec.player = u;
        rec.from = current[u];
        rec.to = move->to;
        rec.cost_before = move->cost_before;
        rec.cost_after = move->cost_after;
        rec.potential_before = phi;
        current.move(u, move->to);
        phi = rosenthal_potential(game, current.loads());
        rec.potential_after = phi;
        trace.moves.push_back(std::move(rec));
    }
    trace.final_state = current.current();
    trace.final_potential = phi;
    return trace;
}

} // namespace congestion
