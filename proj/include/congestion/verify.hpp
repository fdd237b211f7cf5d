#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "game.hpp"
#include "solver.hpp"

namespace congestion {

/// A non-negative rational or +infinity.
struct extended_ratio {
    bool infinite = false;
    rational value{0};

    static extended_ratio infinity() { return {true, rational(0)}; }
    static extended_ratio finite(rational v) { return {false, std::move(v)}; }

    friend bool operator==(const extended_ratio& a, const extended_ratio& b) {
        return a.infinite == b.infinite && (a.infinite || a.value == b.value);
    }
    friend bool operator<(const extended_ratio& a, const extended_ratio& b) {
        if (a.infinite) return false;
        if (b.infinite) return true;
        return a.value < b.value;
    }
    friend bool operator<=(const extended_ratio& a, const extended_ratio& b) { return !(b < a); }
};

inline std::string to_string(const extended_ratio& r) { return r.infinite ? "inf" : to_string(r.value); }

/// cost / deviation with 0/0 -> 1 and positive/0 -> infinity.
inline extended_ratio improvement_ratio(const rational& cost, const rational& deviation) {
    if (sgn(deviation) == 0) return sgn(cost) == 0 ? extended_ratio::finite(rational(1)) : extended_ratio::infinity();
    return extended_ratio::finite(cost / deviation);
}

/// True when cost/deviation (same conventions) is strictly above rho.
inline bool ratio_exceeds(const rational& cost, const rational& deviation, const rational& rho) {
    if (sgn(deviation) == 0) return sgn(cost) == 0 ? rho < 1 : true;
    return cost > rho * deviation;
}

inline std::size_t default_enumeration_budget() {
    if (const char* env = std::getenv("CGAME_ENUM_BUDGET")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::size_t{1} << 20;
}

struct approx_report {
    extended_ratio factor = extended_ratio::finite(rational(1));
    std::size_t witness_player = 0;
    std::size_t witness_strategy = 0;
    std::vector<extended_ratio> per_player;

    bool within(const rational& rho) const { return !factor.infinite && factor.value <= rho; }
};

/// Exhaustive: every player against every one of its strategies.
inline approx_report approximation_factor(const congestion_game& game, const state& s) {
    const auto loads = load_profile(game, s);
    approx_report report;
    report.per_player.assign(game.player_count(), extended_ratio::finite(rational(1)));
    bool first = true;
    for (std::size_t u = 0; u < game.player_count(); ++u) {
        const rational cost = player_cost(game, s, loads, u);
        for (std::size_t alt = 0; alt < game.strategies(u).size(); ++alt) {
            auto r = improvement_ratio(cost, deviation_cost(game, s, loads, u, alt));
            if (report.per_player[u] < r) report.per_player[u] = r;
            if (first || report.factor < r) {
                report.factor = r;
                report.witness_player = u;
                report.witness_strategy = alt;
                first = false;
            }
        }
    }
    return report;
}

inline integer state_space_size(const congestion_game& game) {
    integer total(1);
    for (std::size_t u = 0; u < game.player_count(); ++u)
        total *= static_cast<unsigned long>(game.strategies(u).size());
    return total;
}

inline void require_budget(const congestion_game& game, std::size_t budget) {
    integer size = state_space_size(game);
    if (size > integer(static_cast<unsigned long>(budget)))
        throw budget_exceeded("state space has " + to_string(size) + " states, enumeration budget is " +
                              std::to_string(budget));
}

namespace detail {

// Lexicographic odometer over all states; the last player varies fastest.
template <class Visit>
void for_each_state(const congestion_game& game, Visit&& visit) {
    const std::size_t n = game.player_count();
    tracked_state cur(game, state{std::vector<std::size_t>(n, 0)});
    while (true) {
        visit(cur);
        std::size_t u = n;
        while (u > 0) {
            --u;
            if (cur[u] + 1 < game.strategies(u).size()) {
                cur.move(u, cur[u] + 1);
                break;
            }
            cur.move(u, 0);
            if (u == 0) return;
        }
        if (n == 0) return;
    }
}

} // namespace detail

struct min_potential {
    state argmin;
    rational potential;
};

/// Global minimum of the potential by enumeration; lexicographically smallest
/// minimiser on ties. Refuses when the state space exceeds the budget.
inline min_potential brute_min_potential(const congestion_game& game,
                                         std::size_t budget = default_enumeration_budget()) {
    require_budget(game, budget);
    min_potential best;
    bool have = false;
    detail::for_each_state(game, [&](const tracked_state& cur) {
        rational phi = rosenthal_potential(game, cur.loads());
        if (!have || phi < best.potential) {
            best = {cur.current(), std::move(phi)};
            have = true;
        }
    });
    return best;
}

/// All states whose approximation factor is at most rho (nullopt = infinity),
/// in lexicographic order. The search assigns players one at a time and checks
/// a player as soon as everyone who could share a resource with it is fixed,
/// so sparse games prune early; dense games degrade to plain enumeration.
inline std::vector<state> enumerate_equilibria(const congestion_game& game, const std::optional<rational>& rho,
                                               std::size_t budget = default_enumeration_budget()) {
    require_budget(game, budget);
    std::vector<state> out;
    const std::size_t n = game.player_count();
    if (!rho) {
        detail::for_each_state(game, [&](const tracked_state& cur) { out.push_back(cur.current()); });
        return out;
    }

    // Interaction neighbourhoods.
    std::vector<std::vector<std::size_t>> users(game.resource_count());
    for (std::size_t u = 0; u < n; ++u) {
        std::vector<std::size_t> mentioned;
        for (const auto& s : game.strategies(u)) mentioned.insert(mentioned.end(), s.begin(), s.end());
        std::sort(mentioned.begin(), mentioned.end());
        mentioned.erase(std::unique(mentioned.begin(), mentioned.end()), mentioned.end());
        for (std::size_t e : mentioned) users[e].push_back(u);
    }
    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t u = 0; u < n; ++u) {
        auto& nb = neighbours[u];
        for (const auto& s : game.strategies(u))
            for (std::size_t e : s) nb.insert(nb.end(), users[e].begin(), users[e].end());
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }

    // Greedy order: most already-placed neighbours first, then degree, then index.
    std::vector<std::size_t> order;
    std::vector<std::size_t> position(n, n);
    std::vector<std::size_t> placed_neighbours(n, 0);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t best = n;
        for (std::size_t u = 0; u < n; ++u) {
            if (position[u] != n) continue;
            if (best == n || placed_neighbours[u] > placed_neighbours[best] ||
                (placed_neighbours[u] == placed_neighbours[best] && neighbours[u].size() > neighbours[best].size()))
                best = u;
        }
        position[best] = step;
        order.push_back(best);
        for (std::size_t v : neighbours[best]) ++placed_neighbours[v];
    }
    std::vector<std::vector<std::size_t>> check_at(n);
    for (std::size_t u = 0; u < n; ++u) {
        std::size_t last = position[u];
        for (std::size_t v : neighbours[u]) last = std::max(last, position[v]);
        check_at[last].push_back(u);
    }

    state cur{std::vector<std::size_t>(n, 0)};
    load_vector loads(game.resource_count(), 0);
    auto stable = [&](std::size_t u) {
        const rational cost = player_cost(game, cur, loads, u);
        for (std::size_t alt = 0; alt < game.strategies(u).size(); ++alt)
            if (ratio_exceeds(cost, deviation_cost(game, cur, loads, u, alt), *rho)) return false;
        return true;
    };
    auto recurse = [&](auto&& self, std::size_t depth) -> void {
        if (depth == n) {
            out.push_back(cur);
            return;
        }
        const std::size_t u = order[depth];
        for (std::size_t s = 0; s < game.strategies(u).size(); ++s) {
            cur[u] = s;
            for (std::size_t e : game.strategies(u)[s]) ++loads[e];
            bool ok = true;
            for (std::size_t v : check_at[depth])
                if (!stable(v)) {
                    ok = false;
                    break;
                }
            if (ok) self(self, depth + 1);
            for (std::size_t e : game.strategies(u)[s]) --loads[e];
        }
        cur[u] = 0;
    };
    if (n == 0) {
        out.push_back(cur);
        return out;
    }
    recurse(recurse, 0);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Property audits

struct audit_violation {
    std::string check;
    state at;
    std::string detail;
};

struct audit_counter {
    std::size_t trials = 0;
    std::vector<audit_violation> violations;
};

struct audit_report {
    audit_counter rosenthal;
    audit_counter sandwich;
    audit_counter subadditivity;
    audit_counter potential_ratio;
    // Largest Phi(S)/Phi(S*) seen at the q-approximate states reached.
    std::optional<rational> max_potential_ratio;

    bool clean() const {
        return rosenthal.violations.empty() && sandwich.violations.empty() && subadditivity.violations.empty() &&
               potential_ratio.violations.empty();
    }
};

inline state random_state(const congestion_game& game, std::mt19937_64& rng) {
    state s;
    s.choice.resize(game.player_count());
    for (std::size_t u = 0; u < game.player_count(); ++u)
        s[u] = std::uniform_int_distribution<std::size_t>(0, game.strategies(u).size() - 1)(rng);
    return s;
}

inline std::string describe_subset(const std::vector<bool>& f) {
    std::string out = "F={";
    bool first = true;
    for (std::size_t u = 0; u < f.size(); ++u) {
        if (!f[u]) continue;
        if (!first) out += ",";
        out += std::to_string(u);
        first = false;
    }
    return out + "}";
}

/// Exact Rosenthal identity for one deviation; returns a description on failure.
inline std::optional<std::string> check_rosenthal(const congestion_game& game, const state& s, std::size_t u,
                                                  std::size_t alt) {
    state t = s;
    t[u] = alt;
    rational dphi = rosenthal_potential(game, t) - rosenthal_potential(game, s);
    rational dcost = player_cost(game, t, u) - player_cost(game, s, u);
    if (dphi == dcost) return std::nullopt;
    return "player " + std::to_string(u) + " -> " + std::to_string(alt) + ": dPhi=" + to_string(dphi) +
           " dc=" + to_string(dcost);
}

inline std::optional<std::string> check_sandwich(const congestion_game& game, const state& s) {
    auto m = aggregate_metrics(game, s);
    if (m.sum_of_latencies <= m.potential && m.potential <= m.total_player_cost) return std::nullopt;
    return "latencies=" + to_string(m.sum_of_latencies) + " Phi=" + to_string(m.potential) +
           " total=" + to_string(m.total_player_cost);
}

inline std::optional<std::string> check_subadditivity(const congestion_game& game, const state& s,
                                                      const std::vector<bool>& active) {
    std::vector<bool> complement(active.size());
    for (std::size_t u = 0; u < active.size(); ++u) complement[u] = !active[u];
    rational phi = rosenthal_potential(game, s);
    rational phi_f = rosenthal_potential(subgame_view(game, active, s), s);
    rational phi_c = rosenthal_potential(subgame_view(game, complement, s), s);
    if (phi <= phi_f + phi_c && phi >= phi_f) return std::nullopt;
    return describe_subset(active) + " Phi=" + to_string(phi) + " Phi_F=" + to_string(phi_f) +
           " Phi_rest=" + to_string(phi_c);
}

/// Samples states, deviations and subsets and checks the potential identities
/// exactly. For linear games it also drives (1+eps)-dynamics to a
/// (1+eps)-approximate state and compares its potential with
/// 2q/(2-q) times the brute-force minimum; for higher degrees the ratio is
/// only recorded.
inline audit_report audit_identities(const congestion_game& game, std::uint64_t seed, std::size_t trials,
                                     std::size_t budget = default_enumeration_budget()) {
    if (game.mode() != game_mode::standard) throw config_error("audits require a standard-mode game");
    audit_report report;
    if (game.player_count() == 0) return report;
    std::mt19937_64 rng(seed);
    const std::size_t n = game.player_count();

    const auto optimum = brute_min_potential(game, budget);
    const bool linear = game.degree() <= 1;
    static const rational eps_choices[] = {rational(1, 16), rational(1, 8), rational(1, 4), rational(1, 2),
                                           rational(3, 4)};

    for (std::size_t t = 0; t < trials; ++t) {
        state s = random_state(game, rng);
        std::size_t u = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        std::size_t alt = std::uniform_int_distribution<std::size_t>(0, game.strategies(u).size() - 1)(rng);

        ++report.rosenthal.trials;
        if (auto bad = check_rosenthal(game, s, u, alt)) report.rosenthal.violations.push_back({"rosenthal", s, *bad});

        ++report.sandwich.trials;
        if (auto bad = check_sandwich(game, s)) report.sandwich.violations.push_back({"sandwich", s, *bad});

        std::vector<bool> active(n);
        for (std::size_t v = 0; v < n; ++v) active[v] = (rng() & 1u) != 0;
        ++report.subadditivity.trials;
        if (auto bad = check_subadditivity(game, s, active))
            report.subadditivity.violations.push_back({"subadditivity", s, *bad});

        dynamics_config dc;
        dc.epsilon = eps_choices[rng() % std::size(eps_choices)];
        dc.move_cap = 1'000'000;
        auto run = epsilon_br_dynamics(game, s, dc);
        const rational q = 1 + dc.epsilon;
        ++report.potential_ratio.trials;
        if (sgn(optimum.potential) > 0) {
            rational ratio = run.final_potential / optimum.potential;
            if (!report.max_potential_ratio || ratio > *report.max_potential_ratio) report.max_potential_ratio = ratio;
        }
        if (linear && !run.truncated) {
            rational limit = theta(1, q, std::nullopt) * optimum.potential;
            if (run.final_potential > limit)
                report.potential_ratio.violations.push_back(
                    {"potential_ratio", run.final_state,
                     "q=" + to_string(q) + " Phi=" + to_string(run.final_potential) +
                         " Phi*=" + to_string(optimum.potential)});
        }
    }
    return report;
}

struct equilibrium_ratio_sweep {
    std::size_t equilibria = 0;
    rational min_potential;
    std::optional<rational> max_ratio;  // over equilibria, when min_potential > 0
    std::vector<state> violations;      // equilibria with Phi > bound * Phi*
};

/// Phi(S) / Phi(S*) over every exact equilibrium, checked against `bound`.
inline equilibrium_ratio_sweep sweep_equilibrium_ratio(const congestion_game& game, const rational& bound,
                                                       std::size_t budget = default_enumeration_budget()) {
    equilibrium_ratio_sweep out;
    const auto optimum = brute_min_potential(game, budget);
    out.min_potential = optimum.potential;
    for (const auto& eq : enumerate_equilibria(game, rational(1), budget)) {
        ++out.equilibria;
        rational phi = rosenthal_potential(game, eq);
        if (phi > bound * optimum.potential) out.violations.push_back(eq);
        if (sgn(optimum.potential) > 0) {
            rational r = phi / optimum.potential;
            if (!out.max_ratio || r > *out.max_ratio) out.max_ratio = r;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Solver trace audit

struct trace_audit {
    std::size_t moves_checked = 0;
    std::size_t phase_ends_checked = 0;
    std::vector<std::string> violations;

    bool clean() const { return violations.empty(); }
};

/// Replays a solver trace from its initial state and checks: each mover belongs
/// to B_i (p-move) or B_{i+1} (q-move) of its phase, the recorded costs and
/// potentials match recomputation, every move is the full best response, and
/// at each phase end nobody in B_i has a p-move and nobody in B_{i+1} has a
/// q-move.
inline trace_audit audit_solver_trace(const congestion_game& game, const solve_result& result) {
    trace_audit audit;
    const auto& trace = result.trace;
    const auto& part = result.partition;
    const auto& prm = result.params;
    tracked_state cur(game, trace.initial_state);

    for (std::size_t u = 0; u < game.player_count(); ++u)
        if (trace.initial_state[u] != optimistic_cost(game, u).index)
            audit.violations.push_back("player " + std::to_string(u) + " does not start on BR_u(0)");

    auto complain = [&](std::size_t step, const std::string& what) {
        audit.violations.push_back("move " + std::to_string(step) + ": " + what);
    };

    std::size_t next = 0;
    for (const auto& phase : trace.phases) {
        const std::size_t i = phase.index;
        std::size_t in_phase = 0;
        while (next < trace.moves.size() && trace.moves[next].phase && *trace.moves[next].phase == i) {
            const auto& mv = trace.moves[next];
            const std::size_t u = mv.player;
            const std::size_t block = part.block_of[u];
            if (block != i && block != i + 1)
                complain(next, "player " + std::to_string(u) + " of block " + std::to_string(block) +
                                   " moved in phase " + std::to_string(i));
            if (mv.from != cur[u]) complain(next, "recorded origin does not match replay");
            rational before = player_cost(game, cur.current(), cur.loads(), u);
            auto br = best_response(game, cur.current(), cur.loads(), u);
            if (before != mv.cost_before) complain(next, "recorded cost_before differs from replay");
            if (br.index != mv.to || br.cost != mv.cost_after) complain(next, "move is not the best response");
            const rational& threshold = block == i ? prm.p : prm.q;
            if (!(mv.cost_after * threshold < mv.cost_before))
                complain(next, "move does not meet its threshold " + to_string(threshold));
            rational phi_before = rosenthal_potential(game, cur.loads());
            cur.move(u, mv.to);
            rational phi_after = rosenthal_potential(game, cur.loads());
            if (phi_before != mv.potential_before || phi_after != mv.potential_after)
                complain(next, "recorded potentials differ from replay");
            if (phi_after - phi_before != mv.cost_after - mv.cost_before)
                complain(next, "Rosenthal identity fails on this move");
            ++audit.moves_checked;
            ++in_phase;
            ++next;
        }
        if (in_phase != phase.moves)
            audit.violations.push_back("phase " + std::to_string(i) + " move count mismatch");
        for (std::size_t u = 0; u < game.player_count(); ++u) {
            const std::size_t block = part.block_of[u];
            if (block == i && find_threshold_move(game, cur.current(), cur.loads(), u, prm.p))
                audit.violations.push_back("phase " + std::to_string(i) + " ended with a p-move for player " +
                                           std::to_string(u));
            if (block == i + 1 && find_threshold_move(game, cur.current(), cur.loads(), u, prm.q))
                audit.violations.push_back("phase " + std::to_string(i) + " ended with a q-move for player " +
                                           std::to_string(u));
        }
        ++audit.phase_ends_checked;
    }
    if (next != trace.moves.size()) audit.violations.push_back("moves recorded outside any phase");
    if (cur.current() != trace.final_state) audit.violations.push_back("replayed final state differs from trace");
    return audit;
}

} // namespace congestion
