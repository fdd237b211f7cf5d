#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "game.hpp"

namespace congestion {

enum class scheduler_kind { scan, seeded_random };

struct solver_config {
    unsigned psi = 1;
    std::optional<rational> theta_override;  // required for degree >= 2
    std::optional<integer> move_cap;         // defaults to default_move_cap()
    scheduler_kind scheduler = scheduler_kind::scan;
    std::uint64_t seed = 0;
};

/// Upper bound on Phi(q-approximate equilibrium) / min Phi for degree d.
/// Linear games use the closed form 2q/(2-q); higher degrees take the
/// caller's value because only an asymptotic d^{O(d)} bound is known.
inline rational theta(std::size_t degree, const rational& q, const std::optional<rational>& override_value) {
    if (degree <= 1) {
        if (q < 1 || q >= 2) throw config_error("theta for linear latencies needs 1 <= q < 2, got q=" + to_string(q));
        return 2 * q / (2 - q);
    }
    if (!override_value)
        throw config_error("degree " + std::to_string(degree) +
                           " needs an explicit theta (--theta): the potential ratio bound for polynomial "
                           "latencies is only known up to a d^O(d) constant");
    if (*override_value <= 1) throw config_error("theta override must exceed 1");
    return *override_value;
}

struct solver_parameters {
    rational q;
    rational p;
    rational theta;
};

inline rational inverse_power(std::size_t n, unsigned psi) {
    return rational(integer(1), ipow(n, psi));
}

/// q = 1 + n^-psi and p = (1/theta(q) - n^-psi)^-1.
inline solver_parameters parameters(std::size_t n, std::size_t degree, const solver_config& config) {
    if (n < 2) throw config_error("the solver needs at least two players");
    if (config.psi < 1) throw config_error("psi must be a positive integer");
    const rational eps = inverse_power(n, config.psi);
    solver_parameters out;
    out.q = 1 + eps;
    out.theta = theta(degree, out.q, config.theta_override);
    rational denom = 1 / out.theta - eps;
    if (sgn(denom) <= 0)
        throw config_error("instance too small for psi=" + std::to_string(config.psi) + ": 1/theta=" +
                           to_string(1 / out.theta) + " does not exceed n^-psi=" + to_string(eps));
    out.p = 1 / denom;
    return out;
}

/// Approximation factor the final state is guaranteed to meet: p(1 + 4 n^-psi).
inline rational guarantee_bound(const rational& p, std::size_t n, unsigned psi) {
    return p * (1 + 4 * inverse_power(n, psi));
}

/// Ratio between consecutive block boundaries: 2^{d+1} n^{2 psi + d + 1}.
inline integer block_base(std::size_t n, std::size_t degree, unsigned psi) {
    return ipow(2, degree + 1) * ipow(n, 2 * psi + degree + 1);
}

/// Phase-wise move bound: first phase, up to n later phases, and the n
/// initialisation moves.
inline integer move_bound(std::size_t n, std::size_t degree, unsigned psi) {
    integer first = ipow(2, 2 * degree + 2) * ipow(n, 5 * psi + 3 * degree + 3);
    integer later = integer(static_cast<unsigned long>(n)) * ipow(2, degree + 2) * ipow(n, 4 * psi + 2 * degree + 2);
    return first + later + static_cast<unsigned long>(n);
}

inline integer default_move_cap(std::size_t n, std::size_t degree, unsigned psi) {
    return 4 * ipow(2, 2 * degree + 2) * ipow(n, 5 * psi + 3 * degree + 3);
}

struct block_partition {
    integer base;
    std::size_t block_count = 0;       // m; zero when every optimistic cost is zero
    std::vector<rational> boundaries;  // b_1 .. b_{m+1}; boundaries[i-1] == b_i
    std::vector<std::size_t> block_of; // 1-based block per player, 0 for zero-cost players
    std::vector<std::size_t> zero_players;

    bool degenerate() const noexcept { return block_count == 0; }

    std::vector<std::size_t> members(std::size_t block) const {
        std::vector<std::size_t> out;
        for (std::size_t u = 0; u < block_of.size(); ++u)
            if (block_of[u] == block) out.push_back(u);
        return out;
    }

    std::size_t nonempty_blocks() const {
        std::vector<std::size_t> used;
        for (std::size_t b : block_of)
            if (b != 0) used.push_back(b);
        std::sort(used.begin(), used.end());
        return static_cast<std::size_t>(std::unique(used.begin(), used.end()) - used.begin());
    }
};

/// Assigns u to B_i iff l_u in (b_{i+1}, b_i] with b_i = l_max * base^{-(i-1)}.
/// Everything is exact: m comes from repeated multiplication by the base, never
/// from a floating logarithm.
inline block_partition partition_blocks(const std::vector<rational>& optimistic, std::size_t n, std::size_t degree,
                                        unsigned psi) {
    block_partition out;
    out.base = block_base(n, degree, psi);
    out.block_of.assign(optimistic.size(), 0);

    std::optional<rational> lo, hi;
    for (std::size_t u = 0; u < optimistic.size(); ++u) {
        const rational& l = optimistic[u];
        if (sgn(l) < 0) throw validation_error("negative optimistic cost for player " + std::to_string(u));
        if (sgn(l) == 0) {
            out.zero_players.push_back(u);
            continue;
        }
        if (!lo || l < *lo) lo = l;
        if (!hi || l > *hi) hi = l;
    }
    if (!hi) return out;

    const rational base(out.base);
    // m = 1 + ceil(log_base(hi/lo)): smallest k with base^k >= hi/lo.
    const rational ratio = *hi / *lo;
    std::size_t k = 0;
    rational power(1);
    while (power < ratio) {
        power *= base;
        ++k;
    }
    out.block_count = 1 + k;

    out.boundaries.reserve(out.block_count + 1);
    rational b = *hi;
    for (std::size_t i = 0; i <= out.block_count; ++i) {
        out.boundaries.push_back(b);
        b /= base;
    }
    for (std::size_t u = 0; u < optimistic.size(); ++u) {
        const rational& l = optimistic[u];
        if (sgn(l) == 0) continue;
        std::size_t i = 1;
        while (!(l > out.boundaries[i])) ++i;  // first i with l > b_{i+1}
        out.block_of[u] = i;
    }
    return out;
}

struct solve_result {
    run_trace trace;
    block_partition partition;
    solver_parameters params;
    rational bound;
    std::size_t degree = 1;
    unsigned psi = 1;
};

/// Phased best-response schedule. Every player starts on BR_u(0); in phase i
/// players of B_i make best-response p-moves and players of B_{i+1} make
/// best-response q-moves until neither kind is available.
inline solve_result solve(const congestion_game& game, const solver_config& config = {}) {
    if (game.mode() != game_mode::standard) throw config_error("the solver requires a standard-mode game");
    const std::size_t n = game.player_count();

    solve_result result;
    result.degree = std::max<std::size_t>(game.degree(), 1);
    result.psi = config.psi;
    result.params = parameters(n, result.degree, config);
    result.bound = guarantee_bound(result.params.p, n, config.psi);
    const integer cap = config.move_cap ? *config.move_cap : default_move_cap(n, result.degree, config.psi);

    std::vector<rational> optimistic(n);
    state start;
    start.choice.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        auto oc = optimistic_cost(game, u);
        optimistic[u] = oc.cost;
        start[u] = oc.index;
    }
    result.partition = partition_blocks(optimistic, n, result.degree, config.psi);

    run_trace& trace = result.trace;
    trace.initial_state = start;
    tracked_state current(game, start);
    rational phi = rosenthal_potential(game, current.loads());
    std::mt19937_64 rng(config.seed);

    const auto& part = result.partition;
    // With a single block there is no B_2, but B_1 still needs its p-moves.
    const std::size_t last_phase = part.block_count <= 1 ? part.block_count : part.block_count - 1;
    for (std::size_t i = 1; i <= last_phase; ++i) {
        const auto heavy = part.members(i);
        const auto light = part.members(i + 1);
        phase_summary summary{i, heavy.size(), 0};

        while (true) {
            struct candidate {
                std::size_t player;
                threshold_move move;
            };
            std::vector<candidate> eligible;
            auto scan = [&](const std::vector<std::size_t>& group, const rational& threshold) {
                for (std::size_t u : group) {
                    auto mv = find_threshold_move(game, current.current(), current.loads(), u, threshold);
                    if (!mv) continue;
                    eligible.push_back({u, std::move(*mv)});
                    if (config.scheduler == scheduler_kind::scan) return true;
                }
                return false;
            };
            // The scan scheduler stops at the first eligible B_i player and only
            // then looks at B_{i+1}; the random one draws from both groups.
            if (!scan(heavy, result.params.p)) scan(light, result.params.q);
            if (eligible.empty()) break;

            std::size_t pick = 0;
            if (config.scheduler == scheduler_kind::seeded_random)
                pick = std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng);
            candidate& c = eligible[pick];

            if (integer(static_cast<unsigned long>(trace.moves.size() + 1)) > cap)
                throw contract_violation("solver exceeded its move cap of " + to_string(cap) + " moves");

            move_record rec;
            rec.player = c.player;
            rec.from = current[c.player];
            rec.to = c.move.to;
            rec.cost_before = std::move(c.move.cost_before);
            rec.cost_after = std::move(c.move.cost_after);
            rec.potential_before = phi;
            current.move(c.player, rec.to);
            phi = rosenthal_potential(game, current.loads());
            rec.potential_after = phi;
            rec.phase = i;
            trace.moves.push_back(std::move(rec));
            ++summary.moves;
        }
        trace.phases.push_back(summary);
    }
    trace.final_state = current.current();
    trace.final_potential = phi;
    return result;
}

} // namespace congestion
