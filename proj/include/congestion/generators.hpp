#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "game.hpp"

namespace congestion {

struct gen_spec {
    std::uint64_t seed = 0;
    std::size_t players = 4;
    std::size_t resources = 6;
    std::size_t strategies_per_player = 2;
    std::size_t min_strategy_size = 1;
    std::size_t max_strategy_size = 2;
    std::size_t degree = 1;
    std::uint64_t coeff_min = 0;
    std::uint64_t coeff_max = 5;
    bool symmetric = false;
};

inline void validate(const gen_spec& spec) {
    if (spec.players < 1) throw validation_error("generator needs at least one player");
    if (spec.resources < 1) throw validation_error("generator needs at least one resource");
    if (spec.strategies_per_player < 1) throw validation_error("generator needs at least one strategy per player");
    if (spec.min_strategy_size < 1) throw validation_error("strategy size must be at least one");
    if (spec.min_strategy_size > spec.max_strategy_size)
        throw validation_error("minimum strategy size exceeds maximum");
    if (spec.max_strategy_size > spec.resources)
        throw validation_error("strategy size " + std::to_string(spec.max_strategy_size) + " exceeds resource count " +
                               std::to_string(spec.resources));
    if (spec.coeff_min > spec.coeff_max) throw validation_error("coefficient range is empty");
}

namespace detail {

// Uniform draw in [lo, hi] from raw 64-bit output, identical on every
// standard library (unlike std::uniform_int_distribution).
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == UINT64_MAX) return rng();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return lo + x % range;
}

inline strategy draw_subset(std::mt19937_64& rng, std::size_t resources, std::size_t size) {
    std::vector<std::size_t> pool(resources);
    for (std::size_t e = 0; e < resources; ++e) pool[e] = e;
    for (std::size_t i = 0; i < size; ++i) {
        std::size_t j = i + draw(rng, 0, resources - 1 - i);
        std::swap(pool[i], pool[j]);
    }
    strategy s(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(s.begin(), s.end());
    return s;
}

inline std::vector<strategy> draw_strategy_set(std::mt19937_64& rng, const gen_spec& spec) {
    constexpr std::size_t retry_cap = 1000;
    std::set<strategy> seen;
    std::vector<strategy> out;
    std::size_t attempts = 0;
    while (out.size() < spec.strategies_per_player) {
        if (++attempts > retry_cap * spec.strategies_per_player)
            throw validation_error("could not draw " + std::to_string(spec.strategies_per_player) +
                                   " distinct strategies; widen the size range or add resources");
        std::size_t size = draw(rng, spec.min_strategy_size, spec.max_strategy_size);
        strategy s = draw_subset(rng, spec.resources, size);
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

} // namespace detail

/// Seeded random standard-mode game. Deterministic in the spec.
inline congestion_game generate(const gen_spec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::vector<latency_function> resources;
    resources.reserve(spec.resources);
    for (std::size_t e = 0; e < spec.resources; ++e) {
        std::vector<rational> coeffs(spec.degree + 1);
        for (auto& c : coeffs)
            c = rational(integer(std::to_string(detail::draw(rng, spec.coeff_min, spec.coeff_max)), 10));
        resources.emplace_back(std::move(coeffs));
    }
    std::vector<player> players(spec.players);
    if (spec.symmetric) {
        auto shared = detail::draw_strategy_set(rng, spec);
        for (auto& p : players) p.strategies = shared;
    } else {
        for (auto& p : players) p.strategies = detail::draw_strategy_set(rng, spec);
    }
    return congestion_game(game_mode::standard, std::move(resources), std::move(players));
}

} // namespace congestion
