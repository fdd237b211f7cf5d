#pragma once

#include <vector>

#include "congestion/game.hpp"

namespace test_support {

inline congestion::latency_function linear(long slope, long offset = 0) {
    return congestion::latency_function({congestion::rational(offset), congestion::rational(slope)});
}

inline congestion::latency_function constant(long value) {
    return congestion::latency_function({congestion::rational(value)});
}

inline congestion::congestion_game make_game(std::vector<congestion::latency_function> resources,
                                             std::vector<std::vector<congestion::strategy>> strategies,
                                             congestion::game_mode mode = congestion::game_mode::standard) {
    std::vector<congestion::player> players;
    for (auto& s : strategies) players.push_back({std::move(s)});
    return congestion::congestion_game(mode, std::move(resources), std::move(players));
}

// Two players with ties at an equilibrium whose potential is exactly twice the
// minimum: Phi(2,2) = 4+6+7+5 = 22, Phi(0,0) = 5+6 = 11.
inline congestion::congestion_game ratio_two_game() {
    using congestion::latency_function;
    return make_game({latency_function({3, 1}), latency_function({1, 6}), latency_function({0, 6}),
                      latency_function({0, 5})},
                     {{{3}, {1, 2}, {0, 2}}, {{2}, {1, 2, 3}, {1, 3}}});
}

} // namespace test_support
