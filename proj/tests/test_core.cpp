#include <gtest/gtest.h>

#include <random>

#include "congestion/game.hpp"
#include "congestion/dynamics.hpp"
#include "congestion/generators.hpp"
#include "support.hpp"

using namespace congestion;
using test_support::linear;
using test_support::make_game;

TEST(Rational, CanonicalStrings) {
    EXPECT_EQ(to_string(rational(6, 4)), "3/2");
    EXPECT_EQ(to_string(rational(-4, 2)), "-2");
    EXPECT_EQ(parse_rational("7/14"), rational(1, 2));
    EXPECT_EQ(parse_rational("-1.25"), rational(-5, 4));
    EXPECT_EQ(parse_rational("12"), rational(12));
    for (const char* bad : {"", "1/0", "abc", "1/-2", "1.2.3", "--1"})
        EXPECT_THROW(parse_rational(bad), validation_error) << bad;
}

TEST(Rational, RoundTripIsExact) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        rational r(static_cast<long>(rng() % 2001) - 1000, static_cast<unsigned long>(rng() % 97 + 1));
        r.canonicalize();
        EXPECT_EQ(parse_rational(to_string(r)), r);
    }
}

TEST(Latency, Evaluation) {
    EXPECT_EQ(latency_function({0, 1})(2), 2);
    EXPECT_EQ(latency_function({1, 2, 3})(2), 17);
    const rational m2 = pow(rational(1000), 2);
    EXPECT_EQ(latency_function({-m2, m2})(1), 0);
    EXPECT_THROW(latency_function({0, 1})(0), validation_error);
    EXPECT_THROW(latency_function({0, 1})(-3), validation_error);
    EXPECT_EQ(latency_function({0, 0, 0})(5), 0);
}

TEST(Game, RejectsMalformedInstances) {
    EXPECT_THROW(make_game({linear(1)}, {{}}), validation_error);       // no strategies
    EXPECT_THROW(make_game({linear(1)}, {{{}}}), validation_error);     // empty strategy
    EXPECT_THROW(make_game({linear(1)}, {{{1}}}), validation_error);    // bad index
    EXPECT_THROW(make_game({linear(1), linear(1)}, {{{1, 0}}}), validation_error);  // unsorted
    EXPECT_THROW(congestion_game(game_mode::standard, {latency_function({-1, 2})}, {player{{{0}}}}),
                 validation_error);
    // Hardness mode allows negative offsets as long as f >= 0 on [1, n].
    EXPECT_NO_THROW(congestion_game(game_mode::hardness, {latency_function({-1, 2})}, {player{{{0}}}}));
    EXPECT_THROW(congestion_game(game_mode::hardness, {latency_function({3, -2})}, {player{{{0}}}, player{{{0}}}}),
                 validation_error);
}

TEST(Game, LoadsAndCosts) {
    auto g = make_game({linear(1), linear(2)}, {{{0}}, {{0, 1}}});
    state s{{0, 0}};
    EXPECT_EQ(load_profile(g, s), (load_vector{2, 1}));
    EXPECT_EQ(player_cost(g, s, 0), 2);
    EXPECT_EQ(player_cost(g, s, 1), 4);
    EXPECT_EQ(rosenthal_potential(g, s), 5);

    auto shared = make_game({linear(1)}, {{{0}}, {{0}}});
    EXPECT_EQ(rosenthal_potential(shared, state{{0, 0}}), 3);
    auto agg = aggregate_metrics(shared, state{{0, 0}});
    EXPECT_EQ(agg.sum_of_latencies, 2);
    EXPECT_EQ(agg.potential, 3);
    EXPECT_EQ(agg.total_player_cost, 4);
}

TEST(Game, DisjointStrategiesCollapseTheSandwich) {
    auto g = make_game({linear(1), linear(3), {2, 1}}, {{{0}}, {{1}}, {{2}}});
    auto agg = aggregate_metrics(g, state{{0, 0, 0}});
    EXPECT_EQ(agg.potential, agg.total_player_cost);
    EXPECT_EQ(agg.potential, agg.sum_of_latencies);
}

TEST(Game, DeviationCost) {
    auto g = make_game({linear(1), linear(3)}, {{{0}, {1}}, {{0}}});
    state s{{0, 0}};
    EXPECT_EQ(deviation_cost(g, s, 0, 0), player_cost(g, s, 0));
    EXPECT_EQ(deviation_cost(g, s, 0, 1), 3);
    EXPECT_THROW(deviation_cost(g, s, 0, 2), validation_error);
}

TEST(Game, IncrementalDeviationMatchesRecomputation) {
    std::mt19937_64 rng(11);
    std::size_t draws = 0;
    for (std::uint64_t seed = 0; draws < 1000; ++seed) {
        gen_spec spec;
        spec.seed = seed;
        spec.players = 2 + seed % 4;
        spec.resources = 3 + seed % 5;
        spec.strategies_per_player = 3;
        spec.max_strategy_size = 3;
        spec.degree = 1 + seed % 3;
        auto g = generate(spec);
        for (int k = 0; k < 20; ++k, ++draws) {
            state s;
            for (std::size_t u = 0; u < g.player_count(); ++u) s.choice.push_back(rng() % g.strategies(u).size());
            std::size_t u = rng() % g.player_count();
            std::size_t alt = rng() % g.strategies(u).size();
            state t = s;
            t.choice[u] = alt;
            ASSERT_EQ(deviation_cost(g, s, u, alt), player_cost(g, t, u));
        }
    }
}

TEST(Game, StateValidation) {
    auto g = make_game({linear(1)}, {{{0}}, {{0}}});
    EXPECT_THROW(load_profile(g, state{{0}}), validation_error);
    EXPECT_THROW(load_profile(g, state{{0, 1}}), validation_error);
}

TEST(Subgame, ModifiedLatency) {
    auto g = make_game({linear(1)}, {{{0}}, {{0}}});
    subgame_view view(g, {true, false}, state{{0, 0}});
    EXPECT_EQ(view.frozen_load(0), 1);
    EXPECT_EQ(rosenthal_potential(view, state{{0, 0}}), 2);

    subgame_view everyone(g, {true, true}, state{{0, 0}});
    EXPECT_EQ(rosenthal_potential(everyone, state{{0, 0}}), rosenthal_potential(g, state{{0, 0}}));
    subgame_view nobody(g, {false, false}, state{{0, 0}});
    EXPECT_EQ(rosenthal_potential(nobody, state{{0, 0}}), 0);
}

TEST(Subgame, ActivePlayersSeeTheSameCostsAndBestResponses) {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        gen_spec spec;
        spec.seed = seed;
        spec.players = 4;
        spec.resources = 5;
        spec.strategies_per_player = 3;
        spec.max_strategy_size = 3;
        auto g = generate(spec);
        state s;
        for (std::size_t u = 0; u < 4; ++u) s.choice.push_back(rng() % g.strategies(u).size());
        std::vector<bool> active(4);
        for (std::size_t u = 0; u < 4; ++u) active[u] = rng() % 2;
        subgame_view view(g, active, s);
        for (std::size_t u = 0; u < 4; ++u) {
            if (!active[u]) continue;
            EXPECT_EQ(player_cost(view, s, u), player_cost(g, s, u));
            for (std::size_t a = 0; a < g.strategies(u).size(); ++a)
                EXPECT_EQ(deviation_cost(view, s, u, a), deviation_cost(g, s, u, a));
            EXPECT_EQ(best_response(view, s, u).index, best_response(g, s, u).index);
        }
    }
}

TEST(Game, TrackedStateStaysConsistent) {
    gen_spec spec;
    spec.seed = 9;
    spec.players = 5;
    spec.resources = 6;
    spec.strategies_per_player = 3;
    auto g = generate(spec);
    tracked_state t(g, state{std::vector<std::size_t>(5, 0)});
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        std::size_t u = rng() % 5;
        t.move(u, rng() % g.strategies(u).size());
        ASSERT_TRUE(t.consistent());
    }
}

TEST(Latency, GrowthBoundsForNonNegativePolynomials) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        gen_spec spec;
        spec.seed = seed;
        spec.players = 6;
        spec.degree = 1 + seed % 4;
        auto g = generate(spec);
        const std::int64_t n = 6;
        const auto d = static_cast<unsigned long>(spec.degree);
        for (const auto& f : g.resources())
            for (std::int64_t x = 1; x < n; ++x) {
                EXPECT_LE(f(x + 1), rational(ipow(2, d)) * f(x));
                EXPECT_LE(f(x), rational(ipow(n, d)) * f(1));
            }
    }
}
