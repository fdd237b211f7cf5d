#include <gtest/gtest.h>

#include <set>

#include "congestion/generators.hpp"
#include "congestion/io.hpp"
#include "congestion/verify.hpp"

using namespace congestion;

TEST(Generate, DeterministicInSeed) {
    gen_spec spec;
    spec.seed = 77;
    spec.players = 5;
    spec.strategies_per_player = 3;
    auto a = io::dump(io::to_json(generate(spec)));
    EXPECT_EQ(a, io::dump(io::to_json(generate(spec))));
    spec.seed = 78;
    EXPECT_NE(a, io::dump(io::to_json(generate(spec))));
}

TEST(Generate, SymmetricPlayersShareStrategies) {
    gen_spec spec;
    spec.seed = 3;
    spec.players = 4;
    spec.strategies_per_player = 3;
    spec.symmetric = true;
    auto g = generate(spec);
    for (std::size_t u = 1; u < g.player_count(); ++u) EXPECT_EQ(g.strategies(u), g.strategies(0));
}

TEST(Generate, StrategiesAreDistinctAndWithinRange) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        gen_spec spec;
        spec.seed = seed;
        spec.players = 1 + seed % 6;
        spec.resources = 4 + seed % 5;
        spec.strategies_per_player = 1 + seed % 4;
        spec.min_strategy_size = 1 + seed % 2;
        spec.max_strategy_size = 3;
        spec.degree = seed % 4;
        spec.coeff_min = seed % 3;
        spec.coeff_max = 4 + seed % 3;
        auto g = generate(spec);
        EXPECT_EQ(g.player_count(), spec.players);
        EXPECT_EQ(g.resource_count(), spec.resources);
        for (std::size_t u = 0; u < g.player_count(); ++u) {
            std::set<strategy> distinct(g.strategies(u).begin(), g.strategies(u).end());
            EXPECT_EQ(distinct.size(), spec.strategies_per_player);
            for (const auto& s : g.strategies(u)) {
                EXPECT_GE(s.size(), spec.min_strategy_size);
                EXPECT_LE(s.size(), spec.max_strategy_size);
            }
        }
        for (const auto& f : g.resources()) {
            EXPECT_EQ(f.degree(), spec.degree);
            for (const auto& c : f.coefficients()) {
                EXPECT_GE(c, rational(static_cast<unsigned long>(spec.coeff_min)));
                EXPECT_LE(c, rational(static_cast<unsigned long>(spec.coeff_max)));
                EXPECT_TRUE(is_integer(c));
            }
        }
    }
}

TEST(Generate, ZeroCoefficientsMakeEveryStateAnEquilibrium) {
    gen_spec spec;
    spec.seed = 1;
    spec.players = 3;
    spec.strategies_per_player = 3;
    spec.coeff_min = 0;
    spec.coeff_max = 0;
    auto g = generate(spec);
    auto all = enumerate_equilibria(g, std::nullopt);
    EXPECT_EQ(enumerate_equilibria(g, rational(1)), all);
    for (const auto& s : all) EXPECT_EQ(approximation_factor(g, s).factor, extended_ratio::finite(rational(1)));
}

TEST(Generate, RejectsImpossibleSpecs) {
    gen_spec spec;
    spec.max_strategy_size = 7;
    spec.resources = 6;
    EXPECT_THROW(generate(spec), validation_error);
    spec = {};
    spec.players = 0;
    EXPECT_THROW(generate(spec), validation_error);
    spec = {};
    spec.coeff_min = 5;
    spec.coeff_max = 4;
    EXPECT_THROW(generate(spec), validation_error);
    spec = {};
    spec.resources = 2;
    spec.max_strategy_size = 1;
    spec.strategies_per_player = 3;  // only two singletons exist
    EXPECT_THROW(generate(spec), validation_error);
    spec = {};
    spec.min_strategy_size = 3;
    spec.max_strategy_size = 2;
    EXPECT_THROW(generate(spec), validation_error);
}
