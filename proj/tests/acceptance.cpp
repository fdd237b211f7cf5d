// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "congestion/generators.hpp"
#include "congestion/hardness.hpp"
#include "congestion/io.hpp"
#include "congestion/solver.hpp"
#include "congestion/verify.hpp"
#include "support.hpp"

using namespace congestion;

namespace {

struct outcome {
    bool pass = false;
    std::string detail;
};

std::string csv_path = "move_margin.csv";

gen_spec corpus_spec(std::size_t n, std::uint64_t seed, std::size_t degree = 1) {
    gen_spec spec;
    spec.seed = seed;
    spec.players = n;
    spec.resources = 6 + seed % 7;  // 6..12
    spec.strategies_per_player = 1 + (seed + n) % 3;
    spec.min_strategy_size = 1;
    spec.max_strategy_size = 4;
    spec.degree = degree;
    spec.coeff_min = 0;
    spec.coeff_max = 9;
    return spec;
}

// Three resource groups whose coefficients differ by powers of the block base,
// so optimistic costs spread over several blocks and later phases get work.
congestion_game layered_game(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    constexpr std::size_t groups = 3, per_group = 4;
    const rational scale(block_base(n, 1, 1));
    std::vector<latency_function> fs;
    for (std::size_t g = 0; g < groups; ++g)
        for (std::size_t k = 0; k < per_group; ++k) {
            const rational w = pow(scale, g);
            fs.emplace_back(std::vector<rational>{rational(static_cast<long>(rng() % 10)) * w,
                                                  rational(static_cast<long>(rng() % 10)) * w});
        }
    std::vector<player> players(n);
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t g = u % groups;
        const std::size_t want = 1 + rng() % 3;
        std::set<strategy> seen;
        while (seen.size() < want) {
            strategy s;
            for (std::size_t k = 0; k < per_group; ++k)
                if (rng() & 1u) s.push_back(g * per_group + k);
            if (g > 0 && rng() % 3 == 0) s.push_back((g - 1) * per_group + rng() % per_group);
            std::sort(s.begin(), s.end());
            if (!s.empty()) seen.insert(s);
        }
        players[u].strategies.assign(seen.begin(), seen.end());
    }
    return congestion_game(game_mode::standard, std::move(fs), std::move(players));
}

struct corpus_run {
    std::size_t n;
    std::uint64_t seed;
    std::string family;
    congestion_game game;
    solve_result result;
    approx_report report;
};

// 200 seeded linear games, shared by criteria 1, 2 and 6: per n, 20 uniform
// games, 15 symmetric congested ones and 15 multi-scale ones.
const std::vector<corpus_run>& linear_corpus() {
    static const std::vector<corpus_run> runs = [] {
        std::vector<corpus_run> out;
        for (std::size_t n : {4u, 8u, 12u, 16u})
            for (std::uint64_t k = 0; k < 50; ++k) {
                const std::uint64_t seed = 1000 * n + k;
                std::string family;
                congestion_game game = [&] {
                    if (k < 20) {
                        family = "uniform";
                        return generate(corpus_spec(n, seed));
                    }
                    if (k < 35) {
                        family = "symmetric";
                        auto spec = corpus_spec(n, seed);
                        spec.symmetric = true;
                        spec.resources = 3 + seed % 3;
                        spec.strategies_per_player = 3;
                        spec.max_strategy_size = 1 + seed % 2;
                        return generate(spec);
                    }
                    family = "layered";
                    return layered_game(n, seed);
                }();
                auto result = solve(game);
                auto report = approximation_factor(game, result.trace.final_state);
                out.push_back({n, seed, family, std::move(game), std::move(result), std::move(report)});
            }
        return out;
    }();
    return runs;
}

outcome guarantee() {
    std::size_t ok = 0;
    rational worst_share(0);  // max rho*/bound
    std::string first_bad;
    for (const auto& r : linear_corpus()) {
        if (r.report.within(r.result.bound)) {
            ++ok;
            rational share = r.report.factor.value / r.result.bound;
            if (share > worst_share) worst_share = share;
        } else if (first_bad.empty()) {
            first_bad = "; first failure n=" + std::to_string(r.n) + " seed=" + std::to_string(r.seed) + " (" + r.family + ")";
        }
    }
    const auto total = linear_corpus().size();
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                             " runs within p(1+4/n); max rho*/bound=" + std::to_string(approx(worst_share)) +
                             first_bad};
}

outcome move_bound_check() {
    std::ofstream csv(csv_path);
    csv << "n,family,seed,moves,move_bound\n";
    std::size_t ok = 0, max_moves = 0, total_moves = 0, max_blocks = 0;
    double min_log_margin = 1e300;
    for (const auto& r : linear_corpus()) {
        const integer bound = move_bound(r.n, 1, 1);
        const std::size_t moves = r.result.trace.moves.size();
        csv << r.n << "," << r.family << "," << r.seed << "," << moves << "," << to_string(bound) << "\n";
        if (integer(static_cast<unsigned long>(moves)) <= bound) ++ok;
        max_moves = std::max(max_moves, moves);
        total_moves += moves;
        max_blocks = std::max(max_blocks, r.result.partition.block_count);
        double margin = std::log10(bound.get_d() / std::max<double>(1.0, static_cast<double>(moves)));
        min_log_margin = std::min(min_log_margin, margin);
    }
    const auto total = linear_corpus().size();
    std::ostringstream d;
    d << ok << "/" << total << " runs under the phase-wise bound; moves total=" << total_moves << " max=" << max_moves
      << "; up to " << max_blocks << " blocks"
      << "; smallest margin=10^" << static_cast<int>(min_log_margin) << "; margins in " << csv_path;
    return {ok == total, d.str()};
}

congestion_game identity_corpus_game(std::uint64_t seed) {
    gen_spec spec;
    spec.seed = seed;
    spec.players = 2 + seed % 5;
    spec.resources = 3 + seed % 6;
    spec.strategies_per_player = 1 + seed % 3;
    spec.max_strategy_size = 3;
    spec.degree = seed % 4;
    return generate(spec);
}

outcome rosenthal() {
    std::size_t trials = 0, violations = 0;
    std::mt19937_64 rng(2024);
    for (std::uint64_t seed = 0; trials < 10000; ++seed) {
        auto g = identity_corpus_game(seed);
        for (int k = 0; k < 50; ++k, ++trials) {
            auto s = random_state(g, rng);
            std::size_t u = rng() % g.player_count();
            std::size_t alt = rng() % g.strategies(u).size();
            if (check_rosenthal(g, s, u, alt)) ++violations;
        }
    }
    return {violations == 0, std::to_string(trials) + " triples, " + std::to_string(violations) + " violations"};
}

outcome sandwich_and_subadditivity() {
    std::size_t sandwich_trials = 0, sandwich_bad = 0, sub_trials = 0, sub_bad = 0;
    std::mt19937_64 rng(77);
    for (std::uint64_t seed = 500; sandwich_trials < 5000; ++seed) {
        auto g = identity_corpus_game(seed);
        for (int k = 0; k < 25; ++k) {
            auto s = random_state(g, rng);
            ++sandwich_trials;
            if (check_sandwich(g, s)) ++sandwich_bad;
            std::vector<bool> active(g.player_count());
            for (std::size_t u = 0; u < active.size(); ++u) active[u] = rng() & 1u;
            ++sub_trials;
            if (check_subadditivity(g, s, active)) ++sub_bad;
        }
    }
    return {sandwich_bad == 0 && sub_bad == 0,
            "sandwich " + std::to_string(sandwich_trials) + " trials/" + std::to_string(sandwich_bad) +
                " violations; subadditivity " + std::to_string(sub_trials) + " trials/" + std::to_string(sub_bad) +
                " violations"};
}

// Seeded hill climb over small linear games, maximising Phi(S)/Phi(S*) over
// exact equilibria S. Returns the best ratio found.
rational climb_ratio(std::uint64_t seed, std::size_t iterations, std::size_t& violations, std::size_t& games) {
    std::mt19937_64 rng(seed);
    gen_spec spec;
    spec.seed = rng();
    spec.players = 2 + rng() % 3;
    spec.resources = 3 + rng() % 4;
    spec.strategies_per_player = 2 + rng() % 2;
    spec.max_strategy_size = 3;
    spec.coeff_max = 6;
    auto base = generate(spec);
    auto resources = base.resources();
    auto players = base.players();
    auto score = [&](const congestion_game& g) {
        ++games;
        auto sweep = sweep_equilibrium_ratio(g, rational(2));
        violations += sweep.violations.size();
        return sweep.max_ratio ? *sweep.max_ratio : rational(0);
    };
    rational best = score(base);
    for (std::size_t it = 0; it < iterations && best < 2; ++it) {
        auto r2 = resources;
        auto p2 = players;
        if (rng() % 3 < 2) {
            std::size_t e = rng() % r2.size();
            auto c = r2[e].coefficients();
            c[rng() % c.size()] = rng() % 4 == 0 ? rational(0) : rational(static_cast<long>(rng() % 13));
            r2[e] = latency_function(c);
        } else {
            auto& st = p2[rng() % p2.size()].strategies;
            auto& s = st[rng() % st.size()];
            std::size_t e = rng() % r2.size();
            auto it_e = std::find(s.begin(), s.end(), e);
            if (it_e != s.end()) {
                if (s.size() > 1) s.erase(it_e);
            } else {
                s.insert(std::upper_bound(s.begin(), s.end(), e), e);
            }
        }
        congestion_game g(game_mode::standard, r2, p2);
        rational sc = score(g);
        if (sc >= best) {
            best = sc;
            resources = std::move(r2);
            players = std::move(p2);
        }
    }
    return best;
}

outcome potential_ratio() {
    std::size_t games = 0, equilibria = 0, violations = 0;
    rational best(0);
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        gen_spec spec;
        spec.seed = 9000 + seed;
        spec.players = 2 + seed % 3;
        spec.resources = 3 + seed % 5;
        spec.strategies_per_player = 2 + seed % 2;
        spec.max_strategy_size = 3;
        auto g = generate(spec);
        auto sweep = sweep_equilibrium_ratio(g, rational(2));
        ++games;
        equilibria += sweep.equilibria;
        violations += sweep.violations.size();
        if (sweep.max_ratio && *sweep.max_ratio > best) best = *sweep.max_ratio;
    }
    const rational random_best = best;
    {
        // Hand-built tie example whose worst equilibrium sits at exactly 2.
        auto sweep = sweep_equilibrium_ratio(test_support::ratio_two_game(), rational(2));
        ++games;
        equilibria += sweep.equilibria;
        violations += sweep.violations.size();
        if (sweep.max_ratio && *sweep.max_ratio > best) best = *sweep.max_ratio;
    }
    const rational fixture_best = best;
    const std::size_t corpus_games = games;
    best = random_best;
    for (std::uint64_t seed = 1; seed <= 12 && best <= rational(19, 10); ++seed) {
        rational r = climb_ratio(seed, 1500, violations, games);
        if (r > best) best = r;
    }
    std::ostringstream d;
    const rational searched = best;
    const std::size_t climbed = games - corpus_games;
    best = std::max(best, fixture_best);
    d << corpus_games << " corpus games with " << equilibria << " equilibria, " << climbed
      << " hill-climb games; " << violations << " violations; max ratio random corpus=" << to_string(random_best) << " (" << approx(random_best)
      << "), hill climb=" << to_string(searched) << " (" << approx(searched) << "), fixture=" << to_string(fixture_best)
      << (best > rational(19, 10) ? "; exceeds 1.9" : "; below 1.9, corpus too weak");
    return {violations == 0 && best > rational(3, 2), d.str()};
}

outcome phase_discipline() {
    std::size_t traces = 0, moves = 0, bad = 0;
    std::string first;
    auto check = [&](const congestion_game& g, const solve_result& r) {
        auto audit = audit_solver_trace(g, r);
        ++traces;
        moves += audit.moves_checked;
        bad += audit.violations.size();
        if (!audit.clean() && first.empty()) first = "; first: " + audit.violations.front();
    };
    for (const auto& r : linear_corpus()) check(r.game, r.result);
    for (std::size_t n : {4u, 8u, 12u})
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto g = generate(corpus_spec(n, 7000 + seed));
            solver_config cfg;
            cfg.scheduler = scheduler_kind::seeded_random;
            cfg.seed = seed;
            check(g, solve(g, cfg));
        }
    return {bad == 0, std::to_string(traces) + " traces, " + std::to_string(moves) + " moves replayed, " +
                          std::to_string(bad) + " violations" + first};
}

hardness::flip_instance random_circuit(std::mt19937_64& rng) {
    hardness::flip_instance c;
    c.inputs = 1 + rng() % 2;
    const std::size_t gates = 1 + rng() % 2;
    for (std::size_t k = 0; k < gates; ++k) {
        auto pick = [&] {
            std::size_t r = rng() % (c.inputs + k);
            return r < c.inputs ? hardness::wire::x(r) : hardness::wire::g(r - c.inputs);
        };
        c.gates.push_back({pick(), pick()});
    }
    c.outputs = {gates - 1};
    return c;
}

outcome hardness_construction() {
    std::mt19937_64 rng(31337);
    std::size_t bundles = 0, skipped = 0, structural_bad = 0, no_equilibrium = 0, not_local_min = 0;
    std::size_t equilibria = 0, comparisons = 0, flipped = 0;
    while (bundles < 24) {
        auto c = random_circuit(rng);
        auto bundle = hardness::derive_subcircuits(c);
        if (bundle.total_gates() == 0) {  // circuit folds to a constant
            ++skipped;
            continue;
        }
        auto params = hardness::make_params(2, 1, bundle.total_gates(), bundle.outputs);
        auto game = hardness::build_flip_game(bundle, params);
        ++bundles;
        if (!hardness::structural_check(game).pass) ++structural_bad;
        auto eqs = enumerate_equilibria(game, rational(1), std::size_t{1} << 30);
        if (eqs.empty()) ++no_equilibrium;
        equilibria += eqs.size();
        for (const auto& s : eqs)
            if (!hardness::flip_is_local_min(c, hardness::read_inputs(bundle, s)).local_min) ++not_local_min;

        auto positive = hardness::positivize(game, params.alpha);
        for (int t = 0; t < 50; ++t) {
            auto s = random_state(game, rng);
            std::size_t u = rng() % game.player_count();
            std::size_t a = rng() % game.strategies(u).size(), b = rng() % game.strategies(u).size();
            rational ga = deviation_cost(game, s, u, a), gb = deviation_cost(game, s, u, b);
            rational pa = deviation_cost(positive, s, u, a), pb = deviation_cost(positive, s, u, b);
            ++comparisons;
            if ((ga < gb && !(pa < pb)) || (gb < ga && !(pb < pa))) ++flipped;
        }
    }
    std::ostringstream d;
    d << bundles << " bundles (" << skipped << " constant circuits redrawn): structural failures=" << structural_bad
      << ", without equilibrium=" << no_equilibrium << ", " << equilibria
      << " equilibria, not local minima=" << not_local_min << "; positivize " << comparisons
      << " comparisons, preference flips=" << flipped;
    return {structural_bad == 0 && no_equilibrium == 0 && not_local_min == 0 && flipped == 0 && comparisons >= 1000,
            d.str()};
}

outcome determinism() {
    std::size_t checks = 0, differ = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto spec = corpus_spec(8, 555 + seed);
        auto once = [&](scheduler_kind sched) {
            auto g = generate(spec);
            solver_config cfg;
            cfg.scheduler = sched;
            cfg.seed = seed;
            auto r = solve(g, cfg);
            return std::make_pair(io::dump(io::to_json(g)), io::dump(io::to_json(r)) + io::trace_csv(r.trace));
        };
        for (auto sched : {scheduler_kind::scan, scheduler_kind::seeded_random}) {
            auto a = once(sched), b = once(sched);
            ++checks;
            if (a != b) ++differ;
        }
    }
    hardness::flip_instance c;
    c.inputs = 2;
    c.gates = {{hardness::wire::x(0), hardness::wire::x(1)}};
    c.outputs = {0};
    auto flip_once = [&] {
        auto b = hardness::derive_subcircuits(c);
        return io::dump(io::to_json(hardness::build_flip_game(b, hardness::make_params(2, 1, b.total_gates(), 1))));
    };
    ++checks;
    if (flip_once() != flip_once()) ++differ;
    return {differ == 0, std::to_string(checks) + " paired runs, " + std::to_string(differ) + " byte differences"};
}

outcome degree_two() {
    std::size_t runs = 0, ok = 0, capped = 0;
    const rational theta_override(3);
    for (std::size_t n : {4u, 8u})
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            auto g = generate(corpus_spec(n, 4000 + 100 * n + seed, 2));
            solver_config cfg;
            cfg.theta_override = theta_override;
            ++runs;
            try {
                auto r = solve(g, cfg);
                if (approximation_factor(g, r.trace.final_state).within(r.bound)) ++ok;
            } catch (const contract_violation&) {
                ++capped;
            }
        }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " degree-2 runs within p(1+4/n) for theta=" +
                            to_string(theta_override) + "; cap breaches=" + std::to_string(capped)};
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--csv") == 0) csv_path = argv[i + 1];

    const std::vector<std::pair<std::string, std::function<outcome()>>> criteria{
        {"guarantee", guarantee},
        {"move bound", move_bound_check},
        {"rosenthal identity", rosenthal},
        {"sandwich and subadditivity", sandwich_and_subadditivity},
        {"equilibrium potential ratio", potential_ratio},
        {"phase discipline", phase_discipline},
        {"hardness construction", hardness_construction},
        {"determinism", determinism},
        {"degree-2 path", degree_two},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all &= o.pass;
        std::printf("criterion %zu %-28s %s  %s [%.1fs]\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
