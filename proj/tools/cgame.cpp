// cgame: command-line front end for the congestion toolkit.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "congestion/generators.hpp"
#include "congestion/hardness.hpp"
#include "congestion/io.hpp"
#include "congestion/solver.hpp"
#include "congestion/verify.hpp"

using namespace congestion;

namespace {

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        io::write_file(path, text);
}

std::optional<rational> optional_rational(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return parse_rational(text);
}

// ----------------------------------------------------------------- gen

struct gen_options {
    gen_spec spec;
    std::string spec_file;
    std::string out;
};

void add_gen(CLI::App& app, gen_options& o, std::function<void()>& run) {
    auto* cmd = app.add_subcommand("gen", "Generate a seeded random instance");
    auto* spec_file = cmd->add_option("--spec", o.spec_file, "Generator spec as JSON")->check(CLI::ExistingFile);
    std::vector<CLI::Option*> flags{
        cmd->add_option("--seed", o.spec.seed, "RNG seed"),
        cmd->add_option("--n", o.spec.players, "Players"),
        cmd->add_option("--resources", o.spec.resources, "Resources"),
        cmd->add_option("--strategies", o.spec.strategies_per_player, "Strategies per player"),
        cmd->add_option("--min-size", o.spec.min_strategy_size, "Smallest strategy"),
        cmd->add_option("--max-size", o.spec.max_strategy_size, "Largest strategy"),
        cmd->add_option("--d", o.spec.degree, "Latency degree"),
        cmd->add_option("--coeff-min", o.spec.coeff_min, "Smallest coefficient"),
        cmd->add_option("--coeff-max", o.spec.coeff_max, "Largest coefficient"),
        cmd->add_flag("--symmetric", o.spec.symmetric, "Same strategy set for every player"),
    };
    for (auto* f : flags) spec_file->excludes(f);
    cmd->add_option("-o,--out", o.out, "Output file (default stdout)");
    cmd->callback([&] {
        run = [&] {
            if (!o.spec_file.empty()) o.spec = io::gen_spec_from_json(io::parse(io::read_file(o.spec_file), o.spec_file));
            auto j = io::to_json(generate(o.spec));
            j["generator"] = {{"seed", o.spec.seed},
                              {"players", o.spec.players},
                              {"resources", o.spec.resources},
                              {"strategies_per_player", o.spec.strategies_per_player},
                              {"min_strategy_size", o.spec.min_strategy_size},
                              {"max_strategy_size", o.spec.max_strategy_size},
                              {"degree", o.spec.degree},
                              {"coeff_min", o.spec.coeff_min},
                              {"coeff_max", o.spec.coeff_max},
                              {"symmetric", o.spec.symmetric}};
            emit(io::dump(j), o.out);
        };
    });
}

// --------------------------------------------------------------- solve

struct solve_options {
    std::string instance;
    unsigned psi = 1;
    std::string theta;
    std::string scheduler = "scan";
    std::uint64_t seed = 0;
    std::string cap;
    std::string trace;
    std::string csv;
};

solver_config make_config(unsigned psi, const std::string& theta, const std::string& scheduler, std::uint64_t seed,
                          const std::string& cap) {
    solver_config cfg;
    cfg.psi = psi;
    cfg.theta_override = optional_rational(theta);
    cfg.scheduler = scheduler == "random" ? scheduler_kind::seeded_random : scheduler_kind::scan;
    cfg.seed = seed;
    if (!cap.empty()) {
        integer c;
        if (c.set_str(cap, 10) != 0 || sgn(c) < 0) throw validation_error("--cap must be a non-negative integer");
        cfg.move_cap = c;
    }
    return cfg;
}

void add_solve(CLI::App& app, solve_options& o, std::function<void()>& run, int& status) {
    auto* cmd = app.add_subcommand("solve", "Compute an approximate equilibrium");
    cmd->add_option("instance", o.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--psi", o.psi, "Accuracy exponent")->check(CLI::PositiveNumber);
    cmd->add_option("--theta", o.theta, "Potential ratio bound (required for degree >= 2)");
    cmd->add_option("--scheduler", o.scheduler, "Player order within a phase")->check(CLI::IsMember({"scan", "random"}));
    cmd->add_option("--seed", o.seed, "Seed for the random scheduler");
    cmd->add_option("--cap", o.cap, "Move cap (default from n, d, psi)");
    cmd->add_option("--trace", o.trace, "Write the trace JSON here");
    cmd->add_option("--csv", o.csv, "Write the per-move CSV here");
    cmd->callback([&] {
        run = [&] {
            auto game = io::load_game(o.instance);
            auto result = solve(game, make_config(o.psi, o.theta, o.scheduler, o.seed, o.cap));
            auto report = approximation_factor(game, result.trace.final_state);
            const bool ok = report.within(result.bound);
            if (!o.trace.empty()) io::write_file(o.trace, io::dump(io::to_json(result)));
            if (!o.csv.empty()) io::write_file(o.csv, io::trace_csv(result.trace));
            std::printf("moves=%zu rho_star=%s bound=%s ok=%s\n", result.trace.moves.size(),
                        to_string(report.factor).c_str(), to_string(result.bound).c_str(), ok ? "true" : "false");
            if (!ok) {
                std::fprintf(stderr, "guarantee missed: rho_star exceeds the bound\n");
                status = static_cast<int>(exit_code::contract_violation);
            }
        };
    });
}

// ---------------------------------------------------- verify / brute / audit

struct check_options {
    std::string instance;
    std::string state_file;
    std::string rho;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
};

void add_checks(CLI::App& app, check_options& o, std::function<void()>& run, int& status) {
    auto* verify = app.add_subcommand("verify", "Approximation factor of a state");
    verify->add_option("instance", o.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    verify->add_option("state", o.state_file, "State JSON")->required()->check(CLI::ExistingFile);
    verify->add_option("--rho", o.rho, "Exit 1 unless the state is a rho-approximate equilibrium");
    verify->callback([&] {
        run = [&] {
            auto game = io::load_game(o.instance);
            auto s = io::load_state(o.state_file);
            validate_state(game, s);
            auto report = approximation_factor(game, s);
            auto j = io::to_json(report);
            if (auto rho = optional_rational(o.rho)) {
                const bool within = report.within(*rho);
                j["rho"] = to_string(*rho);
                j["within"] = within;
                if (!within) status = 1;
            }
            std::cout << io::dump(j);
        };
    });

    auto* brute = app.add_subcommand("brute", "Exact minimum of the potential by enumeration");
    brute->add_option("instance", o.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    brute->callback([&] {
        run = [&] {
            auto game = io::load_game(o.instance);
            auto m = brute_min_potential(game);
            std::cout << io::dump({{"phi_star", to_string(m.potential)}, {"argmin", m.argmin.choice}});
        };
    });

    auto* audit = app.add_subcommand("audit", "Randomised identity checks on an instance");
    audit->add_option("instance", o.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    audit->add_option("--trials", o.trials, "Random trials per identity");
    audit->add_option("--seed", o.seed, "RNG seed");
    audit->callback([&] {
        run = [&] {
            auto game = io::load_game(o.instance);
            auto report = audit_identities(game, o.seed, o.trials);
            std::cout << io::dump(io::to_json(report, game));
            if (!report.clean()) status = static_cast<int>(exit_code::contract_violation);
        };
    });
}

// ------------------------------------------------------------ flip-gen

struct flip_options {
    std::string circuit;
    bool bundle = false;
    std::string alpha = "2";
    std::string rho = "1";
    bool positive = false;
    std::string out;
};

void add_flip(CLI::App& app, flip_options& o, std::function<void()>& run, int& status) {
    auto* cmd = app.add_subcommand("flip-gen", "Build the congestion game for a Flip circuit");
    cmd->add_option("circuit", o.circuit, "Circuit (or bundle) JSON")->required()->check(CLI::ExistingFile);
    cmd->add_flag("--bundle", o.bundle, "Input is a ready-made bundle of gadget circuits");
    cmd->add_option("--alpha", o.alpha, "Gadget base weight");
    cmd->add_option("--rho", o.rho, "Approximation factor the weights must absorb");
    cmd->add_flag("--positivize", o.positive, "Rescale to non-negative latencies");
    cmd->add_option("-o,--out", o.out, "Write the instance JSON here (default stdout)");
    cmd->callback([&] {
        run = [&] {
            const auto doc = io::parse(io::read_file(o.circuit), o.circuit);
            auto bundle = o.bundle ? io::bundle_from_json(doc) : hardness::derive_subcircuits(io::flip_from_json(doc));
            if (bundle.total_gates() == 0)
                throw validation_error("every derived subcircuit is constant; the gadget weights need at least one gate");
            const rational alpha = parse_rational(o.alpha);
            auto params = hardness::make_params(alpha, parse_rational(o.rho), bundle.total_gates(), bundle.outputs);
            auto game = hardness::build_flip_game(bundle, params);
            auto check = hardness::structural_check(game);
            if (o.positive) game = hardness::positivize(game, alpha);
            emit(io::dump(io::to_json(game)), o.out);
            std::fprintf(stderr, "players=%zu resources=%zu gates=%zu structural=%s max_players=%zu\n",
                         game.player_count(), game.resource_count(), bundle.total_gates(),
                         check.pass ? "pass" : "fail", check.max_players);
            if (!check.pass) status = static_cast<int>(exit_code::contract_violation);
        };
    });
}

// --------------------------------------------------------------- bench

struct bench_options {
    std::vector<std::size_t> ns{4, 8, 12, 16};
    std::size_t seeds = 10;
    std::uint64_t seed_base = 0;
    std::size_t degree = 1;
    unsigned psi = 1;
    std::string theta;
    std::size_t resources = 12;
    std::size_t strategies = 3;
    std::size_t max_size = 4;
    std::uint64_t coeff_max = 9;
    std::string scheduler = "scan";
    unsigned threads = 0;
    std::string out;
};

struct bench_row {
    std::string line;
    bool failed = false;
};

bench_row bench_one(const bench_options& o, std::size_t n, std::uint64_t seed) {
    gen_spec spec;
    spec.seed = seed;
    spec.players = n;
    spec.resources = o.resources;
    spec.strategies_per_player = o.strategies;
    spec.max_strategy_size = std::min(o.max_size, o.resources);
    spec.degree = o.degree;
    spec.coeff_max = o.coeff_max;
    auto game = generate(spec);
    std::ostringstream row;
    row << n << "," << o.degree << "," << o.psi << "," << seed << ",";
    const auto start = std::chrono::steady_clock::now();
    try {
        auto result = solve(game, make_config(o.psi, o.theta, o.scheduler, seed, ""));
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        auto report = approximation_factor(game, result.trace.final_state);
        const bool ok = report.within(result.bound);
        char msbuf[32];
        std::snprintf(msbuf, sizeof msbuf, "%.3f", ms);
        row << result.trace.moves.size() << "," << result.trace.phases.size() << "," << msbuf << ","
            << to_string(report.factor) << "," << to_string(result.bound) << "," << (ok ? "true" : "false");
        return {row.str(), !ok};
    } catch (const contract_violation& e) {
        std::fprintf(stderr, "n=%zu seed=%llu: %s\n", n, static_cast<unsigned long long>(seed), e.what());
        row << ",,,,,false";
        return {row.str(), true};
    }
}

void add_bench(CLI::App& app, bench_options& o, std::function<void()>& run, int& status) {
    auto* cmd = app.add_subcommand("bench", "Solve a seeded corpus and write one CSV row per run");
    cmd->add_option("--n", o.ns, "Player counts, comma separated")->delimiter(',');
    cmd->add_option("--seeds", o.seeds, "Seeds per player count");
    cmd->add_option("--seed-base", o.seed_base, "First seed");
    cmd->add_option("--d", o.degree, "Latency degree");
    cmd->add_option("--psi", o.psi, "Accuracy exponent")->check(CLI::PositiveNumber);
    cmd->add_option("--theta", o.theta, "Potential ratio bound (required for degree >= 2)");
    cmd->add_option("--resources", o.resources, "Resources per game");
    cmd->add_option("--strategies", o.strategies, "Strategies per player");
    cmd->add_option("--max-size", o.max_size, "Largest strategy");
    cmd->add_option("--coeff-max", o.coeff_max, "Largest coefficient");
    cmd->add_option("--scheduler", o.scheduler, "Player order within a phase")->check(CLI::IsMember({"scan", "random"}));
    cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
    cmd->add_option("--out", o.out, "CSV file (default stdout)");
    cmd->callback([&] {
        run = [&] {
            std::vector<std::pair<std::size_t, std::uint64_t>> jobs;
            for (auto n : o.ns)
                for (std::size_t k = 0; k < o.seeds; ++k) jobs.emplace_back(n, o.seed_base + k);
            std::vector<bench_row> rows(jobs.size());
            std::atomic<std::size_t> next{0};
            std::mutex error_mutex;
            std::exception_ptr first_error;
            auto worker = [&] {
                for (std::size_t i; (i = next++) < jobs.size();) {
                    try {
                        rows[i] = bench_one(o, jobs[i].first, jobs[i].second);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            };
            unsigned workers = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
            workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, jobs.size())));
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
            if (first_error) std::rethrow_exception(first_error);

            std::string csv = "n,d,psi,seed,moves,phases,ms,rho_star,bound,ok\n";
            bool failed = false;
            for (const auto& r : rows) {
                csv += r.line + "\n";
                failed |= r.failed;
            }
            emit(csv, o.out);
            if (failed) status = static_cast<int>(exit_code::contract_violation);
        };
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Congestion game toolkit: approximate equilibria, verification and hardness instances"};
    app.require_subcommand(1);

    std::function<void()> run;
    int status = 0;
    gen_options gen;
    solve_options solve_opts;
    check_options checks;
    flip_options flip;
    bench_options bench;
    add_gen(app, gen, run);
    add_solve(app, solve_opts, run, status);
    add_checks(app, checks, run, status);
    add_flip(app, flip, run, status);
    add_bench(app, bench, run, status);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(exit_code::validation);
    }

    try {
        run();
    } catch (const error& e) {
        std::fprintf(stderr, "cgame: %s\n", e.what());
        return static_cast<int>(e.code());
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "cgame: malformed JSON: %s\n", e.what());
        return static_cast<int>(exit_code::validation);
    }
    return status;
}
