#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "latency.hpp"
#include "rational.hpp"

namespace congestion {

enum class game_mode { standard, hardness };

inline std::string to_string(game_mode mode) {
    return mode == game_mode::standard ? "standard" : "hardness";
}

/// Sorted list of distinct resource indices.
using strategy = std::vector<std::size_t>;

struct player {
    std::vector<strategy> strategies;
};

/// One chosen strategy index per player.
struct state {
    std::vector<std::size_t> choice;

    std::size_t size() const noexcept { return choice.size(); }
    std::size_t operator[](std::size_t u) const { return choice[u]; }
    std::size_t& operator[](std::size_t u) { return choice[u]; }
    friend auto operator<=>(const state&, const state&) = default;
};

using load_vector = std::vector<std::int64_t>;

inline bool uses(const strategy& s, std::size_t resource) {
    return std::binary_search(s.begin(), s.end(), resource);
}

class congestion_game {
public:
    congestion_game() = default;

    congestion_game(game_mode mode, std::vector<latency_function> resources, std::vector<player> players)
        : mode_(mode), resources_(std::move(resources)), players_(std::move(players)) {
        validate();
        build_tables();
    }

    game_mode mode() const noexcept { return mode_; }
    std::size_t player_count() const noexcept { return players_.size(); }
    std::size_t resource_count() const noexcept { return resources_.size(); }
    const std::vector<latency_function>& resources() const noexcept { return resources_; }
    const latency_function& resource(std::size_t e) const { return resources_.at(e); }
    const std::vector<player>& players() const noexcept { return players_; }
    const std::vector<strategy>& strategies(std::size_t u) const { return players_[u].strategies; }
    bool is_active(std::size_t) const noexcept { return true; }

    /// Largest declared degree over all resources.
    std::size_t degree() const {
        std::size_t d = 0;
        for (const auto& f : resources_) d = std::max(d, f.degree());
        return d;
    }

    /// f_e(k) for 1 <= k <= player_count() served from a precomputed table.
    const rational& latency(std::size_t e, std::int64_t k) const {
        if (k < 1 || static_cast<std::size_t>(k) > players_.size())
            throw validation_error("load " + std::to_string(k) + " out of range for resource " + std::to_string(e));
        return table_[e * stride_ + static_cast<std::size_t>(k)];
    }

    /// sum_{j=1..k} f_e(j); k may be zero.
    const rational& latency_prefix(std::size_t e, std::int64_t k) const {
        return prefix_[e * stride_ + static_cast<std::size_t>(k)];
    }

    // Optional debugging names, emitted by the hardness builder.
    std::vector<std::string> player_labels;
    std::vector<std::string> resource_labels;
    std::vector<std::vector<std::string>> strategy_labels;

private:
    void validate() const {
        for (std::size_t u = 0; u < players_.size(); ++u) {
            const auto& strategies = players_[u].strategies;
            if (strategies.empty())
                throw validation_error("player " + std::to_string(u) + " has no strategies");
            for (std::size_t s = 0; s < strategies.size(); ++s) {
                const auto& strat = strategies[s];
                if (strat.empty())
                    throw validation_error("player " + std::to_string(u) + " strategy " + std::to_string(s) + " is empty");
                for (std::size_t i = 0; i < strat.size(); ++i) {
                    if (strat[i] >= resources_.size())
                        throw validation_error("player " + std::to_string(u) + " strategy " + std::to_string(s) +
                                               " references unknown resource " + std::to_string(strat[i]));
                    if (i > 0 && strat[i - 1] >= strat[i])
                        throw validation_error("player " + std::to_string(u) + " strategy " + std::to_string(s) +
                                               " is not a sorted set of distinct resources");
                }
            }
        }
        const std::int64_t n = static_cast<std::int64_t>(players_.size());
        for (std::size_t e = 0; e < resources_.size(); ++e) {
            const auto& f = resources_[e];
            if (mode_ == game_mode::standard) {
                if (!f.has_nonnegative_coefficients())
                    throw validation_error("resource " + std::to_string(e) + " has a negative coefficient in a standard game");
            } else {
                for (std::int64_t x = 1; x <= std::max<std::int64_t>(n, 1); ++x)
                    if (sgn(f(x)) < 0)
                        throw validation_error("resource " + std::to_string(e) + " has negative latency at load " +
                                               std::to_string(x));
            }
        }
    }

    void build_tables() {
        stride_ = players_.size() + 1;
        table_.assign(resources_.size() * stride_, rational(0));
        prefix_.assign(resources_.size() * stride_, rational(0));
        for (std::size_t e = 0; e < resources_.size(); ++e) {
            for (std::size_t k = 1; k < stride_; ++k) {
                table_[e * stride_ + k] = resources_[e](static_cast<std::int64_t>(k));
                prefix_[e * stride_ + k] = prefix_[e * stride_ + k - 1] + table_[e * stride_ + k];
            }
        }
    }

    game_mode mode_ = game_mode::standard;
    std::vector<latency_function> resources_;
    std::vector<player> players_;
    std::size_t stride_ = 1;
    std::vector<rational> table_;
    std::vector<rational> prefix_;
};

/// Restriction of a game to an active player set F. Players outside F are
/// frozen at their strategies in the freezing state and contribute t_e to every
/// resource they use, so the modified latency is f_e(x + t_e).
class subgame_view {
public:
    subgame_view(const congestion_game& base, std::vector<bool> active, const state& freezing)
        : base_(&base), active_(std::move(active)), frozen_(base.resource_count(), 0) {
        if (active_.size() != base.player_count())
            throw validation_error("active set size does not match player count");
        if (freezing.size() != base.player_count())
            throw validation_error("freezing state size does not match player count");
        for (std::size_t u = 0; u < base.player_count(); ++u) {
            if (active_[u]) continue;
            for (std::size_t e : base.strategies(u).at(freezing[u])) ++frozen_[e];
        }
    }

    const congestion_game& base() const noexcept { return *base_; }
    std::size_t player_count() const noexcept { return base_->player_count(); }
    std::size_t resource_count() const noexcept { return base_->resource_count(); }
    const std::vector<strategy>& strategies(std::size_t u) const { return base_->strategies(u); }
    bool is_active(std::size_t u) const { return active_[u]; }
    const std::vector<bool>& active() const noexcept { return active_; }
    std::int64_t frozen_load(std::size_t e) const { return frozen_[e]; }
    const load_vector& frozen_loads() const noexcept { return frozen_; }

    const rational& latency(std::size_t e, std::int64_t k) const { return base_->latency(e, k + frozen_[e]); }

private:
    const congestion_game* base_;
    std::vector<bool> active_;
    load_vector frozen_;
};

/// Anything that exposes players, strategies and (possibly modified) latencies.
template <class M>
concept cost_model = requires(const M& m, std::size_t i, std::int64_t k) {
    { m.player_count() } -> std::convertible_to<std::size_t>;
    { m.resource_count() } -> std::convertible_to<std::size_t>;
    { m.strategies(i) } -> std::same_as<const std::vector<strategy>&>;
    { m.latency(i, k) } -> std::convertible_to<const rational&>;
    { m.is_active(i) } -> std::convertible_to<bool>;
};

template <cost_model M>
void validate_state(const M& model, const state& s) {
    if (s.size() != model.player_count())
        throw validation_error("state has " + std::to_string(s.size()) + " entries, game has " +
                               std::to_string(model.player_count()) + " players");
    for (std::size_t u = 0; u < s.size(); ++u)
        if (s[u] >= model.strategies(u).size())
            throw validation_error("player " + std::to_string(u) + " plays unknown strategy " + std::to_string(s[u]));
}

/// n_e(S) counted over the active players of the model.
template <cost_model M>
load_vector load_profile(const M& model, const state& s) {
    validate_state(model, s);
    load_vector loads(model.resource_count(), 0);
    for (std::size_t u = 0; u < model.player_count(); ++u) {
        if (!model.is_active(u)) continue;
        for (std::size_t e : model.strategies(u)[s[u]]) ++loads[e];
    }
    return loads;
}

template <cost_model M>
rational player_cost(const M& model, const state& s, const load_vector& loads, std::size_t u) {
    rational cost(0);
    for (std::size_t e : model.strategies(u)[s[u]]) cost += model.latency(e, loads[e]);
    return cost;
}

template <cost_model M>
rational player_cost(const M& model, const state& s, std::size_t u) {
    return player_cost(model, s, load_profile(model, s), u);
}

/// Cost u would pay after switching to `alt`, with loads adjusted only on the
/// symmetric difference of the two strategies.
template <cost_model M>
rational deviation_cost(const M& model, const state& s, const load_vector& loads, std::size_t u, std::size_t alt) {
    const auto& strategies = model.strategies(u);
    if (alt >= strategies.size())
        throw validation_error("player " + std::to_string(u) + " has no strategy " + std::to_string(alt));
    const strategy& current = strategies[s[u]];
    rational cost(0);
    for (std::size_t e : strategies[alt]) {
        std::int64_t k = loads[e] + (uses(current, e) ? 0 : 1);
        cost += model.latency(e, k);
    }
    return cost;
}

template <cost_model M>
rational deviation_cost(const M& model, const state& s, std::size_t u, std::size_t alt) {
    return deviation_cost(model, s, load_profile(model, s), u, alt);
}

/// Rosenthal potential sum_e sum_{j=1..n_e} f_e(j) over the model's latencies.
template <cost_model M>
rational rosenthal_potential(const M& model, const load_vector& loads) {
    rational phi(0);
    for (std::size_t e = 0; e < loads.size(); ++e)
        for (std::int64_t j = 1; j <= loads[e]; ++j) phi += model.latency(e, j);
    return phi;
}

inline rational rosenthal_potential(const congestion_game& game, const load_vector& loads) {
    rational phi(0);
    for (std::size_t e = 0; e < loads.size(); ++e) phi += game.latency_prefix(e, loads[e]);
    return phi;
}

template <cost_model M>
rational rosenthal_potential(const M& model, const state& s) {
    return rosenthal_potential(model, load_profile(model, s));
}

struct aggregate {
    rational sum_of_latencies;  // sum of f_e(n_e) over resources in use
    rational potential;
    rational total_player_cost;
};

inline aggregate aggregate_metrics(const congestion_game& game, const state& s) {
    auto loads = load_profile(game, s);
    aggregate out;
    for (std::size_t e = 0; e < loads.size(); ++e)
        if (loads[e] > 0) out.sum_of_latencies += game.latency(e, loads[e]);
    out.potential = rosenthal_potential(game, loads);
    for (std::size_t u = 0; u < game.player_count(); ++u) out.total_player_cost += player_cost(game, s, loads, u);
    return out;
}

/// A state with its load profile kept current under single-player moves.
class tracked_state {
public:
    tracked_state(const congestion_game& game, state s)
        : game_(&game), state_(std::move(s)), loads_(load_profile(game, state_)) {}

    const state& current() const noexcept { return state_; }
    const load_vector& loads() const noexcept { return loads_; }
    std::size_t operator[](std::size_t u) const { return state_[u]; }

    void move(std::size_t u, std::size_t to) {
        const auto& strategies = game_->strategies(u);
        if (to >= strategies.size())
            throw validation_error("player " + std::to_string(u) + " has no strategy " + std::to_string(to));
        for (std::size_t e : strategies[state_[u]]) --loads_[e];
        for (std::size_t e : strategies[to]) ++loads_[e];
        state_[u] = to;
    }

    /// Full recomputation; true when the cached profile is consistent.
    bool consistent() const { return load_profile(*game_, state_) == loads_; }

private:
    const congestion_game* game_;
    state state_;
    load_vector loads_;
};

} // namespace congestion
