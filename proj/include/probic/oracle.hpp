#pragma once

// Reference analyzer for small models.
//
// Expands a symbolic chain into an explicit one and computes exact
// reachability probabilities by Gaussian elimination over rationals, after
// zeroing states that cannot reach a bad state at all. This code is the
// yardstick the checking engine is tested against, so it deliberately shares
// no machinery with the engine-side bound solver: dense elimination over the
// whole system here versus per-component sparse elimination there.
//
// Also hosts small model-construction helpers (explicit edge lists, random
// models) used by the fuzzing harness.

#include <cstdint>
#include <queue>
#include <random>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "probic/model.hpp"
#include "probic/model_io.hpp"

namespace probic {

// Raised when an operation refuses an oversized model rather than risk an
// exponential blowup.
struct refusal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct explicit_dtmc {
    var_t num_vars = 0;
    std::vector<state_t> states;  // discovery order; full-space mode uses identity order
    std::unordered_map<state_t, int> index;
    std::vector<std::vector<std::pair<int, rational>>> succ;  // by state index
    std::vector<char> bad;
    int init = -1;

    int index_of(state_t s) const {
        auto it = index.find(s);
        return it == index.end() ? -1 : it->second;
    }
};

namespace oracle_detail {

// Successor edges of one state, straight from the probability entries.
inline std::vector<std::pair<state_t, rational>> entry_successors(const symbolic_dtmc& m,
                                                                  state_t s) {
    std::vector<std::pair<state_t, rational>> out;
    for (const auto& e : m.entries) {
        if (!e.from_mask.matches(s)) continue;
        for (state_t t : expand_cube(e.to, m.num_vars)) out.emplace_back(t, e.p);
    }
    return out;
}

}  // namespace oracle_detail

// Builds the explicit chain. Refuses models over var_limit variables. Up to 14
// variables the whole state space is materialized; beyond that only states
// reachable from init are. Up to 10 variables the transition relation is also
// checked pair-by-pair against the probability entries.
inline explicit_dtmc explicate(const symbolic_dtmc& m, var_t var_limit = 20) {
    if (m.num_vars > var_limit)
        throw refusal_error("model has " + std::to_string(m.num_vars) +
                            " variables, exceeding the limit of " + std::to_string(var_limit));
    if (m.num_vars <= 10) {
        for (state_t s = 0; s < (state_t(1) << m.num_vars); ++s)
            for (state_t t = 0; t < (state_t(1) << m.num_vars); ++t)
                if (m.trans_holds(s, t) != (m.entry_for(s, t) != nullptr))
                    throw model_error(
                        "transition relation and probability entries disagree on pair " +
                        detail::state_text(s, m.num_vars) + " -> " +
                        detail::state_text(t, m.num_vars));
    }

    explicit_dtmc ex;
    ex.num_vars = m.num_vars;
    auto add_state = [&](state_t s) {
        auto [it, fresh] = ex.index.emplace(s, static_cast<int>(ex.states.size()));
        if (fresh) {
            ex.states.push_back(s);
            ex.succ.emplace_back();
        }
        return it->second;
    };

    if (m.num_vars <= 14) {
        for (state_t s = 0; s < (state_t(1) << m.num_vars); ++s) add_state(s);
        for (state_t s = 0; s < (state_t(1) << m.num_vars); ++s)
            for (auto& [t, p] : oracle_detail::entry_successors(m, s))
                ex.succ[s].emplace_back(add_state(t), p);
    } else {
        std::queue<state_t> work;
        add_state(m.init_state);
        work.push(m.init_state);
        while (!work.empty()) {
            state_t s = work.front();
            work.pop();
            int si = ex.index.at(s);
            for (auto& [t, p] : oracle_detail::entry_successors(m, s)) {
                bool fresh = !ex.index.count(t);
                int ti = add_state(t);
                ex.succ[si].emplace_back(ti, p);
                if (fresh) work.push(t);
            }
        }
    }
    ex.init = ex.index.at(m.init_state);
    return ex;
}

inline void mark_bad(explicit_dtmc& ex, const property_spec& prop) {
    ex.bad.assign(ex.states.size(), 0);
    for (std::size_t i = 0; i < ex.states.size(); ++i)
        ex.bad[i] = prop.is_bad(ex.states[i]) ? 1 : 0;
}

inline explicit_dtmc explicate(const symbolic_dtmc& m, const property_spec& prop,
                               var_t var_limit = 20) {
    explicit_dtmc ex = explicate(m, var_limit);
    mark_bad(ex, prop);
    return ex;
}

// Exact solve of (I - A) x = b by Gaussian elimination with first-nonzero
// pivoting. Throws on a singular system.
inline std::vector<rational> solve_linear_system(std::vector<std::vector<rational>> a,
                                                 std::vector<rational> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a[piv][col] == 0) ++piv;
        if (piv == n) throw std::runtime_error("singular linear system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            if (a[r][col] == 0) continue;
            rational f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<rational> x(n);
    for (std::size_t i = n; i-- > 0;) {
        rational acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
        x[i] = acc / a[i][i];
    }
    return x;
}

// Probability of reaching a bad state, for every state. Bad states get 1,
// states that cannot reach bad get 0, the rest solve a linear system whose
// least solution they are. Sub-stochastic inputs are fine: missing outflow
// behaves as mass that never reaches bad.
inline std::vector<rational> reach_probabilities(const explicit_dtmc& ex) {
    const std::size_t n = ex.states.size();
    std::vector<std::vector<int>> preds(n);
    for (std::size_t s = 0; s < n; ++s)
        for (auto& [t, p] : ex.succ[s]) preds[t].push_back(static_cast<int>(s));
    std::vector<char> can_reach(n, 0);
    std::queue<int> work;
    for (std::size_t s = 0; s < n; ++s)
        if (ex.bad[s]) {
            can_reach[s] = 1;
            work.push(static_cast<int>(s));
        }
    while (!work.empty()) {
        int t = work.front();
        work.pop();
        for (int s : preds[t])
            if (!can_reach[s]) {
                can_reach[s] = 1;
                work.push(s);
            }
    }

    std::vector<int> unknown_index(n, -1);
    std::vector<int> unknowns;
    for (std::size_t s = 0; s < n; ++s)
        if (can_reach[s] && !ex.bad[s]) {
            unknown_index[s] = static_cast<int>(unknowns.size());
            unknowns.push_back(static_cast<int>(s));
        }
    const std::size_t u = unknowns.size();
    std::vector<std::vector<rational>> a(u, std::vector<rational>(u, rational(0)));
    std::vector<rational> b(u, rational(0));
    for (std::size_t i = 0; i < u; ++i) {
        int s = unknowns[i];
        a[i][i] = 1;
        for (auto& [t, p] : ex.succ[s]) {
            if (ex.bad[t])
                b[i] += p;
            else if (unknown_index[t] != -1)
                a[i][unknown_index[t]] -= p;
        }
    }
    std::vector<rational> x = u ? solve_linear_system(std::move(a), std::move(b))
                                : std::vector<rational>{};
    std::vector<rational> out(n, rational(0));
    for (std::size_t s = 0; s < n; ++s) {
        if (ex.bad[s])
            out[s] = 1;
        else if (unknown_index[s] != -1)
            out[s] = x[unknown_index[s]];
    }
    return out;
}

inline rational reach_probability(const symbolic_dtmc& m, const property_spec& prop,
                                  var_t var_limit = 20) {
    explicit_dtmc ex = explicate(m, prop, var_limit);
    return reach_probabilities(ex)[ex.init];
}

// Forward closure of the flagged sources (flags included), optionally bounded
// by a number of steps.
inline std::vector<char> post_star(const explicit_dtmc& ex, std::vector<char> flags,
                                   int max_steps = -1) {
    std::queue<std::pair<int, int>> work;
    for (std::size_t s = 0; s < flags.size(); ++s)
        if (flags[s]) work.push({static_cast<int>(s), 0});
    while (!work.empty()) {
        auto [s, d] = work.front();
        work.pop();
        if (max_steps >= 0 && d >= max_steps) continue;
        for (auto& [t, p] : ex.succ[s])
            if (!flags[t]) {
                flags[t] = 1;
                work.push({t, d + 1});
            }
    }
    return flags;
}

// Backward closure of the flagged targets (flags included).
inline std::vector<char> pre_star(const explicit_dtmc& ex, std::vector<char> flags,
                                  int max_steps = -1) {
    std::vector<std::vector<int>> preds(ex.states.size());
    for (std::size_t s = 0; s < ex.states.size(); ++s)
        for (auto& [t, p] : ex.succ[s]) preds[t].push_back(static_cast<int>(s));
    std::queue<std::pair<int, int>> work;
    for (std::size_t s = 0; s < flags.size(); ++s)
        if (flags[s]) work.push({static_cast<int>(s), 0});
    while (!work.empty()) {
        auto [t, d] = work.front();
        work.pop();
        if (max_steps >= 0 && d >= max_steps) continue;
        for (int s : preds[t])
            if (!flags[s]) {
                flags[s] = 1;
                work.push({s, d + 1});
            }
    }
    return flags;
}

// Probability of reaching a bad state from init within max_len transitions.
// Converges to the unbounded probability from below as max_len grows.
inline rational enumerate_danger_paths(const explicit_dtmc& ex, int max_len) {
    const std::size_t n = ex.states.size();
    std::vector<rational> v(n, rational(0));
    for (std::size_t s = 0; s < n; ++s)
        if (ex.bad[s]) v[s] = 1;
    for (int step = 0; step < max_len; ++step) {
        std::vector<rational> next(n, rational(0));
        for (std::size_t s = 0; s < n; ++s) {
            if (ex.bad[s]) {
                next[s] = 1;
                continue;
            }
            for (auto& [t, p] : ex.succ[s]) next[s] += p * v[t];
        }
        v = std::move(next);
    }
    return v[ex.init];
}

// Builds a model from an explicit edge list: complete-cube entries plus the
// matching transition relation as one blocking clause per absent pair.
inline model_file from_edges(var_t n, state_t init,
                             const std::vector<std::tuple<state_t, state_t, rational>>& edges,
                             const std::vector<state_t>& bad_states) {
    model_file mf;
    symbolic_dtmc& m = mf.dtmc;
    m.num_vars = n;
    m.init = state_to_cube(init, n);
    m.init_state = init;
    std::vector<std::vector<char>> present(state_t(1) << n,
                                           std::vector<char>(state_t(1) << n, 0));
    for (const auto& [s, t, p] : edges) {
        m.entries.push_back(make_entry(state_to_cube(s, n), state_to_cube(t, n), p));
        present[s][t] = 1;
    }
    for (state_t s = 0; s < (state_t(1) << n); ++s)
        for (state_t t = 0; t < (state_t(1) << n); ++t) {
            if (present[s][t]) continue;
            clause c = negate_cube(state_to_cube(s, n));
            for (lit_t l : prime_lits(state_to_cube(t, n), n)) c.push_back(-l);
            m.trans.push_back(std::move(c));
        }
    for (state_t s : bad_states) mf.bad.push_back(state_to_cube(s, n));
    return mf;
}

struct random_instance {
    model_file mf;
    rational threshold;
    relation rel = relation::strictly_less;
    rational exact;  // reachability probability, for reference
};

// Deterministic random model generator for differential fuzzing. Every state
// gets one to four outgoing edges with probabilities k/D for one denominator
// D <= 64; the threshold lands within 1/10 of the exact probability so both
// verdicts stay exercised.
inline random_instance random_model(std::uint64_t seed, var_t max_vars = 6) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::uint64_t hi) { return rng() % hi; };  // uniform [0, hi)
    var_t n = static_cast<var_t>(2 + pick(max_vars - 1));
    state_t space = state_t(1) << n;

    std::vector<std::tuple<state_t, state_t, rational>> edges;
    for (state_t s = 0; s < space; ++s) {
        std::size_t degree = 1 + pick(4);
        std::vector<state_t> targets;
        while (targets.size() < degree) {
            state_t t = pick(space);
            if (std::find(targets.begin(), targets.end(), t) == targets.end())
                targets.push_back(t);
        }
        std::uint64_t den = 4 + pick(61);
        std::vector<std::uint64_t> cuts;
        while (cuts.size() + 1 < degree) {
            std::uint64_t c = 1 + pick(den - 1);
            if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
        }
        cuts.push_back(0);
        cuts.push_back(den);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            edges.emplace_back(s, targets[i], rational(cuts[i + 1] - cuts[i], den));
    }

    state_t init = pick(space);
    state_t bad = pick(space);
    random_instance inst;
    inst.mf = from_edges(n, init, edges, {bad});
    inst.rel = pick(2) ? relation::at_least : relation::strictly_less;

    property_spec prop = property_spec::make(inst.mf.bad, rational(1), inst.rel);
    inst.exact = reach_probability(inst.mf.dtmc, prop);

    rational delta(pick(101), 1000);  // up to 1/10 in steps of 1/1000
    rational y = pick(2) ? rational(inst.exact + delta) : rational(inst.exact - delta);
    if (y <= 0) y = delta > 0 && delta <= rational(1, 10) ? delta : rational(1, 20);
    if (y > 1) y = 1;
    inst.threshold = y;
    return inst;
}

}  // namespace probic
