#pragma once

// Shared SAT context for every transition-relation query.
//
// One incremental solver holds the transition relation over variables
// 1..n (current) and n+1..2n (next), plus a few standing selector literals:
//
//   rec_guard: assuming it excludes every recorded danger edge, so queries
//              that assume it run over "the relation minus the recorded
//              sub-chain". Blocking clauses are added permanently as edges
//              are recorded.
//   bad_next:  assuming it forces the next state into some bad cube.
//
// Per-state pin/exclude selectors and per-clause selectors are created
// lazily and reused; set-membership queries get fresh one-shot selectors.

#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "probic/model.hpp"
#include "probic/sat.hpp"

namespace probic {

// A violated program invariant or corrupted internal state: never a property
// of the model being checked.
struct internal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class query_ctx {
public:
    query_ctx(const symbolic_dtmc& m, const property_spec& prop)
        : m_(m), prop_(prop), sat_(2 * m.num_vars) {
        for (const auto& c : m.trans) sat_.add_clause(c);
        rec_guard_ = static_cast<lit_t>(sat_.add_var());
        bad_next_ = static_cast<lit_t>(sat_.add_var());
        clause some_bad{-bad_next_};
        for (const auto& b : prop.bad) {
            lit_t bc = static_cast<lit_t>(sat_.add_var());
            some_bad.push_back(bc);
            for (lit_t l : prime_lits(b, m.num_vars)) sat_.add_clause({-bc, l});
        }
        sat_.add_clause(some_bad);
    }

    const symbolic_dtmc& model() const { return m_; }
    const property_spec& prop() const { return prop_; }
    solver& sat() { return sat_; }
    lit_t rec_guard() const { return rec_guard_; }
    lit_t bad_next() const { return bad_next_; }
    std::uint64_t num_queries() const { return sat_.num_solve_calls(); }

    var_t add_var() { return sat_.add_var(); }

    // Permanently removes the pair (s, t) from every rec-guarded query.
    void block_recorded(state_t s, state_t t) {
        clause c{-rec_guard_};
        for (lit_t l : state_to_cube(s, m_.num_vars)) c.push_back(-l);
        for (lit_t l : prime_lits(state_to_cube(t, m_.num_vars), m_.num_vars))
            c.push_back(-l);
        sat_.add_clause(c);
    }

    // Assuming the returned literal pins the current state to s.
    lit_t current_is(state_t s) { return pin_state(current_is_, s, 0); }
    // Assuming the returned literal pins the next state to s.
    lit_t next_is(state_t s) { return pin_state(next_is_, s, m_.num_vars); }
    // Assuming the returned literal excludes s as the current state.
    lit_t current_not(state_t s) {
        auto it = current_not_.find(s);
        if (it != current_not_.end()) return it->second;
        lit_t g = static_cast<lit_t>(sat_.add_var());
        clause c{-g};
        for (lit_t l : state_to_cube(s, m_.num_vars)) c.push_back(-l);
        sat_.add_clause(c);
        current_not_.emplace(s, g);
        return g;
    }
    // Assuming the returned literal asserts the clause on the current state.
    lit_t clause_holds(const clause& c) {
        auto it = clause_sel_.find(c);
        if (it != clause_sel_.end()) return it->second;
        lit_t g = static_cast<lit_t>(sat_.add_var());
        clause guarded{-g};
        for (lit_t l : c) guarded.push_back(l);
        sat_.add_clause(guarded);
        clause_sel_.emplace(c, g);
        return g;
    }

    state_t decode_current() { return decode(0); }
    state_t decode_next() { return decode(m_.num_vars); }

    // One unrecorded relation edge from the source set into the target set,
    // if any. Extra assumptions (frame activation, exclusions) may be passed.
    std::optional<std::pair<state_t, state_t>> find_edge(
        const std::vector<state_t>& sources, const std::vector<state_t>& targets,
        std::vector<lit_t> extra = {}) {
        if (sources.empty() || targets.empty()) return std::nullopt;
        extra.push_back(rec_guard_);
        extra.push_back(member_selector(sources, /*primed=*/false));
        extra.push_back(member_selector(targets, /*primed=*/true));
        if (sat_.solve(extra) != solver::result::sat) return std::nullopt;
        return std::make_pair(decode_current(), decode_next());
    }

    // Fresh literal whose assumption restricts the current (or next) state to
    // the given set. One-shot: sets change between calls, so these are not
    // cached.
    lit_t member_selector(const std::vector<state_t>& set, bool primed) {
        lit_t d = static_cast<lit_t>(sat_.add_var());
        clause c{-d};
        for (state_t s : set) c.push_back(primed ? next_is(s) : current_is(s));
        sat_.add_clause(c);
        return d;
    }

private:
    lit_t pin_state(std::unordered_map<state_t, lit_t>& cache, state_t s, var_t shift) {
        auto it = cache.find(s);
        if (it != cache.end()) return it->second;
        lit_t g = static_cast<lit_t>(sat_.add_var());
        cube body = state_to_cube(s, m_.num_vars);
        if (shift) body = prime_lits(body, shift);
        for (lit_t l : body) sat_.add_clause({-g, l});
        cache.emplace(s, g);
        return g;
    }

    state_t decode(var_t shift) {
        state_t s = 0;
        for (var_t v = 1; v <= m_.num_vars; ++v)
            if (sat_.model_value(v + shift)) s |= state_t(1) << (v - 1);
        return s;
    }

    const symbolic_dtmc& m_;
    const property_spec& prop_;
    solver sat_;
    lit_t rec_guard_ = 0;
    lit_t bad_next_ = 0;
    std::unordered_map<state_t, lit_t> current_is_, next_is_, current_not_;
    std::map<clause, lit_t> clause_sel_;
};

}  // namespace probic
