#pragma once

// Symbolic discrete-time Markov chains.
//
// A model is a set of boolean variables, a complete initial cube, a transition
// relation T as CNF over current and next-state variables, and a list of
// probability entries (from-cube, to-cube, rational p) whose cube pairs are
// pairwise disjoint. T and the entries must describe the same edge set; the
// probabilities out of every relevant state must sum to one. Properties ask
// whether the probability of reaching a bad cube compares to a threshold.

#include <bit>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "probic/cnf.hpp"
#include "probic/rational.hpp"
#include "probic/sat.hpp"

namespace probic {

struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct prob_entry {
    cube from;  // over vars 1..n
    cube to;    // over vars 1..n, interpreted next-state
    rational p;
    cube_mask from_mask;
    cube_mask to_mask;
};

inline prob_entry make_entry(cube from, cube to, rational p) {
    prob_entry e;
    e.from_mask = cube_mask::from_cube(from);
    e.to_mask = cube_mask::from_cube(to);
    e.from = std::move(from);
    e.to = std::move(to);
    e.p = std::move(p);
    return e;
}

struct symbolic_dtmc {
    var_t num_vars = 0;
    cube init;  // complete cube
    state_t init_state = 0;
    std::vector<clause> trans;  // over vars 1..2n (next-state shifted by n)
    std::vector<prob_entry> entries;

    bool trans_holds(state_t from, state_t to) const {
        for (const auto& c : trans)
            if (!eval_trans_clause(c, from, to, num_vars)) return false;
        return true;
    }

    const prob_entry* entry_for(state_t from, state_t to) const {
        for (const auto& e : entries)
            if (e.from_mask.matches(from) && e.to_mask.matches(to)) return &e;
        return nullptr;
    }
};

// Probability of the edge (from, to). The relation and the entries must agree
// about the edge's existence; disagreement means the model is inconsistent.
inline rational transition_probability(const symbolic_dtmc& m, state_t from, state_t to) {
    const prob_entry* e = m.entry_for(from, to);
    bool rel = m.trans_holds(from, to);
    if (e && !rel)
        throw model_error("probability entry present for a pair outside the transition relation");
    if (!e && rel)
        throw model_error("transition relation admits a pair with no probability entry");
    return e ? e->p : rational(0);
}

enum class relation { strictly_less, at_least };

// Reachability property: compare Pr[reach any bad cube from init] to the
// threshold under the given relation.
struct property_spec {
    std::vector<cube> bad;  // non-empty
    std::vector<cube_mask> bad_masks;
    rational threshold;
    relation rel = relation::strictly_less;

    static property_spec make(std::vector<cube> bad_cubes, rational y, relation r) {
        property_spec p;
        p.bad = std::move(bad_cubes);
        p.bad_masks.reserve(p.bad.size());
        for (const auto& c : p.bad) p.bad_masks.push_back(cube_mask::from_cube(c));
        p.threshold = std::move(y);
        p.rel = r;
        return p;
    }

    bool is_bad(state_t s) const {
        for (const auto& m : bad_masks)
            if (m.matches(s)) return true;
        return false;
    }
};

// First pair of entries whose cube pairs share a (from, to) state pair, if any.
inline std::optional<std::pair<std::size_t, std::size_t>> check_entry_disjointness(
    const symbolic_dtmc& m) {
    for (std::size_t i = 0; i < m.entries.size(); ++i)
        for (std::size_t j = i + 1; j < m.entries.size(); ++j)
            if (m.entries[i].from_mask.overlaps(m.entries[j].from_mask) &&
                m.entries[i].to_mask.overlaps(m.entries[j].to_mask))
                return std::make_pair(i, j);
    return std::nullopt;
}

struct validation_report {
    bool refused = false;
    std::string refusal_reason;
    std::vector<std::string> issues;
    bool clean() const { return !refused && issues.empty(); }
};

namespace detail {

inline std::string lits_text(const std::vector<lit_t>& lits) {
    std::string out;
    for (lit_t l : lits) {
        if (!out.empty()) out += ' ';
        out += std::to_string(l);
    }
    return out;
}

inline std::string state_text(state_t s, var_t n) { return lits_text(state_to_cube(s, n)); }

// Is there a (from, to) pair inside the entry's cube pair that falsifies the
// transition clause? Purely syntactic: the clause survives on the whole entry
// iff one of its literals is forced true by the entry cubes.
inline bool entry_can_falsify(const prob_entry& e, const clause& c, var_t n) {
    for (lit_t l : c) {
        var_t v = lit_var(l);
        const cube& side = v <= n ? e.from : e.to;
        lit_t unprimed = v <= n ? l : (l < 0 ? l + n : l - n);
        for (lit_t el : side)
            if (el == unprimed) return false;  // entry forces this literal true
    }
    return true;
}

}  // namespace detail

// Checks that the model is a well-formed stochastic chain: outflow mass one
// for every state mentioned by an entry cube (plus the initial state),
// pairwise-disjoint entries, and agreement between the transition relation and
// the entry set in both directions. Refuses models above var_limit variables
// because the mass check enumerates states.
inline validation_report validate_stochastic(const symbolic_dtmc& m, var_t var_limit = 20) {
    validation_report rep;
    if (m.num_vars > var_limit) {
        rep.refused = true;
        rep.refusal_reason = "model has " + std::to_string(m.num_vars) +
                             " variables, exceeding the validation limit of " +
                             std::to_string(var_limit);
        return rep;
    }

    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const rational& p = m.entries[i].p;
        if (p <= 0 || p > 1)
            rep.issues.push_back("entry " + std::to_string(i) + " has probability " +
                                 rat_to_string(p) + " outside (0, 1]");
    }

    if (auto overlap = check_entry_disjointness(m))
        rep.issues.push_back("entries " + std::to_string(overlap->first) + " and " +
                             std::to_string(overlap->second) + " overlap");

    // Outflow mass per candidate state: anything a cube of some entry touches,
    // plus the initial state. Dangling targets show up with mass zero.
    std::vector<state_t> cand;
    cand.push_back(m.init_state);
    for (const auto& e : m.entries) {
        auto a = expand_cube(e.from, m.num_vars);
        cand.insert(cand.end(), a.begin(), a.end());
        auto b = expand_cube(e.to, m.num_vars);
        cand.insert(cand.end(), b.begin(), b.end());
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (state_t s : cand) {
        rational mass(0);
        for (const auto& e : m.entries)
            if (e.from_mask.matches(s)) {
                // a partial to-cube assigns p to each of its targets
                int free_vars = m.num_vars - std::popcount(e.to_mask.mask);
                mass += e.p * rational(state_t(1) << free_vars);
            }
        if (mass != 1)
            rep.issues.push_back("state " + detail::state_text(s, m.num_vars) +
                                 " has outflow mass " + rat_to_string(mass));
    }

    // Entries must stay inside the transition relation (per entry/clause,
    // syntactic check).
    for (std::size_t i = 0; i < m.entries.size(); ++i)
        for (std::size_t j = 0; j < m.trans.size(); ++j)
            if (detail::entry_can_falsify(m.entries[i], m.trans[j], m.num_vars)) {
                rep.issues.push_back("entry " + std::to_string(i) +
                                     " leaves the transition relation (clause " +
                                     std::to_string(j) + ")");
                break;
            }

    // The transition relation must not admit pairs no entry covers: one
    // query for T and the negation of every entry's cube pair.
    solver sat(2 * m.num_vars);
    for (const auto& c : m.trans) sat.add_clause(c);
    for (const auto& e : m.entries) {
        clause block = negate_cube(e.from);
        for (lit_t l : prime_lits(e.to, m.num_vars)) block.push_back(-l);
        sat.add_clause(block);
    }
    if (sat.solve() == solver::result::sat) {
        state_t from = 0, to = 0;
        for (var_t v = 1; v <= m.num_vars; ++v) {
            if (sat.model_value(v)) from |= state_t(1) << (v - 1);
            if (sat.model_value(v + m.num_vars)) to |= state_t(1) << (v - 1);
        }
        rep.issues.push_back("transition " + detail::state_text(from, m.num_vars) + " -> " +
                             detail::state_text(to, m.num_vars) + " has no probability entry");
    }

    return rep;
}

}  // namespace probic
