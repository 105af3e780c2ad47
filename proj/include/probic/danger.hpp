#pragma once

// Ledger of discovered danger states and recorded transitions between them.
//
// States are kept in insertion order (the sweep walks the list while it
// grows). Every recorded edge carries its exact probability, read off the
// model's entries; recording also adds a permanent blocking clause to the
// shared query context so rec-guarded queries never rediscover the edge.

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "probic/frames.hpp"
#include "probic/model_io.hpp"
#include "probic/query_ctx.hpp"

namespace probic {

class danger_ledger {
public:
    struct edge {
        state_t from;
        state_t to;
        rational p;
    };

    struct record_result {
        bool new_edge;
        rational p;
    };

    danger_ledger(const symbolic_dtmc& m, const property_spec& prop)
        : m_(m), prop_(prop) {}

    // Adds the edge (s, t) with its model probability. Duplicates are
    // normally ignored; with skip_dedup they are appended again (and the
    // caller will re-register them downstream).
    record_result record(query_ctx& ctx, state_t s, state_t t, bool skip_dedup = false) {
        if (!skip_dedup && edge_set_.count({s, t})) return {false, rational(0)};
        rational p = transition_probability(m_, s, t);
        if (p == 0) throw internal_error("recorded a pair with zero probability");
        add_state(s);
        add_state(t);
        edges_.push_back({s, t, p});
        if (edge_set_.insert({s, t}).second) ctx.block_recorded(s, t);
        return {true, p};
    }

    bool has_edge(state_t s, state_t t) const { return edge_set_.count({s, t}) != 0; }
    bool contains(state_t s) const { return index_.count(s) != 0; }
    bool is_bad_member(state_t s) const { return prop_.is_bad(s); }

    const std::vector<state_t>& states() const { return states_; }
    const std::vector<edge>& edges() const { return edges_; }
    std::size_t num_states() const { return states_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    // States reachable from origin along recorded edges (origin included if
    // it is a member).
    std::vector<state_t> reachable_from(state_t origin) const {
        std::vector<state_t> out;
        if (!contains(origin)) return out;
        std::set<state_t> seen{origin};
        out.push_back(origin);
        for (std::size_t i = 0; i < out.size(); ++i)
            for (const auto& e : edges_)
                if (e.from == out[i] && seen.insert(e.to).second) out.push_back(e.to);
        return out;
    }

    // Frame disjointness: no non-bad ledger state other than the initial one
    // may satisfy any frame from 1 up.
    std::optional<std::string> disjointness_violation(const frame_sequence& frames) const {
        for (state_t s : states_) {
            if (prop_.is_bad(s) || s == m_.init_state) continue;
            for (int i = 1; i <= frames.top(); ++i)
                if (frames.state_in_frame(s, i))
                    return "ledger state " + std::to_string(s) +
                           " satisfies frame " + std::to_string(i);
        }
        return std::nullopt;
    }

    // One unrecorded relation edge between ledger states, optionally with the
    // source side restricted.
    std::optional<std::pair<state_t, state_t>> find_new_internal_transition(
        query_ctx& ctx, const std::vector<state_t>* sources = nullptr) {
        return ctx.find_edge(sources ? *sources : states_, states_);
    }

    // Sub-chain reachable from the initial state along recorded edges, as a
    // standalone model. The relation is reproduced exactly (as maxterms over
    // the full pair space) when the variable count keeps that small; above
    // the cutoff the relation is left empty and the file is evidence only.
    model_file witness_component() const {
        model_file w;
        w.dtmc.num_vars = m_.num_vars;
        w.dtmc.init = m_.init;
        w.dtmc.init_state = m_.init_state;
        w.bad = prop_.bad;
        std::vector<state_t> comp = reachable_from(m_.init_state);
        std::set<state_t> in_comp(comp.begin(), comp.end());
        std::set<std::pair<state_t, state_t>> kept;
        for (const auto& e : edges_) {
            if (!in_comp.count(e.from) || !kept.insert({e.from, e.to}).second) continue;
            w.dtmc.entries.push_back(make_entry(state_to_cube(e.from, m_.num_vars),
                                                state_to_cube(e.to, m_.num_vars), e.p));
        }
        if (m_.num_vars <= 6) {
            state_t space = state_t(1) << m_.num_vars;
            for (state_t a = 0; a < space; ++a)
                for (state_t b = 0; b < space; ++b) {
                    if (kept.count({a, b})) continue;
                    clause c = negate_cube(state_to_cube(a, m_.num_vars));
                    for (lit_t l :
                         prime_lits(state_to_cube(b, m_.num_vars), m_.num_vars))
                        c.push_back(-l);
                    w.dtmc.trans.push_back(make_clause(std::move(c)));
                }
        }
        return w;
    }

private:
    void add_state(state_t s) {
        if (index_.emplace(s, states_.size()).second) states_.push_back(s);
    }

    const symbolic_dtmc& m_;
    const property_spec& prop_;
    std::vector<state_t> states_;
    std::unordered_map<state_t, std::size_t> index_;
    std::vector<edge> edges_;
    std::set<std::pair<state_t, state_t>> edge_set_;
};

}  // namespace probic
