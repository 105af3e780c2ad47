#pragma once

// Incremental-induction engine deciding reachability thresholds on symbolic
// DTMCs.
//
// The engine maintains three cooperating structures:
//
//   frames:  an inductive frame sequence over the transition relation MINUS
//            the recorded edges. Counterexamples to induction are not blocked
//            outright — their edge into the bad region is recorded first, and
//            only then is the state excluded, so the frames always
//            over-approximate what is reachable without using any recorded
//            edge.
//   ledger:  the recorded danger sub-chain (states + exact edge
//            probabilities).
//   bounds:  exact lower/upper bounds on the reach probability per ledger
//            state; l only grows, u only shrinks as edges are recorded.
//
// A verdict can fall out early whenever the bounds clear the threshold.
// Otherwise the run ends at frame closure, after which a final exchange of
// queries tops up the ledger until every transition leaving its reachable
// part is recorded; at that point the deficit of those states is certifiably
// safe and the two bounds meet, giving the exact probability.
//
// Mutation flags deliberately break two internal disciplines (for testing
// the invariant suite); they are never enabled in normal operation.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <tuple>
#include <utility>
#include <vector>

#include "probic/bounds.hpp"
#include "probic/danger.hpp"
#include "probic/frames.hpp"
#include "probic/model.hpp"
#include "probic/query_ctx.hpp"

namespace probic {

enum class verdict_t { pass, fail };

// How the verdict was reached:
//   init_in_bad: the initial state itself is bad.
//   early:       the bounds cleared the threshold before closure.
//   trivial:     closure with no counterexample and an empty ledger.
//   closure:     exact probability established after frame closure.
enum class termination_t { init_in_bad, early, trivial, closure };

inline const char* verdict_name(verdict_t v) {
    return v == verdict_t::pass ? "Pass" : "Fail";
}

inline const char* termination_name(termination_t t) {
    switch (t) {
        case termination_t::init_in_bad: return "InitInBad";
        case termination_t::early: return "Early";
        case termination_t::trivial: return "Trivial";
        default: return "Final";
    }
}

struct engine_stats {
    int frames_used = 0;
    std::uint64_t cti_count = 0;
    std::size_t ledger_states = 0;
    std::size_t ledger_edges = 0;
    std::uint64_t sat_queries = 0;
};

struct check_result {
    verdict_t verdict = verdict_t::pass;
    termination_t kind = termination_t::early;
    rational l_init{0};
    rational u_init{1};
    engine_stats stats;
    std::optional<std::pair<state_t, state_t>> first_cti;
    bool has_invariant = false;
    std::vector<clause> invariant;          // closed-frame clauses on Pass
    std::optional<model_file> witness;      // recorded component on Fail
    std::vector<danger_ledger::edge> recorded;
};

struct engine_config {
    enum class loop_mode { after_closure, every_iteration, every_n };
    loop_mode loops = loop_mode::after_closure;
    int loop_n = 1;                  // for every_n
    bool assert_invariants = false;  // run the invariant suite while checking
    int max_frames = 1 << 16;        // safety valve; exceeding it is a fault
    bool mutation_skip_init_check = false;  // testing only
    bool mutation_skip_dedup = false;       // testing only
    std::function<void(const bound_solution&)> on_solve;
    std::ostream* stats_out = nullptr;
};

class engine {
public:
    engine(const symbolic_dtmc& m, const property_spec& prop, const engine_config& cfg)
        : m_(m), prop_(prop), cfg_(cfg), ctx_(m, prop), frames_(ctx_),
          ledger_(m, prop), bounds_(m.init_state) {}

    check_result run() {
        if (prop_.is_bad(m_.init_state)) return init_in_bad_result();
        try {
            solve_and_decide();  // degenerate thresholds fall out immediately
            frames_.push_frame();
            int round = 0;
            for (;;) {
                ++round;
                if (cfg_.assert_invariants) run_suite(/*full=*/round > 1);
                extend_frontier();
                sweep();
                if (internal_search_due(round)) exhaust_internal_edges();
                if (pending_ > 0) solve_and_decide();
                frames_.push_frame();
                int closed = frames_.propagate();
                if (closed >= 0) {
                    closed_frame_ = closed;
                    if (cfg_.assert_invariants) run_suite(/*full=*/true);
                    return final_phase(closed);
                }
                if (frames_.top() > cfg_.max_frames)
                    throw internal_error("frame limit exceeded without closure");
            }
        } catch (const early_stop& stop) {
            if (cfg_.assert_invariants) run_suite(/*full=*/false);
            return build_result(stop.v, termination_t::early, last_sol_.l_init,
                                last_sol_.u_init);
        }
    }

private:
    struct early_stop {
        verdict_t v;
    };

    using obligation = std::tuple<int, std::uint64_t, state_t>;

    bool use_rec() const { return !cfg_.mutation_skip_dedup; }

    // ---- bounds plumbing ----------------------------------------------

    void solve_bounds(const std::vector<char>* deficit_safe = nullptr) {
        bound_solution sol = bounds_.solve(deficit_safe);
        if (cfg_.assert_invariants) {
            if (auto viol = bound_system::check_monotonicity(last_sol_, sol))
                throw internal_error("bound monotonicity violated: " + *viol);
        }
        if (cfg_.on_solve) cfg_.on_solve(sol);
        last_sol_ = std::move(sol);
        pending_ = 0;
    }

    decision decide_current() {
        decision d = bound_system::decide(last_sol_, prop_.threshold, prop_.rel);
        if (cfg_.stats_out) {
            const char* name = d == decision::pass   ? "Pass"
                               : d == decision::fail ? "Fail"
                                                     : "Unknown";
            *cfg_.stats_out << "decide l_init=" << rat_to_string(last_sol_.l_init)
                            << " (" << rat_to_double(last_sol_.l_init) << ")"
                            << " u_init=" << rat_to_string(last_sol_.u_init) << " ("
                            << rat_to_double(last_sol_.u_init) << ")"
                            << " verdict=" << name << "\n";
        }
        return d;
    }

    void solve_and_decide(const std::vector<char>* deficit_safe = nullptr) {
        solve_bounds(deficit_safe);
        decision d = decide_current();
        if (d == decision::pass) throw early_stop{verdict_t::pass};
        if (d == decision::fail) throw early_stop{verdict_t::fail};
    }

    // Records (s, t) with its exact probability and feeds it to the bounds.
    // Solves eagerly while the ledger is small, then every 64 registrations.
    void register_edge(state_t s, state_t t) {
        auto rec = ledger_.record(ctx_, s, t, cfg_.mutation_skip_dedup);
        if (!rec.new_edge) return;
        bounds_.register_transition(s, prop_.is_bad(s), t, prop_.is_bad(t), rec.p);
        ++pending_;
        if (bounds_.num_edges() <= 256 || pending_ >= 64) solve_and_decide();
    }

    // ---- frame rounds --------------------------------------------------

    void extend_frontier() {
        while (auto cti = frames_.find_cti(use_rec())) {
            ++cti_count_;
            if (!first_cti_) first_cti_ = cti;
            register_edge(cti->first, cti->second);
            // the initial state cannot be blocked; carving the edge is enough
            if (cti->first != m_.init_state) remove_cti(cti->first);
        }
    }

    void remove_cti(state_t s) {
        std::priority_queue<obligation, std::vector<obligation>, std::greater<>> q;
        q.emplace(frames_.top(), seq_++, s);
        while (!q.empty()) {
            auto [lvl, seq, st] = q.top();
            q.pop();
            (void)seq;
            if (!frames_.state_in_frame(st, lvl)) continue;
            // one step from the initial state: record that edge and requeue
            // nothing — the remaining obligations are rediscovered as needed
            if (auto w = frames_.pred_witness(0, st, use_rec())) {
                register_edge(*w, st);
                frames_.add_clause_at(negate_cube(state_to_cube(st, m_.num_vars)),
                                      lvl - 1, cfg_.mutation_skip_init_check);
                break;
            }
            // highest frame that cannot reach st in one unrecorded step
            int jstar = frames_.top();
            std::optional<state_t> wit;
            for (int j = 1; j <= frames_.top(); ++j) {
                if (auto w = frames_.pred_witness(j, st, true)) {
                    wit = w;
                    jstar = j - 1;
                    break;
                }
            }
            clause c = frames_.generalize(st, jstar, cfg_.mutation_skip_init_check);
            frames_.add_clause_at(c, jstar, cfg_.mutation_skip_init_check);
            if (wit && jstar < lvl - 1) {
                if (*wit == m_.init_state)
                    throw internal_error("initial state escaped the base-step query");
                register_edge(*wit, st);
                q.emplace(jstar + 1, seq_++, *wit);
                q.emplace(lvl, seq_++, st);
            }
        }
    }

    // Blocks every non-bad ledger state from all frames and drains its
    // unrecorded predecessors at the frontier. The walk covers states
    // appended while it runs, so at the end no frontier state has an
    // unrecorded edge into any blocked ledger state.
    void sweep() {
        for (std::size_t i = 0; i < ledger_.states().size(); ++i) {
            state_t q = ledger_.states()[i];
            if (prop_.is_bad(q) || q == m_.init_state) continue;
            frames_.add_clause_at(negate_cube(state_to_cube(q, m_.num_vars)),
                                  frames_.top() - 1, cfg_.mutation_skip_init_check);
            for (;;) {
                auto as = frames_.assume(frames_.top(), use_rec());
                as.push_back(ctx_.next_is(q));
                if (ctx_.sat().solve(as) != solver::result::sat) break;
                register_edge(ctx_.decode_current(), q);
            }
        }
    }

    bool internal_search_due(int round) const {
        switch (cfg_.loops) {
            case engine_config::loop_mode::every_iteration: return true;
            case engine_config::loop_mode::every_n:
                return cfg_.loop_n > 0 && round % cfg_.loop_n == 0;
            default: return false;
        }
    }

    void exhaust_internal_edges() {
        while (auto e = ledger_.find_new_internal_transition(ctx_))
            register_edge(e->first, e->second);
    }

    // ---- invariant suite ------------------------------------------------

    void run_suite(bool full) {
        if (auto v = frames_.invariant_violation(full))
            throw internal_error("frame invariant violated: " + *v);
        if (full) {
            if (auto v = ledger_.disjointness_violation(frames_))
                throw internal_error("frame/ledger disjointness violated: " + *v);
        }
    }

    // ---- final phase ------------------------------------------------------

    check_result final_phase(int fstar) {
        if (pending_ > 0) solve_and_decide();

        // the closed frame excludes every path from the initial state to the
        // danger sub-chain, so an absent initial state means probability zero
        if (!ledger_.contains(m_.init_state)) {
            bool trivially = cti_count_ == 0 && ledger_.num_states() == 0;
            return exact_result(rational(0),
                                trivially ? termination_t::trivial : termination_t::closure);
        }

        for (;;) {
            std::vector<state_t> reach = ledger_.reachable_from(m_.init_state);
            if (auto e = ledger_.find_new_internal_transition(ctx_, &reach)) {
                register_edge(e->first, e->second);
                continue;
            }
            std::vector<state_t> live = non_bad(reach);
            if (auto e = escape_edge(fstar, live)) {
                register_edge(e->first, e->second);
                continue;
            }
            if (auto e = interface_edge(fstar, live)) {
                register_edge(e->first, e->second);
                continue;
            }
            break;
        }

        // Exhaustion: every transition out of the reachable non-bad members
        // is recorded, so their unrecorded outflow is certifiably zero.
        std::vector<char> safe(bounds_.num_states(), 0);
        for (state_t s : ledger_.reachable_from(m_.init_state))
            if (!prop_.is_bad(s)) safe[static_cast<std::size_t>(bounds_.index_of(s))] = 1;
        solve_bounds(&safe);
        if (last_sol_.l_init != last_sol_.u_init)
            throw internal_error("bounds disagree after exhausting the reachable region");
        decision d = decide_current();
        if (d == decision::unknown)
            throw internal_error("exact probability left the verdict undecided");
        return build_result(d == decision::pass ? verdict_t::pass : verdict_t::fail,
                            termination_t::closure, last_sol_.l_init, last_sol_.u_init);
    }

    // An unrecorded transition from the sources into a bad next state or out
    // of the closed frame.
    std::optional<std::pair<state_t, state_t>> escape_edge(
        int fstar, const std::vector<state_t>& sources) {
        if (sources.empty()) return std::nullopt;
        if (!escape_sel_) {
            lit_t w = static_cast<lit_t>(ctx_.add_var());
            clause options{-w, ctx_.bad_next()};
            for (const clause& c : frames_.clauses_of(fstar)) {
                lit_t d = static_cast<lit_t>(ctx_.add_var());
                for (lit_t l : prime_lits(c, m_.num_vars))
                    ctx_.sat().add_clause({-d, -l});
                options.push_back(d);
            }
            ctx_.sat().add_clause(options);
            escape_sel_ = w;
        }
        std::vector<lit_t> as{*escape_sel_, ctx_.rec_guard(),
                              ctx_.member_selector(sources, /*primed=*/false)};
        if (ctx_.sat().solve(as) != solver::result::sat) return std::nullopt;
        return std::make_pair(ctx_.decode_current(), ctx_.decode_next());
    }

    // An unrecorded transition from the sources into the region of the closed
    // frame that can still creep back into the ledger: the backward closure
    // of the ledger members inside the frame, excluding the members
    // themselves.
    std::optional<std::pair<state_t, state_t>> interface_edge(
        int fstar, const std::vector<state_t>& sources) {
        if (sources.empty()) return std::nullopt;
        std::vector<state_t> seeds;
        for (state_t s : ledger_.states())
            if (frames_.state_in_frame(s, fstar)) seeds.push_back(s);
        if (seeds.empty()) return std::nullopt;
        std::vector<state_t> region;
        for (;;) {
            std::vector<state_t> targets = seeds;
            targets.insert(targets.end(), region.begin(), region.end());
            auto as = frames_.assume(fstar, true);
            for (state_t s : ledger_.states()) as.push_back(ctx_.current_not(s));
            for (state_t s : region) as.push_back(ctx_.current_not(s));
            as.push_back(ctx_.member_selector(targets, /*primed=*/true));
            if (ctx_.sat().solve(as) != solver::result::sat) break;
            region.push_back(ctx_.decode_current());
        }
        if (region.empty()) return std::nullopt;
        return ctx_.find_edge(sources, region);
    }

    // ---- results -----------------------------------------------------------

    std::vector<state_t> non_bad(const std::vector<state_t>& in) const {
        std::vector<state_t> out;
        for (state_t s : in)
            if (!prop_.is_bad(s)) out.push_back(s);
        return out;
    }

    check_result init_in_bad_result() {
        bound_solution sol;
        sol.l_init = sol.u_init = 1;
        sol.has_init = true;
        if (cfg_.on_solve) cfg_.on_solve(sol);
        last_sol_ = sol;
        decision d = decide_current();
        return build_result(d == decision::pass ? verdict_t::pass : verdict_t::fail,
                            termination_t::init_in_bad, rational(1), rational(1));
    }

    check_result exact_result(const rational& p, termination_t kind) {
        bound_solution sol;
        sol.l_init = sol.u_init = p;
        sol.has_init = true;
        if (cfg_.on_solve) cfg_.on_solve(sol);
        last_sol_ = sol;
        decision d = decide_current();
        if (d == decision::unknown)
            throw internal_error("exact probability left the verdict undecided");
        return build_result(d == decision::pass ? verdict_t::pass : verdict_t::fail, kind,
                            p, p);
    }

    check_result build_result(verdict_t v, termination_t kind, rational l, rational u) {
        check_result r;
        r.verdict = v;
        r.kind = kind;
        r.l_init = std::move(l);
        r.u_init = std::move(u);
        r.stats.frames_used = frames_.top() + 1;
        r.stats.cti_count = cti_count_;
        r.stats.ledger_states = ledger_.num_states();
        r.stats.ledger_edges = ledger_.num_edges();
        r.stats.sat_queries = ctx_.num_queries();
        r.first_cti = first_cti_;
        if (v == verdict_t::pass && closed_frame_ >= 0) {
            r.has_invariant = true;
            r.invariant = frames_.clauses_of(closed_frame_);
        }
        if (v == verdict_t::fail) r.witness = ledger_.witness_component();
        r.recorded = ledger_.edges();
        return r;
    }

    const symbolic_dtmc& m_;
    const property_spec& prop_;
    engine_config cfg_;
    query_ctx ctx_;
    frame_sequence frames_;
    danger_ledger ledger_;
    bound_system bounds_;
    bound_solution last_sol_;
    std::optional<lit_t> escape_sel_;
    std::optional<std::pair<state_t, state_t>> first_cti_;
    std::uint64_t cti_count_ = 0;
    std::uint64_t seq_ = 0;
    int pending_ = 0;
    int closed_frame_ = -1;
};

inline check_result check(const symbolic_dtmc& m, const property_spec& prop,
                          const engine_config& cfg = {}) {
    return engine(m, prop, cfg).run();
}

}  // namespace probic
