#pragma once

// Frame sequence F_0, F_1, ..., F_top over one incremental solver.
//
// F_0 is exactly the initial state (its cube as unit clauses). Every later
// frame contains the safety clauses (one negated bad cube each) plus learned
// blocking clauses. Clause sets are nested, clauses(F_{i+1}) subseteq
// clauses(F_i), represented by storing each learned clause once with the
// highest frame index it belongs to.
//
// Solver encoding: a clause whose highest frame is m is asserted as
// (-act[m] v c). A query against F_i assumes {act[i..top]} (plus the shared
// safety selector), which activates exactly the clauses with top >= i. When
// a clause's top is raised it is re-asserted under the new activation
// literal; stale copies only ever fire for frames that contain the clause
// anyway.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "probic/query_ctx.hpp"

namespace probic {

class frame_sequence {
public:
    explicit frame_sequence(query_ctx& ctx) : ctx_(ctx) {
        act_.push_back(static_cast<lit_t>(ctx_.add_var()));
        for (lit_t l : ctx_.model().init) ctx_.sat().add_clause({-act_[0], l});
        phi_act_ = static_cast<lit_t>(ctx_.add_var());
        for (const auto& b : ctx_.prop().bad) {
            clause c = negate_cube(b);
            phi_.push_back(c);
            assert_under(phi_act_, c);
        }
    }

    int top() const { return top_; }

    void push_frame() {
        ++top_;
        act_.push_back(static_cast<lit_t>(ctx_.add_var()));
    }

    // Assumptions activating frame i; F_0 queries see only the initial cube.
    std::vector<lit_t> assume(int i, bool use_rec) const {
        std::vector<lit_t> as;
        if (i == 0) {
            as.push_back(act_[0]);
        } else {
            as.push_back(phi_act_);
            for (int j = i; j <= top_; ++j) as.push_back(act_[j]);
        }
        if (use_rec) as.push_back(ctx_.rec_guard());
        return as;
    }

    // SAT(F_top /\ T /\ bad'): a counterexample to induction at the frontier.
    std::optional<std::pair<state_t, state_t>> find_cti(bool use_rec) {
        auto as = assume(top_, use_rec);
        as.push_back(ctx_.bad_next());
        if (ctx_.sat().solve(as) != solver::result::sat) return std::nullopt;
        return std::make_pair(ctx_.decode_current(), ctx_.decode_next());
    }

    // SAT(F_i /\ not q /\ T /\ q'): a predecessor of q inside frame i other
    // than q itself.
    std::optional<state_t> pred_witness(int i, state_t q, bool use_rec) {
        auto as = assume(i, use_rec);
        as.push_back(ctx_.current_not(q));
        as.push_back(ctx_.next_is(q));
        if (ctx_.sat().solve(as) != solver::result::sat) return std::nullopt;
        return ctx_.decode_current();
    }

    // UNSAT(F_i /\ c /\ T /\ not c'): c is inductive relative to frame i.
    bool consecution(const clause& c, int i, bool use_rec) {
        auto as = assume(i, use_rec);
        as.push_back(ctx_.clause_holds(c));
        for (lit_t l : prime_lits(negate_clause(c), ctx_.model().num_vars))
            as.push_back(l);
        return ctx_.sat().solve(as) == solver::result::unsat;
    }

    // Drops literals from the blocking clause of q while it stays inductive
    // relative to frame i and still holds at the initial state. Scans in
    // ascending variable order and restarts after every successful drop.
    clause generalize(state_t q, int i, bool skip_init_check = false) {
        clause cur = negate_cube(state_to_cube(q, ctx_.model().num_vars));
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t p = 0; p < cur.size(); ++p) {
                clause cand = cur;
                cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(p));
                if (!skip_init_check && !eval_clause(cand, ctx_.model().init_state))
                    continue;
                if (!consecution(cand, i, true)) continue;
                cur = cand;
                changed = true;
                break;
            }
        }
        return cur;
    }

    // Adds c to frames 1..min(j+1, top). The caller owns the inductive
    // justification at level j; the initial-state check is re-validated here.
    void add_clause_at(const clause& c, int j, bool skip_init_check = false) {
        if (!skip_init_check && !eval_clause(c, ctx_.model().init_state))
            throw internal_error("frame clause excludes the initial state");
        int new_top = std::min(j + 1, top_);
        if (new_top < 1) new_top = 1;
        auto it = index_.find(c);
        if (it == index_.end()) {
            index_.emplace(c, clauses_.size());
            clauses_.push_back({c, new_top});
            assert_under(act_[new_top], c);
        } else if (clauses_[it->second].top < new_top) {
            clauses_[it->second].top = new_top;
            assert_under(act_[new_top], c);
        }
    }

    // Pushes clauses forward while they stay inductive, then reports the
    // lowest i >= 1 with clauses(F_i) == clauses(F_{i+1}), or -1.
    int propagate() {
        for (int i = 1; i < top_; ++i) {
            std::vector<std::size_t> at_level;
            for (std::size_t k = 0; k < clauses_.size(); ++k)
                if (clauses_[k].top == i) at_level.push_back(k);
            for (std::size_t k : at_level) {
                if (!consecution(clauses_[k].c, i, true)) continue;
                clauses_[k].top = i + 1;
                assert_under(act_[i + 1], clauses_[k].c);
            }
        }
        for (int i = 1; i < top_; ++i) {
            bool any = false;
            for (const auto& e : clauses_)
                if (e.top == i) { any = true; break; }
            if (!any) return i;
        }
        return -1;
    }

    bool state_in_frame(state_t s, int i) const {
        if (i == 0) return s == ctx_.model().init_state;
        for (const auto& c : phi_)
            if (!eval_clause(c, s)) return false;
        for (const auto& e : clauses_)
            if (e.top >= i && !eval_clause(e.c, s)) return false;
        return true;
    }

    // Clause set of frame i >= 1, sorted for deterministic output.
    std::vector<clause> clauses_of(int i) const {
        std::vector<clause> out = phi_;
        for (const auto& e : clauses_)
            if (e.top >= i) out.push_back(e.c);
        std::sort(out.begin(), out.end(), lits_less);
        return out;
    }

    // Structural and semantic frame invariants. The consecution sweep checks
    // F_i /\ (T minus recorded) => F'_{i+1} clause by clause and is the
    // expensive half; pass run_consecution=false for the cheap subset.
    std::optional<std::string> invariant_violation(bool run_consecution) {
        for (int i = 0; i <= top_; ++i)
            if (!state_in_frame(ctx_.model().init_state, i))
                return "initial state excluded from frame " + std::to_string(i);
        for (const auto& e : clauses_)
            if (e.top < 1 || e.top > top_)
                return "frame clause outside the frame range";
        if (phi_.size() != ctx_.prop().bad.size())
            return "safety clause set does not match the bad cubes";
        if (!run_consecution) return std::nullopt;
        for (int i = 0; i + 1 <= top_; ++i) {
            for (const auto& c : clauses_of(i + 1)) {
                if (!consecution(c, i, true))
                    return "frame " + std::to_string(i) +
                           " has a successor outside frame " + std::to_string(i + 1);
            }
        }
        return std::nullopt;
    }

private:
    void assert_under(lit_t act, const clause& c) {
        clause guarded{-act};
        for (lit_t l : c) guarded.push_back(l);
        ctx_.sat().add_clause(guarded);
    }

    struct entry {
        clause c;
        int top;
    };

    query_ctx& ctx_;
    std::vector<lit_t> act_;
    lit_t phi_act_ = 0;
    std::vector<clause> phi_;
    std::vector<entry> clauses_;
    std::map<clause, std::size_t> index_;
    int top_ = 0;
};

}  // namespace probic
