#pragma once

// Incremental CDCL SAT solver.
//
// Classic architecture: two-watched-literal propagation, first-UIP conflict
// analysis with activity-based (VSIDS) branching, phase saving, and geometric
// restarts. Clauses and variables can be added between solve calls and learnt
// clauses persist, so repeated queries over the same transition relation get
// cheaper over time. Assumptions are placed as forced decisions below all
// search decisions, which makes every solve answer relative to them without
// touching the clause database.
//
// Everything iterates in deterministic index order and ties in the branching
// heap break toward the lowest variable index, so a fixed sequence of
// add_var/add_clause/solve calls always produces identical answers and models.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "probic/cnf.hpp"

namespace probic {

class solver {
public:
    enum class result { sat, unsat };

    explicit solver(var_t num_vars = 0) {
        for (var_t i = 0; i < num_vars; ++i) add_var();
    }

    var_t num_vars() const { return num_vars_; }
    std::uint64_t num_solve_calls() const { return num_solve_calls_; }

    // False once the clause database itself (independent of any assumptions)
    // has been shown contradictory.
    bool ok() const { return ok_; }

    var_t add_var() {
        ++num_vars_;
        assigns_.push_back(0);
        level_.push_back(0);
        reason_.push_back(-1);
        activity_.push_back(0.0);
        phase_.push_back(false);
        seen_.push_back(0);
        pos_.push_back(-1);
        watches_.emplace_back();
        watches_.emplace_back();
        heap_insert_if_absent(num_vars_ - 1);
        return num_vars_;
    }

    // Adds a clause (empty allowed: makes the database contradictory).
    // Tautologies are dropped; literals already false at top level are
    // stripped, clauses already true at top level are skipped.
    void add_clause(const std::vector<lit_t>& lits) {
        assert(current_level() == 0);
        if (!ok_) return;
        std::vector<int> c;
        c.reserve(lits.size());
        for (lit_t l : lits) c.push_back(ilit(l));
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        for (std::size_t i = 0; i + 1 < c.size(); ++i)
            if (ivar(c[i]) == ivar(c[i + 1])) return;  // tautology
        std::vector<int> out;
        out.reserve(c.size());
        for (int il : c) {
            signed char v = lit_value(il);
            if (v == 1) return;  // already satisfied at top level
            if (v == 0) out.push_back(il);
        }
        if (out.empty()) {
            ok_ = false;
            return;
        }
        if (out.size() == 1) {
            enqueue(out[0], -1);
            if (propagate() != -1) ok_ = false;
            return;
        }
        int cref = static_cast<int>(clauses_.size());
        watches_[out[0] ^ 1].push_back({cref, out[1]});
        watches_[out[1] ^ 1].push_back({cref, out[0]});
        clauses_.push_back(std::move(out));
    }

    result solve(const std::vector<lit_t>& assumptions = {}) {
        ++num_solve_calls_;
        have_model_ = false;
        if (!ok_) return result::unsat;
        std::vector<int> as;
        as.reserve(assumptions.size());
        for (lit_t l : assumptions) as.push_back(ilit(l));
        if (propagate() != -1) {
            ok_ = false;
            return result::unsat;
        }
        double budget = 100;
        for (;;) {
            search_outcome r = search(static_cast<std::int64_t>(budget), as);
            if (r == search_outcome::sat) {
                model_ = assigns_;
                have_model_ = true;
                backtrack(0);
                return result::sat;
            }
            if (r == search_outcome::unsat) {
                backtrack(0);
                return result::unsat;
            }
            budget *= 1.5;  // restart with a larger conflict budget
        }
    }

    bool is_sat(const std::vector<lit_t>& assumptions = {}) {
        return solve(assumptions) == result::sat;
    }

    // Value of a variable in the model of the most recent satisfiable solve.
    bool model_value(var_t v) const {
        if (!have_model_) throw std::logic_error("no model available");
        if (v < 1 || v > static_cast<var_t>(model_.size()))
            throw std::invalid_argument("variable out of range");
        return model_[v - 1] == 1;
    }

private:
    enum class search_outcome { sat, unsat, restart };
    struct watcher {
        int cref;
        int blocker;
    };

    // internal literal: 2*(var-1) + (negative ? 1 : 0)
    int ilit(lit_t l) const {
        var_t v = lit_var(l);
        if (l == 0 || v > num_vars_)
            throw std::invalid_argument("literal out of range: " + std::to_string(l));
        return 2 * (v - 1) + (l < 0 ? 1 : 0);
    }
    static int ivar(int il) { return il >> 1; }

    signed char lit_value(int il) const {
        signed char a = assigns_[ivar(il)];
        return (il & 1) ? static_cast<signed char>(-a) : a;
    }

    int current_level() const { return static_cast<int>(trail_lim_.size()); }

    void enqueue(int il, int reason) {
        int v = ivar(il);
        assigns_[v] = (il & 1) ? -1 : 1;
        level_[v] = current_level();
        reason_[v] = reason;
        trail_.push_back(il);
    }

    void backtrack(int lvl) {
        if (current_level() <= lvl) return;
        std::size_t lim = trail_lim_[lvl];
        for (std::size_t i = trail_.size(); i-- > lim;) {
            int v = ivar(trail_[i]);
            phase_[v] = assigns_[v] == 1;
            assigns_[v] = 0;
            reason_[v] = -1;
            heap_insert_if_absent(v);
        }
        trail_.resize(lim);
        trail_lim_.resize(lvl);
        qhead_ = lim;
    }

    // Returns the index of a conflicting clause, or -1.
    int propagate() {
        while (qhead_ < trail_.size()) {
            int p = trail_[qhead_++];  // p just became true
            auto& ws = watches_[p];
            std::size_t i = 0, j = 0;
            while (i < ws.size()) {
                watcher w = ws[i];
                if (lit_value(w.blocker) == 1) {
                    ws[j++] = ws[i++];
                    continue;
                }
                auto& c = clauses_[w.cref];
                int falsified = p ^ 1;
                if (c[0] == falsified) std::swap(c[0], c[1]);
                if (lit_value(c[0]) == 1) {
                    ws[j++] = {w.cref, c[0]};
                    ++i;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.size(); ++k) {
                    if (lit_value(c[k]) != -1) {
                        std::swap(c[1], c[k]);
                        watches_[c[1] ^ 1].push_back({w.cref, c[0]});
                        moved = true;
                        break;
                    }
                }
                if (moved) {
                    ++i;  // watch migrated to another literal
                    continue;
                }
                ws[j++] = {w.cref, c[0]};
                ++i;
                if (lit_value(c[0]) == -1) {
                    while (i < ws.size()) ws[j++] = ws[i++];
                    ws.resize(j);
                    qhead_ = trail_.size();
                    return w.cref;
                }
                enqueue(c[0], w.cref);
            }
            ws.resize(j);
        }
        return -1;
    }

    // First-UIP learning. Returns the backjump level; learnt[0] is the
    // asserting literal, learnt[1] (if any) the highest-level other literal.
    int analyze(int confl, std::vector<int>& learnt) {
        learnt.assign(1, -1);
        int path = 0;
        int p = -1;
        std::size_t index = trail_.size();
        std::vector<int> cleared;
        do {
            const auto& c = clauses_[confl];
            for (std::size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
                int q = c[k];
                int v = ivar(q);
                if (!seen_[v] && level_[v] > 0) {
                    seen_[v] = 1;
                    cleared.push_back(v);
                    var_bump(v);
                    if (level_[v] >= current_level())
                        ++path;
                    else
                        learnt.push_back(q);
                }
            }
            while (!seen_[ivar(trail_[--index])]) {
            }
            p = trail_[index];
            confl = reason_[ivar(p)];
            seen_[ivar(p)] = 0;
            --path;
        } while (path > 0);
        learnt[0] = p ^ 1;
        int bt = 0;
        std::size_t hi = 1;
        for (std::size_t i = 1; i < learnt.size(); ++i) {
            int lv = level_[ivar(learnt[i])];
            if (lv > bt) {
                bt = lv;
                hi = i;
            }
        }
        if (learnt.size() > 1) std::swap(learnt[1], learnt[hi]);
        for (int v : cleared) seen_[v] = 0;
        return bt;
    }

    void attach_learnt(std::vector<int> learnt) {
        if (learnt.size() == 1) {
            enqueue(learnt[0], -1);
            return;
        }
        int cref = static_cast<int>(clauses_.size());
        watches_[learnt[0] ^ 1].push_back({cref, learnt[1]});
        watches_[learnt[1] ^ 1].push_back({cref, learnt[0]});
        int asserting = learnt[0];
        clauses_.push_back(std::move(learnt));
        enqueue(asserting, cref);
    }

    search_outcome search(std::int64_t budget, const std::vector<int>& assumps) {
        std::int64_t conflicts = 0;
        for (;;) {
            int confl = propagate();
            if (confl != -1) {
                if (current_level() == 0) {
                    ok_ = false;
                    return search_outcome::unsat;
                }
                ++conflicts;
                std::vector<int> learnt;
                int bt = analyze(confl, learnt);
                backtrack(bt);
                attach_learnt(std::move(learnt));
                var_inc_ /= 0.95;  // activity decay
                continue;
            }
            if (conflicts >= budget) {
                backtrack(0);
                return search_outcome::restart;
            }
            if (current_level() < static_cast<int>(assumps.size())) {
                int a = assumps[current_level()];
                signed char v = lit_value(a);
                if (v == -1) return search_outcome::unsat;  // assumptions inconsistent
                trail_lim_.push_back(trail_.size());
                if (v == 0) enqueue(a, -1);
                continue;
            }
            int v = pick_branch();
            if (v == -1) return search_outcome::sat;  // complete assignment
            trail_lim_.push_back(trail_.size());
            enqueue(2 * v + (phase_[v] ? 0 : 1), -1);
        }
    }

    int pick_branch() {
        while (!heap_.empty()) {
            int v = heap_pop();
            if (assigns_[v] == 0) return v;
        }
        return -1;
    }

    void var_bump(int v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (double& a : activity_) a *= 1e-100;
            var_inc_ *= 1e-100;
        }
        if (pos_[v] != -1) heap_up(pos_[v]);
    }

    // Max-heap over (activity, lower index wins ties).
    bool heap_better(int a, int b) const {
        if (activity_[a] != activity_[b]) return activity_[a] > activity_[b];
        return a < b;
    }
    void heap_up(std::size_t i) {
        int v = heap_[i];
        while (i > 0) {
            std::size_t par = (i - 1) / 2;
            if (!heap_better(v, heap_[par])) break;
            heap_[i] = heap_[par];
            pos_[heap_[i]] = static_cast<int>(i);
            i = par;
        }
        heap_[i] = v;
        pos_[v] = static_cast<int>(i);
    }
    void heap_down(std::size_t i) {
        int v = heap_[i];
        std::size_t n = heap_.size();
        for (;;) {
            std::size_t c = 2 * i + 1;
            if (c >= n) break;
            if (c + 1 < n && heap_better(heap_[c + 1], heap_[c])) ++c;
            if (!heap_better(heap_[c], v)) break;
            heap_[i] = heap_[c];
            pos_[heap_[i]] = static_cast<int>(i);
            i = c;
        }
        heap_[i] = v;
        pos_[v] = static_cast<int>(i);
    }
    void heap_insert_if_absent(int v) {
        if (pos_[v] != -1) return;
        heap_.push_back(v);
        pos_[v] = static_cast<int>(heap_.size() - 1);
        heap_up(heap_.size() - 1);
    }
    int heap_pop() {
        int v = heap_[0];
        pos_[v] = -1;
        heap_[0] = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            pos_[heap_[0]] = 0;
            heap_down(0);
        }
        return v;
    }

    var_t num_vars_ = 0;
    bool ok_ = true;
    bool have_model_ = false;
    std::uint64_t num_solve_calls_ = 0;
    double var_inc_ = 1.0;

    std::vector<std::vector<int>> clauses_;        // problem + learnt, by index
    std::vector<std::vector<watcher>> watches_;    // per internal literal
    std::vector<signed char> assigns_;             // per var: 1 true, -1 false, 0 unset
    std::vector<signed char> model_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<char> seen_;
    std::vector<bool> phase_;
    std::vector<double> activity_;
    std::vector<int> trail_;
    std::vector<std::size_t> trail_lim_;
    std::size_t qhead_ = 0;
    std::vector<int> heap_;
    std::vector<int> pos_;
};

}  // namespace probic
