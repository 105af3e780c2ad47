#pragma once

// Exact probability bounds over the recorded transition ledger.
//
// The ledger is a growing sub-chain of the model: states plus recorded edges
// with their exact probabilities. For the probability of reaching a bad state
// it yields two bounds per state:
//
//   l: reach probability using recorded edges only — the least solution, so
//      states that cannot reach the bad boundary get 0 and the rest solve a
//      linear system. A lower bound on the true probability; it only grows as
//      edges are recorded.
//
//   u: same system, except each state's unrecorded outflow (1 - recorded
//      mass) is treated adversarially as going straight to a bad state —
//      unless the caller certifies that this deficit is safe, in which case it
//      contributes nothing. States that can reach neither the bad boundary
//      nor any uncertified deficit get 0 outright. An upper bound; it only
//      shrinks.
//
// Systems are solved exactly: strongly connected components in reverse
// topological order, dense Gaussian elimination within each component. The
// zero rules above remove every state that could make a component singular,
// so a singular pivot is a program error, not a model property.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "probic/model.hpp"
#include "probic/rational.hpp"

namespace probic {

struct bound_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct bound_solution {
    std::vector<state_t> states;  // state per index, insertion order
    std::vector<rational> l, u;   // by state index
    rational l_init{0};
    rational u_init{1};
    bool has_init = false;
};

enum class decision { pass, fail, unknown };

class bound_system {
public:
    explicit bound_system(state_t init_state) : init_state_(init_state) {}

    int ensure_state(state_t s, bool bad) {
        auto it = index_.find(s);
        if (it != index_.end()) {
            if (bad_[it->second] != (bad ? 1 : 0))
                throw bound_error("state registered with conflicting bad flags");
            return it->second;
        }
        int idx = static_cast<int>(states_.size());
        index_.emplace(s, idx);
        states_.push_back(s);
        bad_.push_back(bad ? 1 : 0);
        mass_.emplace_back(0);
        succ_.emplace_back();
        return idx;
    }

    void register_transition(state_t s, bool s_bad, state_t t, bool t_bad, const rational& p) {
        int si = ensure_state(s, s_bad);
        int ti = ensure_state(t, t_bad);
        if (mass_[si] + p > 1)
            throw bound_error("outflow mass of state " + std::to_string(s) +
                              " exceeds 1 after registering a transition of probability " +
                              rat_to_string(p));
        mass_[si] += p;
        succ_[si].emplace_back(ti, p);
        ++num_edges_;
    }

    bool contains(state_t s) const { return index_.count(s) != 0; }
    int index_of(state_t s) const {
        auto it = index_.find(s);
        return it == index_.end() ? -1 : it->second;
    }
    std::size_t num_states() const { return states_.size(); }
    std::size_t num_edges() const { return num_edges_; }
    const std::vector<state_t>& states() const { return states_; }
    bool is_bad(int idx) const { return bad_[idx] != 0; }
    const rational& mass(int idx) const { return mass_[idx]; }

    // deficit_safe (optional, indexed like states()) marks states whose
    // unrecorded outflow is certified to never reach a bad state.
    bound_solution solve(const std::vector<char>* deficit_safe = nullptr) const {
        const int n = static_cast<int>(states_.size());
        bound_solution sol;
        sol.l.assign(n, rational(0));
        sol.u.assign(n, rational(0));
        if (n == 0) return finish(sol);

        // Bad states are an absorbing boundary: their recorded out-edges do
        // not participate in either system.
        std::vector<std::vector<std::pair<int, rational>>> adj(n);
        std::vector<std::vector<int>> preds(n);
        for (int v = 0; v < n; ++v) {
            if (bad_[v]) continue;
            adj[v] = succ_[v];
            for (auto& [t, p] : adj[v]) preds[t].push_back(v);
        }

        auto comp = scc_pop_order(adj);  // lower id = popped earlier = downstream

        auto backward_closure = [&](std::vector<char> flags) {
            std::vector<int> work;
            for (int v = 0; v < n; ++v)
                if (flags[v]) work.push_back(v);
            while (!work.empty()) {
                int t = work.back();
                work.pop_back();
                for (int s : preds[t])
                    if (!flags[s]) {
                        flags[s] = 1;
                        work.push_back(s);
                    }
            }
            return flags;
        };

        // l: targets are the bad states, no deficit contribution.
        std::vector<char> l_target(bad_.begin(), bad_.end());
        std::vector<rational> no_extra(n, rational(0));
        sol.l = solve_system(adj, comp, backward_closure(l_target), no_extra);

        // u: targets additionally include every uncertified deficit state,
        // and their deficit enters the right-hand side.
        std::vector<char> u_target(bad_.begin(), bad_.end());
        std::vector<rational> extra(n, rational(0));
        for (int v = 0; v < n; ++v) {
            if (bad_[v] || mass_[v] >= 1) continue;
            bool safe = deficit_safe && v < static_cast<int>(deficit_safe->size()) &&
                        (*deficit_safe)[v];
            if (!safe) {
                u_target[v] = 1;
                extra[v] = rational(1) - mass_[v];
            }
        }
        sol.u = solve_system(adj, comp, backward_closure(u_target), extra);
        return finish(sol);
    }

    static decision decide(const bound_solution& sol, const rational& y, relation rel) {
        if (rel == relation::strictly_less) {
            if (sol.u_init < y) return decision::pass;
            if (sol.l_init >= y) return decision::fail;
        } else {
            if (sol.l_init >= y) return decision::pass;
            if (sol.u_init < y) return decision::fail;
        }
        return decision::unknown;
    }

    // Lower bounds never drop and upper bounds never rise as the ledger grows.
    static std::optional<std::string> check_monotonicity(const bound_solution& prev,
                                                         const bound_solution& cur) {
        if (prev.l.size() > cur.l.size())
            return "bound system lost " + std::to_string(prev.l.size() - cur.l.size()) +
                   " states";
        for (std::size_t i = 0; i < prev.l.size(); ++i) {
            if (cur.l[i] < prev.l[i])
                return "lower bound of state " + std::to_string(i) + " dropped from " +
                       rat_to_string(prev.l[i]) + " to " + rat_to_string(cur.l[i]);
            if (cur.u[i] > prev.u[i])
                return "upper bound of state " + std::to_string(i) + " rose from " +
                       rat_to_string(prev.u[i]) + " to " + rat_to_string(cur.u[i]);
        }
        if (cur.l_init < prev.l_init) return "initial lower bound dropped";
        if (cur.u_init > prev.u_init) return "initial upper bound rose";
        return std::nullopt;
    }

private:
    bound_solution finish(bound_solution sol) const {
        sol.states = states_;
        auto it = index_.find(init_state_);
        if (it != index_.end()) {
            sol.has_init = true;
            sol.l_init = sol.l[it->second];
            sol.u_init = sol.u[it->second];
        }
        return sol;
    }

    // Tarjan, iterative. Components are numbered in pop order, so every edge
    // goes from a higher component id to a lower (or the same) one.
    std::vector<int> scc_pop_order(
        const std::vector<std::vector<std::pair<int, rational>>>& adj) const {
        const int n = static_cast<int>(adj.size());
        std::vector<int> comp(n, -1), index(n, -1), low(n, 0);
        std::vector<char> on_stack(n, 0);
        std::vector<int> stack;
        int next_index = 0, next_comp = 0;
        struct frame {
            int v;
            std::size_t ei;
        };
        for (int root = 0; root < n; ++root) {
            if (index[root] != -1) continue;
            std::vector<frame> dfs{{root, 0}};
            index[root] = low[root] = next_index++;
            stack.push_back(root);
            on_stack[root] = 1;
            while (!dfs.empty()) {
                frame& f = dfs.back();
                if (f.ei < adj[f.v].size()) {
                    int w = adj[f.v][f.ei++].first;
                    if (index[w] == -1) {
                        index[w] = low[w] = next_index++;
                        stack.push_back(w);
                        on_stack[w] = 1;
                        dfs.push_back({w, 0});
                    } else if (on_stack[w] && index[w] < low[f.v]) {
                        low[f.v] = index[w];
                    }
                    continue;
                }
                if (low[f.v] == index[f.v]) {
                    for (;;) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = next_comp;
                        if (w == f.v) break;
                    }
                    ++next_comp;
                }
                int v = f.v;
                dfs.pop_back();
                if (!dfs.empty() && low[v] < low[dfs.back().v]) low[dfs.back().v] = low[v];
            }
        }
        return comp;
    }

    // Shared solver for both systems: boundary (bad) states are 1, states
    // outside the backward closure of the target set are 0, the rest solve
    // their component's linear system with already-solved downstream values
    // and the per-state extra term on the right-hand side.
    std::vector<rational> solve_system(
        const std::vector<std::vector<std::pair<int, rational>>>& adj,
        const std::vector<int>& comp, const std::vector<char>& nonzero,
        const std::vector<rational>& extra) const {
        const int n = static_cast<int>(states_.size());
        std::vector<rational> val(n, rational(0));
        int num_comps = 0;
        for (int v = 0; v < n; ++v) num_comps = std::max(num_comps, comp[v] + 1);
        std::vector<std::vector<int>> members(num_comps);
        for (int v = 0; v < n; ++v) members[comp[v]].push_back(v);

        for (int c = 0; c < num_comps; ++c) {
            std::vector<int> unknowns;
            for (int v : members[c]) {
                if (bad_[v]) {
                    val[v] = 1;
                    continue;
                }
                if (nonzero[v]) unknowns.push_back(v);
            }
            if (unknowns.empty()) continue;
            const std::size_t u = unknowns.size();
            std::vector<int> local(n, -1);
            for (std::size_t i = 0; i < u; ++i) local[unknowns[i]] = static_cast<int>(i);
            std::vector<std::vector<rational>> a(u, std::vector<rational>(u, rational(0)));
            std::vector<rational> b(u);
            for (std::size_t i = 0; i < u; ++i) {
                int v = unknowns[i];
                a[i][i] = 1;
                b[i] = extra[v];
                for (auto& [t, p] : adj[v]) {
                    if (comp[t] == c && local[t] != -1)
                        a[i][local[t]] -= p;
                    else
                        b[i] += p * val[t];  // downstream or boundary, already solved
                }
            }
            gaussian(a, b);
            for (std::size_t i = 0; i < u; ++i) val[unknowns[i]] = b[i];
        }
        return val;
    }

    // In-place exact Gaussian elimination; b becomes the solution.
    static void gaussian(std::vector<std::vector<rational>>& a, std::vector<rational>& b) {
        const std::size_t u = b.size();
        for (std::size_t col = 0; col < u; ++col) {
            std::size_t piv = col;
            while (piv < u && a[piv][col] == 0) ++piv;
            if (piv == u)
                throw bound_error("singular component in the bound system");
            std::swap(a[piv], a[col]);
            std::swap(b[piv], b[col]);
            for (std::size_t r = col + 1; r < u; ++r) {
                if (a[r][col] == 0) continue;
                rational f = a[r][col] / a[col][col];
                for (std::size_t cc = col; cc < u; ++cc) a[r][cc] -= f * a[col][cc];
                b[r] -= f * b[col];
            }
        }
        for (std::size_t i = u; i-- > 0;) {
            rational acc = b[i];
            for (std::size_t cc = i + 1; cc < u; ++cc) acc -= a[i][cc] * b[cc];
            b[i] = acc / a[i][i];
        }
    }

    state_t init_state_ = 0;
    std::vector<state_t> states_;  // insertion order
    std::unordered_map<state_t, int> index_;
    std::vector<char> bad_;
    std::vector<rational> mass_;
    std::vector<std::vector<std::pair<int, rational>>> succ_;
    std::size_t num_edges_ = 0;
};

}  // namespace probic
