#pragma once

// Fair dice from fair coins, as symbolic chains.
//
// Each die is the classic seven-state coin-flipping automaton: coin states
// s0..s6, absorbing outcomes d1..d6, every flip 1/2, every outcome exactly
// 1/6. One die occupies 13 one-hot variables (s0..s6 then d1..d6); N dice are
// rolled sequentially — die j only starts once dice 1..j-1 are absorbed — and
// a fully absorbed state self-loops. Targets: all dice show six, or at least k
// dice show six.
//
// The generated CNF transition relation and the probability entries describe
// exactly the same edge set, including excluding every non-one-hot or
// out-of-order assignment on both sides of a transition.

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "probic/model_io.hpp"

namespace probic {

enum class dice_target { all_six, count_at_least };

namespace dice_detail {

constexpr int die_vars = 13;

// Local state codes 0..6 = coin states s0..s6, 7..12 = outcomes d1..d6.
// Successors of each coin state; both taken with probability 1/2.
constexpr int succ[7][2] = {
    {1, 2},    // s0 -> s1 | s2
    {3, 4},    // s1 -> s3 | s4
    {5, 6},    // s2 -> s5 | s6
    {1, 7},    // s3 -> s1 | d1
    {8, 9},    // s4 -> d2 | d3
    {10, 11},  // s5 -> d4 | d5
    {2, 12},   // s6 -> s2 | d6
};

// Global variable of die j's (0-based) local state code.
inline var_t code_var(int die, int code) { return die * die_vars + code + 1; }

inline bool absorbed(int code) { return code >= 7; }

inline state_t pack(const std::vector<int>& codes) {
    state_t s = 0;
    for (std::size_t j = 0; j < codes.size(); ++j)
        s |= state_t(1) << (code_var(static_cast<int>(j), codes[j]) - 1);
    return s;
}

}  // namespace dice_detail

inline model_file build_dice_model(int num_dice, dice_target target, int k = 0) {
    using namespace dice_detail;
    if (num_dice < 1 || num_dice * die_vars > 62)
        throw std::invalid_argument("number of dice must be between 1 and 4");
    if (target == dice_target::count_at_least && (k < 1 || k > num_dice))
        throw std::invalid_argument("count target needs 1 <= k <= number of dice");

    model_file mf;
    symbolic_dtmc& m = mf.dtmc;
    const var_t n = num_dice * die_vars;
    m.num_vars = n;

    std::vector<int> start(num_dice, 0);  // every die at s0
    m.init_state = pack(start);
    m.init = state_to_cube(m.init_state, n);

    // Entries by forward exploration over die-state vectors.
    std::vector<std::vector<int>> work{start};
    std::unordered_map<state_t, char> visited{{m.init_state, 1}};
    while (!work.empty()) {
        std::vector<int> codes = std::move(work.back());
        work.pop_back();
        state_t from = pack(codes);
        int active = -1;
        for (int j = 0; j < num_dice; ++j)
            if (!absorbed(codes[j])) {
                active = j;
                break;
            }
        if (active == -1) {
            m.entries.push_back(make_entry(state_to_cube(from, n), state_to_cube(from, n),
                                           rational(1)));
            continue;
        }
        for (int side = 0; side < 2; ++side) {
            std::vector<int> next = codes;
            next[active] = succ[codes[active]][side];
            state_t to = pack(next);
            m.entries.push_back(
                make_entry(state_to_cube(from, n), state_to_cube(to, n), rational(1, 2)));
            if (!visited.count(to)) {
                visited.emplace(to, 1);
                work.push_back(std::move(next));
            }
        }
    }

    // Transition relation. A literal helper for the next-state copy:
    auto primed = [n](lit_t l) { return l > 0 ? l + n : l - n; };
    for (int j = 0; j < num_dice; ++j) {
        // each die is one-hot on both sides of the transition
        clause alo, alo_p;
        for (int c = 0; c < die_vars; ++c) {
            alo.push_back(code_var(j, c));
            alo_p.push_back(primed(code_var(j, c)));
        }
        m.trans.push_back(make_clause(alo));
        m.trans.push_back(make_clause(alo_p));
        for (int a = 0; a < die_vars; ++a)
            for (int b = a + 1; b < die_vars; ++b) {
                m.trans.push_back(make_clause({-code_var(j, a), -code_var(j, b)}));
                m.trans.push_back(make_clause({-primed(code_var(j, a)), -primed(code_var(j, b))}));
            }
        // outcomes are permanent
        for (int c = 7; c < die_vars; ++c)
            m.trans.push_back(make_clause({-code_var(j, c), primed(code_var(j, c))}));
        // coin states step along the automaton; s0 only moves once every
        // earlier die is absorbed (otherwise the die is still waiting)
        for (int c = 0; c < 7; ++c) {
            clause move{-code_var(j, c), primed(code_var(j, succ[c][0])),
                        primed(code_var(j, succ[c][1]))};
            if (c == 0)
                for (int i = 0; i < j; ++i)
                    for (int cc = 0; cc < 7; ++cc) move.push_back(code_var(i, cc));
            m.trans.push_back(make_clause(std::move(move)));
        }
        for (int i = 0; i < j; ++i) {
            // a die past s0 means every earlier die is absorbed (both sides),
            // and a waiting die stays at s0 while any earlier die still flips
            clause pre{code_var(j, 0)}, post{primed(code_var(j, 0))},
                stay{primed(code_var(j, 0))};
            for (int o = 7; o < die_vars; ++o) {
                pre.push_back(code_var(i, o));
                post.push_back(primed(code_var(i, o)));
                stay.push_back(code_var(i, o));
            }
            m.trans.push_back(make_clause(std::move(pre)));
            m.trans.push_back(make_clause(std::move(post)));
            m.trans.push_back(make_clause(std::move(stay)));
        }
    }

    // Bad cubes over the d6 outcome variables.
    const auto d6 = [&](int die) { return code_var(die, 12); };
    if (target == dice_target::all_six) {
        cube c;
        for (int j = 0; j < num_dice; ++j) c.push_back(d6(j));
        mf.bad.push_back(make_cube(std::move(c)));
    } else {
        // every k-subset of dice showing six (cubes may overlap; the property
        // is their disjunction)
        std::vector<int> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = i;
        for (;;) {
            cube c;
            for (int i : idx) c.push_back(d6(i));
            mf.bad.push_back(make_cube(std::move(c)));
            int pos = k - 1;
            while (pos >= 0 && idx[pos] == num_dice - k + pos) --pos;
            if (pos < 0) break;
            ++idx[pos];
            for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
    return mf;
}

}  // namespace probic
