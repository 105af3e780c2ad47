#pragma once

// Literals, cubes, clauses and packed states.
//
// A literal is a signed integer: +v asserts variable v, -v its negation
// (variables are 1-based). A cube is a conjunction of literals, a clause a
// disjunction; both are kept in one canonical order so that syntactic
// comparison of clause sets is meaningful. States pack variable assignments
// into a 64-bit word, bit (v-1) holding the value of variable v.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace probic {

using var_t = std::int32_t;
using lit_t = std::int32_t;
using state_t = std::uint64_t;

inline var_t lit_var(lit_t l) { return l < 0 ? -l : l; }
inline bool lit_negative(lit_t l) { return l < 0; }

// Canonical literal order: by variable, positive polarity first.
inline bool lit_less(lit_t a, lit_t b) {
    if (lit_var(a) != lit_var(b)) return lit_var(a) < lit_var(b);
    return !lit_negative(a) && lit_negative(b);
}

using cube = std::vector<lit_t>;
using clause = std::vector<lit_t>;

// Sorts into canonical order and drops duplicates. Throws if some variable
// occurs with both polarities (a contradictory cube / tautological clause —
// neither has a use here, so both are treated as construction errors).
inline std::vector<lit_t> canonical_lits(std::vector<lit_t> lits) {
    for (lit_t l : lits)
        if (l == 0) throw std::invalid_argument("literal 0 is not valid");
    std::sort(lits.begin(), lits.end(), lit_less);
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 1; i < lits.size(); ++i)
        if (lit_var(lits[i]) == lit_var(lits[i - 1]))
            throw std::invalid_argument(
                "variable " + std::to_string(lit_var(lits[i])) +
                " occurs with both polarities");
    return lits;
}

inline cube make_cube(std::vector<lit_t> lits) { return canonical_lits(std::move(lits)); }
inline clause make_clause(std::vector<lit_t> lits) { return canonical_lits(std::move(lits)); }

// Lexicographic order on canonical literal vectors, used wherever cubes,
// clauses or whole models need a reproducible order.
inline bool lits_less(const std::vector<lit_t>& a, const std::vector<lit_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), lit_less);
}

// De Morgan: negating a cube yields a clause and vice versa; canonical order
// is preserved because negation keeps the (var, polarity-flip) order readable
// only up to polarity, so we re-canonicalize cheaply.
inline std::vector<lit_t> negate_lits(const std::vector<lit_t>& lits) {
    std::vector<lit_t> out;
    out.reserve(lits.size());
    for (lit_t l : lits) out.push_back(-l);
    std::sort(out.begin(), out.end(), lit_less);
    return out;
}

inline clause negate_cube(const cube& c) { return negate_lits(c); }
inline cube negate_clause(const clause& c) { return negate_lits(c); }

// Shifts every variable by num_vars, mapping a present-state formula to the
// next-state copy used in transition queries.
inline std::vector<lit_t> prime_lits(const std::vector<lit_t>& lits, var_t num_vars) {
    std::vector<lit_t> out;
    out.reserve(lits.size());
    for (lit_t l : lits) out.push_back(l < 0 ? l - num_vars : l + num_vars);
    return out;
}

inline bool eval_lit(lit_t l, state_t s) {
    bool bit = (s >> (lit_var(l) - 1)) & 1u;
    return lit_negative(l) ? !bit : bit;
}

inline bool eval_cube(const cube& c, state_t s) {
    for (lit_t l : c)
        if (!eval_lit(l, s)) return false;
    return true;
}

inline bool eval_clause(const clause& c, state_t s) {
    for (lit_t l : c)
        if (eval_lit(l, s)) return true;
    return false;
}

// Evaluates a transition clause over a (from, to) state pair; variables above
// num_vars refer to the successor state.
inline bool eval_trans_clause(const clause& c, state_t from, state_t to, var_t num_vars) {
    for (lit_t l : c) {
        var_t v = lit_var(l);
        bool bit = v <= num_vars ? ((from >> (v - 1)) & 1u) : ((to >> (v - num_vars - 1)) & 1u);
        if (lit_negative(l) ? !bit : bit) return true;
    }
    return false;
}

// Bit-mask view of a cube: mask marks the constrained variables, bits their
// required values. Two cubes overlap (share a satisfying state) iff their
// required bits agree on the shared mask.
struct cube_mask {
    state_t mask = 0;
    state_t bits = 0;

    static cube_mask from_cube(const cube& c) {
        cube_mask m;
        for (lit_t l : c) {
            state_t b = state_t(1) << (lit_var(l) - 1);
            m.mask |= b;
            if (!lit_negative(l)) m.bits |= b;
        }
        return m;
    }

    bool matches(state_t s) const { return (s & mask) == bits; }

    bool overlaps(const cube_mask& o) const {
        return ((bits ^ o.bits) & (mask & o.mask)) == 0;
    }
};

// Complete cube describing one state over variables 1..num_vars.
inline cube state_to_cube(state_t s, var_t num_vars) {
    cube c;
    c.reserve(num_vars);
    for (var_t v = 1; v <= num_vars; ++v)
        c.push_back(((s >> (v - 1)) & 1u) ? v : -v);
    return c;
}

// Packs a cube's positive literals into a state word; meaningful for complete
// cubes (absent variables read as false).
inline state_t cube_to_state(const cube& c) {
    state_t s = 0;
    for (lit_t l : c)
        if (!lit_negative(l)) s |= state_t(1) << (lit_var(l) - 1);
    return s;
}

// Enumerates all states matching a (possibly partial) cube over num_vars
// variables. Exponential in the number of free variables — callers guard size.
inline std::vector<state_t> expand_cube(const cube& c, var_t num_vars) {
    cube_mask m = cube_mask::from_cube(c);
    std::vector<var_t> free_vars;
    for (var_t v = 1; v <= num_vars; ++v)
        if (!((m.mask >> (v - 1)) & 1u)) free_vars.push_back(v);
    std::vector<state_t> out;
    out.reserve(std::size_t(1) << free_vars.size());
    for (state_t i = 0; i < (state_t(1) << free_vars.size()); ++i) {
        state_t s = m.bits;
        for (std::size_t j = 0; j < free_vars.size(); ++j)
            if ((i >> j) & 1u) s |= state_t(1) << (free_vars[j] - 1);
        out.push_back(s);
    }
    return out;
}

}  // namespace probic
