#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "probic/sat.hpp"

using namespace probic;

namespace {

// Truth-table reference: brute-force satisfiability of a CNF under assumptions.
bool brute_sat(int n, const std::vector<std::vector<lit_t>>& cnf,
               const std::vector<lit_t>& assumptions = {}) {
    for (state_t s = 0; s < (state_t(1) << n); ++s) {
        bool ok = true;
        for (lit_t a : assumptions)
            if (!eval_lit(a, s)) {
                ok = false;
                break;
            }
        for (const auto& c : cnf) {
            if (!ok) break;
            bool sat = false;
            for (lit_t l : c)
                if (eval_lit(l, s)) {
                    sat = true;
                    break;
                }
            if (!sat) ok = false;
        }
        if (ok) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("basic sat and unsat") {
    solver s(2);
    s.add_clause({1, 2});
    CHECK(s.solve() == solver::result::sat);
    s.add_clause({-1});
    s.add_clause({-2});
    CHECK(s.solve() == solver::result::unsat);
    CHECK_FALSE(s.ok());
    CHECK(s.solve() == solver::result::unsat);  // stays contradictory
}

TEST_CASE("model satisfies all clauses and covers all declared variables") {
    solver s(4);
    s.add_clause({1, -2});
    s.add_clause({2, 3});
    s.add_clause({-3, -1});
    REQUIRE(s.solve() == solver::result::sat);
    auto val = [&](lit_t l) {
        bool b = s.model_value(lit_var(l));
        return lit_negative(l) ? !b : b;
    };
    CHECK((val(1) || val(-2)));
    CHECK((val(2) || val(3)));
    CHECK((val(-3) || val(-1)));
    // var 4 unconstrained but must still have a defined value
    CHECK_NOTHROW(s.model_value(4));
    CHECK_THROWS_AS(s.model_value(5), std::invalid_argument);
}

TEST_CASE("assumptions restrict a single solve without persisting") {
    solver s(2);
    s.add_clause({1, 2});
    CHECK(s.solve({-1}) == solver::result::sat);
    CHECK(s.model_value(2));
    CHECK(s.solve({-1, -2}) == solver::result::unsat);
    CHECK(s.ok());  // unsat came from assumptions, not from the database
    CHECK(s.solve() == solver::result::sat);
    CHECK(s.solve({-2}) == solver::result::sat);
    CHECK(s.model_value(1));
}

TEST_CASE("contradictory assumptions on an empty database") {
    solver s(1);
    CHECK(s.solve({1, -1}) == solver::result::unsat);
    CHECK(s.ok());
    CHECK(s.solve({1}) == solver::result::sat);
}

TEST_CASE("empty clause makes the database contradictory") {
    solver s(1);
    s.add_clause({});
    CHECK_FALSE(s.ok());
    CHECK(s.solve() == solver::result::unsat);
}

TEST_CASE("tautologies are ignored") {
    solver s(2);
    s.add_clause({1, -1});
    s.add_clause({-2});
    REQUIRE(s.solve() == solver::result::sat);
    CHECK_FALSE(s.model_value(2));
}

TEST_CASE("variables can be added between solves") {
    solver s(1);
    s.add_clause({1});
    REQUIRE(s.solve() == solver::result::sat);
    var_t v = s.add_var();
    CHECK(v == 2);
    s.add_clause({-1, 2});
    REQUIRE(s.solve() == solver::result::sat);
    CHECK(s.model_value(2));
    CHECK(s.num_vars() == 2);
}

TEST_CASE("literals out of range are rejected") {
    solver s(2);
    CHECK_THROWS_AS(s.add_clause({3}), std::invalid_argument);
    CHECK_THROWS_AS(s.solve({-5}), std::invalid_argument);
}

TEST_CASE("solve call counter") {
    solver s(1);
    CHECK(s.num_solve_calls() == 0);
    s.solve();
    s.solve({1});
    CHECK(s.num_solve_calls() == 2);
}

TEST_CASE("pigeonhole 4 into 3 is unsat") {
    // p(i,j): pigeon i in hole j; vars 1..12
    solver s(12);
    auto v = [](int i, int j) { return lit_t(i * 3 + j + 1); };
    for (int i = 0; i < 4; ++i) s.add_clause({v(i, 0), v(i, 1), v(i, 2)});
    for (int j = 0; j < 3; ++j)
        for (int i1 = 0; i1 < 4; ++i1)
            for (int i2 = i1 + 1; i2 < 4; ++i2) s.add_clause({-v(i1, j), -v(i2, j)});
    CHECK(s.solve() == solver::result::unsat);
}

TEST_CASE("differential fuzz against truth tables") {
    std::mt19937_64 rng(20260816);
    for (int iter = 0; iter < 300; ++iter) {
        int n = 2 + int(rng() % 7);           // up to 8 vars
        int m = 1 + int(rng() % (3 * n));     // clause count
        std::vector<std::vector<lit_t>> cnf;
        solver s(n);
        for (int ci = 0; ci < m; ++ci) {
            int len = 1 + int(rng() % 3);
            std::vector<lit_t> c;
            for (int k = 0; k < len; ++k) {
                lit_t v = 1 + lit_t(rng() % n);
                c.push_back(rng() % 2 ? v : -v);
            }
            cnf.push_back(c);
            s.add_clause(c);
        }
        // a couple of assumption literals half the time
        std::vector<lit_t> as;
        if (rng() % 2) {
            lit_t v = 1 + lit_t(rng() % n);
            as.push_back(rng() % 2 ? v : -v);
        }
        bool expect = brute_sat(n, cnf, as);
        bool got = s.solve(as) == solver::result::sat;
        INFO("iter " << iter << " n=" << n << " m=" << m);
        REQUIRE(got == expect);
        if (got) {
            // model must satisfy every clause and every assumption
            for (const auto& c : cnf) {
                bool sat = false;
                for (lit_t l : c) {
                    bool b = s.model_value(lit_var(l));
                    if (lit_negative(l) ? !b : b) sat = true;
                }
                REQUIRE(sat);
            }
            for (lit_t a : as) {
                bool b = s.model_value(lit_var(a));
                REQUIRE((lit_negative(a) ? !b : b));
            }
        }
        // status must be reproducible after an unrelated interleaved solve
        s.solve({});
        bool again = s.solve(as) == solver::result::sat;
        REQUIRE(again == expect);
    }
}

TEST_CASE("deterministic models for a fixed call sequence") {
    auto run = [] {
        solver s(6);
        s.add_clause({1, 2, 3});
        s.add_clause({-1, 4});
        s.add_clause({-2, 5});
        s.add_clause({-4, -5, 6});
        std::vector<std::vector<bool>> models;
        for (int round = 0; round < 3; ++round) {
            REQUIRE(s.solve() == solver::result::sat);
            std::vector<bool> m;
            for (var_t v = 1; v <= 6; ++v) m.push_back(s.model_value(v));
            models.push_back(m);
            REQUIRE(s.solve({6}) == solver::result::sat);
        }
        return models;
    };
    CHECK(run() == run());
}
