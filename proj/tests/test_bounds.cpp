#include <catch2/catch_amalgamated.hpp>

#include "probic/bounds.hpp"

using namespace probic;

namespace {

// Four-state chain states (var 1 = bit 0): 00, 10, 01, 11.
constexpr state_t s00 = 0b00, s10 = 0b01, s01 = 0b10, s11 = 0b11;

// Ledger as recorded on the four-state chain: everything the chain does on the
// way to the bad sink, except the edge into the safe sink.
bound_system four_state_ledger() {
    bound_system bs(s00);
    bs.register_transition(s10, false, s11, true, rational(1, 5));
    bs.register_transition(s00, false, s10, false, rational(1, 2));
    bs.register_transition(s10, false, s10, false, rational(1, 2));
    bs.register_transition(s11, true, s11, true, rational(1));
    return bs;
}

}  // namespace

TEST_CASE("lower bounds are the least solution over recorded edges") {
    auto bs = four_state_ledger();
    auto sol = bs.solve();
    REQUIRE(sol.has_init);
    CHECK(sol.l[bs.index_of(s11)] == rational(1));
    CHECK(sol.l[bs.index_of(s10)] == rational(2, 5));
    CHECK(sol.l_init == rational(1, 5));
}

TEST_CASE("uncertified deficits are counted as going straight to bad") {
    auto bs = four_state_ledger();
    auto sol = bs.solve();
    // 10 is missing 3/10 of outflow, 00 is missing 1/2: both collapse to 1
    CHECK(sol.u[bs.index_of(s10)] == rational(1));
    CHECK(sol.u_init == rational(1));
}

TEST_CASE("certifying deficits closes the gap to the exact probability") {
    auto bs = four_state_ledger();
    std::vector<char> safe(bs.num_states(), 0);
    safe[bs.index_of(s00)] = 1;
    safe[bs.index_of(s10)] = 1;
    auto sol = bs.solve(&safe);
    CHECK(sol.u[bs.index_of(s10)] == rational(2, 5));
    CHECK(sol.u_init == rational(1, 5));
    CHECK(sol.l_init == sol.u_init);
}

TEST_CASE("states with full internal outflow that misses bad get upper bound zero") {
    // 10's full outflow is recorded once the edge to the safe sink 01 lands;
    // 01 self-loops with mass one and cannot reach bad, so u(01) = 0 without
    // any certification, and u(10) collapses to the exact 2/5.
    bound_system bs(s00);
    bs.register_transition(s10, false, s11, true, rational(1, 5));
    bs.register_transition(s10, false, s10, false, rational(1, 2));
    bs.register_transition(s10, false, s01, false, rational(3, 10));
    bs.register_transition(s01, false, s01, false, rational(1));
    bs.register_transition(s11, true, s11, true, rational(1));
    auto sol = bs.solve();
    CHECK(sol.u[bs.index_of(s01)] == rational(0));
    CHECK(sol.u[bs.index_of(s10)] == rational(2, 5));
    CHECK(sol.l[bs.index_of(s10)] == rational(2, 5));
    CHECK_FALSE(sol.has_init);  // 00 never joined the ledger here
    CHECK(sol.l_init == rational(0));
    CHECK(sol.u_init == rational(1));
}

TEST_CASE("registering more outflow than mass one is rejected") {
    bound_system bs(s00);
    bs.register_transition(s00, false, s10, false, rational(1, 2));
    bs.register_transition(s00, false, s10, false, rational(1, 2));  // exactly 1: fine
    CHECK_THROWS_AS(bs.register_transition(s00, false, s10, false, rational(1, 2)),
                    bound_error);
}

TEST_CASE("conflicting bad flags are rejected") {
    bound_system bs(s00);
    bs.ensure_state(s10, false);
    CHECK_THROWS_AS(bs.ensure_state(s10, true), bound_error);
}

TEST_CASE("bounds evolve monotonically as the ledger grows") {
    bound_system bs(s00);
    bound_solution prev = bs.solve();
    CHECK(prev.l_init == rational(0));
    CHECK(prev.u_init == rational(1));
    auto step = [&](state_t a, bool ab, state_t b, bool bb, rational p) {
        bs.register_transition(a, ab, b, bb, p);
        auto cur = bs.solve();
        auto violation = bound_system::check_monotonicity(prev, cur);
        INFO(violation.value_or("ok"));
        CHECK_FALSE(violation.has_value());
        prev = cur;
    };
    step(s10, false, s11, true, rational(1, 5));
    step(s00, false, s10, false, rational(1, 2));
    step(s10, false, s10, false, rational(1, 2));
    step(s11, true, s11, true, rational(1));
    step(s10, false, s01, false, rational(3, 10));
    step(s01, false, s01, false, rational(1));
    CHECK(prev.l_init == rational(1, 5));
    CHECK(prev.u_init == rational(7, 10));  // 00 still misses half its outflow
    step(s00, false, s01, false, rational(1, 2));
    CHECK(prev.l_init == rational(1, 5));
    CHECK(prev.u_init == rational(1, 5));  // every edge in 00's cone recorded
}

TEST_CASE("monotonicity checker reports violations") {
    bound_solution a, b;
    a.l = {rational(1, 2)};
    a.u = {rational(1, 2)};
    b.l = {rational(1, 4)};
    b.u = {rational(1, 2)};
    auto v = bound_system::check_monotonicity(a, b);
    REQUIRE(v.has_value());
    CHECK(v->find("lower bound") != std::string::npos);
    b.l = {rational(1, 2)};
    b.u = {rational(3, 4)};
    v = bound_system::check_monotonicity(a, b);
    REQUIRE(v.has_value());
    CHECK(v->find("upper bound") != std::string::npos);
    b.u = {rational(1, 2)};
    CHECK_FALSE(bound_system::check_monotonicity(a, b).has_value());
}

TEST_CASE("decisions for both relations") {
    bound_solution sol;
    sol.l_init = rational(1, 5);
    sol.u_init = rational(2, 5);
    using R = relation;
    CHECK(bound_system::decide(sol, rational(1, 2), R::strictly_less) == decision::pass);
    CHECK(bound_system::decide(sol, rational(1, 10), R::strictly_less) == decision::fail);
    CHECK(bound_system::decide(sol, rational(1, 4), R::strictly_less) == decision::unknown);
    CHECK(bound_system::decide(sol, rational(1, 10), R::at_least) == decision::pass);
    CHECK(bound_system::decide(sol, rational(1, 2), R::at_least) == decision::fail);
    CHECK(bound_system::decide(sol, rational(1, 4), R::at_least) == decision::unknown);
    // boundary: threshold equal to a bound
    CHECK(bound_system::decide(sol, rational(1, 5), R::at_least) == decision::pass);
    CHECK(bound_system::decide(sol, rational(1, 5), R::strictly_less) == decision::fail);
}

TEST_CASE("chains through several components solve in order") {
    // a -> b -> c -> bad, with a 2-cycle between b and c
    state_t a = 0, b = 1, c = 2, bad = 3;
    bound_system bs(a);
    bs.register_transition(a, false, b, false, rational(1));
    bs.register_transition(b, false, c, false, rational(1, 2));
    bs.register_transition(c, false, b, false, rational(1, 3));
    bs.register_transition(c, false, bad, true, rational(2, 3));
    bs.register_transition(b, false, bad, true, rational(1, 2));
    auto sol = bs.solve();
    // l(b) = 1/2 l(c) + 1/2, l(c) = 1/3 l(b) + 2/3 => l(b) = 1, l(c) = 1
    CHECK(sol.l[bs.index_of(b)] == rational(1));
    CHECK(sol.l_init == rational(1));
    CHECK(sol.u_init == rational(1));  // nothing missing anywhere
}

TEST_CASE("deficit of a state that cannot reach bad still raises its upper bound") {
    // x has half its mass recorded into a safe self-loop; the other half is
    // unknown, so u(x) must stay at 1/2 until certified
    bound_system bs(7);
    bs.register_transition(7, false, 7, false, rational(1, 2));
    auto sol = bs.solve();
    CHECK(sol.l[0] == rational(0));
    CHECK(sol.u[0] == rational(1));  // u(x) = 1/2 u(x) + 1/2
    std::vector<char> safe{1};
    auto sol2 = bs.solve(&safe);
    CHECK(sol2.u[0] == rational(0));
}

TEST_CASE("empty system defaults") {
    bound_system bs(0);
    auto sol = bs.solve();
    CHECK_FALSE(sol.has_init);
    CHECK(sol.l_init == rational(0));
    CHECK(sol.u_init == rational(1));
    CHECK(bound_system::decide(sol, rational(1, 2), relation::strictly_less) ==
          decision::unknown);
}
