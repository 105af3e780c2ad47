#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "probic/model_io.hpp"
#include "probic/oracle.hpp"

using namespace probic;

namespace {

struct cli_run {
    int exit_code = -1;
    std::string out;  // stdout and stderr combined
};

cli_run run_cli(const std::string& args) {
    std::string cmd = std::string(PROBIC_CLI_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    cli_run r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string four_state() {
    return std::string(PROBIC_MODELS_DIR) + "/four_state.dtmc";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

}  // namespace

TEST_CASE("cli: passing check reports the run and exits zero") {
    cli_run r = run_cli("check " + four_state() + " --threshold 1/4 --relation lt");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("verdict=Pass\n") != std::string::npos);
    CHECK(r.out.find("termination_kind=Final\n") != std::string::npos);
    CHECK(r.out.find("l_init=1/5 (0.2)\n") != std::string::npos);
    CHECK(r.out.find("u_init=1/5 (0.2)\n") != std::string::npos);
    CHECK(r.out.find("frames=") != std::string::npos);
    CHECK(r.out.find("ctis=") != std::string::npos);
    CHECK(r.out.find("ledger_states=") != std::string::npos);
    CHECK(r.out.find("ledger_edges=") != std::string::npos);
    CHECK(r.out.find("sat_queries=") != std::string::npos);
    CHECK(r.out.find("wall_time_ms=") != std::string::npos);
}

TEST_CASE("cli: failing check exits one") {
    cli_run r = run_cli("check " + four_state() + " --threshold 3/20 --relation lt");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("verdict=Fail\n") != std::string::npos);
}

TEST_CASE("cli: stats flag logs every bound decision") {
    cli_run r = run_cli("check " + four_state() + " --threshold 1/4 --relation lt --stats");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("decide l_init=0/1 (0) u_init=1/1 (1) verdict=Unknown\n") !=
          std::string::npos);
    CHECK(r.out.find("u_init=1/5 (0.2) verdict=Pass\n") != std::string::npos);
}

TEST_CASE("cli: loop-mode variants agree on the answer") {
    for (const char* extra :
         {" --loop-mode closure", " --loop-mode iteration", " --loop-mode n --loop-n 2"}) {
        cli_run r =
            run_cli("check " + four_state() + " --threshold 1/4 --relation lt" + extra);
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("l_init=1/5 (0.2)\n") != std::string::npos);
        CHECK(r.out.find("u_init=1/5 (0.2)\n") != std::string::npos);
    }
}

TEST_CASE("cli: invariant certificate lists the closed frame's clauses") {
    std::string cert = "/tmp/probic_cli_invariant.txt";
    std::remove(cert.c_str());
    cli_run r = run_cli("check " + four_state() +
                        " --threshold 1/4 --relation lt --assert-invariants --certificate " +
                        cert);
    CHECK(r.exit_code == 0);
    std::string text = slurp(cert);
    CHECK(text.rfind("invariant\n", 0) == 0);
    CHECK(text.find("clause -1 -2\n") != std::string::npos);  // excludes the bad state
    CHECK(text.find("clause -1 2\n") != std::string::npos);   // excludes the danger state
}

TEST_CASE("cli: witness certificate is a loadable model reproducing the bound") {
    std::string cert = "/tmp/probic_cli_witness.dtmc";
    std::remove(cert.c_str());
    cli_run r = run_cli("check " + four_state() +
                        " --threshold 3/20 --relation lt --certificate " + cert);
    CHECK(r.exit_code == 1);
    std::ifstream in(cert);
    REQUIRE(in.good());
    model_file w = parse_model(in, "witness");
    property_spec prop = property_spec::make(w.bad, rational(3, 20), relation::strictly_less);
    CHECK(reach_probability(w.dtmc, prop) >= rational(3, 20));
}

TEST_CASE("cli: verdicts before closure certify bounds only") {
    std::string cert = "/tmp/probic_cli_early.txt";
    std::remove(cert.c_str());
    cli_run r = run_cli("check " + four_state() +
                        " --threshold 1/10 --relation ge --certificate " + cert);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("termination_kind=Early\n") != std::string::npos);
    std::string text = slurp(cert);
    CHECK(text.find("# no inductive invariant") != std::string::npos);
    CHECK(text.find("l_init=1/10 (0.1)\n") != std::string::npos);
}

TEST_CASE("cli: oracle prints the exact probability") {
    cli_run r = run_cli("oracle " + four_state());
    CHECK(r.exit_code == 0);
    CHECK(r.out == "probability=1/5 (0.2)\n");
}

TEST_CASE("cli: generated dice models round-trip through validate, oracle, check") {
    std::string path = "/tmp/probic_cli_die.dtmc";
    std::remove(path.c_str());
    cli_run gen = run_cli("gen-dice --dice 1 --target allsix --out " + path);
    CHECK(gen.exit_code == 0);
    CHECK(gen.out.find("13 variables") != std::string::npos);

    cli_run val = run_cli("validate " + path);
    CHECK(val.exit_code == 0);
    CHECK(val.out.find("model ok") != std::string::npos);

    cli_run orc = run_cli("oracle " + path);
    CHECK(orc.exit_code == 0);
    CHECK(orc.out.find("probability=1/6") != std::string::npos);

    cli_run chk = run_cli("check " + path + " --threshold 1/5 --relation lt");
    CHECK(chk.exit_code == 0);
    CHECK(chk.out.find("l_init=1/6") != std::string::npos);
    CHECK(chk.out.find("termination_kind=Final\n") != std::string::npos);
}

TEST_CASE("cli: oracle refuses oversized models unless the limit is raised") {
    std::string path = "/tmp/probic_cli_two_dice.dtmc";
    std::remove(path.c_str());
    cli_run gen = run_cli("gen-dice --dice 2 --target count --k 1 --out " + path);
    CHECK(gen.exit_code == 0);

    cli_run refused = run_cli("oracle " + path);
    CHECK(refused.exit_code == 2);
    CHECK(refused.out.find("refused") != std::string::npos);

    cli_run ok = run_cli("oracle " + path + " --var-limit 26");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("probability=11/36") != std::string::npos);
}

TEST_CASE("cli: validate flags sub-stochastic states") {
    std::string path = "/tmp/probic_cli_leaky.dtmc";
    spit(path,
         "dtmc\n"
         "vars 1\n"
         "init -1\n"
         "bad 1\n"
         "trans 1 2\n"
         "trans -1 2\n"
         "trans -1 -2\n"
         "prob -1 | 1 : 1/2\n");
    cli_run r = run_cli("validate " + path);
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("issue: outflow of state") != std::string::npos);
    CHECK(r.out.find("issue(s) found") != std::string::npos);
}

TEST_CASE("cli: validate flags entries the transition relation blocks") {
    std::string path = "/tmp/probic_cli_disagree.dtmc";
    spit(path,
         "dtmc\n"
         "vars 1\n"
         "init -1\n"
         "bad 1\n"
         "trans 1 2\n"
         "trans -1 2\n"
         "trans -1 -2\n"
         "prob -1 | 1 : 1/2\n"
         "prob -1 | -1 : 1/2\n");
    cli_run r = run_cli("validate " + path);
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("disagree") != std::string::npos);
}

TEST_CASE("cli: fuzz runs a seeded batch against the oracle") {
    cli_run r = run_cli("fuzz --runs 5 --seed 3");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("fuzz ok: 5 run(s), seeds 3..7") != std::string::npos);
}

TEST_CASE("cli: usage and file errors exit two") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("check /missing.dtmc --threshold 1/4 --relation lt").exit_code == 2);
    CHECK(run_cli("check " + four_state() + " --threshold 1/4 --relation xx").exit_code == 2);
    CHECK(run_cli("check " + four_state() + " --threshold zzz --relation lt").exit_code == 2);
    CHECK(run_cli("fuzz --max-vars 9").exit_code == 2);
    CHECK(run_cli("gen-dice --dice 7 --target allsix --out /tmp/x.dtmc").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("cli: a bad initial state is reported and fails the threshold") {
    std::string path = "/tmp/probic_cli_bad_init.dtmc";
    spit(path,
         "dtmc\n"
         "vars 1\n"
         "init -1\n"
         "bad -1\n"
         "trans 1 -2\n"
         "trans -1 2\n"
         "prob -1 | -1 : 1\n"
         "prob 1 | 1 : 1\n");
    cli_run r = run_cli("check " + path + " --threshold 1/2 --relation lt");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("termination_kind=InitInBad\n") != std::string::npos);
    CHECK(r.out.find("l_init=1/1 (1)\n") != std::string::npos);
}
