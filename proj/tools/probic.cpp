// Command-line front end.
//
// Exit codes: 0 success (check: Pass), 1 check Fail / validate issues / fuzz
// mismatch, 2 usage, parse, or refusal errors, 3 internal faults.

#include <chrono>
#include <fstream>
#include <iostream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "probic/dice.hpp"
#include "probic/engine.hpp"
#include "probic/model_io.hpp"
#include "probic/oracle.hpp"
#include "probic/report.hpp"

namespace {

using namespace probic;

std::string bound_text(const rational& v) {
    std::ostringstream os;
    os << rat_to_string(v) << " (" << rat_to_double(v) << ")";
    return os.str();
}

void write_certificate(const std::string& path, const check_result& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open certificate file " + path);
    if (r.verdict == verdict_t::pass) {
        if (r.has_invariant) {
            out << "invariant\n";
            for (const clause& c : r.invariant) {
                out << "clause";
                for (lit_t l : c) out << ' ' << l;
                out << "\n";
            }
        } else {
            out << "# no inductive invariant: verdict decided before closure\n"
                << "l_init=" << bound_text(r.l_init) << "\n"
                << "u_init=" << bound_text(r.u_init) << "\n";
        }
        return;
    }
    if (!r.witness) throw std::runtime_error("failing run carries no witness");
    if (r.witness->dtmc.trans.empty())
        out << "# transition clauses omitted (model too wide); probability entries only\n";
    out << serialize_model(r.witness->dtmc, r.witness->bad);
}

struct check_options {
    std::string path;
    std::string threshold;
    std::string rel = "lt";
    std::string loop_mode = "closure";
    int loop_n = 1;
    bool assert_invariants = false;
    std::string certificate;
    bool stats = false;
};

int run_check(const check_options& opt) {
    model_file mf = load_model(opt.path);
    property_spec prop = property_spec::make(
        mf.bad, parse_rational(opt.threshold),
        opt.rel == "lt" ? relation::strictly_less : relation::at_least);

    engine_config cfg;
    if (opt.loop_mode == "iteration")
        cfg.loops = engine_config::loop_mode::every_iteration;
    else if (opt.loop_mode == "n")
        cfg.loops = engine_config::loop_mode::every_n;
    cfg.loop_n = opt.loop_n;
    cfg.assert_invariants = opt.assert_invariants;
    if (opt.stats) cfg.stats_out = &std::cout;

    auto t0 = std::chrono::steady_clock::now();
    check_result r = check(mf.dtmc, prop, cfg);
    double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    std::cout << format_run_report(r, ms);
    if (!opt.certificate.empty()) write_certificate(opt.certificate, r);
    return r.verdict == verdict_t::pass ? 0 : 1;
}

int run_oracle(const std::string& path, int var_limit) {
    model_file mf = load_model(path);
    property_spec prop = property_spec::make(mf.bad, rational(0), relation::strictly_less);
    rational p = reach_probability(mf.dtmc, prop, static_cast<var_t>(var_limit));
    std::cout << "probability=" << bound_text(p) << "\n";
    return 0;
}

int run_gen_dice(int dice, const std::string& target, int k, const std::string& out) {
    dice_target t =
        target == "allsix" ? dice_target::all_six : dice_target::count_at_least;
    model_file mf = build_dice_model(dice, t, k);
    write_model(out, mf.dtmc, mf.bad);
    std::cout << "wrote " << out << ": " << mf.dtmc.num_vars << " variables, "
              << mf.dtmc.entries.size() << " probability entries, "
              << mf.dtmc.trans.size() << " transition clauses\n";
    return 0;
}

int run_validate(const std::string& path, int var_limit) {
    model_file mf = load_model(path);
    std::vector<std::string> issues;

    for (const auto& e : mf.dtmc.entries)
        if (e.p <= 0 || e.p > 1)
            issues.push_back("probability " + rat_to_string(e.p) +
                             " outside (0, 1] on an entry");

    std::size_t reachable = 0;
    try {
        explicit_dtmc ex = explicate(mf.dtmc, static_cast<var_t>(var_limit));
        std::vector<char> seen(ex.states.size(), 0);
        std::queue<int> work;
        seen[ex.init] = 1;
        work.push(ex.init);
        while (!work.empty()) {
            int s = work.front();
            work.pop();
            ++reachable;
            rational outflow(0);
            for (auto& [t, p] : ex.succ[s]) {
                outflow += p;
                if (!seen[t]) {
                    seen[t] = 1;
                    work.push(t);
                }
            }
            if (outflow != 1)
                issues.push_back("outflow of state " +
                                 detail::state_text(ex.states[s], ex.num_vars) +
                                 " sums to " + rat_to_string(outflow) + ", not 1");
        }
    } catch (const model_error& e) {
        issues.push_back(e.what());
    }

    if (!issues.empty()) {
        for (const std::string& i : issues) std::cout << "issue: " << i << "\n";
        std::cout << issues.size() << " issue(s) found\n";
        return 1;
    }
    std::cout << "model ok: " << mf.dtmc.num_vars << " variables, " << reachable
              << " reachable states\n";
    return 0;
}

int run_fuzz(int runs, std::uint64_t seed0, int max_vars) {
    for (int i = 0; i < runs; ++i) {
        std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
        random_instance inst = random_model(seed, static_cast<var_t>(max_vars));
        property_spec prop = property_spec::make(inst.mf.bad, inst.threshold, inst.rel);
        engine_config cfg;
        cfg.assert_invariants = true;
        try {
            check_result r = check(inst.mf.dtmc, prop, cfg);
            bool expect_pass = inst.rel == relation::strictly_less
                                   ? inst.exact < inst.threshold
                                   : inst.exact >= inst.threshold;
            bool exact_kind = r.kind == termination_t::closure ||
                              r.kind == termination_t::trivial ||
                              r.kind == termination_t::init_in_bad;
            bool ok = (r.verdict == verdict_t::pass) == expect_pass &&
                      r.l_init <= inst.exact && inst.exact <= r.u_init &&
                      (!exact_kind || (r.l_init == inst.exact && r.u_init == inst.exact));
            if (!ok) {
                std::cout << "mismatch seed=" << seed << ": verdict "
                          << verdict_name(r.verdict) << " l=" << rat_to_string(r.l_init)
                          << " u=" << rat_to_string(r.u_init) << " against exact "
                          << rat_to_string(inst.exact) << " threshold "
                          << rat_to_string(inst.threshold) << "\n";
                return 1;
            }
        } catch (const std::exception& e) {
            std::cout << "mismatch seed=" << seed << ": " << e.what() << "\n";
            return 1;
        }
    }
    std::cout << "fuzz ok: " << runs << " run(s), seeds " << seed0 << ".."
              << seed0 + static_cast<std::uint64_t>(runs) - 1 << ", no mismatches\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic reachability checker"};
    app.require_subcommand(1);

    check_options chk;
    auto* check_cmd =
        app.add_subcommand("check", "decide a reachability threshold on a model");
    check_cmd->add_option("model", chk.path, "model file")->required();
    check_cmd->add_option("--threshold", chk.threshold, "probability bound, e.g. 1/4")
        ->required();
    check_cmd
        ->add_option("--relation", chk.rel,
                     "lt: probability < bound holds; ge: probability >= bound holds")
        ->required()
        ->check(CLI::IsMember({"lt", "ge"}));
    check_cmd
        ->add_option("--loop-mode", chk.loop_mode,
                     "when to search for transitions inside the recorded set")
        ->check(CLI::IsMember({"closure", "iteration", "n"}));
    check_cmd->add_option("--loop-n", chk.loop_n, "round interval for --loop-mode n")
        ->check(CLI::PositiveNumber);
    check_cmd->add_flag("--assert-invariants", chk.assert_invariants,
                        "run the internal invariant suite while checking");
    check_cmd->add_option("--certificate", chk.certificate,
                          "write an invariant or witness certificate here");
    check_cmd->add_flag("--stats", chk.stats, "log every bound decision");

    std::string oracle_path;
    int oracle_limit = 20;
    auto* oracle_cmd = app.add_subcommand(
        "oracle", "compute the exact reachability probability by state expansion");
    oracle_cmd->add_option("model", oracle_path, "model file")->required();
    oracle_cmd->add_option("--var-limit", oracle_limit,
                           "refuse models with more variables than this");

    int gd_dice = 1;
    std::string gd_target = "allsix";
    int gd_k = 1;
    std::string gd_out;
    auto* gd_cmd = app.add_subcommand("gen-dice", "generate a sequential dice model");
    gd_cmd->add_option("--dice", gd_dice, "number of dice")->required();
    gd_cmd->add_option("--target", gd_target, "bad-state predicate")
        ->check(CLI::IsMember({"allsix", "count"}));
    gd_cmd->add_option("--k", gd_k, "minimum sixes for --target count");
    gd_cmd->add_option("--out", gd_out, "output model file")->required();

    std::string val_path;
    int val_limit = 20;
    auto* val_cmd = app.add_subcommand("validate", "check a model file for defects");
    val_cmd->add_option("model", val_path, "model file")->required();
    val_cmd->add_option("--var-limit", val_limit,
                        "refuse models with more variables than this");

    int fz_runs = 100;
    std::uint64_t fz_seed = 1;
    int fz_vars = 6;
    auto* fz_cmd = app.add_subcommand(
        "fuzz", "differential-test the checker against the state-expansion oracle");
    fz_cmd->add_option("--runs", fz_runs, "number of random models")
        ->check(CLI::PositiveNumber);
    fz_cmd->add_option("--seed", fz_seed, "seed of the first run; run i uses seed+i");
    fz_cmd->add_option("--max-vars", fz_vars, "largest model size, 2..6 variables")
        ->check(CLI::Range(2, 6));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*check_cmd) return run_check(chk);
        if (*oracle_cmd) return run_oracle(oracle_path, oracle_limit);
        if (*gd_cmd) return run_gen_dice(gd_dice, gd_target, gd_k, gd_out);
        if (*val_cmd) return run_validate(val_path, val_limit);
        if (*fz_cmd) return run_fuzz(fz_runs, fz_seed, fz_vars);
    } catch (const internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const bound_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const refusal_error& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const model_error& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
