#pragma once

// Text format for symbolic DTMCs.
//
//   dtmc
//   vars <n>                      (1..62)
//   init <lits>                   (complete cube)
//   bad <lits>                    (one or more cubes)
//   trans <lits>                  (clause; vars n+1..2n are next-state)
//   prob <from> | <to> : <a/b>    (to-cube written unprimed)
//
// '#' starts a comment. Parsing accepts any line order after the header;
// serialization emits one canonical order, so parse-serialize round trips are
// stable and diffable.

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "probic/model.hpp"

namespace probic {

struct model_file {
    symbolic_dtmc dtmc;
    std::vector<cube> bad;
};

inline model_file parse_model(std::istream& in, const std::string& name) {
    model_file mf;
    symbolic_dtmc& m = mf.dtmc;
    bool saw_dtmc = false, saw_vars = false, saw_init = false;
    int lineno = 0;
    auto err = [&](const std::string& msg) {
        return model_error(name + ":" + std::to_string(lineno) + ": " + msg);
    };
    auto parse_lit = [&](const std::string& tok, var_t max_var) -> lit_t {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(tok, &used);
        } catch (const std::exception&) {
            throw err("expected a literal, got '" + tok + "'");
        }
        if (used != tok.size()) throw err("expected a literal, got '" + tok + "'");
        if (v == 0 || v > max_var || v < -static_cast<long>(max_var))
            throw err("literal " + tok + " out of range (vars 1.." + std::to_string(max_var) +
                      ")");
        return static_cast<lit_t>(v);
    };
    auto read_lits = [&](std::istringstream& ss, var_t max_var) {
        std::vector<lit_t> lits;
        std::string tok;
        while (ss >> tok) lits.push_back(parse_lit(tok, max_var));
        return lits;
    };
    auto canon = [&](std::vector<lit_t> lits) -> std::vector<lit_t> {
        try {
            return canonical_lits(std::move(lits));
        } catch (const std::invalid_argument& e) {
            throw err(e.what());
        }
    };

    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        std::string kw;
        if (!(ss >> kw)) continue;
        if (kw == "dtmc") {
            if (saw_dtmc) throw err("duplicate 'dtmc' header");
            std::string extra;
            if (ss >> extra) throw err("unexpected token after 'dtmc'");
            saw_dtmc = true;
            continue;
        }
        if (!saw_dtmc) throw err("expected 'dtmc' header first");
        if (kw == "vars") {
            if (saw_vars) throw err("duplicate 'vars' line");
            long n = 0;
            if (!(ss >> n) || n < 1 || n > 62)
                throw err("'vars' takes a count between 1 and 62");
            m.num_vars = static_cast<var_t>(n);
            saw_vars = true;
            continue;
        }
        if (!saw_vars) throw err("'vars' must precede '" + kw + "'");
        if (kw == "init") {
            if (saw_init) throw err("duplicate 'init' line");
            m.init = canon(read_lits(ss, m.num_vars));
            if (static_cast<var_t>(m.init.size()) != m.num_vars)
                throw err("'init' must be a complete cube over all " +
                          std::to_string(m.num_vars) + " variables");
            m.init_state = cube_to_state(m.init);
            saw_init = true;
        } else if (kw == "bad") {
            cube c = canon(read_lits(ss, m.num_vars));
            if (c.empty()) throw err("'bad' needs at least one literal");
            mf.bad.push_back(std::move(c));
        } else if (kw == "trans") {
            m.trans.push_back(canon(read_lits(ss, 2 * m.num_vars)));
        } else if (kw == "prob") {
            std::vector<lit_t> from, to;
            std::string tok;
            int section = 0;  // 0: from, 1: to, 2: probability
            rational p;
            bool saw_p = false;
            while (ss >> tok) {
                if (tok == "|") {
                    if (section != 0) throw err("unexpected '|'");
                    section = 1;
                } else if (tok == ":") {
                    if (section != 1) throw err("unexpected ':'");
                    section = 2;
                } else if (section == 0) {
                    from.push_back(parse_lit(tok, m.num_vars));
                } else if (section == 1) {
                    to.push_back(parse_lit(tok, m.num_vars));
                } else {
                    if (saw_p) throw err("unexpected token after probability");
                    try {
                        p = parse_rational(tok);
                    } catch (const std::invalid_argument& e) {
                        throw err(e.what());
                    }
                    saw_p = true;
                }
            }
            if (!saw_p) throw err("'prob' needs the form: prob <from> | <to> : <a/b>");
            if (p <= 0 || p > 1)
                throw err("probability " + rat_to_string(p) + " outside (0, 1]");
            m.entries.push_back(make_entry(canon(std::move(from)), canon(std::move(to)), p));
        } else {
            throw err("unknown directive '" + kw + "'");
        }
    }
    lineno += 1;  // end-of-file diagnostics point past the last line
    if (!saw_dtmc) throw err("missing 'dtmc' header");
    if (!saw_vars) throw err("missing 'vars' line");
    if (!saw_init) throw err("missing 'init' line");
    if (mf.bad.empty()) throw err("at least one 'bad' cube is required");
    if (auto overlap = check_entry_disjointness(m))
        throw model_error(name + ": probability entries " + std::to_string(overlap->first) +
                          " and " + std::to_string(overlap->second) +
                          " overlap on some state pair");
    return mf;
}

inline model_file load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw model_error(path + ": cannot open");
    return parse_model(in, path);
}

// Canonical text: literals ordered by (variable, positive first), cube and
// clause lists sorted lexicographically, entries by (from, to).
inline std::string serialize_model(const symbolic_dtmc& m, const std::vector<cube>& bad) {
    std::string out = "dtmc\nvars " + std::to_string(m.num_vars) + "\n";
    out += "init " + detail::lits_text(m.init) + "\n";
    auto sorted_bad = bad;
    std::sort(sorted_bad.begin(), sorted_bad.end(), lits_less);
    for (const auto& c : sorted_bad) out += "bad " + detail::lits_text(c) + "\n";
    auto sorted_trans = m.trans;
    std::sort(sorted_trans.begin(), sorted_trans.end(), lits_less);
    for (const auto& c : sorted_trans) {
        out += "trans";
        if (!c.empty()) out += " " + detail::lits_text(c);
        out += "\n";
    }
    auto sorted_entries = m.entries;
    std::sort(sorted_entries.begin(), sorted_entries.end(),
              [](const prob_entry& a, const prob_entry& b) {
                  if (a.from != b.from) return lits_less(a.from, b.from);
                  return lits_less(a.to, b.to);
              });
    for (const auto& e : sorted_entries)
        out += "prob " + detail::lits_text(e.from) + " | " + detail::lits_text(e.to) + " : " +
               rat_to_string(e.p) + "\n";
    return out;
}

inline void write_model(const std::string& path, const symbolic_dtmc& m,
                        const std::vector<cube>& bad) {
    std::ofstream out(path);
    if (!out) throw model_error(path + ": cannot open for writing");
    out << serialize_model(m, bad);
}

}  // namespace probic
