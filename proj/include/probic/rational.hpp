#pragma once

// Exact rational arithmetic for probability computations. All probability math
// in the library is exact; doubles appear only when formatting for display.

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace probic {

using rational = boost::multiprecision::cpp_rational;

// Parses "a/b" or a bare integer "a". Throws std::invalid_argument on malformed
// input or a zero denominator.
inline rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            boost::multiprecision::cpp_int num(text);
            return rational(num);
        }
        boost::multiprecision::cpp_int num(text.substr(0, slash));
        boost::multiprecision::cpp_int den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return rational(num, den);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument("bad rational '" + text + "': " + e.what());
    }
}

// Canonical "a/b" form (denominator 1 still printed as "a/1" so report lines
// stay machine-splittable on '/').
inline std::string rat_to_string(const rational& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

inline double rat_to_double(const rational& r) {
    return r.convert_to<double>();
}

}  // namespace probic
