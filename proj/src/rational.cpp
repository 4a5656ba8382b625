#include "plp/rational.hpp"

#include <cctype>

namespace plp {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
    auto bad = [&]() -> Error { return Error("malformed rational: '" + text + "'"); };

    std::string s = text;
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s = s.substr(1);
    }

    Rational value;
    auto slash = s.find('/');
    auto dot = s.find('.');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash);
        std::string den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) throw bad();
        BigInt d(den);
        if (d == 0) throw Error("rational with zero denominator: '" + text + "'");
        value = Rational(BigInt(num), d);
    } else if (dot != std::string::npos) {
        std::string whole = s.substr(0, dot);
        std::string frac = s.substr(dot + 1);
        if (whole.empty()) whole = "0";
        if (!all_digits(whole) || !all_digits(frac)) throw bad();
        BigInt scale = 1;
        for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
        value = Rational(BigInt(whole) * scale + BigInt(frac), scale);
    } else {
        if (!all_digits(s)) throw bad();
        value = Rational(BigInt(s));
    }
    return neg ? Rational(-value) : value;
}

}  // namespace plp
