#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/miller_rabin.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace inertia {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(what) {}
};

inline Int num(const Rat& q) { return boost::multiprecision::numerator(q); }
inline Int den(const Rat& q) { return boost::multiprecision::denominator(q); }

inline bool is_integer(const Rat& q) { return den(q) == 1; }

// floor modulus: result in [0, m) for m > 0
inline Int mod_floor(const Int& a, const Int& m) {
    Int r = a % m;
    if (r < 0) r += m;
    return r;
}

inline Int pow_int(const Int& base, unsigned e) {
    Int r = 1;
    for (unsigned i = 0; i < e; ++i) r *= base;
    return r;
}

// extended gcd: returns g, sets x,y with a*x + b*y = g
inline Int ext_gcd(const Int& a, const Int& b, Int& x, Int& y) {
    if (b == 0) {
        x = (a < 0) ? -1 : 1;
        y = 0;
        return a < 0 ? Int(-a) : a;
    }
    Int x1, y1;
    Int g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

inline Int mod_inverse(const Int& a, const Int& m) {
    Int x, y;
    Int g = ext_gcd(mod_floor(a, m), m, x, y);
    if (g != 1) throw Error("mod_inverse: arguments not coprime");
    return mod_floor(x, m);
}

inline bool is_prime(const Int& p) {
    if (p < 2) return false;
    for (Int d = 2; d * d <= p && d < 1000; ++d)
        if (p % d == 0) return p == d;
    if (p < 1000000) return true;
    return boost::multiprecision::miller_rabin_test(p, 32);
}

// p-adic valuation of a nonzero integer
inline unsigned valuation(Int a, const Int& p) {
    if (a == 0) throw Error("valuation of zero");
    if (a < 0) a = -a;
    unsigned v = 0;
    while (a % p == 0) { a /= p; ++v; }
    return v;
}

// splits n = p^v * u with p∤u; returns v
inline unsigned split_p_part(Int& n, const Int& p) {
    unsigned v = 0;
    while (n != 0 && n % p == 0) { n /= p; ++v; }
    return v;
}

// True iff |n| is a power of p (p^0 = 1 allowed).
inline bool is_p_power(Int n, const Int& p) {
    if (n < 0) n = -n;
    if (n == 0) return false;
    while (n % p == 0) n /= p;
    return n == 1;
}

// p-adic fractional part: the canonical additive map Q -> Z(p^inf) ⊂ Q/Z.
// For r = a/(p^s d) in lowest terms (p∤d) the value is a*d^{-1} (mod p^s) / p^s.
inline Rat frac_p(const Rat& r, const Int& p) {
    if (r == 0) return Rat(0);
    Int a = num(r), b = den(r);
    Int d = b;
    unsigned s = split_p_part(d, p);
    if (s == 0) return Rat(0);
    Int ps = pow_int(p, s);
    Int x = mod_floor(a * mod_inverse(d, ps), ps);
    return Rat(x, ps);
}

// residue of a rational with denominator coprime to m, in [0, m)
inline Int residue_mod(const Rat& r, const Int& m) {
    Int b = den(r);
    if (boost::multiprecision::gcd(b, m) != 1)
        throw Error("residue_mod: denominator not invertible");
    return mod_floor(num(r) * mod_inverse(b, m), m);
}

inline Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(Int(s));
        Int n(s.substr(0, slash)), d(s.substr(slash + 1));
        if (d == 0) throw ParseError("zero denominator: " + s);
        return Rat(n, d);
    } catch (const std::exception&) {
        throw ParseError("malformed rational: " + s);
    }
}

inline std::string rat_str(const Rat& q) {
    if (is_integer(q)) return num(q).str();
    return num(q).str() + "/" + den(q).str();
}

// CRT for pairwise coprime moduli; least non-negative representative.
inline Int crt_combine(const std::vector<std::pair<Int, Int>>& congruences) {
    Int m = 1, x = 0;
    for (const auto& [r, mi] : congruences) {
        // solve x + m*t ≡ r (mod mi)
        Int t = mod_floor((r - x) * mod_inverse(m, mi), mi);
        x += m * t;
        m *= mi;
    }
    return mod_floor(x, m);
}

// A natural number or infinity; used for ranks, exponents, indices.
struct NatOrInf {
    bool infinite = false;
    Int value = 0;

    static NatOrInf inf() { return {true, 0}; }
    static NatOrInf of(Int v) { return {false, std::move(v)}; }
    bool is_finite() const { return !infinite; }
    bool operator==(const NatOrInf& o) const {
        return infinite == o.infinite && (infinite || value == o.value);
    }
    std::string str() const { return infinite ? "INFINITE" : value.str(); }
};

// Finite or cofinite set of primes.
struct PrimeSet {
    bool cofinite = false;          // if true, the set is (all primes) \ primes
    std::vector<Int> primes;        // sorted, unique

    bool contains(const Int& p) const {
        bool in_list = std::find(primes.begin(), primes.end(), p) != primes.end();
        return cofinite ? !in_list : in_list;
    }
    std::string str() const {
        std::string s = cofinite ? "all primes except {" : "{";
        for (size_t i = 0; i < primes.size(); ++i)
            s += (i ? "," : "") + primes[i].str();
        return s + "}";
    }
};

}  // namespace inertia
