#pragma once

#include "inertia/rational.hpp"

#include "json.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace inertia {

using Json = nlohmann::json;

// One direct summand of a group descriptor.
//
//   cyclic        Z(p^k)                  single copy
//   cyclic_omega  countable sum of Z(p^k) copies indexed 0,1,2,...
//   pruefer       Z(p^inf) = Q_p/Z        coordinates are rationals mod 1
//   free_z        Z
//   free_z_omega  countable sum of Z
//   localized_q   Z[1/p], rationals with p-power denominator
enum class AtomKind { cyclic, cyclic_omega, pruefer, free_z, free_z_omega, localized_q };

struct Atom {
    AtomKind kind;
    Int p = 0;       // prime, when applicable
    unsigned k = 0;  // exponent, for cyclic kinds

    bool is_torsion() const {
        return kind == AtomKind::cyclic || kind == AtomKind::cyclic_omega ||
               kind == AtomKind::pruefer;
    }
    bool is_torsion_free() const { return !is_torsion(); }
    bool is_omega() const {
        return kind == AtomKind::cyclic_omega || kind == AtomKind::free_z_omega;
    }
    bool is_finite() const { return kind == AtomKind::cyclic; }
    bool is_bounded() const {
        return kind == AtomKind::cyclic || kind == AtomKind::cyclic_omega;
    }
    bool is_divisible() const { return kind == AtomKind::pruefer; }
    bool has_prime() const {
        return kind != AtomKind::free_z && kind != AtomKind::free_z_omega;
    }
    // order of one cyclic copy; 0 for infinite-order coordinates
    Int copy_order() const {
        if (kind == AtomKind::cyclic || kind == AtomKind::cyclic_omega) return pow_int(p, k);
        return 0;
    }
    bool operator==(const Atom& o) const {
        return kind == o.kind && p == o.p && k == o.k;
    }
};

inline std::string atom_kind_name(AtomKind k) {
    switch (k) {
        case AtomKind::cyclic: return "cyclic";
        case AtomKind::cyclic_omega: return "cyclicOmega";
        case AtomKind::pruefer: return "pruefer";
        case AtomKind::free_z: return "freeZ";
        case AtomKind::free_z_omega: return "freeZOmega";
        case AtomKind::localized_q: return "localizedQ";
    }
    throw Error("unreachable");
}

// A formal finite direct sum of atoms; the empty list is the zero group.
// Values are immutable after construction and safe to share across threads.
struct GroupDescriptor {
    std::vector<Atom> atoms;

    size_t size() const { return atoms.size(); }
    const Atom& at(size_t i) const {
        if (i >= atoms.size()) throw Error("atom index out of range");
        return atoms[i];
    }
    bool is_zero() const { return atoms.empty(); }
    bool is_periodic() const {
        for (const auto& a : atoms)
            if (!a.is_torsion()) return false;
        return true;
    }
    bool is_finite() const {
        for (const auto& a : atoms)
            if (!a.is_finite()) return false;
        return true;
    }
    bool is_p_group(const Int& p) const {
        for (const auto& a : atoms)
            if (!a.is_torsion() || a.p != p) return false;
        return true;
    }
    bool is_bounded() const {
        for (const auto& a : atoms)
            if (!a.is_bounded()) return false;
        return true;
    }
    NatOrInf torsion_free_rank() const {
        Int r = 0;
        for (const auto& a : atoms) {
            if (a.kind == AtomKind::free_z_omega) return NatOrInf::inf();
            if (a.kind == AtomKind::free_z || a.kind == AtomKind::localized_q) ++r;
        }
        return NatOrInf::of(r);
    }
    std::set<Int, std::less<Int>> torsion_primes() const {
        std::set<Int> ps;
        for (const auto& a : atoms)
            if (a.is_torsion()) ps.insert(a.p);
        return ps;
    }
    bool operator==(const GroupDescriptor& o) const { return atoms == o.atoms; }
};

inline Json atom_to_json(const Atom& a) {
    Json j;
    j["kind"] = atom_kind_name(a.kind);
    if (a.has_prime()) j["p"] = a.p.str();
    if (a.kind == AtomKind::cyclic || a.kind == AtomKind::cyclic_omega) j["k"] = a.k;
    return j;
}

inline Json group_to_json(const GroupDescriptor& g) {
    Json atoms = Json::array();
    for (const auto& a : g.atoms) atoms.push_back(atom_to_json(a));
    return Json{{"atoms", atoms}};
}

inline Int json_int(const Json& j, const std::string& what) {
    try {
        if (j.is_string()) return Int(j.get<std::string>());
        if (j.is_number_integer()) return Int(j.get<long long>());
    } catch (const std::exception&) {}
    throw ParseError("expected integer for " + what);
}

inline Atom atom_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ParseError("atom must be an object with a \"kind\" field");
    std::string kind = j["kind"].get<std::string>();
    Atom a;
    if (kind == "cyclic") a.kind = AtomKind::cyclic;
    else if (kind == "cyclicOmega") a.kind = AtomKind::cyclic_omega;
    else if (kind == "pruefer") a.kind = AtomKind::pruefer;
    else if (kind == "freeZ") a.kind = AtomKind::free_z;
    else if (kind == "freeZOmega") a.kind = AtomKind::free_z_omega;
    else if (kind == "localizedQ") a.kind = AtomKind::localized_q;
    else throw ParseError("unknown atom kind: " + kind);
    if (a.has_prime()) {
        if (!j.contains("p")) throw ParseError("atom kind " + kind + " requires \"p\"");
        a.p = json_int(j["p"], "p");
        if (!is_prime(a.p)) throw ParseError("non-prime p: " + a.p.str());
    }
    if (a.kind == AtomKind::cyclic || a.kind == AtomKind::cyclic_omega) {
        if (!j.contains("k")) throw ParseError("atom kind " + kind + " requires \"k\"");
        Int k = json_int(j["k"], "k");
        if (k < 1) throw ParseError("k must be >= 1, got " + k.str());
        if (k > 64) throw ParseError("k out of supported range");
        a.k = static_cast<unsigned>(k);
    }
    return a;
}

inline GroupDescriptor group_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array())
        throw ParseError("group document must be {\"atoms\": [...]}");
    GroupDescriptor g;
    for (const auto& aj : j["atoms"]) g.atoms.push_back(atom_from_json(aj));
    return g;
}

inline GroupDescriptor parse_group(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("group document: ") + e.what());
    }
    return group_from_json(j);
}

// Convenience constructors.
inline Atom cyclic(Int p, unsigned k) { return Atom{AtomKind::cyclic, std::move(p), k}; }
inline Atom cyclic_omega(Int p, unsigned k) { return Atom{AtomKind::cyclic_omega, std::move(p), k}; }
inline Atom pruefer(Int p) { return Atom{AtomKind::pruefer, std::move(p), 0}; }
inline Atom free_z() { return Atom{AtomKind::free_z, 0, 0}; }
inline Atom free_z_omega() { return Atom{AtomKind::free_z_omega, 0, 0}; }
inline Atom localized_q(Int p) { return Atom{AtomKind::localized_q, std::move(p), 0}; }

inline GroupDescriptor group_of(std::vector<Atom> atoms) { return GroupDescriptor{std::move(atoms)}; }

// Structural invariants of a descriptor. All fields are computed exactly
// from the finite atom list.
struct StructuralReport {
    NatOrInf r0;
    std::map<Int, NatOrInf> exponent_per_p;  // exp of the p-component
    std::map<Int, NatOrInf> eexp_per_p;      // essential exponent of the p-component
    GroupDescriptor torsion;
    GroupDescriptor divisible;
    std::map<Int, GroupDescriptor> primary;
    std::set<Int> critical_primes;
    PrimeSet pi_star;
};

// Is the quotient A/A_p p-divisible? In this atom model that fails exactly
// when a freeZ/freeZOmega atom or a localizedQ(q) atom with q != p is present.
inline bool quotient_by_primary_is_p_divisible(const GroupDescriptor& g, const Int& p) {
    for (const auto& a : g.atoms) {
        if (a.kind == AtomKind::free_z || a.kind == AtomKind::free_z_omega) return false;
        if (a.kind == AtomKind::localized_q && a.p != p) return false;
    }
    return true;
}

inline StructuralReport structural_report(const GroupDescriptor& g) {
    StructuralReport r;
    r.r0 = g.torsion_free_rank();
    for (const auto& a : g.atoms) {
        if (a.is_torsion()) r.torsion.atoms.push_back(a);
        if (a.is_divisible()) r.divisible.atoms.push_back(a);
        if (a.is_torsion()) r.primary[a.p].atoms.push_back(a);
    }
    for (const auto& [p, comp] : r.primary) {
        bool unbounded = false;
        unsigned m = 0, e = 0;
        bool has_pruefer = false, has_omega = false;
        for (const auto& a : comp.atoms) {
            if (a.kind == AtomKind::pruefer) { unbounded = true; has_pruefer = true; }
            if (a.kind == AtomKind::cyclic) m = std::max(m, a.k);
            if (a.kind == AtomKind::cyclic_omega) {
                has_omega = true;
                m = std::max(m, a.k);
                e = std::max(e, a.k);
            }
        }
        r.exponent_per_p[p] = unbounded ? NatOrInf::inf() : NatOrInf::of(m);
        r.eexp_per_p[p] = unbounded ? NatOrInf::inf() : NatOrInf::of(e);
        // critical: nonzero divisible part of finite rank, quotient infinite bounded
        if (has_pruefer && has_omega) r.critical_primes.insert(p);
    }
    // pi_star: primes p with A/A_p p-divisible and (A_p finite, or r0 finite
    // and A_p bounded). The set can be cofinite for periodic descriptors, so
    // first decide the generic prime (one not occurring in the descriptor).
    bool generic_ok = true;
    for (const auto& a : g.atoms)
        if (a.kind == AtomKind::free_z || a.kind == AtomKind::free_z_omega ||
            a.kind == AtomKind::localized_q)
            generic_ok = false;  // A/A_p fails p-divisibility for generic p
    // for generic p, A_p = 0 which is finite, so membership = divisibility
    std::set<Int> mentioned;
    for (const auto& a : g.atoms)
        if (a.has_prime()) mentioned.insert(a.p);
    r.pi_star.cofinite = generic_ok;
    for (const Int& p : mentioned) {
        bool div = quotient_by_primary_is_p_divisible(g, p);
        bool member = false;
        if (div) {
            auto it = r.primary.find(p);
            if (it == r.primary.end()) {
                member = true;  // A_p = 0
            } else {
                bool finite = it->second.is_finite();
                bool bounded = it->second.is_bounded();
                member = finite || (r.r0.is_finite() && bounded);
            }
        }
        if (r.pi_star.cofinite != member) r.pi_star.primes.push_back(p);
    }
    return r;
}

inline Json nat_or_inf_json(const NatOrInf& n) {
    if (n.infinite) return Json("INFINITE");
    return Json(n.value.str());
}

inline Json prime_set_json(const PrimeSet& s) {
    Json lst = Json::array();
    for (const auto& p : s.primes) lst.push_back(p.str());
    return Json{{"cofinite", s.cofinite}, {"primes", lst}};
}

inline Json structural_report_json(const StructuralReport& r) {
    Json j;
    j["r0"] = nat_or_inf_json(r.r0);
    Json expj = Json::object(), eexpj = Json::object(), prim = Json::object();
    for (const auto& [p, v] : r.exponent_per_p) expj[p.str()] = nat_or_inf_json(v);
    for (const auto& [p, v] : r.eexp_per_p) eexpj[p.str()] = nat_or_inf_json(v);
    for (const auto& [p, g] : r.primary) prim[p.str()] = group_to_json(g);
    j["exponent_per_p"] = expj;
    j["eexp_per_p"] = eexpj;
    j["torsion"] = group_to_json(r.torsion);
    j["divisible"] = group_to_json(r.divisible);
    j["primary"] = prim;
    Json crit = Json::array();
    for (const auto& p : r.critical_primes) crit.push_back(p.str());
    j["critical_primes"] = crit;
    j["pi_star"] = prime_set_json(r.pi_star);
    return j;
}

}  // namespace inertia
