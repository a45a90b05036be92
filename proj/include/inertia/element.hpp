#pragma once

#include "inertia/group.hpp"

#include <map>

namespace inertia {

// A coordinate slot: (atom index, copy index). Copy index is 0 except on
// omega atoms.
struct Slot {
    size_t atom = 0;
    size_t copy = 0;
    auto operator<=>(const Slot&) const = default;
    std::string str() const {
        return "(" + std::to_string(atom) + "," + std::to_string(copy) + ")";
    }
};

// Canonical reduction of a rational into the coordinate domain of an atom.
//
//   cyclic/cyclicOmega  residue in [0, p^k); denominator inverted mod p^k
//   pruefer             p-adic fractional part, a/p^j in [0,1)
//   freeZ/freeZOmega    must be an integer
//   localizedQ          must have a p-power denominator
inline Rat reduce_into(const Atom& a, const Rat& v) {
    switch (a.kind) {
        case AtomKind::cyclic:
        case AtomKind::cyclic_omega:
            return Rat(residue_mod(v, a.copy_order()));
        case AtomKind::pruefer:
            return frac_p(v, a.p);
        case AtomKind::free_z:
        case AtomKind::free_z_omega:
            if (!is_integer(v)) throw Error("non-integer coordinate for a free slot");
            return v;
        case AtomKind::localized_q:
            if (!is_p_power(den(v), a.p))
                throw Error("coordinate denominator is not a power of " + a.p.str());
            return v;
    }
    throw Error("unreachable");
}

// Group element with finite support, coordinates in canonical reduced form.
struct Element {
    GroupDescriptor group;
    std::map<Slot, Rat> coords;

    const Rat& coord(const Slot& s) const {
        static const Rat zero(0);
        auto it = coords.find(s);
        return it == coords.end() ? zero : it->second;
    }
    bool is_zero() const { return coords.empty(); }
    bool operator==(const Element& o) const {
        return group == o.group && coords == o.coords;
    }
};

inline void check_slot(const GroupDescriptor& g, const Slot& s) {
    const Atom& a = g.at(s.atom);
    if (!a.is_omega() && s.copy != 0)
        throw Error("copy index must be 0 on non-omega atom " + std::to_string(s.atom));
}

inline Element make_element(const GroupDescriptor& g,
                            const std::vector<std::pair<Slot, Rat>>& entries) {
    Element e{g, {}};
    for (const auto& [s, v] : entries) {
        check_slot(g, s);
        Rat r = reduce_into(g.at(s.atom), e.coord(s) + v);
        if (r == 0) e.coords.erase(s);
        else e.coords[s] = r;
    }
    return e;
}

inline Element zero_element(const GroupDescriptor& g) { return Element{g, {}}; }

inline void require_same_group(const Element& a, const Element& b) {
    if (!(a.group == b.group)) throw Error("elements belong to different descriptors");
}

inline Element add(const Element& a, const Element& b) {
    require_same_group(a, b);
    Element r = a;
    for (const auto& [s, v] : b.coords) {
        Rat sum = reduce_into(a.group.at(s.atom), r.coord(s) + v);
        if (sum == 0) r.coords.erase(s);
        else r.coords[s] = sum;
    }
    return r;
}

inline Element scale(const Int& n, const Element& a) {
    Element r{a.group, {}};
    if (n == 0) return r;
    for (const auto& [s, v] : a.coords) {
        Rat x = reduce_into(a.group.at(s.atom), v * n);
        if (x != 0) r.coords[s] = x;
    }
    return r;
}

inline Element negate(const Element& a) { return scale(-1, a); }

inline Element sub(const Element& a, const Element& b) { return add(a, negate(b)); }

// order of an element: least n >= 1 with n*a = 0, or infinite
inline NatOrInf element_order(const Element& a) {
    Int n = 1;
    for (const auto& [s, v] : a.coords) {
        const Atom& atom = a.group.at(s.atom);
        if (atom.is_torsion_free()) {
            if (v != 0) return NatOrInf::inf();
            continue;
        }
        Int ord;
        if (atom.kind == AtomKind::pruefer) {
            ord = den(v);  // a/p^j has order p^j
        } else {
            Int m = atom.copy_order();
            ord = m / boost::multiprecision::gcd(num(v) % m, m);
        }
        n = boost::multiprecision::lcm(n, ord);
    }
    return NatOrInf::of(n);
}

// standard generator of one slot (for torsion-free and cyclic slots the
// element "1"; for pruefer/localizedQ atoms, 1/p^depth)
inline Element slot_generator(const GroupDescriptor& g, const Slot& s, unsigned depth = 1) {
    const Atom& a = g.at(s.atom);
    Rat v(1);
    if (a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q)
        v = Rat(1, pow_int(a.p, depth));
    return make_element(g, {{s, v}});
}

inline Json element_to_json(const Element& e) {
    Json coords = Json::array();
    for (const auto& [s, v] : e.coords) {
        coords.push_back(Json{{"atom", s.atom}, {"copy", s.copy}, {"value", rat_str(v)}});
    }
    return Json{{"coords", coords}};
}

inline Element element_from_json(const GroupDescriptor& g, const Json& j) {
    if (!j.is_object() || !j.contains("coords") || !j["coords"].is_array())
        throw ParseError("element must be {\"coords\": [...]}");
    std::vector<std::pair<Slot, Rat>> entries;
    for (const auto& c : j["coords"]) {
        if (!c.is_object() || !c.contains("atom") || !c.contains("value"))
            throw ParseError("element coordinate needs \"atom\" and \"value\"");
        Slot s;
        s.atom = static_cast<size_t>(json_int(c["atom"], "atom").convert_to<long long>());
        s.copy = c.contains("copy")
                     ? static_cast<size_t>(json_int(c["copy"], "copy").convert_to<long long>())
                     : 0;
        if (s.atom >= g.size()) throw ParseError("coordinate atom index out of range");
        Rat v = c["value"].is_string() ? parse_rat(c["value"].get<std::string>())
                                       : Rat(json_int(c["value"], "value"));
        entries.emplace_back(s, v);
    }
    return make_element(g, entries);
}

}  // namespace inertia
