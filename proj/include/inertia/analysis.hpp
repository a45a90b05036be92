#pragma once

#include "inertia/normal_form.hpp"

namespace inertia {

// ---- restriction and induced quotient actions ----

struct SubActionMap {
    GroupDescriptor sub;                 // descriptor of the part
    std::vector<size_t> atom_of;         // sub atom index -> ambient atom index
    std::map<size_t, size_t> index_of;   // ambient atom index -> sub atom index
};

inline SubActionMap atom_subset(const GroupDescriptor& g, const std::set<size_t>& keep) {
    SubActionMap m;
    for (size_t i = 0; i < g.size(); ++i) {
        if (!keep.count(i)) continue;
        m.index_of[i] = m.sub.atoms.size();
        m.atom_of.push_back(i);
        m.sub.atoms.push_back(g.at(i));
    }
    return m;
}

// gamma restricted to an invariant collection of atoms (torsion part,
// p-component, divisible part). Entries leaving the part must not exist.
inline NormalForm restrict_to(const NormalForm& nf, const SubActionMap& m) {
    NormalForm out = identity_form(m.sub);
    for (const auto& [i, v] : nf.diag)
        if (m.index_of.count(i)) out.diag[m.index_of.at(i)] = v;
    std::vector<HomEntry> es;
    for (const auto& e : nf.entries) {
        bool src_in = m.index_of.count(e.src.atom), dst_in = m.index_of.count(e.dst.atom);
        if (!src_in) continue;
        if (!dst_in) throw Error("restrict_to: the part is not invariant");
        es.push_back(HomEntry{{m.index_of.at(e.src.atom), e.src.copy},
                              {m.index_of.at(e.dst.atom), e.dst.copy},
                              e.lambda});
    }
    out.entries = canonicalize_entries(m.sub, std::move(es));
    return out;
}

// Induced action on the quotient by an invariant collection of atoms:
// entries into the killed part vanish, entries out of it see coordinate 0.
inline NormalForm induced_on_quotient(const NormalForm& nf, const SubActionMap& kept) {
    NormalForm out = identity_form(kept.sub);
    for (const auto& [i, v] : nf.diag)
        if (kept.index_of.count(i)) out.diag[kept.index_of.at(i)] = v;
    std::vector<HomEntry> es;
    for (const auto& e : nf.entries) {
        if (!kept.index_of.count(e.src.atom) || !kept.index_of.count(e.dst.atom)) continue;
        es.push_back(HomEntry{{kept.index_of.at(e.src.atom), e.src.copy},
                              {kept.index_of.at(e.dst.atom), e.dst.copy},
                              e.lambda});
    }
    out.entries = canonicalize_entries(kept.sub, std::move(es));
    return out;
}

inline std::set<size_t> torsion_atoms(const GroupDescriptor& g) {
    std::set<size_t> s;
    for (size_t i = 0; i < g.size(); ++i)
        if (g.at(i).is_torsion()) s.insert(i);
    return s;
}
inline std::set<size_t> torsion_free_atoms(const GroupDescriptor& g) {
    std::set<size_t> s;
    for (size_t i = 0; i < g.size(); ++i)
        if (g.at(i).is_torsion_free()) s.insert(i);
    return s;
}
inline std::set<size_t> primary_atoms(const GroupDescriptor& g, const Int& p) {
    std::set<size_t> s;
    for (size_t i = 0; i < g.size(); ++i)
        if (g.at(i).is_torsion() && g.at(i).p == p) s.insert(i);
    return s;
}
inline std::set<size_t> divisible_atoms(const GroupDescriptor& g) {
    std::set<size_t> s;
    for (size_t i = 0; i < g.size(); ++i)
        if (g.at(i).is_divisible()) s.insert(i);
    return s;
}

// ---- stability group <-> Hom(A/X, X) ----

inline std::set<size_t> tag_atoms(const GroupDescriptor& g, const StabTag& t) {
    std::set<size_t> s;
    for (size_t i = 0; i < g.size(); ++i)
        if (t.covers(g.at(i))) s.insert(i);
    return s;
}

// sigma must stabilize 0 <= X <= A: identity action everywhere except
// entries from the complement into X. Returns the corresponding hom data.
inline HomData stab_to_hom(const NormalForm& sigma, const StabTag& x) {
    for (const auto& [i, v] : sigma.diag)
        if (v != 1) throw Error("stab_to_hom: nontrivial tail multiplier");
    HomData h;
    h.stabilizes = x;
    for (const auto& e : sigma.entries) {
        const Atom& src = sigma.group.at(e.src.atom);
        const Atom& dst = sigma.group.at(e.dst.atom);
        if (x.covers(src)) throw Error("stab_to_hom: sigma moves the stabilized subgroup");
        if (!x.covers(dst)) throw Error("stab_to_hom: image leaves the stabilized subgroup");
        h.entries.push_back(e);
    }
    return h;
}

inline HomData stab_to_hom(const ExprPtr& sigma, const GroupDescriptor& g, const StabTag& x) {
    return stab_to_hom(normalize(sigma, g), x);
}

inline ExprPtr hom_to_stab(const HomData& h) { return one_plus_hom(h); }

inline HomData hom_add(const GroupDescriptor& g, const HomData& a, const HomData& b) {
    if (!(a.stabilizes == b.stabilizes)) throw Error("hom_add: different stability tags");
    HomData out;
    out.stabilizes = a.stabilizes;
    std::vector<HomEntry> es = a.entries;
    es.insert(es.end(), b.entries.begin(), b.entries.end());
    out.entries = canonicalize_entries(g, std::move(es));
    return out;
}

// ---- finitary detection ----

struct FinitaryReport {
    enum Status { yes, no, unknown } status = unknown;
    // for yes: generators of a finite subgroup containing the image of gamma-1
    std::vector<Element> image_bound;
    // for no: human-readable infinite direction
    std::string infinite_direction;

    bool is_finitary() const { return status == yes; }
};

// Does one entry have finite image over its full (untruncated) source domain?
inline bool entry_image_finite(const Atom& src, const Atom& dst) {
    switch (src.kind) {
        case AtomKind::cyclic:
        case AtomKind::cyclic_omega:
            return true;  // finite source slot
        case AtomKind::free_z:
        case AtomKind::free_z_omega:
            // lambda*Z is finite in bounded targets and in Pruefer targets
            return dst.is_bounded() || dst.kind == AtomKind::pruefer;
        case AtomKind::localized_q:
            if (dst.is_bounded()) return true;
            if (dst.kind == AtomKind::pruefer) return dst.p != src.p;
            return false;
        case AtomKind::pruefer:
            return false;  // only Pruefer(p)->Pruefer(p) entries exist, infinite image
    }
    return false;
}

// An element generating (an upper bound for) the image of one entry.
inline Element entry_image_generator(const GroupDescriptor& g, const HomEntry& e) {
    const Atom& dst = g.at(e.dst.atom);
    const Atom& src = g.at(e.src.atom);
    Rat gen;
    if (dst.is_bounded()) {
        gen = Rat(1);  // image is inside the finite slot; 1 generates the slot
    } else {
        // Pruefer target with q-bounded denominators: <frac(lambda)> bounds it
        Rat t = frac_p(e.lambda, dst.p);
        if (src.kind == AtomKind::cyclic || src.kind == AtomKind::cyclic_omega ||
            src.kind == AtomKind::free_z || src.kind == AtomKind::free_z_omega ||
            (src.kind == AtomKind::localized_q && src.p != dst.p)) {
            gen = t == 0 ? Rat(0) : Rat(1, den(t));
        } else {
            throw Error("entry has infinite image");
        }
    }
    return make_element(g, {{e.dst, gen}});
}

inline FinitaryReport is_finitary(const NormalForm& nf) {
    FinitaryReport r;
    for (const auto& [i, v] : nf.diag) {
        const Atom& a = nf.group.at(i);
        if (a.kind == AtomKind::cyclic_omega && residue_mod(v, a.copy_order()) != 1) {
            r.status = FinitaryReport::no;
            r.infinite_direction =
                "tail multiplier " + rat_str(v) + " differs from 1 on atom " + std::to_string(i);
            return r;
        }
        if (a.kind == AtomKind::free_z_omega && v != 1) {
            r.status = FinitaryReport::no;
            r.infinite_direction =
                "tail multiplier " + rat_str(v) + " differs from 1 on atom " + std::to_string(i);
            return r;
        }
    }
    for (const auto& e : nf.entries) {
        const Atom& src = nf.group.at(e.src.atom);
        const Atom& dst = nf.group.at(e.dst.atom);
        if (!entry_image_finite(src, dst)) {
            r.status = FinitaryReport::no;
            r.infinite_direction = "component " + e.src.str() + " -> " + e.dst.str() +
                                   " (lambda " + rat_str(e.lambda) + ") has infinite image";
            return r;
        }
    }
    r.status = FinitaryReport::yes;
    for (const auto& e : nf.entries) {
        Element g = entry_image_generator(nf.group, e);
        if (!g.is_zero()) r.image_bound.push_back(g);
    }
    return r;
}

inline FinitaryReport is_finitary(const ExprPtr& e, const GroupDescriptor& g) {
    try {
        return is_finitary(normalize(e, g));
    } catch (const Error&) {
        FinitaryReport r;
        r.status = FinitaryReport::unknown;
        return r;
    }
}

// ---- multiplication certificates ----

enum class Region { whole, mod_torsion, on_divisible, on_primary, finite_index };

struct MultCert {
    Rat multiplier{0};
    // for finite-index certificates: describes the avoided finite directions
    std::vector<Slot> avoided_slots;
    Int modulus = 1;  // gamma = multiplier on (modulus * A) ∩ (avoided slots = 0)
};

namespace detail {

// Is some finite-index restriction of the source enough to kill this entry?
inline bool entry_killable(const Atom& src, const Atom& dst, Int& modulus) {
    switch (src.kind) {
        case AtomKind::cyclic:
        case AtomKind::cyclic_omega:
            return true;  // avoid the finite slot itself
        case AtomKind::free_z:
        case AtomKind::free_z_omega:
        case AtomKind::localized_q:
            if (dst.is_bounded()) {
                modulus = boost::multiprecision::lcm(modulus, dst.copy_order());
                return true;
            }
            if (dst.kind == AtomKind::pruefer && !(src.kind == AtomKind::localized_q && src.p == dst.p)) {
                // restrict to q^s * (source): the q-denominator bound dies
                return true;  // modulus refined by caller using the entry coefficient
            }
            return false;
        case AtomKind::pruefer:
            return false;  // every finite-index subgroup contains the whole atom
    }
    return false;
}

struct ResidueConstraint {
    Int p;        // the prime of the modulus
    Int modulus;  // p^k
    Int value;    // residue in [0, modulus)
};

struct ScalarConstraints {
    std::vector<Rat> exact;  // must all be equal
    std::vector<ResidueConstraint> residues;

    void add_exact(const Rat& r) { exact.push_back(r); }
    void add_residue(const Int& p, const Int& m, const Int& t) { residues.push_back({p, m, t}); }
};

inline std::optional<Rat> solve_scalar(const ScalarConstraints& c) {
    std::optional<Rat> r;
    for (const auto& x : c.exact) {
        if (r && *r != x) return std::nullopt;
        r = x;
    }
    if (r) {
        for (const auto& rc : c.residues) {
            if (boost::multiprecision::gcd(den(*r), rc.p) != 1) return std::nullopt;
            if (residue_mod(*r, rc.modulus) != rc.value) return std::nullopt;
        }
        return r;
    }
    if (c.residues.empty()) return Rat(1);
    std::map<Int, ResidueConstraint> strongest;
    for (const auto& rc : c.residues) {
        auto it = strongest.find(rc.p);
        if (it == strongest.end() || it->second.modulus < rc.modulus) strongest[rc.p] = rc;
    }
    for (const auto& rc : c.residues)
        if (mod_floor(strongest[rc.p].value, rc.modulus) != rc.value) return std::nullopt;
    std::vector<std::pair<Int, Int>> crt;
    for (auto& [p, rc] : strongest) crt.push_back({rc.value, rc.modulus});
    return Rat(crt_combine(crt));
}

}  // namespace detail

// Entries incident to an atom, split by role.
struct AtomEntryScan {
    std::vector<const HomEntry*> self;     // same-slot entries on this atom
    std::vector<const HomEntry*> cross;    // anything else touching the atom
};

inline AtomEntryScan scan_atom_entries(const NormalForm& nf, size_t atom) {
    AtomEntryScan s;
    for (const auto& e : nf.entries) {
        bool src_here = e.src.atom == atom, dst_here = e.dst.atom == atom;
        if (!src_here && !dst_here) continue;
        if (src_here && dst_here && e.src == e.dst) s.self.push_back(&e);
        else s.cross.push_back(&e);
    }
    return s;
}

// The atom's action as a single multiplier, when it is one.
inline std::optional<Rat> atom_multiplier(const NormalForm& nf, size_t atom) {
    const Atom& a = nf.group.at(atom);
    AtomEntryScan s = scan_atom_entries(nf, atom);
    if (!s.cross.empty()) return std::nullopt;
    if (a.is_omega()) {
        if (!s.self.empty()) return std::nullopt;  // copy-specific deviation
        return nf_diag_at(nf, atom);
    }
    Rat lam(0);
    for (auto* e : s.self) lam += e->lambda;
    return Rat(1) + lam;
}

// do r1 and r2 act identically on this atom?
inline bool same_action_on(const Atom& a, const Rat& r1, const Rat& r2) {
    switch (a.kind) {
        case AtomKind::cyclic:
        case AtomKind::cyclic_omega: {
            Int m = a.copy_order();
            if (boost::multiprecision::gcd(den(r1), a.p) != 1 ||
                boost::multiprecision::gcd(den(r2), a.p) != 1)
                return false;
            return residue_mod(r1, m) == residue_mod(r2, m);
        }
        default:
            return r1 == r2;
    }
}

// The whole form as a single multiplication (every atom, exactly).
inline std::optional<Rat> exact_scalar(const NormalForm& nf) {
    detail::ScalarConstraints cs;
    for (size_t i = 0; i < nf.group.size(); ++i) {
        auto m = atom_multiplier(nf, i);
        if (!m) return std::nullopt;
        const Atom& a = nf.group.at(i);
        if (a.is_bounded()) {
            if (boost::multiprecision::gcd(den(*m), a.p) != 1) return std::nullopt;
            cs.add_residue(a.p, a.copy_order(), residue_mod(*m, a.copy_order()));
        } else {
            cs.add_exact(*m);
        }
    }
    return detail::solve_scalar(cs);
}

// gamma = r on a finite-index subgroup, symbolically decided on the normal
// form. The certificate names the finite directions that must be avoided and
// the modulus n with gamma = r on n*A minus those directions.
inline std::optional<MultCert> finite_index_multiplier(const NormalForm& nf) {
    detail::ScalarConstraints cs;
    MultCert cert;
    const GroupDescriptor& g = nf.group;
    for (size_t i = 0; i < g.size(); ++i) {
        const Atom& a = g.at(i);
        switch (a.kind) {
            case AtomKind::cyclic:
                // a finite atom can be avoided entirely
                cert.avoided_slots.push_back({i, 0});
                continue;
            case AtomKind::cyclic_omega: {
                Int m = a.copy_order();
                cs.add_residue(a.p, m, residue_mod(nf_diag_at(nf, i), m));
                continue;
            }
            case AtomKind::free_z_omega:
                cs.add_exact(nf_diag_at(nf, i));
                continue;
            default: {
                // pruefer / free_z / localized_q: the multiplier on the atom
                // must hold exactly on every finite-index subgroup
                Rat lam(0);
                for (auto* e : scan_atom_entries(nf, i).self) lam += e->lambda;
                cs.add_exact(Rat(1) + lam);
            }
        }
    }
    for (const auto& e : nf.entries) {
        if (e.src == e.dst) {
            const Atom& a = g.at(e.src.atom);
            if (a.is_omega()) cert.avoided_slots.push_back(e.src);  // copy deviation
            continue;
        }
        const Atom& src = g.at(e.src.atom);
        const Atom& dst = g.at(e.dst.atom);
        if (src.kind == AtomKind::cyclic || src.kind == AtomKind::cyclic_omega) {
            cert.avoided_slots.push_back(e.src);
            continue;
        }
        Int modulus = cert.modulus;
        if (!detail::entry_killable(src, dst, modulus)) return std::nullopt;
        cert.modulus = modulus;
        if (dst.kind == AtomKind::pruefer) {
            // multiply by the q-part of the coefficient's denominator
            Rat t = frac_p(e.lambda, dst.p);
            if (t != 0) cert.modulus = boost::multiprecision::lcm(cert.modulus, den(t));
        }
    }
    auto r = detail::solve_scalar(cs);
    if (!r) return std::nullopt;
    cert.multiplier = *r;
    std::sort(cert.avoided_slots.begin(), cert.avoided_slots.end());
    cert.avoided_slots.erase(std::unique(cert.avoided_slots.begin(), cert.avoided_slots.end()),
                             cert.avoided_slots.end());
    return cert;
}

inline std::optional<MultCert> multiplication_certificate(const NormalForm& nf, Region region,
                                                          const Int& p = 0) {
    const GroupDescriptor& g = nf.group;
    auto from_scalar = [](std::optional<Rat> r) -> std::optional<MultCert> {
        if (!r) return std::nullopt;
        MultCert c;
        c.multiplier = *r;
        return c;
    };
    switch (region) {
        case Region::whole:
            return from_scalar(exact_scalar(nf));
        case Region::mod_torsion:
            return from_scalar(
                exact_scalar(induced_on_quotient(nf, atom_subset(g, torsion_free_atoms(g)))));
        case Region::on_divisible:
            return from_scalar(exact_scalar(restrict_to(nf, atom_subset(g, divisible_atoms(g)))));
        case Region::on_primary:
            return from_scalar(exact_scalar(restrict_to(nf, atom_subset(g, primary_atoms(g, p)))));
        case Region::finite_index:
            return finite_index_multiplier(nf);
    }
    return std::nullopt;
}

}  // namespace inertia
