#pragma once

#include "inertia/autoexpr.hpp"
#include "inertia/intmat.hpp"
#include "inertia/subgroup.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace inertia {

// Canonical form of a structured endomorphism of a descriptor group:
//
//     gamma(a) = diag * (a + phi(a))
//
// where `diag` is a uniform multiplier per OMEGA atom (the tail action on
// all copies) and `phi` is a finite-window homomorphism given by rational
// coefficients. Actions on single-copy atoms live entirely in `phi` as
// same-slot entries (multiplier 1 + lambda), so representations are unique
// and expression equality is literal equality of normal forms.
struct NormalForm {
    GroupDescriptor group;
    std::map<size_t, Rat> diag;       // omega atom index -> canonical multiplier
    std::vector<HomEntry> entries;    // sorted by (src, dst), canonical lambdas

    bool is_identity() const {
        for (const auto& [a, v] : diag)
            if (v != 1) return false;
        return entries.empty();
    }
    bool operator==(const NormalForm& o) const {
        return group == o.group && diag == o.diag && entries == o.entries;
    }
};

// ---- entry canonicalization ----

// Canonicalize a raw coefficient for a src -> dst entry. Returns the
// canonical lambda (0 means the entry is the zero map and is dropped).
// Throws ValidationError when no homomorphism with this coefficient exists.
inline Rat canonical_entry(const Atom& src, const Atom& dst, const Rat& lambda) {
    if (lambda == 0) return Rat(0);
    auto fail = [&](const std::string& why) -> Rat {
        throw ValidationError("illegal hom component (" + why + ")");
    };
    const bool src_cyc = src.is_bounded();
    const bool dst_cyc = dst.is_bounded();
    switch (dst.kind) {
        case AtomKind::cyclic:
        case AtomKind::cyclic_omega: {
            Int m = dst.copy_order();
            if (boost::multiprecision::gcd(den(lambda), dst.p) != 1)
                return fail("denominator not invertible in target");
            if (src.kind == AtomKind::pruefer)
                return fail("no nonzero map from a divisible torsion atom to a bounded one");
            if (src.kind == AtomKind::localized_q && src.p == dst.p)
                return fail("no nonzero map from Z[1/p] into a bounded p-atom");
            Int t = residue_mod(lambda, m);
            if (src_cyc) {
                // source relation p^k * x = 0 must map to zero
                if (mod_floor(t * src.copy_order(), m) != 0)
                    return fail("source order not annihilated");
            }
            return Rat(t);
        }
        case AtomKind::pruefer: {
            if (src_cyc) {
                Rat t = frac_p(lambda, dst.p);
                if (src.p != dst.p) {
                    if (t != 0) return fail("cross-prime torsion map must vanish");
                    return Rat(0);
                }
                if (den(t) > src.copy_order()) return fail("image order exceeds source order");
                return t;
            }
            if (src.kind == AtomKind::pruefer) {
                if (src.p != dst.p) {
                    if (boost::multiprecision::gcd(den(lambda), dst.p) != 1)
                        return fail("ill-defined map between distinct primes");
                    return Rat(0);  // the only homomorphism is zero
                }
                if (boost::multiprecision::gcd(den(lambda), src.p) != 1)
                    return fail("multiplier is not a p-adic rational");
                return lambda;
            }
            if (src.kind == AtomKind::localized_q) {
                if (src.p == dst.p) return lambda;  // exact rational multiplier
                return frac_p(lambda, dst.p);       // determined by the image of 1
            }
            // free source: determined by the image of 1
            return frac_p(lambda, dst.p);
        }
        case AtomKind::free_z:
        case AtomKind::free_z_omega: {
            if (src.kind == AtomKind::free_z || src.kind == AtomKind::free_z_omega) {
                if (!is_integer(lambda)) return fail("non-integer map between free slots");
                return lambda;
            }
            return fail("no nonzero map into a free slot from this source");
        }
        case AtomKind::localized_q: {
            if (src.kind == AtomKind::free_z || src.kind == AtomKind::free_z_omega ||
                (src.kind == AtomKind::localized_q && src.p == dst.p)) {
                if (!is_p_power(den(lambda), dst.p))
                    return fail("coefficient outside Z[1/p]");
                return lambda;
            }
            return fail("no nonzero map into Z[1/p] from this source");
        }
    }
    throw Error("unreachable");
}

// evaluate one entry on a source coordinate (canonical reduced value)
inline Rat entry_value(const Atom& src, const Atom& dst, const Rat& lambda, const Rat& coord) {
    (void)src;
    return reduce_into(dst, lambda * coord);
}

// ---- normal form construction ----

inline void sort_entries(std::vector<HomEntry>& es) {
    std::sort(es.begin(), es.end(), [](const HomEntry& a, const HomEntry& b) {
        if (!(a.src == b.src)) return a.src < b.src;
        return a.dst < b.dst;
    });
}

// merge duplicates, canonicalize coefficients, drop zero entries
inline std::vector<HomEntry> canonicalize_entries(const GroupDescriptor& g,
                                                  std::vector<HomEntry> es) {
    std::map<std::pair<Slot, Slot>, Rat> acc;
    for (auto& e : es) {
        check_slot(g, e.src);
        check_slot(g, e.dst);
        acc[{e.src, e.dst}] += e.lambda;
    }
    std::vector<HomEntry> out;
    for (auto& [key, lam] : acc) {
        Rat c = canonical_entry(g.at(key.first.atom), g.at(key.second.atom), lam);
        if (c != 0) out.push_back(HomEntry{key.first, key.second, c});
    }
    sort_entries(out);
    return out;
}

inline Rat canonical_diag(const Atom& a, const Rat& v) {
    switch (a.kind) {
        case AtomKind::cyclic_omega:
            return Rat(residue_mod(v, a.copy_order()));
        case AtomKind::free_z_omega:
            if (!is_integer(v)) throw ValidationError("non-integer multiplier on a free sum");
            return v;
        default:
            throw Error("diag only applies to omega atoms");
    }
}

inline NormalForm identity_form(const GroupDescriptor& g) {
    NormalForm nf;
    nf.group = g;
    for (size_t i = 0; i < g.size(); ++i)
        if (g.at(i).is_omega()) nf.diag[i] = Rat(1);
    return nf;
}

inline Rat nf_diag_at(const NormalForm& nf, size_t atom) {
    auto it = nf.diag.find(atom);
    return it == nf.diag.end() ? Rat(1) : it->second;
}

// multiplier seen by slot s under the diag part (1 on non-omega atoms)
inline Rat diag_multiplier(const NormalForm& nf, const Slot& s) {
    const Atom& a = nf.group.at(s.atom);
    if (!a.is_omega()) return Rat(1);
    return nf_diag_at(nf, s.atom);
}

// Uniform multiplication by r, as a normal form. Validates invertibility of
// nothing; callers check. Throws if r cannot act on some atom at all.
inline NormalForm multiplication_form(const GroupDescriptor& g, const Rat& r) {
    NormalForm nf = identity_form(g);
    std::vector<HomEntry> es;
    for (size_t i = 0; i < g.size(); ++i) {
        const Atom& a = g.at(i);
        if (a.is_omega()) {
            nf.diag[i] = canonical_diag(a, r);
        } else {
            es.push_back(HomEntry{{i, 0}, {i, 0}, r - 1});
        }
    }
    nf.entries = canonicalize_entries(g, std::move(es));
    return nf;
}

// ---- composition and inversion ----

inline NormalForm compose(const NormalForm& f, const NormalForm& g) {
    if (!(f.group == g.group)) throw Error("compose: different descriptors");
    NormalForm out;
    out.group = f.group;
    for (size_t i = 0; i < f.group.size(); ++i)
        if (f.group.at(i).is_omega())
            out.diag[i] = canonical_diag(f.group.at(i), nf_diag_at(f, i) * nf_diag_at(g, i));

    // psi := mu_f^{-1} . phi_g . mu_f   (entry scaled by mu[src]/mu[dst])
    std::vector<HomEntry> psi;
    for (const auto& e : g.entries) {
        Rat ms = diag_multiplier(f, e.src), mt = diag_multiplier(f, e.dst);
        if (mt == 0) throw ValidationError("compose through a collapsed slot");
        psi.push_back(HomEntry{e.src, e.dst, e.lambda * ms / mt});
    }
    std::vector<HomEntry> all = f.entries;
    all.insert(all.end(), psi.begin(), psi.end());
    for (const auto& e1 : f.entries)
        for (const auto& e2 : psi)
            if (e1.dst == e2.src)
                all.push_back(HomEntry{e1.src, e2.dst, e1.lambda * e2.lambda});
    out.entries = canonicalize_entries(out.group, std::move(all));
    return out;
}

inline NormalForm compose(const std::vector<NormalForm>& fs, const GroupDescriptor& g) {
    NormalForm acc = identity_form(g);
    for (const auto& f : fs) acc = compose(acc, f);
    return acc;
}

// (1 + phi)^{-1} on the finite slot window, by exact rational matrix
// inversion followed by legality checks. Throws when not invertible.
inline std::vector<HomEntry> invert_hom(const GroupDescriptor& g,
                                        const std::vector<HomEntry>& entries) {
    if (entries.empty()) return {};
    std::vector<Slot> slots;
    {
        std::set<Slot> s;
        for (const auto& e : entries) { s.insert(e.src); s.insert(e.dst); }
        slots.assign(s.begin(), s.end());
    }
    size_t n = slots.size();
    auto idx = [&](const Slot& s) {
        return static_cast<size_t>(std::lower_bound(slots.begin(), slots.end(), s) - slots.begin());
    };
    std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n, Rat(0)));
    for (size_t i = 0; i < n; ++i) m[i][i] = 1;
    for (const auto& e : entries) m[idx(e.src)][idx(e.dst)] += e.lambda;
    // invert m over Q
    std::vector<std::vector<Rat>> inv(n, std::vector<Rat>(n, Rat(0)));
    for (size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        while (piv < n && m[piv][c] == 0) ++piv;
        if (piv == n) throw ValidationError("perturbation is not invertible");
        std::swap(m[piv], m[c]);
        std::swap(inv[piv], inv[c]);
        Rat d = m[c][c];
        for (size_t j = 0; j < n; ++j) { m[c][j] /= d; inv[c][j] /= d; }
        for (size_t i = 0; i < n; ++i) {
            if (i == c || m[i][c] == 0) continue;
            Rat f = m[i][c];
            for (size_t j = 0; j < n; ++j) {
                m[i][j] -= f * m[c][j];
                inv[i][j] -= f * inv[c][j];
            }
        }
    }
    std::vector<HomEntry> out;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            Rat lam = inv[i][j] - (i == j ? Rat(1) : Rat(0));
            if (lam != 0) out.push_back(HomEntry{slots[i], slots[j], lam});
        }
    return out;  // caller canonicalizes; canonicalization throws if illegal
}

inline NormalForm invert(const NormalForm& f) {
    NormalForm out;
    out.group = f.group;
    for (const auto& [i, v] : f.diag) {
        const Atom& a = f.group.at(i);
        if (a.kind == AtomKind::cyclic_omega) {
            Int m = a.copy_order();
            Int r = residue_mod(v, m);
            if (boost::multiprecision::gcd(r, a.p) != 1)
                throw ValidationError("multiplier not invertible on atom " + std::to_string(i));
            out.diag[i] = Rat(mod_inverse(r, m));
        } else {
            if (v != 1 && v != -1)
                throw ValidationError("multiplier not invertible on atom " + std::to_string(i));
            out.diag[i] = v;
        }
    }
    std::vector<HomEntry> psi = invert_hom(f.group, f.entries);
    // gamma^{-1} = nu (1 + chi),  chi entry = lambda * mu[dst] / mu[src]
    std::vector<HomEntry> chi;
    for (const auto& e : psi) {
        Rat ms = diag_multiplier(f, e.src), mt = diag_multiplier(f, e.dst);
        if (ms == 0) throw ValidationError("inverse through a collapsed slot");
        chi.push_back(HomEntry{e.src, e.dst, e.lambda * mt / ms});
    }
    out.entries = canonicalize_entries(out.group, std::move(chi));
    NormalForm check = compose(f, out);
    if (!check.is_identity())
        throw ValidationError("expression is not invertible on its window");
    return out;
}

// ---- evaluation ----

inline Element apply(const NormalForm& nf, const Element& a) {
    if (!(a.group == nf.group)) throw Error("apply: element from a different group");
    Element out = a;
    for (const auto& e : nf.entries) {
        Rat x = a.coord(e.src);
        if (x == 0) continue;
        const Atom& dst = nf.group.at(e.dst.atom);
        Rat add_v = entry_value(nf.group.at(e.src.atom), dst, e.lambda, x);
        if (add_v == 0) continue;
        Rat cur = out.coord(e.dst);
        Rat sum = reduce_into(dst, cur + add_v);
        if (sum == 0) out.coords.erase(e.dst);
        else out.coords[e.dst] = sum;
    }
    // uniform omega-tail multipliers
    for (auto it = out.coords.begin(); it != out.coords.end();) {
        const Atom& at = nf.group.at(it->first.atom);
        if (at.is_omega()) {
            Rat v = reduce_into(at, nf_diag_at(nf, it->first.atom) * it->second);
            if (v == 0) { it = out.coords.erase(it); continue; }
            it->second = v;
        }
        ++it;
    }
    return out;
}

// ---- normalization of expressions ----

inline NormalForm normalize(const ExprPtr& e, const GroupDescriptor& g);

namespace detail {

inline void require_valid_global_mult(const GroupDescriptor& g, const Int& m, const Int& n) {
    if (m == 0) throw ValidationError("multiplication by zero");
    if (boost::multiprecision::gcd(m, n) != 1)
        throw ValidationError("multiplication m/n requires coprime m, n");
    Int mn = m * n;
    if (mn < 0) mn = -mn;
    for (const auto& a : g.atoms) {
        if (a.is_torsion()) {
            if (mn % a.p == 0)
                throw ValidationError("multiplication by " + m.str() + "/" + n.str() +
                                      " is not invertible: the group has " + a.p.str() +
                                      "-torsion");
        } else if (a.kind == AtomKind::free_z || a.kind == AtomKind::free_z_omega) {
            if (mn != 1)
                throw ValidationError("a free summand admits only ±1 as multiplication");
        } else {  // localized_q
            Int rest = mn;
            split_p_part(rest, a.p);
            if (rest != 1)
                throw ValidationError("Z[1/" + a.p.str() + "] is only " + a.p.str() +
                                      "-divisible; multiplication by " + m.str() + "/" +
                                      n.str() + " is not invertible on it");
        }
    }
}

inline NormalForm normalize_block_sum(const BlockSum& bs, const GroupDescriptor& g) {
    NormalForm out = identity_form(g);
    std::vector<HomEntry> es;
    for (const auto& [atom_index, sub] : bs.assignments) {
        if (atom_index >= g.size()) throw ValidationError("blockSum atom index out of range");
        GroupDescriptor single = group_of({g.at(atom_index)});
        NormalForm sub_nf = normalize(sub, single);
        if (g.at(atom_index).is_omega()) out.diag[atom_index] = nf_diag_at(sub_nf, 0);
        for (const auto& e : sub_nf.entries) {
            es.push_back(HomEntry{{atom_index, e.src.copy}, {atom_index, e.dst.copy}, e.lambda});
        }
    }
    out.entries = canonicalize_entries(g, std::move(es));
    return out;
}

inline void check_stab_structure(const HomData& h, const GroupDescriptor& g) {
    if (h.stabilizes.kind == StabTag::window) return;
    for (const auto& e : h.entries) {
        if (h.stabilizes.covers(g.at(e.src.atom)))
            throw ValidationError("stability hom must vanish on the stabilized subgroup");
        if (!h.stabilizes.covers(g.at(e.dst.atom)))
            throw ValidationError("stability hom image must lie in the stabilized subgroup");
    }
}

}  // namespace detail

inline NormalForm normalize(const ExprPtr& e, const GroupDescriptor& g) {
    if (!e) throw Error("null expression");
    const auto& node = e->node;
    if (std::holds_alternative<Identity>(node)) return identity_form(g);
    if (std::holds_alternative<Negation>(node)) return multiplication_form(g, Rat(-1));
    if (auto* rm = std::get_if<RatMult>(&node)) {
        detail::require_valid_global_mult(g, rm->m, rm->n);
        return multiplication_form(g, Rat(rm->m, rm->n));
    }
    if (auto* pr = std::get_if<PAdicRat>(&node)) {
        if (!is_prime(pr->p)) throw ValidationError("pAdicRat: p must be prime");
        if (pr->m % pr->p == 0 || pr->n % pr->p == 0 || pr->n == 0)
            throw ValidationError("pAdicRat: m/n must be a unit (p divides neither)");
        NormalForm nf = identity_form(g);
        std::vector<HomEntry> es;
        Rat r(pr->m, pr->n);
        for (size_t i = 0; i < g.size(); ++i) {
            const Atom& a = g.at(i);
            if (!a.is_torsion() || a.p != pr->p) continue;
            if (a.is_omega()) nf.diag[i] = canonical_diag(a, r);
            else es.push_back(HomEntry{{i, 0}, {i, 0}, r - 1});
        }
        nf.entries = canonicalize_entries(g, std::move(es));
        return nf;
    }
    if (auto* bs = std::get_if<BlockSum>(&node)) return detail::normalize_block_sum(*bs, g);
    if (auto* oh = std::get_if<OnePlusHom>(&node)) {
        detail::check_stab_structure(oh->phi, g);
        NormalForm nf = identity_form(g);
        nf.entries = canonicalize_entries(g, oh->phi.entries);
        return nf;
    }
    if (auto* c = std::get_if<Composite>(&node)) {
        NormalForm acc = identity_form(g);
        for (const auto& item : c->items) acc = compose(acc, normalize(item, g));
        return acc;
    }
    if (auto* inv = std::get_if<Inverse>(&node)) return invert(normalize(inv->inner, g));
    throw Error("unreachable");
}

// ---- validity ----

struct ValidityReport {
    bool valid = false;
    std::vector<std::string> failures;
    std::optional<NormalForm> form;          // the normal form, when it exists
    std::optional<NormalForm> inverse_form;  // certified inverse
};

// A valid report certifies that the expression denotes an automorphism: the
// normal form exists and has an exact two-sided inverse in the same class.
inline ValidityReport validate(const ExprPtr& e, const GroupDescriptor& g) {
    ValidityReport r;
    NormalForm nf;
    try {
        nf = normalize(e, g);
    } catch (const Error& err) {
        r.failures.push_back(err.what());
        return r;
    }
    r.form = nf;
    try {
        NormalForm inv = invert(nf);
        if (!compose(inv, nf).is_identity())
            throw ValidationError("inverse fails on the left");
        r.inverse_form = inv;
    } catch (const Error& err) {
        r.failures.push_back(err.what());
        return r;
    }
    // omega-tail multipliers must be units
    for (const auto& [i, v] : nf.diag) {
        const Atom& a = g.at(i);
        if (a.kind == AtomKind::cyclic_omega &&
            boost::multiprecision::gcd(residue_mod(v, a.copy_order()), a.p) != 1)
            r.failures.push_back("tail multiplier not a unit on atom " + std::to_string(i));
        if (a.kind == AtomKind::free_z_omega && v != 1 && v != -1)
            r.failures.push_back("tail multiplier not ±1 on atom " + std::to_string(i));
    }
    r.valid = r.failures.empty();
    return r;
}

inline ExprPtr conjugate(const ExprPtr& sigma, const ExprPtr& gamma) {
    return composite({inverse_expr(gamma), sigma, gamma});
}

inline NormalForm conjugate_form(const NormalForm& sigma, const NormalForm& gamma) {
    return compose(compose(invert(gamma), sigma), gamma);
}

}  // namespace inertia
