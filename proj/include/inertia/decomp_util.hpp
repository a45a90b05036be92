#pragma once

#include "inertia/engine.hpp"

namespace inertia {

// order of a finitely generated subgroup (INFINITE for positive rank)
inline NatOrInf subgroup_order(const Subgroup& h) {
    Subgroup zero = span_in_window(h.group, {}, h.window);
    return index(zero, h);
}

inline Int pow_mod(Int base, Int e, const Int& m) {
    Int r = 1;
    base = mod_floor(base, m);
    while (e > 0) {
        if (e % 2 == 1) r = mod_floor(r * base, m);
        base = mod_floor(base * base, m);
        e /= 2;
    }
    return r;
}

// smallest primitive root modulo p^k, p odd
inline Int primitive_root(const Int& p, unsigned k) {
    if (p == 2) throw Error("primitive_root: p must be odd");
    std::vector<Int> qs;  // prime factors of p-1
    Int n = p - 1;
    for (Int d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            qs.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) qs.push_back(n);
    Int g = 0;
    for (Int c = 2; c < p; ++c) {
        bool ok = true;
        for (const auto& q : qs)
            if (pow_mod(c, (p - 1) / q, p) == 1) { ok = false; break; }
        if (ok) { g = c; break; }
    }
    if (g == 0) throw Error("primitive_root: none found");
    if (k > 1 && pow_mod(g, p - 1, p * p) == 1) g += p;
    return g;
}

// Rewrites an expression over a sub-descriptor into one over the ambient
// descriptor, sending sub atom i to ambient atom atom_of[i]. Global
// constructors become block sums over the mapped atoms.
inline ExprPtr remap_expr(const ExprPtr& e, const std::vector<size_t>& atom_of,
                          const GroupDescriptor& sub) {
    const auto& node = e->node;
    if (std::holds_alternative<Identity>(node)) return identity_expr();
    auto spread = [&](const ExprPtr& per_atom) {
        std::map<size_t, ExprPtr> a;
        for (size_t i = 0; i < sub.size(); ++i) a[atom_of[i]] = per_atom;
        return block_sum(std::move(a));
    };
    if (std::holds_alternative<Negation>(node)) return spread(negation_expr());
    if (auto* rm = std::get_if<RatMult>(&node)) return spread(rat_mult(rm->m, rm->n));
    if (auto* pr = std::get_if<PAdicRat>(&node)) {
        std::map<size_t, ExprPtr> a;
        for (size_t i = 0; i < sub.size(); ++i) {
            const Atom& at = sub.at(i);
            if (at.is_torsion() && at.p == pr->p)
                a[atom_of[i]] = rat_mult(pr->m, pr->n);
        }
        return block_sum(std::move(a));
    }
    if (auto* bs = std::get_if<BlockSum>(&node)) {
        std::map<size_t, ExprPtr> a;
        for (const auto& [i, sub_e] : bs->assignments) a[atom_of.at(i)] = sub_e;
        return block_sum(std::move(a));
    }
    if (auto* oh = std::get_if<OnePlusHom>(&node)) {
        HomData h;
        h.stabilizes = oh->phi.stabilizes;
        for (const auto& en : oh->phi.entries)
            h.entries.push_back(HomEntry{{atom_of.at(en.src.atom), en.src.copy},
                                         {atom_of.at(en.dst.atom), en.dst.copy},
                                         en.lambda});
        return one_plus_hom(std::move(h));
    }
    if (auto* c = std::get_if<Composite>(&node)) {
        std::vector<ExprPtr> items;
        for (const auto& it : c->items) items.push_back(remap_expr(it, atom_of, sub));
        return composite(std::move(items));
    }
    if (auto* inv = std::get_if<Inverse>(&node))
        return inverse_expr(remap_expr(inv->inner, atom_of, sub));
    throw Error("unreachable");
}

// Solve sum_i t_i * rows[i] == rhs[e] (mod relations), simultaneously over a
// family of equations, for integers t_i. contrib[e][i] is the coordinate
// vector of unknown i in equation e.
inline std::optional<IntRow> solve_linear_system_mod(
    const std::vector<std::vector<IntRow>>& contrib, const std::vector<IntRow>& rhs,
    const IntMat& relations) {
    size_t eqs = contrib.size();
    if (eqs == 0) return IntRow{};
    size_t unknowns = contrib[0].size();
    size_t cols_per_eq = rhs[0].size();
    size_t total_cols = eqs * cols_per_eq;
    IntMat m;
    for (size_t i = 0; i < unknowns; ++i) {
        IntRow row(total_cols, 0);
        for (size_t e = 0; e < eqs; ++e)
            for (size_t c = 0; c < cols_per_eq; ++c) row[e * cols_per_eq + c] = contrib[e][i][c];
        m.push_back(std::move(row));
    }
    for (size_t e = 0; e < eqs; ++e)
        for (const auto& rel : relations) {
            IntRow row(total_cols, 0);
            for (size_t c = 0; c < cols_per_eq; ++c) row[e * cols_per_eq + c] = rel[c];
            m.push_back(std::move(row));
        }
    IntRow target(total_cols, 0);
    for (size_t e = 0; e < eqs; ++e)
        for (size_t c = 0; c < cols_per_eq; ++c) target[e * cols_per_eq + c] = rhs[e][c];
    auto sol = solve_left(m, target);
    if (!sol) return std::nullopt;
    return IntRow(sol->begin(), sol->begin() + unknowns);
}

// order of an element inside a finite window
inline Int window_element_order(const Window& w, const IntRow& coords) {
    Int ord = 1;
    for (size_t i = 0; i < coords.size(); ++i) {
        if (coords[i] == 0) continue;
        Int o = w.slot_order(i);
        if (o == 0) throw Error("element of infinite order in a bounded window");
        Int c = mod_floor(coords[i], o);
        if (c == 0) continue;
        ord = boost::multiprecision::lcm(ord, o / boost::multiprecision::gcd(c, o));
    }
    return ord;
}

}  // namespace inertia
