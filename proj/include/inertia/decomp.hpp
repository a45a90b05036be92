#pragma once

#include "inertia/decomp_util.hpp"

namespace inertia {

struct ChecklistItem {
    std::string id;
    std::string description;
    bool pass = false;
    Json witness = Json(nullptr);
};

struct DecompositionCertificate {
    std::string tag;  // PROP51_NONCRIT, PROP51_CRIT, THEOREM_A, THEOREM_B,
                      // THEOREM_C_BOUNDED_T, THEOREM_C_FG_QUOTIENT, FAUT_CRITICAL
    Json data = Json::object();
    std::map<std::string, std::vector<ExprPtr>> generator_families;
    std::vector<ChecklistItem> checklist;

    bool all_pass() const {
        for (const auto& c : checklist)
            if (!c.pass) return false;
        return true;
    }
};

inline Json certificate_to_json(const DecompositionCertificate& c) {
    Json fams = Json::object();
    for (const auto& [name, fam] : c.generator_families) {
        Json lst = Json::array();
        for (const auto& e : fam) lst.push_back(expr_to_json(e));
        fams[name] = lst;
    }
    Json items = Json::array();
    for (const auto& it : c.checklist)
        items.push_back(Json{{"id", it.id},
                             {"description", it.description},
                             {"pass", it.pass},
                             {"witness", it.witness}});
    return Json{{"theorem", c.tag}, {"data", c.data}, {"generators", fams}, {"checklist", items}};
}

// ---- bounded splitting ----

struct SplitBounded {
    Subgroup b1;
    Subgroup b2;
    Int b2_order = 1;
    Json verification = Json::object();
};

// Splits a bounded group over a finite-index subgroup of its window:
// B = B1 (+) B2 with B2 finite and B1 containing B0. Off-window copies of
// omega atoms belong to B1 implicitly.
inline SplitBounded split_bounded(const GroupDescriptor& b, const Subgroup& b0) {
    for (const auto& a : b.atoms)
        if (!a.is_bounded()) throw Error("split_bounded: the group is not bounded");
    // every atom is represented in the window; omega copies beyond it
    // implicitly belong to B1
    std::vector<Slot> base_slots;
    for (size_t i = 0; i < b.size(); ++i) base_slots.push_back({i, 0});
    Window w = merge_windows(b0.window, make_window(b, {}, base_slots));
    Subgroup b0w = rebase(b0, w);
    std::vector<Element> full_gens;
    for (size_t i = 0; i < w.slots.size(); ++i) full_gens.push_back(w.generator(i));
    Subgroup whole = span_in_window(b, full_gens, w);
    if (!index(b0w, whole).is_finite())
        throw Error("split_bounded: B0 has infinite index in its window");
    const Subgroup& b0r = b0w;

    IntMat relations = window_relations(w);
    size_t n = w.slots.size();

    auto make_sub = [&](const std::vector<Element>& gens) {
        return span_in_window(b, gens, w);
    };
    auto fallback = [&]() {
        SplitBounded out;
        out.b1 = whole;
        out.b2 = make_sub({});
        out.b2_order = 1;
        out.verification = Json{{"trivial_split", true}};
        return out;
    };

    // an order-preserving lift of one quotient generator: u = lift + x with
    // x in S solving ord * x == -ord * lift modulo the window relations
    auto order_preserving_lift = [&](const Subgroup& s, const IntRow& lift,
                                     const Int& ord) -> std::optional<IntRow> {
        IntMat rows;
        for (const auto& r : s.lattice) {
            IntRow scaled(n);
            for (size_t c = 0; c < n; ++c) scaled[c] = ord * r[c];
            rows.push_back(std::move(scaled));
        }
        size_t ns = rows.size();
        for (const auto& r : relations) rows.push_back(r);
        IntRow target(n, 0);
        for (size_t c = 0; c < n; ++c) target[c] = -ord * lift[c];
        auto coeff = solve_left(rows, target);
        if (!coeff) return std::nullopt;
        IntRow u = lift;
        for (size_t r = 0; r < ns; ++r)
            for (size_t c = 0; c < n; ++c) u[c] += (*coeff)[r] * s.lattice[r][c];
        if (window_element_order(w, u) != ord) return std::nullopt;
        return u;
    };

    // order-preserving lifts of a basis of W/S (all generators must lift)
    auto lift_quotient_basis = [&](const Subgroup& s) -> std::optional<std::vector<Element>> {
        Diagonalization d = diagonalize(s.lattice);
        std::vector<Element> lifts;
        for (size_t i = 0; i < n; ++i) {
            if (d.diag[i] == 1) continue;
            if (d.diag[i] == 0) return std::nullopt;  // window not finite over s
            auto u = order_preserving_lift(s, d.v_inv[i], d.diag[i]);
            if (!u) return std::nullopt;
            lifts.push_back(element_from_window_coords(w, *u));
        }
        return lifts;
    };

    // B2: order-preserving lifts of W/B0 (partial: skip obstructed generators)
    std::vector<Element> b2_gens;
    {
        Diagonalization d = diagonalize(b0r.lattice);
        for (size_t i = 0; i < n; ++i) {
            if (d.diag[i] <= 1) continue;
            auto u = order_preserving_lift(b0r, d.v_inv[i], d.diag[i]);
            if (!u) continue;  // this direction cannot split off
            b2_gens.push_back(element_from_window_coords(w, *u));
        }
    }
    Subgroup b2 = make_sub(b2_gens);
    // B2 must meet B0 trivially
    if (subgroup_order(lattice_ops(b2, b0r).intersection) != NatOrInf::of(1)) return fallback();

    // complement C of B2 in the window
    auto c_gens = lift_quotient_basis(b2);
    if (!c_gens) return fallback();
    Subgroup c = make_sub(*c_gens);
    {
        auto lp = lattice_ops(c, b2);
        if (!(subgroup_order(lp.intersection) == NatOrInf::of(1)) || !(lp.sum == whole))
            return fallback();
    }

    // express each B0 generator over (C, B2) and extend the induced map to C
    size_t nc = c_gens->size(), nb = b2_gens.size();
    IntMat basis_rows;
    for (const auto& e : *c_gens) basis_rows.push_back(window_coords(w, e));
    for (const auto& e : b2_gens) basis_rows.push_back(window_coords(w, e));
    for (const auto& r : relations) basis_rows.push_back(r);
    std::vector<IntRow> b0_c_part, b0_b2_part;
    for (const auto& g0 : b0r.generators) {
        auto sol = solve_left(basis_rows, window_coords(w, g0));
        if (!sol) return fallback();
        b0_c_part.push_back(IntRow(sol->begin(), sol->begin() + nc));
        b0_b2_part.push_back(IntRow(sol->begin() + nc, sol->begin() + nc + nb));
    }
    // unknowns y_1..y_nc in B2 (coefficients over b2_gens), equations:
    //   sum_i a_i y_i == beta     for each B0 generator (a = C-part, beta = B2-part)
    //   o_i * y_i == 0            for each C generator (hom well-defined on C)
    std::vector<std::vector<IntRow>> contrib;
    std::vector<IntRow> rhs;
    auto b2_vec = [&](size_t k) { return window_coords(w, b2_gens[k]); };
    size_t unknowns = nc * nb;  // y_i = sum_k t_{ik} b2gen_k
    for (size_t gi = 0; gi < b0r.generators.size(); ++gi) {
        std::vector<IntRow> row(unknowns, IntRow(n, 0));
        for (size_t i = 0; i < nc; ++i)
            for (size_t k = 0; k < nb; ++k) {
                IntRow v = b2_vec(k);
                for (size_t cc = 0; cc < n; ++cc) v[cc] *= b0_c_part[gi][i];
                row[i * nb + k] = std::move(v);
            }
        contrib.push_back(std::move(row));
        IntRow beta(n, 0);
        for (size_t k = 0; k < nb; ++k) {
            IntRow v = b2_vec(k);
            for (size_t cc = 0; cc < n; ++cc) beta[cc] += b0_b2_part[gi][k] * v[cc];
        }
        rhs.push_back(std::move(beta));
    }
    for (size_t i = 0; i < nc; ++i) {
        Int oi = window_element_order(w, window_coords(w, (*c_gens)[i]));
        std::vector<IntRow> row(unknowns, IntRow(n, 0));
        for (size_t k = 0; k < nb; ++k) {
            IntRow v = b2_vec(k);
            for (size_t cc = 0; cc < n; ++cc) v[cc] *= oi;
            row[i * nb + k] = std::move(v);
        }
        contrib.push_back(std::move(row));
        rhs.push_back(IntRow(n, 0));
    }
    auto t = solve_linear_system_mod(contrib, rhs, relations);
    if (!t) return fallback();

    std::vector<Element> b1_gens;
    for (size_t i = 0; i < nc; ++i) {
        Element shift = (*c_gens)[i];
        for (size_t k = 0; k < nb; ++k)
            if ((*t)[i * nb + k] != 0) shift = add(shift, scale((*t)[i * nb + k], b2_gens[k]));
        b1_gens.push_back(shift);
    }
    Subgroup b1 = make_sub(b1_gens);

    // exact verification
    bool contains_b0 = subgroup_leq(b0, b1);
    auto lp = lattice_ops(b1, b2);
    bool direct = subgroup_order(lp.intersection) == NatOrInf::of(1);
    bool covers = lp.sum == whole;
    if (!contains_b0 || !direct || !covers) return fallback();
    SplitBounded out;
    out.b1 = b1;
    out.b2 = b2;
    NatOrInf o = subgroup_order(b2);
    out.b2_order = o.value;
    out.verification = Json{{"b1_contains_b0", true},
                            {"direct", true},
                            {"covers_window", true},
                            {"b2_order", out.b2_order.str()}};
    return out;
}

// ---- central multiplier subgroup (p-shifts) ----

struct MultiplierGenerators {
    std::vector<std::pair<Int, ExprPtr>> shifts;  // (p, p-shift expression)
    ExprPtr negation;
    Json freeness = Json::object();
};

inline ExprPtr p_shift(const GroupDescriptor& g, const Int& p) {
    auto rep = structural_report(g);
    if (!rep.pi_star.contains(p))
        throw Error("p-shift undefined: " + p.str() + " is not in pi_star of the group");
    ExprPtr e = p_shift_expr(g, p);
    ValidityReport vr = validate(e, g);
    if (!vr.valid) throw Error("p-shift failed validation");
    return e;
}

inline MultiplierGenerators q_generators(const GroupDescriptor& g) {
    auto rep = structural_report(g);
    MultiplierGenerators out;
    out.negation = negation_expr();
    if (rep.pi_star.cofinite)
        throw Error("q_generators: pi_star is cofinite (periodic group); list a finite prime set");
    for (const auto& p : rep.pi_star.primes) out.shifts.push_back({p, p_shift(g, p)});
    // freeness: no nontrivial word in the shifts (times a sign) is the identity.
    // With a torsion-free or unbounded atom present this is exact: the word acts
    // on it as the rational ±prod p^{e_p}, and distinct rationals act distinctly.
    bool exact = false;
    for (const auto& a : g.atoms)
        if (a.is_torsion_free() || a.kind == AtomKind::pruefer) exact = true;
    // window verification up to exponent 2 in each generator
    bool window_ok = true;
    size_t k = out.shifts.size();
    std::vector<long long> exps(k, -2);
    auto bump = [&]() {
        for (size_t i = 0; i < k; ++i) {
            if (exps[i] < 2) { ++exps[i]; return true; }
            exps[i] = -2;
        }
        return false;
    };
    if (k > 0 && k <= 3) {
        do {
            for (int sign = 0; sign < 2; ++sign) {
                bool trivial_word = sign == 0;
                for (auto e : exps) trivial_word = trivial_word && e == 0;
                if (trivial_word) continue;
                std::vector<ExprPtr> parts;
                if (sign) parts.push_back(negation_expr());
                for (size_t i = 0; i < k; ++i)
                    if (exps[i] != 0) parts.push_back(power_expr(out.shifts[i].second, exps[i]));
                if (normalize(composite(parts), g).is_identity()) window_ok = false;
            }
        } while (bump() && window_ok);
    }
    out.freeness = Json{{"exact_faithful_atom", exact}, {"window_words_nontrivial", window_ok}};
    if (!window_ok) throw Error("q_generators: relation found among the shift generators");
    return out;
}

// ---- the multiplier factorization for non-periodic groups ----

struct TorsionIdentityFactor {
    ExprPtr gamma1;  // inertial, identity on A/T
    ExprPtr gamma0;  // word in the p-shifts, times a sign
    NormalForm gamma1_form;
    NormalForm gamma0_form;
    Rat multiplier;
    Json word = Json::array();
};

inline TorsionIdentityFactor factor_mod_torsion(const ExprPtr& gamma, const GroupDescriptor& g) {
    if (g.is_periodic()) throw Error("factor_mod_torsion: the group is periodic");
    NormalForm nf = normalize(gamma, g);
    Verdict v = is_inertial(nf);
    if (v.status != Verdict::INERTIAL)
        throw Error("factor_mod_torsion: gamma is not certified inertial");
    auto cert = multiplication_certificate(nf, Region::mod_torsion);
    if (!cert) throw Error("factor_mod_torsion: no multiplier modulo torsion");
    Rat r = cert->multiplier;
    TorsionIdentityFactor out;
    out.multiplier = r;
    std::vector<ExprPtr> parts;
    if (r < 0) parts.push_back(negation_expr());
    Int nn = num(r) < 0 ? Int(-num(r)) : num(r);
    Int dd = den(r);
    for (Int p = 2; nn > 1 || dd > 1; ++p) {
        long long e = 0;
        while (nn % p == 0) { nn /= p; ++e; }
        while (dd % p == 0) { dd /= p; --e; }
        if (e != 0) {
            parts.push_back(power_expr(p_shift(g, p), e));
            out.word.push_back(Json{{"p", p.str()}, {"s", e}});
        }
    }
    out.gamma0 = parts.empty() ? identity_expr() : composite(parts);
    out.gamma0_form = normalize(out.gamma0, g);
    out.gamma1 = composite({gamma, inverse_expr(out.gamma0)});
    out.gamma1_form = compose(nf, invert(out.gamma0_form));
    if (!induced_on_quotient(out.gamma1_form, atom_subset(g, torsion_free_atoms(g))).is_identity())
        throw Error("factor_mod_torsion: residual action modulo torsion");
    return out;
}

}  // namespace inertia
