#pragma once

#include "inertia/analysis.hpp"

#include <random>

namespace inertia {

// The p-shift automorphism: identity on the p-primary part, multiplication
// by p everywhere else. Defined (and inertial) exactly when p lies in
// pi_star of the group.
inline ExprPtr p_shift_expr(const GroupDescriptor& g, const Int& p) {
    std::map<size_t, ExprPtr> assign;
    for (size_t i = 0; i < g.size(); ++i) {
        const Atom& a = g.at(i);
        if (a.is_torsion() && a.p == p) assign[i] = identity_expr();
        else assign[i] = rat_mult(p, 1);
    }
    return block_sum(std::move(assign));
}

struct Verdict {
    enum Status { INERTIAL, NOT_INERTIAL, UNKNOWN } status = UNKNOWN;
    std::string case_tag;         // which characterization produced the verdict
    Json certificate = Json::object();
    std::string violated_clause;  // set for NOT_INERTIAL
    std::optional<Subgroup> counterwitness;

    static Verdict inertial(std::string tag, Json cert) {
        Verdict v;
        v.status = INERTIAL;
        v.case_tag = std::move(tag);
        v.certificate = std::move(cert);
        return v;
    }
    static Verdict not_inertial(std::string tag, std::string clause) {
        Verdict v;
        v.status = NOT_INERTIAL;
        v.case_tag = std::move(tag);
        v.violated_clause = std::move(clause);
        return v;
    }
};

inline Json verdict_to_json(const Verdict& v) {
    Json j;
    j["status"] = v.status == Verdict::INERTIAL      ? "INERTIAL"
                  : v.status == Verdict::NOT_INERTIAL ? "NOT_INERTIAL"
                                                      : "UNKNOWN";
    j["case"] = v.case_tag;
    j["certificate"] = v.certificate;
    j["violated_clause"] = v.violated_clause.empty() ? Json(nullptr) : Json(v.violated_clause);
    j["counterwitness"] = v.counterwitness ? subgroup_to_json(*v.counterwitness) : Json(nullptr);
    return j;
}

namespace detail {

inline Json mult_cert_json(const MultCert& c) {
    Json avoided = Json::array();
    for (const auto& s : c.avoided_slots)
        avoided.push_back(Json{{"atom", s.atom}, {"copy", s.copy}});
    return Json{{"multiplier", rat_str(c.multiplier)},
                {"modulus", c.modulus.str()},
                {"avoided_slots", avoided}};
}

// Lemma-style decision for a p-group action: multiplication on a finite-index
// subgroup, else (critical case) multiplications on both D and A/D along a
// finite-index subgroup.
inline Verdict p_group_inertial(const NormalForm& nf, const Int& p) {
    const GroupDescriptor& g = nf.group;
    if (auto fi = multiplication_certificate(nf, Region::finite_index)) {
        Json cert = mult_cert_json(*fi);
        cert["prime"] = p.str();
        return Verdict::inertial("multiplication-on-finite-index", cert);
    }
    bool has_div = !divisible_atoms(g).empty();
    bool has_infinite_bounded = false;
    for (const auto& a : g.atoms)
        if (a.kind == AtomKind::cyclic_omega) has_infinite_bounded = true;
    if (has_div && has_infinite_bounded) {
        auto rd = exact_scalar(restrict_to(nf, atom_subset(g, divisible_atoms(g))));
        auto quotient = induced_on_quotient(nf, atom_subset(g, [&] {
                                                std::set<size_t> keep;
                                                for (size_t i = 0; i < g.size(); ++i)
                                                    if (!g.at(i).is_divisible()) keep.insert(i);
                                                return keep;
                                            }()));
        auto rb = multiplication_certificate(quotient, Region::finite_index);
        if (rd && rb) {
            Json cert;
            cert["prime"] = p.str();
            cert["multiplier_on_divisible"] = rat_str(*rd);
            cert["multiplier_mod_divisible"] = mult_cert_json(*rb);
            return Verdict::inertial("critical-pair", cert);
        }
        return Verdict::not_inertial(
            "critical-pair",
            "no invertible multiplications on both the divisible part and the bounded "
            "quotient along a finite-index subgroup (prime " + p.str() + ")");
    }
    return Verdict::not_inertial(
        "multiplication-on-finite-index",
        "not a multiplication on any finite-index subgroup of the " + p.str() + "-component");
}

inline Verdict periodic_inertial(const NormalForm& nf) {
    const GroupDescriptor& g = nf.group;
    auto rep = structural_report(g);
    Json per_p = Json::object();
    for (const auto& [p, comp] : rep.primary) {
        NormalForm sub = restrict_to(nf, atom_subset(g, primary_atoms(g, p)));
        Verdict v = p_group_inertial(sub, p);
        if (v.status != Verdict::INERTIAL) {
            v.violated_clause += " [primary component " + p.str() + "]";
            return v;
        }
        per_p[p.str()] = Json{{"case", v.case_tag}, {"certificate", v.certificate}};
    }
    // a finite atom list acts as a power automorphism on every absent prime,
    // so the "all but finitely many" clause holds by construction
    return Verdict::inertial("per-primary-component", Json{{"per_prime", per_p}});
}

}  // namespace detail

// Decision procedure for the inertial property of a validated expression.
inline Verdict is_inertial(const NormalForm& nf) {
    const GroupDescriptor& g = nf.group;
    const auto rep = structural_report(g);

    if (g.is_finite()) return Verdict::inertial("finite-group", Json::object());

    if (g.is_periodic()) return detail::periodic_inertial(nf);

    if (!rep.r0.is_finite()) {
        // infinite torsion-free rank: integer multiplication on a finite-index
        // subgroup is required
        auto fi = multiplication_certificate(nf, Region::finite_index);
        if (fi && is_integer(fi->multiplier)) {
            Json cert = detail::mult_cert_json(*fi);
            return Verdict::inertial("integer-on-finite-index", cert);
        }
        return Verdict::not_inertial(
            "integer-on-finite-index",
            "no integer multiplication on a finite-index subgroup (infinite torsion-free rank)");
    }

    // 0 < r0 < infinity
    auto quotient_map = atom_subset(g, torsion_free_atoms(g));
    NormalForm on_quotient = induced_on_quotient(nf, quotient_map);
    auto r = exact_scalar(on_quotient);
    if (!r)
        return Verdict::not_inertial(
            "multiplier-mod-torsion",
            "the action modulo the torsion subgroup is not a single multiplication");

    // primes of the multiplier
    std::vector<std::pair<Int, long long>> word;  // (p, exponent)
    {
        Int n = num(*r);
        if (n < 0) n = -n;
        Int d = den(*r);
        for (Int p = 2; n > 1 || d > 1; ++p) {
            if (p * p > n && p * p > d && n * d > 1) {
                // remaining prime factor
                if (n > 1) { word.push_back({n, 1}); n = 1; }
                if (d > 1) { word.push_back({d, -1}); d = 1; }
                break;
            }
            long long e = 0;
            while (n % p == 0) { n /= p; ++e; }
            while (d % p == 0) { d /= p; --e; }
            if (e != 0) word.push_back({p, e});
        }
    }
    for (const auto& [p, e] : word) {
        if (!rep.pi_star.contains(p)) {
            auto it = rep.exponent_per_p.find(p);
            if (it != rep.exponent_per_p.end() && !it->second.is_finite())
                return Verdict::not_inertial(
                    "multiplier-mod-torsion",
                    "the multiplier involves " + p.str() + " but the " + p.str() +
                        "-component is unbounded");
            return Verdict::not_inertial(
                "multiplier-mod-torsion",
                "the multiplier involves " + p.str() +
                    " outside the admissible prime set of the group");
        }
    }

    // peel the central multiplier word off; the rest must act as the identity
    // modulo torsion and be inertial there
    NormalForm gamma1 = nf;
    if (*r != 1) {
        std::vector<ExprPtr> parts;
        if (*r < 0) parts.push_back(negation_expr());
        for (const auto& [p, e] : word) parts.push_back(power_expr(p_shift_expr(g, p), e));
        NormalForm gamma0 = normalize(composite(parts), g);
        gamma1 = compose(nf, invert(gamma0));
    }
    if (!induced_on_quotient(gamma1, quotient_map).is_identity())
        return Verdict::not_inertial("multiplier-mod-torsion",
                                     "internal: residual action modulo torsion");

    // (i) torsion restriction inertial
    NormalForm tau = restrict_to(gamma1, atom_subset(g, torsion_atoms(g)));
    Verdict torsion_v = tau.group.is_zero() ? Verdict::inertial("zero-torsion", Json::object())
                                            : detail::periodic_inertial(tau);
    bool torsion_ok = torsion_v.status == Verdict::INERTIAL;

    // (ii) stability components must have finite image
    std::string stab_violation;
    for (const auto& e : gamma1.entries) {
        const Atom& src = g.at(e.src.atom);
        const Atom& dst = g.at(e.dst.atom);
        if (src.is_torsion_free() && !entry_image_finite(src, dst)) {
            stab_violation = "stability component " + e.src.str() + " -> " + e.dst.str() +
                             " has infinite image";
            break;
        }
    }

    // (iii) when Z[1/q] and Z(q^inf) are both present, the residual action
    // must fix the divisible q-part pointwise
    std::string pair_violation;
    for (size_t i = 0; i < g.size() && pair_violation.empty(); ++i) {
        if (g.at(i).kind != AtomKind::localized_q) continue;
        Int q = g.at(i).p;
        for (size_t j = 0; j < g.size(); ++j) {
            if (g.at(j).kind != AtomKind::pruefer || g.at(j).p != q) continue;
            auto m = atom_multiplier(gamma1, j);
            if (!m || *m != 1) {
                pair_violation = "the residual action moves the divisible " + q.str() +
                                 "-part while Z[1/" + q.str() + "] is present";
                break;
            }
        }
    }

    if (torsion_ok && stab_violation.empty() && pair_violation.empty()) {
        Json cert;
        cert["multiplier"] = rat_str(*r);
        Json wj = Json::array();
        for (const auto& [p, e] : word) wj.push_back(Json{{"p", p.str()}, {"s", e}});
        cert["multiplier_word"] = wj;
        cert["torsion_certificate"] =
            Json{{"case", torsion_v.case_tag}, {"certificate", torsion_v.certificate}};
        // invariant torsion-free generators: d_i * e_i with gamma(d_i e_i) = r * d_i e_i
        Json vgens = Json::array();
        for (size_t i = 0; i < g.size(); ++i) {
            if (!g.at(i).is_torsion_free()) continue;
            Element gen = slot_generator(g, {i, 0}, 0);
            Element image = apply(nf, gen);
            Element defect = sub(image, make_element(g, {{{i, 0}, *r}}));
            NatOrInf d = element_order(defect);
            if (!d.is_finite()) return Verdict::not_inertial("multiplier-mod-torsion",
                                                             "internal: aperiodic defect");
            Element vgen = scale(d.value, gen);
            Element check = sub(apply(nf, vgen), [&] {
                Element s = vgen;
                for (auto& [slot, c] : s.coords) c = reduce_into(g.at(slot.atom), c * *r);
                return s;
            }());
            if (!check.is_zero())
                return Verdict::not_inertial("multiplier-mod-torsion",
                                             "internal: invariant generator check failed");
            vgens.push_back(Json{{"atom", i}, {"scale", d.value.str()}});
        }
        cert["invariant_generators"] = vgens;
        return Verdict::inertial("multiplier-and-torsion", cert);
    }

    std::string clause;
    if (!torsion_ok)
        clause = "torsion restriction not inertial: " + torsion_v.violated_clause;
    else if (!stab_violation.empty())
        clause = stab_violation;
    else
        clause = pair_violation;

    Verdict v = Verdict::not_inertial("multiplier-and-torsion", clause);
    // record which of the three clauses failed; a certificate that passes the
    // bare finite-rank conditions but fails here is the flagged gap case
    v.certificate = Json{{"multiplier", rat_str(*r)},
                         {"torsion_restriction_inertial", torsion_ok},
                         {"stability_component_finite", stab_violation.empty()},
                         {"divisible_pair_fixed", pair_violation.empty()}};
    return v;
}

inline Verdict is_inertial(const ExprPtr& e, const GroupDescriptor& g) {
    ValidityReport vr = validate(e, g);
    if (!vr.valid) {
        Verdict v;
        v.status = Verdict::UNKNOWN;
        v.case_tag = "invalid-expression";
        Json fs = Json::array();
        for (const auto& f : vr.failures) fs.push_back(f);
        v.certificate = Json{{"failures", fs}};
        return v;
    }
    return is_inertial(*vr.form);
}

// ---- brute-force falsification ----

struct FalsifyBudget {
    size_t trials = 200;       // number of candidate subgroups
    unsigned coeff_bound = 3;  // free coordinates range over ±coeff_bound
    unsigned depth_bound = 4;  // denominators up to p^depth_bound
    size_t max_generators = 2;
    uint64_t seed = 0;
};

namespace detail {

inline std::vector<Slot> candidate_slots(const GroupDescriptor& g) {
    std::vector<Slot> out;
    for (size_t i = 0; i < g.size(); ++i) {
        size_t copies = g.at(i).is_omega() ? 3 : 1;
        for (size_t c = 0; c < copies; ++c) out.push_back({i, c});
    }
    return out;
}

inline Rat random_coord(std::mt19937_64& rng, const Atom& a, const FalsifyBudget& b) {
    auto next = [&](uint64_t n) { return n == 0 ? 0 : rng() % n; };
    switch (a.kind) {
        case AtomKind::cyclic:
        case AtomKind::cyclic_omega: {
            Int m = a.copy_order();
            uint64_t span = m.convert_to<uint64_t>();
            return Rat(Int(1 + next(span - 1 == 0 ? 1 : span - 1)));
        }
        case AtomKind::pruefer: {
            unsigned v = 1 + static_cast<unsigned>(next(b.depth_bound));
            Int d = pow_int(a.p, v);
            Int n = 1 + Int(next((d - 1).convert_to<uint64_t>()));
            return Rat(n, d);
        }
        case AtomKind::free_z:
        case AtomKind::free_z_omega: {
            long long c = 1 + static_cast<long long>(next(b.coeff_bound));
            return Rat(next(2) ? -c : c);
        }
        case AtomKind::localized_q: {
            unsigned v = static_cast<unsigned>(next(b.depth_bound + 1));
            long long c = 1 + static_cast<long long>(next(b.coeff_bound));
            return Rat(Int(next(2) ? -c : c), pow_int(a.p, v));
        }
    }
    return Rat(0);
}

}  // namespace detail

// Samples finitely generated subgroups H and returns the first one with
// (H + H*gamma)/H infinite; absent when the budget is exhausted. Any returned
// subgroup is an exact counterexample.
inline std::optional<Subgroup> inertia_falsify(const NormalForm& nf, const GroupDescriptor& g,
                                               const FalsifyBudget& budget = {}) {
    if (!(nf.group == g)) throw Error("falsify: descriptor mismatch");
    std::vector<std::vector<Element>> candidates;
    auto slots = detail::candidate_slots(g);
    // curated: standard generators at several depths, then mixed pairs
    for (const auto& s : slots) {
        const Atom& a = g.at(s.atom);
        unsigned dmax =
            (a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q) ? 3 : 1;
        for (unsigned d = (a.kind == AtomKind::localized_q) ? 0 : 1; d <= dmax; ++d)
            candidates.push_back({slot_generator(g, s, d)});
    }
    for (size_t i = 0; i < slots.size(); ++i)
        for (size_t j = 0; j < slots.size(); ++j) {
            if (i == j) continue;
            const Atom& ai = g.at(slots[i].atom);
            const Atom& aj = g.at(slots[j].atom);
            if (!ai.is_torsion() || aj.is_torsion()) continue;
            // torsion + torsion-free diagonal generators
            for (unsigned d = 1; d <= 2; ++d) {
                Element gen = add(slot_generator(g, slots[i], d), slot_generator(g, slots[j], 0));
                candidates.push_back({gen});
            }
        }
    std::mt19937_64 rng(budget.seed);
    while (candidates.size() < budget.trials) {
        size_t ngens = 1 + rng() % budget.max_generators;
        std::vector<Element> gens;
        for (size_t k = 0; k < ngens; ++k) {
            size_t nslots = 1 + rng() % 2;
            std::vector<std::pair<Slot, Rat>> entries;
            for (size_t t = 0; t < nslots; ++t) {
                const Slot& s = slots[rng() % slots.size()];
                entries.emplace_back(s, detail::random_coord(rng, g.at(s.atom), budget));
            }
            gens.push_back(make_element(g, entries));
        }
        candidates.push_back(std::move(gens));
    }
    if (candidates.size() > budget.trials) candidates.resize(std::max<size_t>(budget.trials, slots.size() ? slots.size() : 1));

    for (const auto& gens : candidates) {
        Subgroup h = span(g, gens);
        std::vector<Element> image_gens;
        for (const auto& x : gens) image_gens.push_back(apply(nf, x));
        std::vector<Element> all = gens;
        all.insert(all.end(), image_gens.begin(), image_gens.end());
        Subgroup sum = span(g, all);
        Window w = merge_windows(h.window, sum.window);
        NatOrInf idx = index(rebase(h, w), rebase(sum, w));
        if (!idx.is_finite()) {
            // re-verify from scratch before reporting
            Subgroup h2 = span(g, gens);
            Subgroup sum2 = span(g, all);
            Window w2 = merge_windows(h2.window, sum2.window);
            if (!index(rebase(h2, w2), rebase(sum2, w2)).is_finite()) return h2;
        }
    }
    return std::nullopt;
}

inline std::optional<Subgroup> inertia_falsify(const ExprPtr& e, const GroupDescriptor& g,
                                               const FalsifyBudget& budget = {}) {
    return inertia_falsify(normalize(e, g), g, budget);
}

// Almost-power test: for infinite torsion-free rank, gamma or -gamma must be
// finitary; for finite rank the almost-power automorphisms are exactly the
// inertial ones.
inline bool is_almost_power(const NormalForm& nf) {
    if (!nf.group.torsion_free_rank().is_finite()) {
        if (is_finitary(nf).is_finitary()) return true;
        NormalForm neg = compose(nf, multiplication_form(nf.group, Rat(-1)));
        return is_finitary(neg).is_finitary();
    }
    return is_inertial(nf).status == Verdict::INERTIAL;
}

inline bool is_almost_power(const ExprPtr& e, const GroupDescriptor& g) {
    return is_almost_power(normalize(e, g));
}

}  // namespace inertia
