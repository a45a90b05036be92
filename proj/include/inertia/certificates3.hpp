#pragma once

#include "inertia/certificates2.hpp"

namespace inertia {

// ---- the direct factor of central multipliers (non-periodic groups) ----

inline DecompositionCertificate theorem_b_certificate(const GroupDescriptor& g,
                                                      unsigned budget = 6) {
    if (g.is_periodic()) throw Error("theorem_b_certificate: the group is periodic");
    auto rep = structural_report(g);
    DecompositionCertificate cert;
    cert.tag = "THEOREM_B";
    auto add_item = [&](std::string id, std::string desc, bool pass, Json witness) {
        cert.checklist.push_back({std::move(id), std::move(desc), pass, std::move(witness)});
    };
    MultiplierGenerators qg = q_generators(g);
    std::vector<ExprPtr> qfam{qg.negation};
    for (const auto& [p, e] : qg.shifts) qfam.push_back(e);
    cert.generator_families["q"] = qfam;
    Json ps = Json::array();
    for (const auto& [p, e] : qg.shifts) ps.push_back(p.str());
    cert.data = Json{{"pi_star", ps}, {"freeness", qg.freeness}};

    // a small deterministic family of inertial elements to factor
    std::vector<ExprPtr> samples{negation_expr(), identity_expr()};
    for (const auto& [p, e] : qg.shifts) {
        samples.push_back(e);
        samples.push_back(composite({negation_expr(), e, e}));
    }
    for (size_t s = 0; s < g.size(); ++s) {
        if (!g.at(s).is_torsion_free()) continue;
        for (size_t t = 0; t < g.size(); ++t) {
            const Atom& at = g.at(t);
            if (!at.is_torsion()) continue;
            if (g.at(s).kind == AtomKind::localized_q && g.at(s).p == at.p) continue;
            Rat lam = at.is_bounded() ? Rat(1) : Rat(1, at.p);
            HomData h{StabTag::torsion_tag(), {HomEntry{{s, 0}, {t, 0}, lam}}};
            ExprPtr sigma = one_plus_hom(h);
            if (is_inertial(sigma, g).status == Verdict::INERTIAL) samples.push_back(sigma);
        }
    }
    if (samples.size() > budget + 4) samples.resize(budget + 4);

    bool central = true, factorizes = true;
    for (const auto& e : samples) {
        NormalForm nf = normalize(e, g);
        for (const auto& [p, sh] : qg.shifts) {
            NormalForm shf = normalize(sh, g);
            if (!(compose(nf, shf) == compose(shf, nf))) central = false;
        }
        if (is_inertial(nf).status != Verdict::INERTIAL) continue;
        auto f = factor_mod_torsion(e, g);
        if (!(compose(f.gamma1_form, f.gamma0_form) == nf)) factorizes = false;
        if (!induced_on_quotient(f.gamma1_form, atom_subset(g, torsion_free_atoms(g)))
                 .is_identity())
            factorizes = false;
    }
    add_item("q-central", "the multiplier subgroup is central against the sample family",
             central, Json(nullptr));
    add_item("factorization", "every sampled inertial element splits over the multipliers",
             factorizes, Json(nullptr));

    // trivial intersection: a nontrivial multiplier word never fixes the
    // torsion-free quotient pointwise
    bool trivial_intersection = true;
    for (const auto& [p, sh] : qg.shifts) {
        NormalForm q1 = normalize(sh, g);
        if (induced_on_quotient(q1, atom_subset(g, torsion_free_atoms(g))).is_identity())
            trivial_intersection = false;
    }
    {
        NormalForm net = normalize(qg.negation, g);
        if (induced_on_quotient(net, atom_subset(g, torsion_free_atoms(g))).is_identity())
            trivial_intersection = false;
    }
    add_item("trivial-intersection",
             "nontrivial multiplier words act nontrivially modulo torsion",
             trivial_intersection, Json(nullptr));
    return cert;
}

// ---- the finitary split over the stability group of a critical p-group ----

inline DecompositionCertificate faut_critical_certificate(const GroupDescriptor& g,
                                                          unsigned budget = 6) {
    auto rep = structural_report(g);
    if (rep.primary.size() != 1 || !g.is_periodic())
        throw Error("faut_critical_certificate: not a p-group");
    Int p = rep.primary.begin()->first;
    if (!rep.critical_primes.count(p))
        throw Error("faut_critical_certificate: the group is not critical");
    DecompositionCertificate cert;
    cert.tag = "FAUT_CRITICAL";
    auto add_item = [&](std::string id, std::string desc, bool pass, Json witness) {
        cert.checklist.push_back({std::move(id), std::move(desc), pass, std::move(witness)});
    };
    auto sigma = detail::sigma_family_critical(g, p, std::min(budget, 6u));
    auto phi = detail::faut_family(g, p, 2, /*include_divisible_targets=*/false);
    std::vector<ExprPtr> sigma_exprs;
    for (const auto& s : sigma) sigma_exprs.push_back(s.expr);
    cert.generator_families["sigma"] = sigma_exprs;
    cert.generator_families["phi"] = phi;
    unsigned m_prime = 0;
    for (const auto& a : g.atoms)
        if (a.is_bounded()) m_prime = std::max(m_prime, a.k);
    cert.data = Json{{"prime", p.str()}, {"exp_sigma", pow_int(p, m_prime).str()}};

    // Sigma is a bounded abelian p-group of finitary automorphisms
    {
        bool ok = true;
        for (const auto& s : sigma) {
            NormalForm nf = normalize(s.expr, g);
            if (!is_finitary(nf).is_finitary()) ok = false;
            if (!detail::power_form(nf, pow_int(p, m_prime)).is_identity()) ok = false;
        }
        for (size_t i = 0; i + 1 < sigma.size() && i < 3; ++i) {
            NormalForm a = normalize(sigma[i].expr, g), b = normalize(sigma[i + 1].expr, g);
            if (!(compose(a, b) == compose(b, a))) ok = false;
        }
        add_item("sigma-bounded-abelian",
                 "the stability group is abelian, bounded by exp(B), and finitary", ok,
                 Json(nullptr));
    }

    // conjugation by phi only disturbs stability elements inside its window
    {
        bool ok = true;
        for (const auto& f : phi) {
            NormalForm fnf = normalize(f, g);
            std::set<Slot> touched;
            for (const auto& e : fnf.entries) {
                touched.insert(e.src);
                touched.insert(e.dst);
            }
            for (const auto& s : sigma) {
                NormalForm snf = normalize(s.expr, g);
                bool inside = touched.count(s.source) > 0;
                NormalForm conj = conjugate_form(snf, fnf);
                if (!inside && !(conj == snf)) ok = false;
            }
        }
        add_item("conjugation-finitary",
                 "stability elements outside the finitary window are fixed by conjugation", ok,
                 Json(nullptr));
    }

    // faithfulness, following the max-order witness construction
    {
        bool ok = true;
        for (const auto& f : phi) {
            NormalForm fnf = normalize(f, g);
            if (fnf.is_identity()) continue;
            bool moved = false;
            for (const auto& s : sigma) {
                NormalForm snf = normalize(s.expr, g);
                if (!(conjugate_form(snf, fnf) == snf)) { moved = true; break; }
            }
            if (!moved) ok = false;
        }
        add_item("action-faithful", "every nontrivial finitary generator moves some stability "
                                    "element", ok, Json(nullptr));
    }

    // products split back over the stability group
    {
        bool ok = true;
        SubActionMap bmap = atom_subset(g, [&] {
            std::set<size_t> keep;
            for (size_t i = 0; i < g.size(); ++i)
                if (!g.at(i).is_divisible()) keep.insert(i);
            return keep;
        }());
        size_t count = 0;
        for (const auto& s : sigma_exprs)
            for (const auto& f : phi) {
                if (++count > 8) break;
                NormalForm nf = normalize(composite({s, f}), g);
                NormalForm quot = induced_on_quotient(nf, bmap);
                NormalForm lift = identity_form(g);
                for (const auto& [i, v] : quot.diag) lift.diag[bmap.atom_of[i]] = v;
                std::vector<HomEntry> es;
                for (const auto& e2 : quot.entries)
                    es.push_back(HomEntry{{bmap.atom_of[e2.src.atom], e2.src.copy},
                                          {bmap.atom_of[e2.dst.atom], e2.dst.copy},
                                          e2.lambda});
                lift.entries = canonicalize_entries(g, std::move(es));
                NormalForm spart = compose(nf, invert(lift));
                bool stab_ok = true;
                try {
                    stab_to_hom(spart, StabTag::divisible_tag());
                } catch (const Error&) { stab_ok = false; }
                ok = ok && stab_ok && compose(spart, lift) == nf;
            }
        add_item("splits", "finitary products factor as stability times a bounded-part map",
                 ok, Json(nullptr));
    }
    return cert;
}

}  // namespace inertia
