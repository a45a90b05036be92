#pragma once

#include "inertia/certificates.hpp"

namespace inertia {

// ---- periodic assembly (per-prime certificates glued together) ----

inline DecompositionCertificate decompose_periodic(const GroupDescriptor& g,
                                                   unsigned budget = 6) {
    if (!g.is_periodic()) throw Error("decompose_periodic: the group is not periodic");
    auto rep = structural_report(g);
    DecompositionCertificate cert;
    cert.tag = "THEOREM_A";
    auto add_item = [&](std::string id, std::string desc, bool pass, Json witness) {
        cert.checklist.push_back({std::move(id), std::move(desc), pass, std::move(witness)});
    };

    std::vector<Int> pi, critical;
    Json per_prime = Json::object();
    std::map<Int, DecompositionCertificate> subcerts;
    for (const auto& [p, comp] : rep.primary) {
        SubActionMap m = atom_subset(g, primary_atoms(g, p));
        DecompositionCertificate sub = decompose_p_group(m.sub, budget);
        // lift the generator families into the ambient descriptor
        for (const auto& [name, fam] : sub.generator_families) {
            std::string key = name + "_" + p.str();
            for (const auto& e : fam)
                cert.generator_families[key].push_back(remap_expr(e, m.atom_of, m.sub));
        }
        per_prime[p.str()] =
            Json{{"tag", sub.tag}, {"data", sub.data}, {"all_pass", sub.all_pass()}};
        if (rep.critical_primes.count(p)) critical.push_back(p);
        else pi.push_back(p);
        subcerts[p] = std::move(sub);
    }
    cert.data = Json{{"pi", [&] {
                          Json a = Json::array();
                          for (const auto& p : pi) a.push_back(p.str());
                          return a;
                      }()},
                     {"critical_primes", [&] {
                          Json a = Json::array();
                          for (const auto& p : critical) a.push_back(p.str());
                          return a;
                      }()},
                     {"per_prime", per_prime}};

    bool subs_ok = true;
    for (auto& [p, sub] : subcerts) subs_ok = subs_ok && sub.all_pass();
    add_item("per-prime-certificates", "every primary component certificate verifies", subs_ok,
             Json(nullptr));

    // reduced groups have no critical primes, so the delta block is empty
    bool reduced = divisible_atoms(g).empty();
    add_item("delta-trivial-when-reduced",
             "a reduced group yields an empty delta block", !reduced || critical.empty(),
             Json{{"reduced", reduced}});

    // sample inertial elements assembled from the per-prime families and
    // refactor them as (power) * (finitary) * (delta)
    {
        bool ok = true;
        std::vector<ExprPtr> samples;
        std::vector<ExprPtr> pool;
        for (const auto& [name, fam] : cert.generator_families)
            for (const auto& e : fam) pool.push_back(e);
        for (size_t i = 0; i < pool.size(); ++i)
            samples.push_back(i + 1 < pool.size() ? composite({pool[i], pool[i + 1]}) : pool[i]);
        if (samples.size() > 8) samples.resize(8);
        Json wit = Json::array();
        for (const auto& s : samples) {
            NormalForm nf = normalize(s, g);
            Verdict v = is_inertial(nf);
            if (v.status != Verdict::INERTIAL) { ok = false; continue; }
            // per-prime power part and delta part
            std::map<size_t, ExprPtr> pow_assign, delta_assign;
            bool factor_ok = true;
            for (const auto& [p, comp] : rep.primary) {
                SubActionMap m = atom_subset(g, primary_atoms(g, p));
                NormalForm sub = restrict_to(nf, m);
                if (rep.critical_primes.count(p)) {
                    auto rd = exact_scalar(restrict_to(sub, atom_subset(m.sub, divisible_atoms(m.sub))));
                    if (!rd) { factor_ok = false; break; }
                    auto quot = induced_on_quotient(sub, atom_subset(m.sub, [&] {
                        std::set<size_t> keep;
                        for (size_t i = 0; i < m.sub.size(); ++i)
                            if (!m.sub.at(i).is_divisible()) keep.insert(i);
                        return keep;
                    }()));
                    auto rb = multiplication_certificate(quot, Region::finite_index);
                    if (!rb) { factor_ok = false; break; }
                    unsigned mp = 0;
                    for (const auto& a : m.sub.atoms)
                        if (a.is_bounded()) mp = std::max(mp, a.k);
                    Int pm = pow_int(p, mp);
                    Int n = residue_mod(rb->multiplier / *rd, pm);
                    for (size_t i = 0; i < g.size(); ++i) {
                        const Atom& a = g.at(i);
                        if (!a.is_torsion() || a.p != p) continue;
                        pow_assign[i] = rat_mult(num(*rd), den(*rd));
                        if (a.is_bounded() && n != 1) delta_assign[i] = rat_mult(n, 1);
                    }
                } else {
                    auto fi = multiplication_certificate(sub, Region::finite_index);
                    if (!fi) { factor_ok = false; break; }
                    for (size_t i = 0; i < g.size(); ++i) {
                        const Atom& a = g.at(i);
                        if (a.is_torsion() && a.p == p)
                            pow_assign[i] = rat_mult(num(fi->multiplier), den(fi->multiplier));
                    }
                }
            }
            if (!factor_ok) { ok = false; continue; }
            ExprPtr pow_part = block_sum(pow_assign);
            ExprPtr delta_part = block_sum(delta_assign);
            NormalForm pw = normalize(pow_part, g), dl = normalize(delta_part, g);
            NormalForm rest = compose(nf, invert(compose(pw, dl)));
            bool fin = is_finitary(rest).is_finitary();
            bool recompose = compose(compose(pw, rest), dl) == nf;
            // power part is central: verify one commutator
            bool central = compose(pw, nf) == compose(nf, pw);
            ok = ok && fin && recompose && central;
            wit.push_back(Json{{"finitary_rest", fin},
                               {"recomposes", recompose},
                               {"power_central", central}});
        }
        add_item("paut-faut-delta-display",
                 "sampled inertial elements factor as power * finitary * delta with a central "
                 "power part",
                 ok, wit);
    }

    // the finitary-delta block splits over the non-critical primes: cross-prime
    // components commute and every mixed product separates again
    {
        bool ok = true;
        std::vector<std::pair<Int, ExprPtr>> by_prime;
        for (const auto& [p, comp] : rep.primary) {
            auto fam = cert.generator_families.find("faut_" + p.str());
            if (fam != cert.generator_families.end() && !fam->second.empty())
                by_prime.push_back({p, fam->second.front()});
        }
        for (size_t i = 0; i < by_prime.size(); ++i)
            for (size_t j = i + 1; j < by_prime.size(); ++j) {
                NormalForm a = normalize(by_prime[i].second, g);
                NormalForm b = normalize(by_prime[j].second, g);
                if (!(compose(a, b) == compose(b, a))) ok = false;
            }
        add_item("cross-prime-commute", "components over distinct primes commute exactly", ok,
                 Json(nullptr));
    }

    return cert;
}

// ---- Theorem-C-style splitting over the torsion subgroup ----

struct SigmaDescriptor {
    GroupDescriptor sigma_group;  // an abstract descriptor for Hom(A/T, T)
    // one block of target-atom copies per torsion-free source atom
    std::vector<std::pair<size_t, std::vector<size_t>>> blocks;  // (tf atom, ambient targets)
};

// Builds the abstract stability group Hom(A/T, T) as a descriptor: one copy
// of each admissible torsion atom per torsion-free source.
inline SigmaDescriptor sigma_descriptor(const GroupDescriptor& g) {
    SigmaDescriptor out;
    for (size_t s = 0; s < g.size(); ++s) {
        if (!g.at(s).is_torsion_free()) continue;
        std::vector<size_t> targets;
        for (size_t t = 0; t < g.size(); ++t) {
            const Atom& at = g.at(t);
            if (!at.is_torsion()) continue;
            if (g.at(s).kind == AtomKind::localized_q && g.at(s).p == at.p) continue;  // Hom = 0
            targets.push_back(t);
            out.sigma_group.atoms.push_back(at);
        }
        out.blocks.push_back({s, targets});
    }
    return out;
}

// the conjugation action of tau (an automorphism of T, given on the ambient
// descriptor) on the abstract stability group
inline NormalForm sigma_conjugation_action(const NormalForm& ambient_tau,
                                           const GroupDescriptor& g,
                                           const SigmaDescriptor& sd) {
    NormalForm out = identity_form(sd.sigma_group);
    size_t base = 0;
    std::vector<HomEntry> es;
    for (const auto& [src, targets] : sd.blocks) {
        std::map<size_t, size_t> pos;  // ambient torsion atom -> sigma atom index
        for (size_t k = 0; k < targets.size(); ++k) pos[targets[k]] = base + k;
        for (size_t k = 0; k < targets.size(); ++k) {
            size_t t = targets[k];
            if (g.at(t).is_omega()) out.diag[base + k] = nf_diag_at(ambient_tau, t);
        }
        for (const auto& e : ambient_tau.entries) {
            auto is_target = [&](size_t atom) { return pos.count(atom) > 0; };
            if (!is_target(e.src.atom) || !is_target(e.dst.atom)) continue;
            es.push_back(HomEntry{{pos[e.src.atom], e.src.copy},
                                  {pos[e.dst.atom], e.dst.copy},
                                  e.lambda});
        }
        base += targets.size();
    }
    out.entries = canonicalize_entries(sd.sigma_group, std::move(es));
    return out;
}

inline DecompositionCertificate split_on_torsion(const GroupDescriptor& g, unsigned budget = 6) {
    auto rep = structural_report(g);
    if (g.is_periodic() || !rep.r0.is_finite())
        throw Error("split_on_torsion: requires a non-periodic group of finite rank");
    bool t_bounded = rep.torsion.is_bounded();
    bool quot_fg = true;
    for (const auto& a : g.atoms)
        if (a.kind == AtomKind::localized_q) quot_fg = false;
    if (!t_bounded && !quot_fg)
        throw Error("split_on_torsion: needs bounded torsion or a finitely generated quotient");

    DecompositionCertificate cert;
    cert.tag = quot_fg ? "THEOREM_C_FG_QUOTIENT" : "THEOREM_C_BOUNDED_T";
    auto add_item = [&](std::string id, std::string desc, bool pass, Json witness) {
        cert.checklist.push_back({std::move(id), std::move(desc), pass, std::move(witness)});
    };

    // stability generators Hom(A/T, T)
    std::vector<ExprPtr> sigma;
    for (size_t s = 0; s < g.size(); ++s) {
        if (!g.at(s).is_torsion_free()) continue;
        for (size_t t = 0; t < g.size(); ++t) {
            const Atom& at = g.at(t);
            if (!at.is_torsion()) continue;
            if (g.at(s).kind == AtomKind::localized_q && g.at(s).p == at.p) continue;
            if (at.is_bounded()) {
                size_t copies = at.is_omega() ? 2 : 1;
                for (size_t c = 0; c < copies; ++c) {
                    HomData h{StabTag::torsion_tag(), {HomEntry{{s, 0}, {t, c}, Rat(1)}}};
                    sigma.push_back(one_plus_hom(h));
                }
            } else {
                for (unsigned j = 1; j <= std::min(budget, 3u); ++j) {
                    HomData h{StabTag::torsion_tag(),
                              {HomEntry{{s, 0}, {t, 0}, Rat(1, pow_int(at.p, j))}}};
                    sigma.push_back(one_plus_hom(h));
                }
            }
        }
    }
    cert.generator_families["sigma"] = sigma;

    // Gamma_1: generators of IAut(T), extended by the identity
    std::vector<ExprPtr> gamma1;
    for (const auto& [p, comp] : rep.primary) {
        for (const auto& e : detail::paut_family(g, p)) gamma1.push_back(e);
        for (const auto& e : detail::faut_family(g, p)) gamma1.push_back(e);
        if (rep.critical_primes.count(p)) {
            unsigned mp = 0;
            for (const auto& a : comp.atoms)
                if (a.is_bounded()) mp = std::max(mp, a.k);
            Int n = p == 2 ? Int(-1) : primitive_root(p, mp);
            gamma1.push_back(detail::delta_n_expr(g, p, n));
        }
    }
    cert.generator_families["gamma1"] = gamma1;
    cert.data = Json{{"torsion_bounded", t_bounded}, {"quotient_fg", quot_fg}};

    // sigma generators: stability shape, abelian, inertial
    {
        bool ok = true;
        for (const auto& s : sigma) {
            NormalForm nf = normalize(s, g);
            try {
                stab_to_hom(nf, StabTag::torsion_tag());
            } catch (const Error&) { ok = false; }
            if (is_inertial(nf).status != Verdict::INERTIAL) ok = false;
        }
        for (size_t i = 0; i + 1 < sigma.size() && i < 4; ++i) {
            NormalForm a = normalize(sigma[i], g), b = normalize(sigma[i + 1], g);
            if (!(compose(a, b) == compose(b, a))) ok = false;
        }
        add_item("sigma-structure", "stability generators are abelian and inertial", ok,
                 Json(nullptr));
    }

    // the split: sampled products sigma * gamma1 factor back uniquely
    {
        bool ok = true;
        size_t count = 0;
        for (const auto& se : sigma) {
            for (const auto& ge : gamma1) {
                if (++count > 10) break;
                NormalForm nf = normalize(composite({se, ge}), g);
                // torsion part extended by the identity
                NormalForm tpart = identity_form(g);
                for (const auto& [i, v] : nf.diag)
                    if (g.at(i).is_torsion()) tpart.diag[i] = v;
                std::vector<HomEntry> es;
                for (const auto& e : nf.entries)
                    if (g.at(e.src.atom).is_torsion()) es.push_back(e);
                tpart.entries = canonicalize_entries(g, std::move(es));
                NormalForm spart = compose(nf, invert(tpart));
                bool stab_ok = true;
                try {
                    stab_to_hom(spart, StabTag::torsion_tag());
                } catch (const Error&) { stab_ok = false; }
                ok = ok && stab_ok && compose(spart, tpart) == nf;
            }
        }
        add_item("splits-over-sigma",
                 "sampled elements factor as a stability part times a torsion automorphism", ok,
                 Json(nullptr));
    }

    // Gamma_1 acts on Sigma by inertial automorphisms (checked on the
    // abstract stability descriptor)
    {
        SigmaDescriptor sd = sigma_descriptor(g);
        bool ok = true;
        Json wit = Json::array();
        for (const auto& ge : gamma1) {
            NormalForm tau = normalize(ge, g);
            NormalForm action = sigma_conjugation_action(tau, g, sd);
            Verdict v = is_inertial(action);
            bool pass = v.status == Verdict::INERTIAL;
            if (!pass) ok = false;
            wit.push_back(Json{{"verdict", pass ? "INERTIAL" : "NOT_INERTIAL"}});
        }
        add_item("conjugation-inertial",
                 "the induced conjugation action on the stability group is inertial", ok, wit);
    }

    // faithfulness of the action when A/T is finitely generated and nonzero
    if (quot_fg && rep.r0.value > 0 && !rep.primary.empty()) {
        bool ok = true;
        for (const auto& ge : gamma1) {
            NormalForm tau = normalize(ge, g);
            if (tau.is_identity()) continue;
            bool moved = false;
            for (const auto& se : sigma) {
                NormalForm snf = normalize(se, g);
                if (!(conjugate_form(snf, tau) == snf)) { moved = true; break; }
            }
            // deeper stability layers may be needed for unbounded targets
            if (!moved) {
                for (size_t s = 0; s < g.size() && !moved; ++s) {
                    if (!g.at(s).is_torsion_free()) continue;
                    for (size_t t = 0; t < g.size() && !moved; ++t) {
                        if (g.at(t).kind != AtomKind::pruefer) continue;
                        for (unsigned j = 4; j <= 6; ++j) {
                            HomData h{StabTag::torsion_tag(),
                                      {HomEntry{{s, 0}, {t, 0}, Rat(1, pow_int(g.at(t).p, j))}}};
                            NormalForm snf = normalize(one_plus_hom(h), g);
                            if (!(conjugate_form(snf, tau) == snf)) { moved = true; break; }
                        }
                    }
                }
            }
            if (!moved) ok = false;
        }
        add_item("action-faithful",
                 "every nontrivial torsion automorphism moves some stability element", ok,
                 Json(nullptr));
    }

    return cert;
}

// The non-nilpotency witness: mu = alpha (+) 1 with alpha a non-periodic
// multiplication of the torsion part; Sigma(mu^s - 1)^n is exhibited nonzero.
struct NonNilpotencyWitness {
    bool established = false;
    Json details = Json::array();
};

inline NonNilpotencyWitness non_nilpotency_witness(const GroupDescriptor& g, const Int& alpha_m,
                                                   const std::vector<long long>& s_values,
                                                   unsigned n_max) {
    auto rep = structural_report(g);
    NonNilpotencyWitness out;
    // alpha acts on the unbounded torsion part
    std::optional<Int> p0;
    for (const auto& a : g.atoms)
        if (a.kind == AtomKind::pruefer) p0 = a.p;
    if (!p0) throw Error("non_nilpotency_witness: no unbounded torsion component");
    if (alpha_m % *p0 == 0) throw Error("non_nilpotency_witness: alpha must be a p-adic unit");
    size_t tf_atom = SIZE_MAX, pruefer_atom = SIZE_MAX;
    for (size_t i = 0; i < g.size(); ++i) {
        if (g.at(i).kind == AtomKind::free_z && tf_atom == SIZE_MAX) tf_atom = i;
        if (g.at(i).kind == AtomKind::pruefer && g.at(i).p == *p0) pruefer_atom = i;
    }
    if (tf_atom == SIZE_MAX) throw Error("non_nilpotency_witness: needs a free summand");
    ExprPtr mu = p_adic_rat(*p0, alpha_m, 1);
    NormalForm munf = normalize(mu, g);
    if (is_inertial(munf).status != Verdict::INERTIAL)
        throw Error("non_nilpotency_witness: mu is not inertial");
    bool all = true;
    for (long long s : s_values) {
        NormalForm mus = detail::power_form(munf, s);
        for (unsigned n = 1; n <= n_max; ++n) {
            // start deep enough that n steps cannot annihilate the hom
            HomData h{StabTag::torsion_tag(),
                      {HomEntry{{tf_atom, 0}, {pruefer_atom, 0}, Rat(1, pow_int(*p0, n + 1))}}};
            NormalForm sigma = normalize(one_plus_hom(h), g);
            NormalForm cur = sigma;
            for (unsigned i = 0; i < n; ++i)
                cur = compose(invert(cur), conjugate_form(cur, mus));  // [cur, mu^s]
            bool nonzero = !cur.is_identity();
            Element probe = slot_generator(g, {tf_atom, 0}, 0);
            Element moved = sub(apply(cur, probe), probe);
            out.details.push_back(Json{{"s", s},
                                       {"n", n},
                                       {"nonzero", nonzero},
                                       {"witness_element", element_to_json(moved)}});
            if (!nonzero || moved.is_zero()) all = false;
        }
    }
    (void)rep;
    out.established = all;
    return out;
}

// ---- commutator normality check (the KI property of the derived subgroup) ----

struct KiReport {
    bool all_normal = true;
    Json items = Json::array();
};

inline KiReport ki_check(const std::vector<ExprPtr>& gens, const GroupDescriptor& g,
                         unsigned power_budget = 64) {
    auto rep = structural_report(g);
    KiReport out;
    std::vector<NormalForm> forms;
    for (const auto& e : gens) {
        NormalForm nf = normalize(e, g);
        // each generator must act trivially modulo torsion and by a
        // multiplication on every primary component
        if (!induced_on_quotient(nf, atom_subset(g, torsion_free_atoms(g))).is_identity())
            throw Error("ki_check: generator does not act trivially modulo torsion");
        for (const auto& [p, comp] : rep.primary) {
            NormalForm sub = restrict_to(nf, atom_subset(g, primary_atoms(g, p)));
            if (!exact_scalar(sub))
                throw Error("ki_check: generator is not a multiplication on the " + p.str() +
                            "-component");
        }
        forms.push_back(std::move(nf));
    }
    for (size_t i = 0; i < forms.size(); ++i)
        for (size_t j = 0; j < forms.size(); ++j) {
            if (i == j) continue;
            NormalForm c = compose(compose(invert(forms[i]), invert(forms[j])),
                                   compose(forms[i], forms[j]));
            bool stab = true;
            try {
                stab_to_hom(c, StabTag::torsion_tag());
            } catch (const Error&) { stab = false; }
            if (c.is_identity()) {
                out.items.push_back(Json{{"pair", {i, j}}, {"commutator", "identity"}});
                continue;
            }
            // <c> must be normal under every generator: c^gamma is a power of c
            bool normal = true;
            Json powers = Json::array();
            for (size_t k = 0; k < forms.size(); ++k) {
                NormalForm conj = conjugate_form(c, forms[k]);
                std::optional<unsigned> found;
                NormalForm acc = identity_form(g);
                for (unsigned m = 0; m <= power_budget; ++m) {
                    if (acc == conj) { found = m; break; }
                    acc = compose(acc, c);
                }
                if (!found) normal = false;
                powers.push_back(found ? Json(*found) : Json(nullptr));
            }
            if (!normal) out.all_normal = false;
            out.items.push_back(Json{{"pair", {i, j}},
                                     {"stability", stab},
                                     {"normal", normal},
                                     {"conjugate_powers", powers}});
        }
    return out;
}

// ---- the per-prime coordinate witness of the large-IAut1 construction ----

struct CoordinateWitnessReport {
    bool all_pass = true;
    Json per_prime = Json::array();
    Json out_of_scope = Json::array();
};

inline CoordinateWitnessReport counterexample_witness(const Int& prime_cutoff,
                                                      bool negative_control = false) {
    if (prime_cutoff < 2) throw Error("counterexample_witness: cutoff must be at least 2");
    CoordinateWitnessReport out;
    for (Int p = 2; p <= prime_cutoff; ++p) {
        if (!is_prime(p)) continue;
        // arithmetic layer: b of order p, c of order p^2, v = b + p c, d = c
        GroupDescriptor gp = group_of({cyclic(p, 1), cyclic(p, 2)});
        Element b = negative_control ? zero_element(gp)
                                     : make_element(gp, {{{0, 0}, Rat(1)}});
        Element b_orig = make_element(gp, {{{0, 0}, Rat(1)}});
        Element c = make_element(gp, {{{1, 0}, Rat(1)}});
        Element v = add(b, scale(p, c));
        Element d = c;
        bool identity_holds = scale(p, d) == sub(v, b_orig);
        // stability layer: the d-line against the order-p socle
        GroupDescriptor ap = group_of({cyclic(p, 1), free_z()});
        size_t count = 0;
        std::set<std::string> distinct;
        bool finitary_all = true;
        for (Int j = 0; j < p; ++j) {
            HomData h{StabTag::torsion_tag(), {HomEntry{{1, 0}, {0, 0}, Rat(j)}}};
            NormalForm nf = normalize(one_plus_hom(h), ap);
            std::string key;
            for (const auto& en : nf.entries) key += rat_str(en.lambda) + ";";
            distinct.insert(key);
            if (!is_finitary(nf).is_finitary()) finitary_all = false;
            ++count;
        }
        bool sigma_p_ok = distinct.size() == static_cast<size_t>(p.convert_to<long long>());
        if (!identity_holds || !sigma_p_ok || !finitary_all) out.all_pass = false;
        out.per_prime.push_back(Json{{"p", p.str()},
                                     {"identity_p_d_eq_v_minus_b", identity_holds},
                                     {"stability_freedom", count},
                                     {"distinct_stability_elements", distinct.size()},
                                     {"finitary", finitary_all}});
    }
    out.out_of_scope.push_back(
        "the formal product of the stability elements over all primes is aperiodic and "
        "non-finitary; asserted, not verified");
    out.out_of_scope.push_back(
        "the untruncated quotient A/T and the full product structure of the stability group "
        "are asserted, not verified");
    return out;
}

}  // namespace inertia
