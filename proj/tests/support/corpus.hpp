#pragma once

#include "inertia/scenario.hpp"

#include <random>

namespace testsupport {

using namespace inertia;

inline std::vector<GroupDescriptor> corpus_descriptors() {
    return {
        group_of({pruefer(2), localized_q(2)}),
        group_of({pruefer(3), localized_q(3)}),
        group_of({pruefer(5), localized_q(5)}),
        group_of({pruefer(2), cyclic_omega(2, 2)}),
        group_of({pruefer(3), cyclic_omega(3, 1)}),
        group_of({cyclic_omega(2, 1)}),
        group_of({cyclic_omega(3, 2)}),
        group_of({cyclic_omega(2, 3), cyclic(2, 1)}),
        group_of({free_z()}),
        group_of({free_z(), free_z()}),
        group_of({localized_q(2)}),
        group_of({localized_q(3)}),
        group_of({localized_q(5)}),
        group_of({cyclic(2, 3), cyclic_omega(2, 2)}),
        group_of({cyclic(3, 2), cyclic_omega(3, 1)}),
        group_of({cyclic(3, 1), localized_q(3)}),
        group_of({cyclic(2, 2), cyclic(3, 1), localized_q(2)}),
        group_of({pruefer(3), free_z()}),
        group_of({pruefer(5), free_z()}),
        group_of({cyclic(2, 1), free_z()}),
        group_of({cyclic(2, 1), cyclic(3, 2)}),
        group_of({free_z_omega(), cyclic_omega(3, 2)}),
        group_of({pruefer(2)}),
        group_of({pruefer(2), cyclic_omega(2, 2), cyclic(3, 1)}),
    };
}

// A deterministic sampler of structured expressions over a descriptor. Most
// candidates validate; invalid ones are filtered by the caller.
struct ExprSampler {
    std::mt19937_64 rng;
    const GroupDescriptor& g;

    ExprSampler(uint64_t seed, const GroupDescriptor& group) : rng(seed), g(group) {}

    Int pick_prime() {
        std::vector<Int> ps;
        for (const auto& a : g.atoms)
            if (a.has_prime() && a.p != 0) ps.push_back(a.p);
        if (ps.empty()) return 2;
        return ps[rng() % ps.size()];
    }

    ExprPtr leaf() {
        switch (rng() % 6) {
            case 0: return identity_expr();
            case 1: return negation_expr();
            case 2: {
                Int p = pick_prime();
                Int units[] = {2, 3, 5, 7, -1};
                Int u = units[rng() % 5];
                if (u % p == 0) u = u + 1 == p ? u + 2 : u + 1;
                return p_adic_rat(p, u, 1);
            }
            case 3: {
                // per-atom multiplications
                std::map<size_t, ExprPtr> assign;
                for (size_t i = 0; i < g.size(); ++i) {
                    switch (rng() % 4) {
                        case 0: break;  // identity
                        case 1: assign[i] = negation_expr(); break;
                        case 2: {
                            const Atom& a = g.at(i);
                            if (a.kind == AtomKind::localized_q)
                                assign[i] = rng() % 2 ? rat_mult(a.p, 1) : rat_mult(1, a.p);
                            else if (a.is_torsion())
                                assign[i] = rat_mult(a.p == 2 ? 3 : 2, 1);
                            break;
                        }
                        default: {
                            const Atom& a = g.at(i);
                            if (a.is_torsion())
                                assign[i] = rat_mult(a.p == 2 ? Int(5) : Int(a.p - 1), 1);
                            break;
                        }
                    }
                }
                return block_sum(std::move(assign));
            }
            case 4: {
                // one random hom entry
                size_t si = rng() % g.size(), di = rng() % g.size();
                Slot src{si, g.at(si).is_omega() ? rng() % 3 : 0};
                Slot dst{di, g.at(di).is_omega() ? rng() % 3 : 0};
                const Atom& sa = g.at(si);
                const Atom& da = g.at(di);
                Rat lam;
                if (da.kind == AtomKind::pruefer)
                    lam = Rat(1, pow_int(da.p, 1 + rng() % 2));
                else if (da.is_bounded())
                    lam = Rat(Int(1 + rng() % 3) *
                              (sa.is_bounded() && sa.p == da.p && da.k > sa.k
                                   ? pow_int(da.p, da.k - sa.k)
                                   : Int(1)));
                else
                    lam = Rat(Int(rng() % 3) - 1);
                if (lam == 0) return identity_expr();
                HomData h{StabTag{}, {HomEntry{src, dst, lam}}};
                return one_plus_hom(h);
            }
            default: {
                auto rep = structural_report(g);
                if (!rep.pi_star.cofinite && !rep.pi_star.primes.empty())
                    return p_shift_expr(g, rep.pi_star.primes[rng() % rep.pi_star.primes.size()]);
                return negation_expr();
            }
        }
    }

    ExprPtr sample(unsigned depth = 2) {
        if (depth == 0 || rng() % 3 == 0) return leaf();
        switch (rng() % 3) {
            case 0: return composite({sample(depth - 1), sample(depth - 1)});
            case 1: return inverse_expr(sample(depth - 1));
            default: return leaf();
        }
    }
};

struct ValidCorpus {
    std::vector<std::pair<GroupDescriptor, NormalForm>> entries;
    size_t attempted = 0;
};

inline ValidCorpus build_valid_corpus(size_t per_group, uint64_t seed) {
    ValidCorpus out;
    auto groups = corpus_descriptors();
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        ExprSampler sampler(seed + gi, groups[gi]);
        size_t got = 0, tries = 0;
        while (got < per_group && tries < per_group * 30) {
            ++tries;
            ++out.attempted;
            ExprPtr e = sampler.sample();
            ValidityReport vr = validate(e, groups[gi]);
            if (!vr.valid) continue;
            out.entries.push_back({groups[gi], *vr.form});
            ++got;
        }
    }
    return out;
}

}  // namespace testsupport
