#include "inertia/subgroup.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace inertia;

namespace {

// brute-force oracle: all elements a*g1 + b*g2 with coefficients in a box
std::vector<Element> span_box(const GroupDescriptor& g, const std::vector<Element>& gens,
                              int bound) {
    std::vector<Element> out{zero_element(g)};
    for (const auto& gen : gens) {
        std::vector<Element> next;
        for (const auto& e : out)
            for (int c = -bound; c <= bound; ++c) next.push_back(add(e, scale(c, gen)));
        out = std::move(next);
    }
    return out;
}

}  // namespace

TEST_CASE("span of diagonal lattice has index 6 in Z^2") {
    auto z2 = group_of({free_z(), free_z()});
    auto h = span(z2, {make_element(z2, {{{0, 0}, Rat(2)}}),
                       make_element(z2, {{{1, 0}, Rat(3)}})});
    auto full = span(z2, {make_element(z2, {{{0, 0}, Rat(1)}}),
                          make_element(z2, {{{1, 0}, Rat(1)}})});
    REQUIRE(index(h, full) == NatOrInf::of(6));
}

TEST_CASE("span inside the Pruefer group is the cyclic layer") {
    auto p = group_of({pruefer(2)});
    auto h = span(p, {make_element(p, {{{0, 0}, Rat(1, 8)}})});
    // order 8: contains 1/8, 1/4, 1/2 but not 1/16
    REQUIRE(contains(h, make_element(p, {{{0, 0}, Rat(1, 4)}})));
    REQUIRE(contains(h, make_element(p, {{{0, 0}, Rat(5, 8)}})));
    REQUIRE_FALSE(contains(h, make_element(p, {{{0, 0}, Rat(1, 16)}})));
    auto zero = span(p, {});
    REQUIRE(index(zero, h) == NatOrInf::of(8));
}

TEST_CASE("span of the empty list is the zero subgroup") {
    auto g = group_of({free_z(), cyclic(5, 1)});
    auto z = span(g, {});
    REQUIRE_FALSE(contains(z, make_element(g, {{{1, 0}, Rat(1)}})));
    REQUIRE(contains(z, zero_element(g)));
}

TEST_CASE("sum and intersection in Z: gcd and lcm") {
    auto z = group_of({free_z()});
    auto h = span(z, {make_element(z, {{{0, 0}, Rat(2)}})});
    auto k = span(z, {make_element(z, {{{0, 0}, Rat(3)}})});
    auto lp = lattice_ops(h, k);
    REQUIRE(contains(lp.sum, make_element(z, {{{0, 0}, Rat(1)}})));
    REQUIRE(contains(lp.intersection, make_element(z, {{{0, 0}, Rat(6)}})));
    REQUIRE_FALSE(contains(lp.intersection, make_element(z, {{{0, 0}, Rat(3)}})));
}

TEST_CASE("sum and intersection in Z^2 against the brute-force oracle") {
    auto z2 = group_of({free_z(), free_z()});
    auto e1 = make_element(z2, {{{0, 0}, Rat(1)}});
    auto e2 = make_element(z2, {{{1, 0}, Rat(1)}});
    auto h = span(z2, {e1});
    auto k = span(z2, {add(e1, e2)});
    auto lp = lattice_ops(h, k);
    REQUIRE(contains(lp.sum, e2));  // sum is the whole Z^2
    // oracle: intersect the two coefficient boxes
    auto hs = span_box(z2, {e1}, 8);
    auto ks = span_box(z2, {add(e1, e2)}, 8);
    for (const auto& x : hs)
        for (const auto& y : ks)
            if (x == y) REQUIRE(contains(lp.intersection, x) == x.is_zero());
}

TEST_CASE("Pruefer chains: sum and intersection") {
    auto p = group_of({pruefer(2)});
    auto h = span(p, {make_element(p, {{{0, 0}, Rat(1, 4)}})});
    auto k = span(p, {make_element(p, {{{0, 0}, Rat(1, 8)}})});
    auto lp = lattice_ops(h, k);
    REQUIRE(index(h, lp.sum) == NatOrInf::of(2));     // sum = <1/8>
    REQUIRE(index(lp.intersection, h) == NatOrInf::of(1));  // intersection = <1/4>
}

TEST_CASE("index: spec cases and the determinant oracle") {
    auto z = group_of({free_z()});
    auto six = span(z, {make_element(z, {{{0, 0}, Rat(6)}})});
    auto two = span(z, {make_element(z, {{{0, 0}, Rat(2)}})});
    REQUIRE(index(six, two) == NatOrInf::of(3));
    REQUIRE_THROWS_AS(index(two, six), Error);  // containment violated

    auto zero = span(z, {});
    auto full = span(z, {make_element(z, {{{0, 0}, Rat(1)}})});
    REQUIRE_FALSE(index(zero, full).is_finite());

    auto z2 = group_of({free_z(), free_z()});
    auto h = span(z2, {make_element(z2, {{{0, 0}, Rat(2)}}),
                       make_element(z2, {{{1, 0}, Rat(2)}})});
    auto f2 = span(z2, {make_element(z2, {{{0, 0}, Rat(1)}}),
                        make_element(z2, {{{1, 0}, Rat(1)}})});
    // oracle: count cosets by checking pairwise differences over a box that
    // covers Z^2 / <(2,0),(0,2)>
    std::vector<Element> reps;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            reps.push_back(make_element(z2, {{{0, 0}, Rat(a)}, {{1, 0}, Rat(b)}}));
    int cosets = 0;
    for (size_t i = 0; i < reps.size(); ++i) {
        bool fresh = true;
        for (size_t j = 0; j < i; ++j)
            if (contains(h, sub(reps[i], reps[j]))) fresh = false;
        if (fresh) ++cosets;
    }
    REQUIRE(cosets == 4);
    REQUIRE(index(h, f2) == NatOrInf::of(cosets));
}

TEST_CASE("commensurability: spec cases") {
    auto z = group_of({free_z()});
    REQUIRE(commensurable(span(z, {make_element(z, {{{0, 0}, Rat(2)}})}),
                          span(z, {make_element(z, {{{0, 0}, Rat(3)}})})));

    auto z2 = group_of({free_z(), free_z()});
    auto ex = make_element(z2, {{{0, 0}, Rat(1)}});
    auto ey = make_element(z2, {{{1, 0}, Rat(1)}});
    REQUIRE_FALSE(commensurable(span(z2, {ex}), span(z2, {ey})));

    // rank mismatch detected by intersection rank
    auto h = span(z2, {ex, scale(2, ey)});
    auto k = span(z2, {add(ex, ey)});
    REQUIRE_FALSE(commensurable(h, k));
    // brute-force confirmation: the intersection has rank 1
    auto lp = lattice_ops(h, k);
    REQUIRE(contains(lp.intersection, scale(2, add(ex, ey))));
    REQUIRE_FALSE(index(lp.intersection, h).is_finite());
}

TEST_CASE("commensurability is an equivalence on a finite family") {
    auto z2 = group_of({free_z(), free_z()});
    auto ex = make_element(z2, {{{0, 0}, Rat(1)}});
    auto ey = make_element(z2, {{{1, 0}, Rat(1)}});
    std::vector<Subgroup> fam = {
        span(z2, {ex, ey}),
        span(z2, {scale(2, ex), ey}),
        span(z2, {scale(3, ex), scale(5, ey)}),
        span(z2, {ex}),
        span(z2, {scale(4, ex)}),
    };
    for (const auto& h : fam) REQUIRE(commensurable(h, h));
    for (size_t i = 0; i < fam.size(); ++i)
        for (size_t j = 0; j < fam.size(); ++j)
            REQUIRE(commensurable(fam[i], fam[j]) == commensurable(fam[j], fam[i]));
    for (size_t i = 0; i < fam.size(); ++i)
        for (size_t j = 0; j < fam.size(); ++j)
            for (size_t k = 0; k < fam.size(); ++k)
                if (commensurable(fam[i], fam[j]) && commensurable(fam[j], fam[k]))
                    REQUIRE(commensurable(fam[i], fam[k]));
}

TEST_CASE("adding a finite subgroup preserves commensurability") {
    auto g = group_of({cyclic(3, 2), free_z()});
    auto e = make_element(g, {{{1, 0}, Rat(1)}});
    auto t = make_element(g, {{{0, 0}, Rat(1)}});
    std::vector<Subgroup> hs = {span(g, {e}), span(g, {scale(3, e), t}), span(g, {add(t, e)})};
    auto f = span(g, {t});
    for (const auto& h : hs) {
        std::vector<Element> gens = h.generators;
        gens.insert(gens.end(), f.generators.begin(), f.generators.end());
        REQUIRE(commensurable(h, span(g, gens)));
    }
}

TEST_CASE("index is multiplicative along chains") {
    auto z2 = group_of({free_z(), free_z()});
    auto ex = make_element(z2, {{{0, 0}, Rat(1)}});
    auto ey = make_element(z2, {{{1, 0}, Rat(1)}});
    auto l = span(z2, {ex, ey});
    auto k = span(z2, {scale(2, ex), ey});
    auto h = span(z2, {scale(6, ex), scale(2, ey)});
    auto ih_k = index(h, k), ik_l = index(k, l), ih_l = index(h, l);
    REQUIRE(ih_k.is_finite());
    REQUIRE(ih_l.value == ik_l.value * ih_k.value);
}

TEST_CASE("window enlargement never changes an index") {
    auto g = group_of({pruefer(3), localized_q(2)});
    auto a = make_element(g, {{{0, 0}, Rat(1, 9)}, {{1, 0}, Rat(1, 2)}});
    auto b = make_element(g, {{{1, 0}, Rat(3, 4)}});
    auto h = span(g, {a});
    auto k = span(g, {a, b});
    NatOrInf before = index(h, k);
    // rebuild both subgroups in a deeper window
    Window deep = merge_windows(h.window, k.window);
    for (auto& [atom, d] : deep.depth) d += 1;
    NatOrInf after = index(rebase(h, deep), rebase(k, deep));
    REQUIRE(before == after);
    REQUIRE(commensurable(h, k) == commensurable(rebase(h, deep), rebase(k, deep)));
}

TEST_CASE("normal forms are canonical within a window") {
    auto z2 = group_of({free_z(), free_z()});
    auto ex = make_element(z2, {{{0, 0}, Rat(1)}});
    auto ey = make_element(z2, {{{1, 0}, Rat(1)}});
    auto h1 = span(z2, {add(ex, ey), scale(2, ey)});
    auto h2 = span(z2, {add(ex, negate(ey)), scale(2, ey)});
    Window w = merge_windows(h1.window, h2.window);
    REQUIRE(rebase(h1, w) == rebase(h2, w));
}

TEST_CASE("subgroup JSON round-trip") {
    auto g = group_of({pruefer(2), free_z()});
    auto h = span(g, {make_element(g, {{{0, 0}, Rat(1, 2)}, {{1, 0}, Rat(1)}})});
    auto j = subgroup_to_json(h);
    auto h2 = subgroup_from_json(g, j);
    Window w = merge_windows(h.window, h2.window);
    REQUIRE(rebase(h, w) == rebase(h2, w));
}
