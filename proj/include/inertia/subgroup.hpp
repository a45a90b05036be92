#pragma once

#include "inertia/element.hpp"
#include "inertia/intmat.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace inertia {

// A finite window: a finitely generated subgroup of the ambient that contains
// every element under consideration. Pruefer and localizedQ atoms are tracked
// up to a depth p^depth; the window's group is then a finite direct sum of
// cyclic and infinite-cyclic slots, which makes every lattice computation an
// exact integer-matrix problem.
struct Window {
    GroupDescriptor group;
    std::vector<Slot> slots;            // sorted
    std::map<size_t, unsigned> depth;   // atom index -> truncation depth

    size_t slot_index(const Slot& s) const {
        auto it = std::lower_bound(slots.begin(), slots.end(), s);
        if (it == slots.end() || !(*it == s)) throw Error("slot not in window");
        return static_cast<size_t>(it - slots.begin());
    }
    bool has_slot(const Slot& s) const {
        auto it = std::lower_bound(slots.begin(), slots.end(), s);
        return it != slots.end() && *it == s;
    }
    // order of the slot generator inside the window (0 = infinite)
    Int slot_order(size_t i) const {
        const Atom& a = group.at(slots[i].atom);
        switch (a.kind) {
            case AtomKind::cyclic:
            case AtomKind::cyclic_omega: return a.copy_order();
            case AtomKind::pruefer: return pow_int(a.p, depth.at(slots[i].atom));
            default: return 0;
        }
    }
    // the window generator of slot i as an ambient element
    Element generator(size_t i) const {
        const Atom& a = group.at(slots[i].atom);
        unsigned d = 0;
        if (a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q)
            d = depth.at(slots[i].atom);
        return slot_generator(group, slots[i], d);
    }
};

inline unsigned coord_depth(const Atom& a, const Rat& v) {
    if (a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q) {
        Int d = den(v);
        return valuation(d, a.p);
    }
    return 0;
}

// Window spanning the supports of the given elements, with one extra level of
// depth slack on divisible coordinates.
inline Window make_window(const GroupDescriptor& g, const std::vector<Element>& elems,
                          const std::vector<Slot>& extra_slots = {}, unsigned extra_depth = 1) {
    Window w;
    w.group = g;
    std::set<Slot> slots(extra_slots.begin(), extra_slots.end());
    std::map<size_t, unsigned> depth;
    for (size_t i = 0; i < g.size(); ++i) {
        const Atom& a = g.at(i);
        if (a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q) depth[i] = 1;
    }
    for (const auto& e : elems)
        for (const auto& [s, v] : e.coords) {
            slots.insert(s);
            const Atom& a = g.at(s.atom);
            if (a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q)
                depth[s.atom] = std::max(depth[s.atom], coord_depth(a, v) + extra_depth);
        }
    for (const auto& s : slots) {
        check_slot(g, s);
        const Atom& a = g.at(s.atom);
        if (a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q)
            depth[s.atom] = std::max(depth[s.atom], extra_depth);
    }
    w.slots.assign(slots.begin(), slots.end());
    for (auto& [atom, d] : depth) w.depth[atom] = d;
    return w;
}

inline Window merge_windows(const Window& a, const Window& b) {
    if (!(a.group == b.group)) throw Error("window merge: different descriptors");
    Window w;
    w.group = a.group;
    std::set<Slot> slots(a.slots.begin(), a.slots.end());
    slots.insert(b.slots.begin(), b.slots.end());
    w.slots.assign(slots.begin(), slots.end());
    w.depth = a.depth;
    for (const auto& [atom, d] : b.depth)
        w.depth[atom] = std::max(w.depth.count(atom) ? w.depth[atom] : 0u, d);
    return w;
}

// integer coordinates of an element over the window's slot generators
inline IntRow window_coords(const Window& w, const Element& e) {
    IntRow row(w.slots.size(), 0);
    for (const auto& [s, v] : e.coords) {
        const Atom& a = w.group.at(s.atom);
        size_t i = w.slot_index(s);
        switch (a.kind) {
            case AtomKind::cyclic:
            case AtomKind::cyclic_omega:
                row[i] = num(v);
                break;
            case AtomKind::pruefer:
            case AtomKind::localized_q: {
                unsigned d = w.depth.at(s.atom);
                unsigned vd = coord_depth(a, v);
                if (vd > d) throw Error("window depth too small");
                row[i] = num(v) * pow_int(a.p, d - vd);
                break;
            }
            default:
                row[i] = num(v);
        }
    }
    return row;
}

inline Element element_from_window_coords(const Window& w, const IntRow& row) {
    std::vector<std::pair<Slot, Rat>> entries;
    for (size_t i = 0; i < row.size(); ++i) {
        if (row[i] == 0) continue;
        const Slot& s = w.slots[i];
        const Atom& a = w.group.at(s.atom);
        Rat v(row[i]);
        if (a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q)
            v = Rat(row[i], pow_int(a.p, w.depth.at(s.atom)));
        entries.emplace_back(s, v);
    }
    return make_element(w.group, entries);
}

// relation rows p^k * e_i for the torsion slots
inline IntMat window_relations(const Window& w) {
    IntMat rel;
    for (size_t i = 0; i < w.slots.size(); ++i) {
        Int o = w.slot_order(i);
        if (o != 0) {
            IntRow r(w.slots.size(), 0);
            r[i] = o;
            rel.push_back(std::move(r));
        }
    }
    return rel;
}

// Finitely generated subgroup with a canonical normal form: the row HNF of
// the lattice spanned by the generators and the window relations. Two equal
// spans in the same window have identical normal forms.
struct Subgroup {
    GroupDescriptor group;
    std::vector<Element> generators;
    Window window;
    IntMat lattice;  // canonical HNF, includes relation rows

    bool operator==(const Subgroup& o) const {
        return group == o.group && window.slots == o.window.slots &&
               window.depth == o.window.depth && lattice == o.lattice;
    }
};

inline Subgroup span_in_window(const GroupDescriptor& g, std::vector<Element> gens,
                               const Window& w) {
    Subgroup h;
    h.group = g;
    h.window = w;
    IntMat rows = window_relations(w);
    for (const auto& e : gens) {
        if (!(e.group == g)) throw Error("generator outside the ambient group");
        rows.push_back(window_coords(w, e));
    }
    h.generators = std::move(gens);
    h.lattice = hnf_rows(std::move(rows));
    return h;
}

inline Subgroup span(const GroupDescriptor& g, std::vector<Element> gens) {
    Window w = make_window(g, gens);
    return span_in_window(g, std::move(gens), w);
}

inline Subgroup rebase(const Subgroup& h, const Window& w) {
    return span_in_window(h.group, h.generators, w);
}

inline bool contains(const Subgroup& h, const Element& e) {
    // the element may need a larger window
    bool fits = true;
    for (const auto& [s, v] : e.coords) {
        if (!h.window.has_slot(s)) { fits = false; break; }
        const Atom& a = h.group.at(s.atom);
        if ((a.kind == AtomKind::pruefer || a.kind == AtomKind::localized_q) &&
            coord_depth(a, v) > h.window.depth.at(s.atom)) { fits = false; break; }
    }
    if (!fits) {
        Window w = merge_windows(h.window, make_window(h.group, {e}));
        return contains(rebase(h, w), e);
    }
    return solve_in_hnf(h.lattice, window_coords(h.window, e)).has_value();
}

inline bool subgroup_leq(const Subgroup& h, const Subgroup& k) {
    for (const auto& g : h.generators)
        if (!contains(k, g)) return false;
    return true;
}

struct LatticePair {
    Subgroup sum;
    Subgroup intersection;
};

inline void require_same_ambient(const Subgroup& h, const Subgroup& k) {
    if (!(h.group == k.group)) throw Error("subgroups have different ambient groups");
}

inline LatticePair lattice_ops(const Subgroup& h, const Subgroup& k) {
    require_same_ambient(h, k);
    Window w = merge_windows(h.window, k.window);
    Subgroup hw = rebase(h, w), kw = rebase(k, w);

    LatticePair out;
    std::vector<Element> sum_gens = hw.generators;
    sum_gens.insert(sum_gens.end(), kw.generators.begin(), kw.generators.end());
    out.sum = span_in_window(w.group, sum_gens, w);

    // intersection of the two lattices via the left kernel of the stacked bases
    const IntMat& b1 = hw.lattice;
    const IntMat& b2 = kw.lattice;
    IntMat stacked = b1;
    stacked.insert(stacked.end(), b2.begin(), b2.end());
    IntMat ker = left_kernel(stacked);
    IntMat inter_rows;
    for (const auto& krow : ker) {
        IntRow v(w.slots.size(), 0);
        for (size_t i = 0; i < b1.size(); ++i)
            for (size_t j = 0; j < w.slots.size(); ++j) v[j] += krow[i] * b1[i][j];
        inter_rows.push_back(std::move(v));
    }
    IntMat inter = hnf_rows(std::move(inter_rows));
    std::vector<Element> inter_gens;
    for (const auto& r : inter) inter_gens.push_back(element_from_window_coords(w, r));
    out.intersection = span_in_window(w.group, inter_gens, w);

    // sanity: H, K <= sum and intersection <= H, K
    if (!subgroup_leq(hw, out.sum) || !subgroup_leq(kw, out.sum) ||
        !subgroup_leq(out.intersection, hw) || !subgroup_leq(out.intersection, kw))
        throw Error("lattice_ops: internal verification failed");
    return out;
}

// |K/H| for H <= K (verified), or INFINITE.
inline NatOrInf index(const Subgroup& h, const Subgroup& k) {
    require_same_ambient(h, k);
    Window w = merge_windows(h.window, k.window);
    Subgroup hw = rebase(h, w), kw = rebase(k, w);
    if (!subgroup_leq(hw, kw)) throw Error("index: H is not contained in K");
    if (hw.lattice.size() < kw.lattice.size()) return NatOrInf::inf();
    // express H-basis rows over K-basis rows; the transition matrix is square
    IntMat c;
    for (const auto& row : hw.lattice) {
        auto sol = solve_in_hnf(kw.lattice, row);
        if (!sol) throw Error("index: containment verification failed");
        c.push_back(*sol);
    }
    return NatOrInf::of(abs_det(c));
}

inline bool commensurable(const Subgroup& h, const Subgroup& k) {
    require_same_ambient(h, k);
    auto lp = lattice_ops(h, k);
    return index(lp.intersection, h).is_finite() && index(lp.intersection, k).is_finite();
}

inline Json subgroup_to_json(const Subgroup& h) {
    Json gens = Json::array();
    for (const auto& g : h.generators) gens.push_back(element_to_json(g));
    return Json{{"generators", gens}};
}

inline Subgroup subgroup_from_json(const GroupDescriptor& g, const Json& j) {
    if (!j.is_object() || !j.contains("generators") || !j["generators"].is_array())
        throw ParseError("subgroup must be {\"generators\": [...]}");
    std::vector<Element> gens;
    for (const auto& ej : j["generators"]) gens.push_back(element_from_json(g, ej));
    return span(g, gens);
}

}  // namespace inertia
