#pragma once

#include "inertia/element.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace inertia {

// Which characteristic subgroup a 1+phi perturbation stabilizes. "window"
// marks a general finite-window perturbation with no stability constraint.
struct StabTag {
    enum Kind { window, torsion, divisible, primary } kind = window;
    std::vector<Int> primes;  // for primary

    static StabTag torsion_tag() { return {torsion, {}}; }
    static StabTag divisible_tag() { return {divisible, {}}; }
    static StabTag primary_tag(std::vector<Int> ps) { return {primary, std::move(ps)}; }
    bool operator==(const StabTag& o) const { return kind == o.kind && primes == o.primes; }

    // does the tagged subgroup contain this atom?
    bool covers(const Atom& a) const {
        switch (kind) {
            case window: return false;
            case torsion: return a.is_torsion();
            case divisible: return a.is_divisible();
            case primary:
                return a.is_torsion() &&
                       std::find(primes.begin(), primes.end(), a.p) != primes.end();
        }
        return false;
    }
};

// One component of a finite-window homomorphism: the source coordinate at
// `src`, multiplied by `lambda` and reduced into the target domain, is added
// to the coordinate at `dst`.
struct HomEntry {
    Slot src;
    Slot dst;
    Rat lambda;
    bool operator==(const HomEntry& o) const {
        return src == o.src && dst == o.dst && lambda == o.lambda;
    }
};

// A finitely presented homomorphism A -> A given by rational coefficients.
struct HomData {
    StabTag stabilizes;
    std::vector<HomEntry> entries;
};

struct AutoExpr;
using ExprPtr = std::shared_ptr<const AutoExpr>;

struct Identity {};
struct Negation {};
struct RatMult { Int m, n; };
struct PAdicRat { Int p, m, n; };
struct BlockSum { std::map<size_t, ExprPtr> assignments; };
struct OnePlusHom { HomData phi; };
struct Composite { std::vector<ExprPtr> items; };  // applied in list order
struct Inverse { ExprPtr inner; };

// Structured automorphism expression. Immutable; shared freely.
struct AutoExpr {
    std::variant<Identity, Negation, RatMult, PAdicRat, BlockSum, OnePlusHom, Composite,
                 Inverse>
        node;
};

inline ExprPtr make_expr(AutoExpr e) { return std::make_shared<const AutoExpr>(std::move(e)); }

inline ExprPtr identity_expr() { return make_expr({Identity{}}); }
inline ExprPtr negation_expr() { return make_expr({Negation{}}); }
inline ExprPtr rat_mult(Int m, Int n) {
    if (n == 0) throw Error("ratMult: zero denominator");
    return make_expr({RatMult{std::move(m), std::move(n)}});
}
inline ExprPtr p_adic_rat(Int p, Int m, Int n) {
    return make_expr({PAdicRat{std::move(p), std::move(m), std::move(n)}});
}
inline ExprPtr block_sum(std::map<size_t, ExprPtr> a) { return make_expr({BlockSum{std::move(a)}}); }
inline ExprPtr one_plus_hom(HomData h) { return make_expr({OnePlusHom{std::move(h)}}); }
inline ExprPtr composite(std::vector<ExprPtr> items) { return make_expr({Composite{std::move(items)}}); }
inline ExprPtr inverse_expr(ExprPtr inner) { return make_expr({Inverse{std::move(inner)}}); }

inline ExprPtr power_expr(const ExprPtr& g, long long n) {
    if (n == 0) return identity_expr();
    ExprPtr base = n > 0 ? g : inverse_expr(g);
    long long cnt = n > 0 ? n : -n;
    std::vector<ExprPtr> items(static_cast<size_t>(cnt), base);
    return composite(std::move(items));
}

// ---- serialization ----

inline Json stab_tag_json(const StabTag& t) {
    switch (t.kind) {
        case StabTag::window: return Json("window");
        case StabTag::torsion: return Json("torsion");
        case StabTag::divisible: return Json("divisible");
        case StabTag::primary: {
            Json ps = Json::array();
            for (const auto& p : t.primes) ps.push_back(p.str());
            return Json{{"primary", ps}};
        }
    }
    throw Error("unreachable");
}

inline StabTag stab_tag_from_json(const Json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "window") return {};
        if (s == "torsion") return StabTag::torsion_tag();
        if (s == "divisible") return StabTag::divisible_tag();
        throw ParseError("unknown stability tag: " + s);
    }
    if (j.is_object() && j.contains("primary")) {
        std::vector<Int> ps;
        for (const auto& p : j["primary"]) ps.push_back(json_int(p, "prime"));
        return StabTag::primary_tag(std::move(ps));
    }
    throw ParseError("malformed stability tag");
}

inline Json hom_to_json(const HomData& h) {
    Json entries = Json::array();
    for (const auto& e : h.entries)
        entries.push_back(Json{{"src_atom", e.src.atom},
                               {"src_copy", e.src.copy},
                               {"dst_atom", e.dst.atom},
                               {"dst_copy", e.dst.copy},
                               {"lambda", rat_str(e.lambda)}});
    return Json{{"stabilizes", stab_tag_json(h.stabilizes)}, {"entries", entries}};
}

inline HomData hom_from_json(const Json& j) {
    HomData h;
    if (!j.is_object() || !j.contains("entries"))
        throw ParseError("hom must be {\"stabilizes\":..., \"entries\": [...]}");
    if (j.contains("stabilizes")) h.stabilizes = stab_tag_from_json(j["stabilizes"]);
    for (const auto& ej : j["entries"]) {
        HomEntry e;
        e.src.atom = static_cast<size_t>(json_int(ej.at("src_atom"), "src_atom").convert_to<long long>());
        e.src.copy = ej.contains("src_copy")
                         ? static_cast<size_t>(json_int(ej["src_copy"], "src_copy").convert_to<long long>())
                         : 0;
        e.dst.atom = static_cast<size_t>(json_int(ej.at("dst_atom"), "dst_atom").convert_to<long long>());
        e.dst.copy = ej.contains("dst_copy")
                         ? static_cast<size_t>(json_int(ej["dst_copy"], "dst_copy").convert_to<long long>())
                         : 0;
        e.lambda = ej.at("lambda").is_string() ? parse_rat(ej["lambda"].get<std::string>())
                                               : Rat(json_int(ej["lambda"], "lambda"));
        h.entries.push_back(std::move(e));
    }
    return h;
}

inline Json expr_to_json(const ExprPtr& g);

inline Json expr_to_json_node(const AutoExpr& e) {
    Json j;
    if (std::holds_alternative<Identity>(e.node)) {
        j["kind"] = "identity";
    } else if (std::holds_alternative<Negation>(e.node)) {
        j["kind"] = "negation";
    } else if (auto* rm = std::get_if<RatMult>(&e.node)) {
        j["kind"] = "ratMult";
        j["m"] = rm->m.str();
        j["n"] = rm->n.str();
    } else if (auto* pr = std::get_if<PAdicRat>(&e.node)) {
        j["kind"] = "pAdicRat";
        j["p"] = pr->p.str();
        j["m"] = pr->m.str();
        j["n"] = pr->n.str();
    } else if (auto* bs = std::get_if<BlockSum>(&e.node)) {
        j["kind"] = "blockSum";
        Json a = Json::object();
        for (const auto& [atom, sub] : bs->assignments) a[std::to_string(atom)] = expr_to_json(sub);
        j["assignments"] = a;
    } else if (auto* oh = std::get_if<OnePlusHom>(&e.node)) {
        j["kind"] = "onePlusHom";
        j["hom"] = hom_to_json(oh->phi);
    } else if (auto* c = std::get_if<Composite>(&e.node)) {
        j["kind"] = "composite";
        Json items = Json::array();
        for (const auto& it : c->items) items.push_back(expr_to_json(it));
        j["items"] = items;
    } else if (auto* inv = std::get_if<Inverse>(&e.node)) {
        j["kind"] = "inverse";
        j["inner"] = expr_to_json(inv->inner);
    }
    return j;
}

inline Json expr_to_json(const ExprPtr& g) {
    if (!g) throw Error("null expression");
    return expr_to_json_node(*g);
}

inline ExprPtr expr_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ParseError("automorphism must be an object with a \"kind\" field");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "identity") return identity_expr();
    if (kind == "negation") return negation_expr();
    if (kind == "ratMult") return rat_mult(json_int(j.at("m"), "m"), json_int(j.at("n"), "n"));
    if (kind == "pAdicRat")
        return p_adic_rat(json_int(j.at("p"), "p"), json_int(j.at("m"), "m"),
                          json_int(j.at("n"), "n"));
    if (kind == "blockSum") {
        std::map<size_t, ExprPtr> a;
        if (!j.contains("assignments") || !j["assignments"].is_object())
            throw ParseError("blockSum requires an \"assignments\" object");
        for (const auto& [key, sub] : j["assignments"].items()) {
            size_t atom;
            try {
                atom = std::stoul(key);
            } catch (const std::exception&) {
                throw ParseError("blockSum assignment key must be an atom index: " + key);
            }
            a[atom] = expr_from_json(sub);
        }
        return block_sum(std::move(a));
    }
    if (kind == "onePlusHom") return one_plus_hom(hom_from_json(j.at("hom")));
    if (kind == "composite") {
        std::vector<ExprPtr> items;
        for (const auto& it : j.at("items")) items.push_back(expr_from_json(it));
        return composite(std::move(items));
    }
    if (kind == "inverse") return inverse_expr(expr_from_json(j.at("inner")));
    throw ParseError("unknown automorphism kind: " + kind);
}

}  // namespace inertia
