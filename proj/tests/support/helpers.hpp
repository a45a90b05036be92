#pragma once

#include "inertia/scenario.hpp"

#include <array>
#include <cstdio>
#include <string>
#include <vector>

namespace testsupport {

using namespace inertia;

// All elements of a finite descriptor group (every atom must be cyclic).
inline std::vector<Element> all_elements(const GroupDescriptor& g) {
    std::vector<Element> out{zero_element(g)};
    for (size_t i = 0; i < g.size(); ++i) {
        const Atom& a = g.at(i);
        if (a.kind != AtomKind::cyclic) throw Error("all_elements: group not finite");
        Int m = a.copy_order();
        std::vector<Element> next;
        for (const auto& e : out)
            for (Int c = 0; c < m; ++c)
                next.push_back(add(e, make_element(g, {{{i, 0}, Rat(c)}})));
        out = std::move(next);
    }
    return out;
}

// Exhaustive subgroup enumeration of a small finite group. All subgroups
// share one window so that normal forms are directly comparable.
inline std::vector<Subgroup> all_subgroups(const GroupDescriptor& g) {
    auto elems = all_elements(g);
    std::vector<Slot> base_slots;
    for (size_t i = 0; i < g.size(); ++i) base_slots.push_back({i, 0});
    Window w = make_window(g, {}, base_slots);
    std::vector<Subgroup> known{span_in_window(g, {}, w)};
    auto lattice_key = [](const Subgroup& s) {
        std::string k;
        for (const auto& row : s.lattice)
            for (const auto& v : row) k += v.str() + ",";
        return k;
    };
    std::set<std::string> seen{lattice_key(known[0])};
    size_t frontier = 0;
    while (frontier < known.size()) {
        Subgroup base = known[frontier++];
        for (const auto& x : elems) {
            if (contains(base, x)) continue;
            std::vector<Element> gens = base.generators;
            gens.push_back(x);
            Subgroup bigger = span_in_window(g, gens, w);
            std::string key = lattice_key(bigger);
            if (seen.insert(key).second) known.push_back(bigger);
        }
    }
    return known;
}

// run a command line, capture exit status
inline int run_command(const std::string& cmd, std::string* output = nullptr) {
    std::string full = cmd + " 2>&1";
    FILE* pipe = popen(full.c_str(), "r");
    if (!pipe) return -1;
    std::string data;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) data.append(buf.data(), n);
    int status = pclose(pipe);
    if (output) *output = data;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

inline std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/inertia_test_") + name;
    FILE* f = fopen(path.c_str(), "w");
    fwrite(content.data(), 1, content.size(), f);
    fclose(f);
    return path;
}

}  // namespace testsupport
