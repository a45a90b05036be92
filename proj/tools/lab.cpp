// lab: command-line front end for the exact abelian-group automorphism
// toolkit. Subcommands: inertia, comm, decompose, scenario, eexp.
// Exit codes: 0 all checks pass, 1 a verdict or assertion failed, 2 usage
// or input error.

#include "inertia/scenario.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace inertia;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json load_json(const std::string& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void print_report(const Json& j, const std::string& format) {
    if (format == "json") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    // a small human-readable rendering
    std::function<void(const Json&, int)> walk = [&](const Json& v, int indent) {
        std::string pad(static_cast<size_t>(indent) * 2, ' ');
        if (v.is_object()) {
            for (const auto& [k, val] : v.items()) {
                if (val.is_object() || val.is_array()) {
                    std::cout << pad << k << ":\n";
                    walk(val, indent + 1);
                } else {
                    std::cout << pad << k << ": " << val.dump() << "\n";
                }
            }
        } else if (v.is_array()) {
            for (const auto& val : v) {
                if (val.is_object() || val.is_array()) {
                    std::cout << pad << "-\n";
                    walk(val, indent + 1);
                } else {
                    std::cout << pad << "- " << val.dump() << "\n";
                }
            }
        } else {
            std::cout << pad << v.dump() << "\n";
        }
    };
    walk(j, 0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic laboratory for abelian group automorphisms"};
    app.require_subcommand(1);

    std::string group_file, auto_file, sub_a_file, sub_b_file, format = "human";
    unsigned budget = 6;
    uint64_t seed = 0;
    long long primes_cutoff = 5, witness_n = 4, witness_s = 2;
    size_t falsify_trials = 200;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--format", format, "output format: human or json")
            ->check(CLI::IsMember({"human", "json"}));
        cmd->add_option("--budget", budget, "window budget for verification");
        cmd->add_option("--seed", seed, "seed for randomized sampling");
    };

    CLI::App* inertia_cmd = app.add_subcommand("inertia", "inertia decisions");
    CLI::App* check = inertia_cmd->add_subcommand("check", "decide whether gamma is inertial");
    check->add_option("--group", group_file, "group descriptor file")->required();
    check->add_option("--auto", auto_file, "automorphism file")->required();
    check->add_option("--trials", falsify_trials, "falsifier budget");
    bool with_falsifier = false;
    check->add_flag("--falsify", with_falsifier, "also run the subgroup falsifier");
    add_common(check);
    inertia_cmd->require_subcommand(1);

    CLI::App* comm = app.add_subcommand("comm", "commensurability of two subgroups");
    comm->add_option("--group", group_file, "group descriptor file")->required();
    comm->add_option("--a", sub_a_file, "first subgroup file")->required();
    comm->add_option("--b", sub_b_file, "second subgroup file")->required();
    add_common(comm);

    CLI::App* decompose = app.add_subcommand("decompose", "decomposition certificates");
    decompose->add_option("--group", group_file, "group descriptor file")->required();
    add_common(decompose);

    CLI::App* scenario = app.add_subcommand("scenario", "named verification scenarios");
    CLI::App* run = scenario->add_subcommand("run", "run one scenario, or \"all\"");
    std::string scenario_name;
    run->add_option("name", scenario_name, "scenario name")->required();
    run->add_option("--primes", primes_cutoff, "prime cutoff for the coordinate scenario");
    run->add_option("--n", witness_n, "nilpotency length bound");
    run->add_option("--s", witness_s, "power of the witness automorphism");
    add_common(run);
    CLI::App* list = scenario->add_subcommand("list", "list scenario names");
    (void)list;
    scenario->require_subcommand(1);

    CLI::App* eexp = app.add_subcommand("eexp", "structural report of a group");
    eexp->add_option("--group", group_file, "group descriptor file")->required();
    add_common(eexp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (check->parsed()) {
            GroupDescriptor g = group_from_json(load_json(group_file));
            ExprPtr gamma = expr_from_json(load_json(auto_file));
            ValidityReport vr = validate(gamma, g);
            Json out;
            out["valid"] = vr.valid;
            if (!vr.valid) {
                Json fs = Json::array();
                for (const auto& f : vr.failures) fs.push_back(f);
                out["failures"] = fs;
                print_report(out, format);
                return 1;
            }
            Verdict v = is_inertial(*vr.form);
            if (v.status == Verdict::NOT_INERTIAL && with_falsifier) {
                FalsifyBudget fb;
                fb.trials = falsify_trials;
                fb.seed = seed;
                v.counterwitness = inertia_falsify(*vr.form, g, fb);
                out["falsifier_seed"] = seed;
                out["falsifier_trials"] = falsify_trials;
            }
            out["verdict"] = verdict_to_json(v);
            print_report(out, format);
            return v.status == Verdict::INERTIAL ? 0 : 1;
        }
        if (comm->parsed()) {
            GroupDescriptor g = group_from_json(load_json(group_file));
            Subgroup h = subgroup_from_json(g, load_json(sub_a_file));
            Subgroup k = subgroup_from_json(g, load_json(sub_b_file));
            auto lp = lattice_ops(h, k);
            NatOrInf ia = index(lp.intersection, h), ib = index(lp.intersection, k);
            bool comm_ok = ia.is_finite() && ib.is_finite();
            Json out{{"commensurable", comm_ok},
                     {"index_in_a", ia.str()},
                     {"index_in_b", ib.str()}};
            print_report(out, format);
            return 0;
        }
        if (decompose->parsed()) {
            GroupDescriptor g = group_from_json(load_json(group_file));
            auto rep = structural_report(g);
            DecompositionCertificate cert;
            Json out;
            bool pass = true;
            if (g.is_periodic() && rep.primary.size() == 1) {
                cert = decompose_p_group(g, budget);
                out = certificate_to_json(cert);
                pass = cert.all_pass();
                if (!rep.critical_primes.empty()) {
                    auto fc = faut_critical_certificate(g, budget);
                    out = Json{{"certificates", Json::array({out, certificate_to_json(fc)})}};
                    pass = pass && fc.all_pass();
                }
            } else if (g.is_periodic()) {
                cert = decompose_periodic(g, budget);
                out = certificate_to_json(cert);
                pass = cert.all_pass();
            } else {
                auto tb = theorem_b_certificate(g, budget);
                Json certs = Json::array({certificate_to_json(tb)});
                pass = tb.all_pass();
                bool t_bounded = rep.torsion.is_bounded();
                bool quot_fg = true;
                for (const auto& at : g.atoms)
                    if (at.kind == AtomKind::localized_q) quot_fg = false;
                if (rep.r0.is_finite() && rep.r0.value > 0 && (t_bounded || quot_fg)) {
                    auto tc = split_on_torsion(g, budget);
                    certs.push_back(certificate_to_json(tc));
                    pass = pass && tc.all_pass();
                }
                out = Json{{"certificates", certs}};
            }
            print_report(out, format);
            return pass ? 0 : 1;
        }
        if (scenario->get_subcommand("list")->parsed()) {
            Json out = Json::array();
            for (const auto& n : scenario_names()) out.push_back(n);
            print_report(out, format);
            return 0;
        }
        if (run->parsed()) {
            ScenarioOptions opt;
            opt.seed = seed;
            opt.budget = budget;
            opt.primes_cutoff = primes_cutoff;
            opt.n = static_cast<unsigned>(witness_n);
            opt.s = witness_s;
            if (scenario_name == "all") {
                Json out = run_all_scenarios(opt);
                print_report(out, format);
                for (const auto& sj : out["scenarios"])
                    if (!sj["all_pass"].get<bool>()) return 1;
                return 0;
            }
            ScenarioResult r = run_scenario(scenario_name, opt);
            print_report(scenario_result_json(r), format);
            return r.all_pass() ? 0 : 1;
        }
        if (eexp->parsed()) {
            GroupDescriptor g = group_from_json(load_json(group_file));
            print_report(structural_report_json(structural_report(g)), format);
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
