#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forge/json_io.hpp"

using namespace forge;

namespace {

struct Output {
    std::string path;

    void write(const std::string& text) const {
        if (path.empty() || path == "-") {
            std::cout << text;
            return;
        }
        std::ofstream out(path);
        if (!out) throw FormatError("cannot write " + path);
        out << text;
    }
    void write(const Json& j) const { write(j.dump(2) + "\n"); }
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& s) {
    auto colon = s.find(':', s[0] == '-' ? 1 : 0);
    if (colon == std::string::npos) throw SpecError("range must look like lo:hi");
    try {
        return {std::stoll(s.substr(0, colon)), std::stoll(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw SpecError("bad range '" + s + "'");
    }
}

Group cert_group(const std::string& name) {
    if (name == "z2") return Group::lattice(1);
    if (name == "z4") return Group::lattice(2);
    throw SpecError("--group must be z2 (Z x Z) or z4 (Z^2 x Z^2)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: rooted subshifts, tree shifts and their certificates"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = 1;
    Output out;
    app.add_option("--threads", threads, "worker threads for patch verification")->check(CLI::PositiveNumber);
    app.add_option("-o,--out", out.path, "output file (default: standard output)");

    int status = 0;
    std::function<void()> action;

    // group ---------------------------------------------------------------
    auto* grp = app.add_subcommand("group", "word problem, balls and boundaries");
    grp->require_subcommand(1);
    std::string group_name = "F2", word_text;
    std::int64_t radius = 2;
    {
        auto* ball = grp->add_subcommand("ball", "list the ball B_r in shortlex order");
        ball->add_option("--group", group_name, "group name (Z, Z2, F2, 'Z x F2', ...)");
        ball->add_option("--radius", radius)->check(CLI::NonNegativeNumber);
        ball->callback([&] {
            action = [&] {
                auto G = parse_group_name(group_name);
                auto B = G.ball(radius);
                Json elems = Json::array();
                for (const auto& g : B) elems.push_back(G.format_element(g));
                out.write(Json{{"group", group_to_json(G)}, {"radius", radius}, {"size", B.size()},
                               {"boundary", G.boundary(B).size()}, {"elements", elems}});
            };
        });
        auto* word = grp->add_subcommand("word", "normal form of a word");
        word->add_option("--group", group_name);
        word->add_option("--word", word_text, "space-separated generator names")->required();
        word->callback([&] {
            action = [&] {
                auto G = parse_group_name(group_name);
                auto w = G.parse_word(word_text);
                auto nf = G.normal_word(G.eval(w));
                out.write(Json{{"group", group_to_json(G)}, {"word", word_to_json(G, w)}, {"normal_form", word_to_json(G, nf)},
                               {"length", nf.size()}, {"is_identity", nf.empty()}});
            };
        });
    }

    // subshift ------------------------------------------------------------
    auto* sub = app.add_subcommand("subshift", "pattern codings and patch scans");
    sub->require_subcommand(1);
    std::string spec_path, patch_path, group_override;
    std::int64_t n_max = 2;
    {
        auto* emit = sub->add_subcommand("emit", "list the codings of a subshift spec");
        emit->add_option("spec", spec_path)->required();
        emit->add_option("--group", group_override);
        emit->callback([&] {
            action = [&] {
                std::optional<Group> g;
                if (!group_override.empty()) g = parse_group_name(group_override);
                auto d = subshift_from_json(read_json_file(spec_path), g);
                auto codings = d.spec.emit(d.group);
                Json arr = Json::array();
                for (const auto& c : codings) arr.push_back(coding_to_json(d.group, d.spec.alphabet, c));
                out.write(Json{{"group", group_to_json(d.group)}, {"count", codings.size()}, {"codings", arr}});
            };
        });
        auto* scan = sub->add_subcommand("scan", "find coding occurrences in a configuration patch");
        scan->add_option("spec", spec_path)->required();
        scan->add_option("patch", patch_path)->required();
        scan->add_option("--group", group_override);
        scan->callback([&] {
            action = [&] {
                std::optional<Group> g;
                if (!group_override.empty()) g = parse_group_name(group_override);
                auto d = subshift_from_json(read_json_file(spec_path), g);
                auto codings = d.spec.emit(d.group);
                auto p = config_from_json(d.group, d.spec.alphabet, read_json_file(patch_path));
                auto v = scan_patch(d.group, p, codings);
                out.write(Json{{"valid", v.empty()}, {"violations", violations_to_json(d.group, v, codings, d.spec.alphabet)}});
                status = v.empty() ? 0 : 1;
            };
        });
        auto* centers = sub->add_subcommand("centers", "disjoint ball centers u_n, v_n");
        centers->add_option("--group", group_name);
        centers->add_option("--n-max", n_max)->check(CLI::NonNegativeNumber);
        centers->callback([&] {
            action = [&] {
                auto G = parse_group_name(group_name);
                auto c = disjoint_ball_centers(G, n_max);
                Json arr = Json::array();
                for (std::size_t n = 0; n < c.u.size(); ++n)
                    arr.push_back({{"n", n}, {"u", word_to_json(G, c.u[n])}, {"v", word_to_json(G, c.v[n])}});
                auto bad = verify_ball_centers(G, c);
                out.write(Json{{"group", group_to_json(G)}, {"centers", arr}, {"disjoint", !bad}});
                status = bad ? 1 : 0;
            };
        });
    }

    // tree-shift ----------------------------------------------------------
    auto* tree = app.add_subcommand("tree-shift", "the binary tree shift on F2");
    tree->require_subcommand(1);
    std::string tree_path, bits, at = "1";
    {
        auto* build = tree->add_subcommand("build", "tree patch from the paradoxical map on B_r");
        build->add_option("--radius", radius)->check(CLI::NonNegativeNumber);
        build->callback([&] {
            action = [&] { out.write(tree_to_json(tau_build(ParadoxicalMap{}, radius), radius)); };
        });
        auto* check = tree->add_subcommand("check", "check both tree-shift constraints");
        check->add_option("patch", tree_path)->required();
        check->callback([&] {
            action = [&] {
                Group N = Group::free(2);
                auto v = check_tree_constraints(N, tree_from_json(read_json_file(tree_path)));
                Json arr = Json::array();
                for (const auto& x : v) arr.push_back({{"rule", x.rule}, {"at", N.format_element(x.at)}, {"detail", x.detail}});
                out.write(Json{{"valid", v.empty()}, {"violations", arr}});
                status = v.empty() ? 0 : 1;
            };
        });
        auto* gam = tree->add_subcommand("gamma", "walk to the root, then along a bit word");
        gam->add_option("--word", bits, "bit word, e.g. 0110");
        gam->add_option("--at", at, "starting element");
        gam->add_option("--patch", tree_path, "tree patch (default: built around the walk)");
        gam->callback([&] {
            action = [&] {
                Group N = Group::free(2);
                auto w = parse_bits(bits);
                auto g = element_from_json(N, Json(at));
                auto t = tree_path.empty()
                             ? tau_build(ParadoxicalMap{}, static_cast<std::int64_t>(N.normal_word(g).size() + w.size()) + 2)
                             : tree_from_json(read_json_file(tree_path));
                auto m = gamma(N, t, w, g);
                out.write(Json{{"at", N.format_element(g)}, {"word", bits}, {"image", N.format_element(m)}});
            };
        });
    }

    // rooted-sft ----------------------------------------------------------
    auto* rsft = app.add_subcommand("rooted-sft", "tile compiler, witnesses and layer checks");
    rsft->require_subcommand(1);
    std::string format = "json", config_path, fill;
    int depth = 8;
    std::optional<std::int64_t> wait;
    {
        auto* compile = rsft->add_subcommand("compile", "compile a subshift spec into a machine and tile set");
        compile->add_option("spec", spec_path)->required();
        compile->add_option("--group", group_override);
        compile->add_option("--format", format)->check(CLI::IsMember({"json", "dot"}));
        compile->add_option("--wait", wait, "override the wait schedule");
        compile->callback([&] {
            action = [&] {
                std::optional<Group> g;
                if (!group_override.empty()) g = parse_group_name(group_override);
                LayeredDoc d;
                d.subshift = subshift_from_json(read_json_file(spec_path), g);
                d.machine.wait_override = wait;
                auto ts = layered_tiles(d);
                if (format == "dot")
                    out.write(tiles_to_dot(ts));
                else
                    out.write(tiles_to_json(ts));
            };
        });
        auto* witness = rsft->add_subcommand("witness", "build a layered witness patch from a configuration");
        witness->add_option("--subshift", spec_path)->required();
        witness->add_option("--group", group_override);
        witness->add_option("--radius", radius)->check(CLI::NonNegativeNumber);
        witness->add_option("--depth", depth)->check(CLI::Range(0, 24));
        witness->add_option("--config", config_path, "configuration patch");
        witness->add_option("--fill", fill, "symbol used outside the configuration patch");
        witness->add_option("--wait", wait, "override the wait schedule");
        witness->callback([&] {
            action = [&] {
                std::optional<Group> g;
                if (!group_override.empty()) g = parse_group_name(group_override);
                LayeredDoc d;
                d.subshift = subshift_from_json(read_json_file(spec_path), g);
                d.machine.wait_override = wait;
                const auto& A = d.subshift.spec.alphabet;
                ConfigPatch x;
                if (!config_path.empty()) x = config_from_json(d.subshift.group, A, read_json_file(config_path));
                WitnessOptions opt;
                opt.machine = d.machine;
                if (!fill.empty()) opt.fill = A.index(fill);
                auto w = witness_build(d.subshift.group, x, radius, depth, d.subshift.spec.emit(d.subshift.group), A, opt);
                d.patch = std::move(w.patch);
                out.write(layered_to_json(d, w.tiles));
            };
        });
        auto* verify = rsft->add_subcommand("verify", "run every layer rule on a layered patch");
        verify->add_option("patch", patch_path)->required();
        verify->callback([&] {
            action = [&] {
                auto [d, ts] = layered_from_json(read_json_file(patch_path));
                auto v = verify_patch(*d.patch, ts, threads);
                out.write(layer_report_json(*d.patch, v));
                status = v.empty() ? 0 : 1;
            };
        });
    }

    // lab -----------------------------------------------------------------
    auto* lab = app.add_subcommand("lab", "verification, completion and rendering of layered patches");
    lab->require_subcommand(1);
    std::size_t budget = global_budget(), cap = 400;
    bool count_all = false, mark = false;
    {
        auto* verify = lab->add_subcommand("verify", "verification report with rule-family counts");
        verify->add_option("patch", patch_path)->required();
        verify->callback([&] {
            action = [&] {
                auto [d, ts] = layered_from_json(read_json_file(patch_path));
                auto v = verify_patch(*d.patch, ts, threads);
                out.write(layer_report_json(*d.patch, v));
                status = v.empty() ? 0 : 1;
            };
        });
        auto* comp = lab->add_subcommand("complete", "fill unset layers by bounded backtracking");
        comp->add_option("patch", patch_path)->required();
        comp->add_option("--budget", budget, "search node budget")->check(CLI::PositiveNumber);
        comp->add_option("--cap", cap, "maximum number of cells")->check(CLI::PositiveNumber);
        comp->add_flag("--count-all", count_all, "enumerate every completion");
        comp->callback([&] {
            action = [&] {
                auto [d, ts] = layered_from_json(read_json_file(patch_path));
                CompleteOptions opt;
                opt.cell_cap = cap;
                opt.node_budget = budget;
                opt.count_all = count_all;
                auto r = complete(*d.patch, ts, opt);
                Json j{{"outcome", to_string(r.outcome)},
                       {"stats",
                        {{"variables", r.stats.variables},
                         {"nodes", r.stats.nodes},
                         {"backtracks", r.stats.backtracks},
                         {"solutions", r.stats.solutions}}}};
                if (r.patch) {
                    d.patch = std::move(*r.patch);
                    j["patch"] = layered_to_json(d, ts);
                }
                out.write(j);
                status = r.outcome == CompleteOutcome::completed ? 0 : 1;
            };
        });
        auto* render = lab->add_subcommand("render", "draw a layered patch as SVG or DOT");
        render->add_option("patch", patch_path)->required();
        render->add_option("--format", format)->check(CLI::IsMember({"svg", "dot"}));
        render->add_flag("--violations", mark, "outline violating cells");
        render->callback([&] {
            action = [&] {
                auto [d, ts] = layered_from_json(read_json_file(patch_path));
                std::vector<LayerViolation> v;
                if (mark) v = verify_patch(*d.patch, ts, threads);
                out.write(format == "dot" ? render_dot(*d.patch, &ts, v) : render_svg(*d.patch, &ts, v));
            };
        });
    }

    // cert ----------------------------------------------------------------
    auto* cert = app.add_subcommand("cert", "counting certificates and mirror witnesses");
    cert->require_subcommand(1);
    std::int64_t cover = 2, box = 2, window = 7;
    std::string eps_text, cert_group_name = "z2", kind = "reflection", pattern_path;
    {
        auto* eps = cert->add_subcommand("epsilon", "bound on epsilon for a cover alphabet");
        eps->add_option("--cover-size", cover)->required();
        eps->add_option("--eps", eps_text, "test a rational epsilon exactly (p/q or decimal)");
        eps->callback([&] {
            action = [&] {
                auto b = epsilon_bound(cover);
                std::ostringstream approx;
                approx.precision(12);
                approx << b.approx;
                Json j{{"cover_size", cover}, {"bound", approx.str()}};
                if (!eps_text.empty()) {
                    auto e = parse_rational(eps_text);
                    j["eps"] = std::to_string(e.numerator()) + "/" + std::to_string(e.denominator());
                    j["admissible"] = b.admits(e);
                    status = b.admits(e) ? 0 : 1;
                }
                out.write(j);
            };
        });
        auto* check = cert->add_subcommand("check", "pigeonhole certificate for boxes in H x K");
        check->add_option("--cover-size", cover)->required();
        check->add_option("--box", box, "half-width n of T = U = {-n..n}^d");
        check->add_option("--eps", eps_text, "choose the smallest Folner boxes for this epsilon instead");
        check->add_option("--group", cert_group_name, "z2 (Z x Z) or z4 (Z^2 x Z^2)");
        check->callback([&] {
            action = [&] {
                auto H = cert_group(cert_group_name);
                std::vector<Element> T;
                if (!eps_text.empty())
                    T = folner_interval(H, parse_rational(eps_text)).T;
                else if (box >= 0)
                    T = lattice_box(H.dim(), box);
                else
                    throw SpecError("--box must be nonnegative");
                auto c = pigeonhole_certificate(cover, H, T, H, T);
                auto j = certificate_to_json(c);
                j["group"] = cert_group_name;
                out.write(j);
                status = c.valid ? 0 : 1;
            };
        });
        auto* wit = cert->add_subcommand("witness", "mirror witness on Z x Z and its coding scan");
        wit->add_option("--kind", kind)->check(CLI::IsMember({"reflection", "ball-mimic"}));
        wit->add_option("--pattern", pattern_path, "JSON file with a \"pattern\" matrix of 0/1")->required();
        wit->add_option("--window", window, "half-width of the square window");
        wit->callback([&] {
            action = [&] {
                auto pj = read_json_file(pattern_path);
                auto p = pj.at("pattern").get<BoxPattern>();
                auto Z = Group::lattice(1);
                auto G = mirror_group();
                ConfigPatch y;
                std::vector<PatternCoding> codings;
                if (kind == "reflection") {
                    y = reflection_witness(p, window);
                    codings = reflection_codings(Z, window);
                } else {
                    auto n = static_cast<std::int64_t>(p.size() / 2);
                    auto centers = disjoint_ball_centers(Z, n + 1);
                    y = ball_mimic_witness(p, window, centers);
                    codings = ball_mimic_codings(Z, centers, n + 1);
                }
                auto A = reflection_alphabet();
                auto v = scan_patch(G, y, codings);
                out.write(Json{{"kind", kind},
                               {"codings", codings.size()},
                               {"valid", v.empty()},
                               {"violations", violations_to_json(G, v, codings, A)},
                               {"witness", config_to_json(G, A, y)}});
                status = v.empty() ? 0 : 1;
            };
        });
    }

    // toeplitz ------------------------------------------------------------
    auto* toe = app.add_subcommand("toeplitz", "Toeplitz codings and coupling rules");
    toe->require_subcommand(1);
    std::string prefix, range = "1:31", word_path;
    int steps = 1;
    std::int64_t h_radius = 9, n_radius = 2;
    {
        auto* enc = toe->add_subcommand("encode", "window of the Toeplitz coding of a prefix");
        enc->add_option("--prefix", prefix, "comma-separated integers y0,y1,...")->required();
        enc->add_option("--range", range, "lo:hi");
        enc->callback([&] {
            action = [&] {
                std::vector<int> y;
                for (const auto& s : split(prefix, ',')) y.push_back(std::stoi(s));
                auto [lo, hi] = parse_range(range);
                auto w = toeplitz_encode(y, lo, hi);
                auto j = toeplitz_to_json(w);
                j["tokens"] = toeplitz_tokens(lo, hi);
                out.write(j);
            };
        });
        auto* dec = toe->add_subcommand("decode", "strip the first tracks of a Toeplitz window");
        dec->add_option("word", word_path, "Toeplitz word JSON")->required();
        dec->add_option("--steps", steps)->check(CLI::PositiveNumber);
        dec->callback([&] {
            action = [&] {
                auto w = toeplitz_from_json(read_json_file(word_path));
                std::vector<int> ys;
                for (int i = 0; i < steps; ++i) {
                    auto [y0, rest] = toeplitz_decode_step(w);
                    ys.push_back(y0);
                    w = std::move(rest);
                }
                out.write(Json{{"prefix", ys}, {"rest", toeplitz_to_json(w)}});
            };
        });
        auto* wb = toe->add_subcommand("wbuild", "coupling patch over Z x N from a configuration on N");
        wb->add_option("--group", group_name, "the group N");
        wb->add_option("--config", config_path, "configuration patch on N over {0,1}")->required();
        wb->add_option("--h-radius", h_radius);
        wb->add_option("--n-radius", n_radius);
        wb->callback([&] {
            action = [&] {
                auto N = parse_group_name(group_name);
                Alphabet A({"0", "1"});
                auto z = config_from_json(N, A, read_json_file(config_path));
                std::vector<int> S{0};
                for (int s = 1; s < N.num_generators(); ++s) S.push_back(s);
                out.write(wpatch_to_json(w_build(N, S, z, h_radius, n_radius)));
            };
        });
        auto* wc = toe->add_subcommand("wcheck", "check both coupling rules");
        wc->add_option("patch", patch_path)->required();
        wc->callback([&] {
            action = [&] {
                auto p = wpatch_from_json(read_json_file(patch_path));
                auto v = w_rules_check(p);
                out.write(Json{{"valid", v.empty()}, {"violations", wviolations_to_json(p, v)}});
                status = v.empty() ? 0 : 1;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (action) action();
    } catch (const BudgetError& e) {
        std::cerr << "forge: budget exceeded: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "forge: " << e.what() << "\n";
        return 2;
    }
    return status;
}
