#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "projcx/axioms.hpp"
#include "projcx/free_product.hpp"
#include "projcx/generators.hpp"
#include "projcx/group_action.hpp"
#include "projcx/json_io.hpp"
#include "projcx/perturb.hpp"
#include "projcx/projection_complex.hpp"
#include "projcx/quasi_tree.hpp"

using namespace projcx;

namespace {

std::string now_iso() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json load_json(const std::string& path) {
    if (path.empty() || path == "-") return parse_json_text(read_all(std::cin), "stdin");
    std::ifstream in(path);
    if (!in) throw JsonLoadError("cannot open input file: " + path);
    return parse_json_text(read_all(in), path);
}

void write_json(const nlohmann::json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw JsonLoadError("cannot open output file: " + path);
    out << j.dump(2) << "\n";
}

/// Wraps the collected reports, stamps them and returns the exit code: 0
/// when every report passed, 1 otherwise.
int finish(const std::string& command, const std::vector<AxiomReport>& reports, const std::string& out_path) {
    bool all = true;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : reports) {
        all = all && r.passed;
        list.push_back(r.to_json());
    }
    nlohmann::json j;
    j["schema"] = "projcx-cli-report-v1";
    j["command"] = command;
    j["generated_at"] = now_iso();
    j["passed"] = all;
    j["reports"] = std::move(list);
    write_json(j, out_path);
    return all ? 0 : 1;
}

const ProjectionSystem& need_graph(const AnySystem& sys, const std::string& what) {
    if (!sys.graph) throw JsonLoadError(what + " requires a graph-backed system document");
    return *sys.graph;
}

std::int64_t pick(std::int64_t flag, std::int64_t fallback) { return flag >= 0 ? flag : fallback; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"projection complexes and quasi-trees of graphs: generate, verify, perturb, build, audit"};
    app.require_subcommand(1);
    std::function<int()> action;

    std::string input, output, report_path;

    // ------------------------------------------------------------- gen
    auto* gen = app.add_subcommand("gen", "generate instance documents");
    gen->require_subcommand(1);

    {
        auto* c = gen->add_subcommand("fence", "row of paths with endpoint projections");
        auto n = std::make_shared<int>(5);
        auto L = std::make_shared<std::int64_t>(10);
        auto group_path = std::make_shared<std::string>();
        c->add_option("--n", *n, "number of spaces")->check(CLI::PositiveNumber);
        c->add_option("--L", *L, "path length")->check(CLI::PositiveNumber);
        c->add_option("--output", output, "output path (default stdout)");
        c->add_option("--emit-reflection-group", *group_path, "also write the end-to-end symmetry group here");
        c->callback([&, n, L, group_path] {
            action = [&, n, L, group_path] {
                ProjectionSystem sys = gen_fence(*n, *L);
                write_json(system_to_json(sys), output);
                if (!group_path->empty()) write_json(group_to_json(fence_reflection_group(sys)), *group_path);
                return 0;
            };
        });
    }
    {
        auto* c = gen->add_subcommand("tree-axes", "random tree with path axes");
        auto axes = std::make_shared<int>(6);
        auto tree_size = std::make_shared<int>(20);
        auto seed = std::make_shared<std::uint64_t>();
        c->add_option("--axes", *axes, "number of axes")->check(CLI::PositiveNumber);
        c->add_option("--tree-size", *tree_size, "vertices in the backing tree")->check(CLI::PositiveNumber);
        c->add_option("--seed", *seed, "generation seed")->required();
        c->add_option("--output", output, "output path (default stdout)");
        c->callback([&, axes, tree_size, seed] {
            action = [&, axes, tree_size, seed] {
                auto [sys, theta] = gen_tree_axes(random_tree_axes(*seed, *axes, *tree_size));
                (void)theta;  // recorded inside the document
                write_json(system_to_json(sys), output);
                return 0;
            };
        });
    }
    {
        auto* c = gen->add_subcommand("abstract", "random distance table (usually axiom-violating)");
        auto size = std::make_shared<int>(6);
        auto theta = std::make_shared<std::int64_t>(3);
        auto seed = std::make_shared<std::uint64_t>();
        c->add_option("--size", *size, "number of spaces")->check(CLI::PositiveNumber);
        c->add_option("--theta", *theta, "declared scale")->check(CLI::NonNegativeNumber);
        c->add_option("--seed", *seed, "generation seed")->required();
        c->add_option("--output", output, "output path (default stdout)");
        c->callback([&, size, theta, seed] {
            action = [&, size, theta, seed] {
                write_json(abstract_to_json(gen_abstract(*seed, *size, *theta)), output);
                return 0;
            };
        });
    }
    {
        auto* c = gen->add_subcommand("free-product", "coset family of a free product of two cyclic groups");
        auto spec = std::make_shared<FreeProductSpec>();
        c->add_option("--p", spec->p, "order of the first factor")->check(CLI::PositiveNumber);
        c->add_option("--q", spec->q, "order of the second factor (0 = infinite)")->check(CLI::NonNegativeNumber);
        c->add_option("--radius", spec->radius, "ball radius in the word metric")->check(CLI::PositiveNumber);
        c->add_option("--margin", spec->margin, "depth margin for interior cosets")->check(CLI::PositiveNumber);
        c->add_option("--conjugates", spec->conjugates, "conjugacy classes kept in the generating set")
            ->check(CLI::PositiveNumber);
        c->add_option("--output", output, "output path (default stdout)");
        c->add_option("--report", report_path, "also write the build report here");
        c->callback([&, spec] {
            action = [&, spec] {
                FreeProductModel model(*spec);
                write_json(system_to_json(model.system()), output);
                if (!report_path.empty()) return finish("gen free-product", {model.build_report()}, report_path);
                return 0;
            };
        });
    }

    // ---------------------------------------------------------- verify
    {
        auto* c = app.add_subcommand("verify", "check the projection axioms on a system document");
        auto strong = std::make_shared<bool>(false);
        auto weak = std::make_shared<bool>(false);
        auto with_triples = std::make_shared<bool>(false);
        auto theta = std::make_shared<std::int64_t>(-1);
        auto opts = std::make_shared<VerifyOptions>();
        auto seed = std::make_shared<std::int64_t>(-1);
        c->add_flag("--strong", *strong, "exact-equality axioms");
        c->add_flag("--weak", *weak, "coarse axioms (default)");
        c->add_flag("--with-triples", *with_triples, "also check the two-of-three scale bound");
        c->add_option("--theta", *theta, "scale (default: declared by the document)");
        c->add_option("--workers", opts->workers, "verification threads (0 = PROJCX_WORKERS or 1)");
        c->add_option("--exhaustive-max", opts->exhaustive_max_n, "largest space count scanned exhaustively");
        c->add_option("--sample-pairs", opts->sample_count, "tuples sampled above the exhaustive cutoff");
        c->add_option("--seed", *seed, "sampling seed (required above the cutoff)");
        c->add_option("--input", input, "input path (default stdin)");
        c->add_option("--output", output, "report path (default stdout)");
        c->callback([&, strong, weak, with_triples, theta, opts, seed] {
            action = [&, strong, weak, with_triples, theta, opts, seed] {
                if (*strong && *weak) throw CLI::ValidationError("verify", "--strong and --weak are exclusive");
                AnySystem sys = any_system_from_json(load_json(input));
                std::int64_t t = pick(*theta, sys.theta());
                if (*seed >= 0) opts->seed = static_cast<std::uint64_t>(*seed);
                std::vector<AxiomReport> reports;
                reports.push_back(*strong ? verify_strong_axioms(sys.distances(), t, *opts)
                                          : verify_weak_axioms(sys.distances(), t, *opts));
                if (*with_triples) reports.push_back(triples_check(sys.distances(), t));
                return finish(*strong ? "verify --strong" : "verify --weak", reports, output);
            };
        });
    }

    // --------------------------------------------------------- perturb
    {
        auto* c = app.add_subcommand("perturb", "rebuild projections so the exact-equality axioms hold at 11*theta");
        auto theta = std::make_shared<std::int64_t>(-1);
        c->add_option("--theta", *theta, "scale (default: declared by the document)");
        c->add_option("--input", input, "input path (default stdin)");
        c->add_option("--output", output, "perturbed system path (default stdout)");
        c->add_option("--report", report_path, "certificate report path");
        c->callback([&, theta] {
            action = [&, theta] {
                AnySystem any = any_system_from_json(load_json(input));
                const ProjectionSystem& sys = need_graph(any, "perturb");
                std::int64_t t = pick(*theta, sys.theta());
                AxiomReport weak = verify_weak_axioms(sys.distances(), t);
                if (!weak.passed) return finish("perturb (precondition)", {weak}, report_path);
                PerturbResult result = perturb_system(sys, t);
                write_json(system_to_json(result.system), output);
                if (!report_path.empty()) return finish("perturb", {result.certificate}, report_path);
                return result.certificate.passed ? 0 : 1;
            };
        });
    }

    // -------------------------------------------------------------- pc
    auto* pc = app.add_subcommand("pc", "projection complex");
    pc->require_subcommand(1);
    {
        auto* c = pc->add_subcommand("build", "emit vertices and edges at gluing parameter K");
        auto K = std::make_shared<std::int64_t>(-1);
        c->add_option("--K", *K, "gluing parameter (default 3*theta)");
        c->add_option("--input", input, "input path (default stdin)");
        c->add_option("--output", output, "output path (default stdout)");
        c->callback([&, K] {
            action = [&, K] {
                AnySystem sys = any_system_from_json(load_json(input));
                std::int64_t k = pick(*K, 3 * sys.theta());
                ComplexGraph graph(sys.distances(), k);
                nlohmann::json j;
                j["schema"] = "projcx-pc-v1";
                j["K"] = k;
                j["vertices"] = graph.vertices();
                nlohmann::json edges = nlohmann::json::array();
                for (const auto& [a, b] : graph.edges()) edges.push_back({a, b});
                j["edges"] = std::move(edges);
                j["connected"] = graph.connected();
                j["notes"] = graph.notes();
                write_json(j, output);
                return 0;
            };
        });
    }
    {
        auto* c = pc->add_subcommand("check", "distance bounds, betweenness order and projection variation");
        auto K = std::make_shared<std::int64_t>(-1);
        c->add_option("--K", *K, "gluing parameter (default 3*theta)");
        c->add_option("--input", input, "input path (default stdin)");
        c->add_option("--output", output, "report path (default stdout)");
        c->callback([&, K] {
            action = [&, K] {
                AnySystem sys = any_system_from_json(load_json(input));
                const DistanceView& v = sys.distances();
                std::int64_t k = pick(*K, 3 * sys.theta());
                std::vector<AxiomReport> reports;
                reports.push_back(distance_bound_check(v, k));
                AxiomReport order;
                order.check = "order_equivalence";
                for (SpaceId X : v.space_ids())
                    for (SpaceId Z : v.space_ids()) {
                        if (X >= Z) continue;
                        order.absorb(order_equivalence_check(v, sys.theta(), X, Z));
                    }
                reports.push_back(std::move(order));
                reports.push_back(projection_variation_checks(v, k));
                return finish("pc check", reports, output);
            };
        });
    }

    // -------------------------------------------------------------- qt
    auto* qt = app.add_subcommand("qt", "quasi-tree of graphs");
    qt->require_subcommand(1);
    auto default_ck_k = [](const ProjectionSystem& sys) { return std::max<std::int64_t>(4 * sys.theta(), sys.theta() + 1); };
    {
        auto* c = qt->add_subcommand("build", "emit the glued weighted graph at gluing parameter K");
        auto K = std::make_shared<std::int64_t>(-1);
        c->add_option("--K", *K, "gluing parameter (default max(4*theta, theta+1))");
        c->add_option("--input", input, "input path (default stdin)");
        c->add_option("--output", output, "output path (default stdout)");
        c->callback([&, K, default_ck_k] {
            action = [&, K, default_ck_k] {
                AnySystem any = any_system_from_json(load_json(input));
                const ProjectionSystem& sys = need_graph(any, "qt");
                CkGraph ck(sys, pick(*K, default_ck_k(sys)));
                write_json(ck_to_json(ck), output);
                return 0;
            };
        });
    }
    {
        auto* c = qt->add_subcommand("check", "distance formula, structural pack and bottleneck sampling");
        auto K = std::make_shared<std::int64_t>(-1);
        auto sample_pairs = std::make_shared<std::size_t>(4000);
        auto exhaustive_max = std::make_shared<std::size_t>(600);
        auto seed = std::make_shared<std::uint64_t>(1);
        c->add_option("--K", *K, "gluing parameter (default max(4*theta, theta+1))");
        c->add_option("--sample-pairs", *sample_pairs, "pairs sampled above the exhaustive cutoff");
        c->add_option("--exhaustive-max", *exhaustive_max, "largest vertex count scanned exhaustively");
        c->add_option("--seed", *seed, "sampling seed");
        c->add_option("--input", input, "input path (default stdin)");
        c->add_option("--output", output, "report path (default stdout)");
        c->callback([&, K, sample_pairs, exhaustive_max, seed, default_ck_k] {
            action = [&, K, sample_pairs, exhaustive_max, seed, default_ck_k] {
                AnySystem any = any_system_from_json(load_json(input));
                const ProjectionSystem& sys = need_graph(any, "qt");
                CkGraph ck(sys, pick(*K, default_ck_k(sys)));
                std::vector<AxiomReport> reports;
                reports.push_back(distance_formula_check(ck, *exhaustive_max, *sample_pairs, *seed));
                CkPackOptions pack;
                pack.pair_cutoff = *exhaustive_max;
                pack.sample_pairs = *sample_pairs;
                pack.seed = *seed;
                reports.push_back(ck_property_pack(ck, pack));
                CkBottleneckOptions bn;
                bn.seed = *seed;
                for (SpaceId id : ck.space_ids())
                    bn.space_bottleneck =
                        std::max(bn.space_bottleneck, measure_space_bottleneck(ck.space(id), 64, 4, *seed));
                reports.push_back(ck_bottleneck_check(ck, bn));
                return finish("qt check", reports, output);
            };
        });
    }

    // ------------------------------------------------------------ acyl
    auto* acyl = app.add_subcommand("acyl", "group action audits");
    acyl->require_subcommand(1);
    {
        auto* c = acyl->add_subcommand("audit", "equivariance, stabilizers and coarse-fixing counts");
        auto K = std::make_shared<std::int64_t>(-1);
        auto D = std::make_shared<std::int64_t>(1);
        auto N = std::make_shared<std::size_t>(2);
        auto B = std::make_shared<std::int64_t>(1);
        auto group_path = std::make_shared<std::string>();
        auto reflection = std::make_shared<bool>(false);
        c->add_option("--K", *K, "gluing parameter (default 3*theta)");
        c->add_option("--D", *D, "coarse-fixing radius")->check(CLI::PositiveNumber);
        c->add_option("--N", *N, "far-family subset size")->check(CLI::PositiveNumber);
        c->add_option("--B", *B, "claimed stabilizer bound")->check(CLI::PositiveNumber);
        c->add_option("--group", *group_path, "group document path");
        c->add_flag("--reflection", *reflection, "use the end-to-end fence symmetry");
        c->add_option("--input", input, "input path (default stdin)");
        c->add_option("--output", output, "report path (default stdout)");
        c->callback([&, K, D, N, B, group_path, reflection] {
            action = [&, K, D, N, B, group_path, reflection] {
                AnySystem any = any_system_from_json(load_json(input));
                const ProjectionSystem& sys = need_graph(any, "acyl audit");
                if (group_path->empty() == !*reflection)
                    throw CLI::ValidationError("acyl audit", "pass exactly one of --group and --reflection");
                FiniteGroup group = *reflection ? fence_reflection_group(sys)
                                                : group_from_json(load_json(*group_path), sys);
                std::int64_t k = pick(*K, 3 * sys.theta());
                std::vector<AxiomReport> reports;
                reports.push_back(verify_action(group, sys));
                reports.push_back(acylindricity_audit_pc(group, sys, k, *D, *N, *B));
                std::int64_t d_ck = std::max(*D, sys.theta());
                reports.push_back(acylindricity_audit_ck(group, sys, std::max(k, sys.theta() + 1), d_ck));
                return finish("acyl audit", reports, output);
            };
        });
    }

    // ------------------------------------------------------------ free
    auto* fg = app.add_subcommand("free", "rank-two free subgroup certificates");
    fg->require_subcommand(1);
    {
        auto* c = fg->add_subcommand("certify", "run the built-in infinite-family certificate");
        auto radius = std::make_shared<int>(4);
        auto K = std::make_shared<std::int64_t>(1);
        c->add_option("--radius", *radius, "ball radius in the word metric")->check(CLI::PositiveNumber);
        c->add_option("--K", *K, "separation parameter")->check(CLI::NonNegativeNumber);
        c->add_option("--output", output, "report path (default stdout)");
        c->callback([&, radius, K] {
            action = [&, radius, K] {
                SymbolicFreeGroup model;
                AxiomReport rep;
                bool ok = model.certify(*K, *radius, &rep);
                int code = finish("free certify", {rep}, output);
                return ok ? code : std::max(code, 1);
            };
        });
    }
    {
        auto* c = fg->add_subcommand("materialize", "emit the orbit family as a distance table");
        auto radius = std::make_shared<int>(2);
        c->add_option("--radius", *radius, "ball radius in the word metric")->check(CLI::PositiveNumber);
        c->add_option("--output", output, "output path (default stdout)");
        c->callback([&, radius] {
            action = [&, radius] {
                SymbolicFreeGroup model;
                write_json(abstract_to_json(model.materialize(*radius).system), output);
                return 0;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return action();
    } catch (const CertificationError& e) {
        std::vector<AxiomReport> reports{e.report()};
        finish("certification failure", reports, output);
        return 1;
    } catch (const JsonLoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
