#include "cbnlearn/cli.hpp"

#include "cbnlearn/cbn.hpp"
#include "cbnlearn/discovery.hpp"
#include "cbnlearn/error.hpp"
#include "cbnlearn/inference.hpp"
#include "cbnlearn/io.hpp"
#include "cbnlearn/simulator.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace cbnlearn {

namespace {

/// Malformed flag values that CLI11 cannot see.
struct UsageError : Error {
    using Error::Error;
};

std::set<std::string> split_names(const std::string& list) {
    std::set<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(item);
    return out;
}

ScenarioConfig load_scenario(const std::string& path, const std::string& nd_override) {
    ScenarioConfig config = parse_scenario(read_file(path));
    if (!nd_override.empty()) config.options.nd_set = split_names(nd_override);
    return config;
}

Evidence parse_evidence(const std::string& text, const CausalDiagram& structure) {
    Evidence evidence;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        const std::string value = eq == std::string::npos ? "" : item.substr(eq + 1);
        if (eq == std::string::npos || (value != "0" && value != "1"))
            throw UsageError("evidence item '" + item + "' is not of the form NAME=0|1");
        const auto v = structure.find(item.substr(0, eq));
        if (!v) throw ConfigError("evidence names unknown variable '" + item.substr(0, eq) + "'");
        evidence[*v] = value == "1";
    }
    return evidence;
}

/// Re-expresses a DOT structure over the scenario's variables so that
/// doable flags and column order follow the scenario.
CausalDiagram align_structure(const LearnedGraph& graph, const CausalDiagram& reference) {
    const auto& names = graph.diagram.variables();
    if (names.size() != reference.size())
        throw StructuralError("structure has " + std::to_string(names.size()) + " variables, scenario has " +
                              std::to_string(reference.size()));
    CausalDiagram out(reference.variables());
    for (const auto& a : graph.diagram.arrows())
        out.add_arrow(reference.id(graph.diagram.name(a.from)), reference.id(graph.diagram.name(a.to)));
    if (const auto report = check_acyclic(out); !report.acyclic) throw StructuralError("structure is cyclic");
    return out;
}

void print_arrows(std::ostream& out, const char* label, const std::set<Arrow>& arrows, const CausalDiagram& d) {
    out << label << " (" << arrows.size() << "):";
    for (const auto& a : arrows) out << ' ' << d.name(a.from) << "->" << d.name(a.to);
    out << '\n';
}

int cmd_gen_data(const std::string& scenario, std::size_t n, std::uint64_t seed, const std::string& path,
                 std::ostream& out) {
    ScmEnvironment env(build_scenario(parse_scenario(read_file(scenario))));
    write_file(path, render_dataset_csv(env.observe(n, seed)));
    out << "wrote " << n << " records to " << path << '\n';
    return kExitOk;
}

struct DiscoverArgs {
    std::string scenario, data, out, raw, nd;
    double alpha = kDefaultAlpha;
    std::size_t interventions = 20;
    std::size_t observations = 500;
    std::uint64_t seed = 0;
};

int cmd_discover(const DiscoverArgs& args, std::ostream& out, std::ostream& err) {
    const Scm scm = build_scenario(load_scenario(args.scenario, args.nd));
    ScmEnvironment world(scm, true);
    AuditingEnvironment env(world);

    DiscoveryConfig config;
    config.alpha = args.alpha;
    config.interventions_per_assignment = args.interventions;
    config.observational_samples = args.observations;
    config.seed = args.seed;

    std::optional<Dataset> data;
    if (!args.data.empty()) data = parse_dataset_csv(read_file(args.data), variable_names(scm.diagram()));

    const CandidateGraph candidate = run_discovery(env, config, std::move(data));
    const LearnedGraph learned = resolve_to_dag(candidate);
    write_file(args.out, render_dot(learned));
    if (!args.raw.empty()) write_file(args.raw, render_dot(candidate));

    std::size_t flagged = 0;
    for (const auto& [a, e] : learned.evidence) flagged += e.kind == EvidenceKind::Flagged;
    out << "learned " << learned.diagram.arrows().size() << " arrows (" << flagged << " flagged) using "
        << env.interventions().size() << " interventions, " << env.samples_drawn() << " samples\n";
    if (env.policy_violations() != 0) {
        err << "error: " << env.policy_violations() << " interventions touched non-doable variables\n";
        return kExitData;
    }
    return kExitOk;
}

struct FitArgs {
    std::string scenario, structure, data, out;
    bool augment = false;
    double pseudo_count = kDefaultPseudoCount;
    std::size_t min_count = 5;
    std::size_t samples = 20;
    std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
    const Scm scm = build_scenario(parse_scenario(read_file(args.scenario)));
    const CausalDiagram structure = align_structure(parse_dot(read_file(args.structure)), scm.diagram());
    const Dataset data = parse_dataset_csv(read_file(args.data), variable_names(scm.diagram()));

    CausalBayesianNetwork cbn = fit_mle(structure, data, args.pseudo_count);
    if (args.augment) {
        ScmEnvironment env(scm, true);
        cbn = augment_with_interventions(cbn, env, {args.min_count, args.samples, args.seed});
    }
    const ValidationReport report = validate_cbn(cbn);
    for (const auto& [v, row] : report.smoothed_rows)
        err << "warning: " << structure.name(v) << " row " << row << " has no data\n";
    write_file(args.out, render_cbn(cbn));
    out << "fitted " << cbn.size() << " CPTs from " << data.observational().size() << " records\n";
    return kExitOk;
}

int cmd_infer(const std::string& path, const std::string& evidence_text, const std::string& method,
              std::ostream& out) {
    const CausalBayesianNetwork cbn = parse_cbn(read_file(path));
    const Evidence evidence = parse_evidence(evidence_text, cbn.structure);
    BeliefMap beliefs;
    if (method == "bp")
        beliefs = propagate(cbn, evidence).beliefs;
    else if (method == "enum")
        beliefs = enumerate_posterior(cbn, evidence);
    else
        beliefs = query(cbn, evidence);

    std::size_t width = 10;
    for (const auto& v : cbn.structure.variables()) width = std::max(width, v.name.size() + 2);
    out << std::left << std::setw(static_cast<int>(width)) << "variable" << "P(=0)    P(=1)\n";
    for (VarId v : cbn.structure.ids()) {
        out << std::left << std::setw(static_cast<int>(width)) << cbn.structure.name(v)
            << format_probability(beliefs[v.index].p0) << "   " << format_probability(beliefs[v.index].p1) << '\n';
    }
    return kExitOk;
}

int cmd_compare(const std::string& learned_path, const std::string& truth_path, const std::string& dot_path,
                std::ostream& out) {
    const LearnedGraph learned = parse_dot(read_file(learned_path));
    const CausalDiagram truth = build_scenario(parse_scenario(read_file(truth_path))).diagram();
    const EdgeDiff diff = diff_graphs(learned, truth);
    print_arrows(out, "correct", diff.correct, truth);
    print_arrows(out, "missed", diff.missed, truth);
    print_arrows(out, "added", diff.added, truth);
    print_arrows(out, "flagged", diff.flagged_spurious, truth);
    print_arrows(out, "bidirectional", diff.bidirectional, truth);
    char line[96];
    std::snprintf(line, sizeof line, "precision %.4f\nrecall %.4f\n", diff.precision, diff.recall);
    out << line;
    if (!dot_path.empty()) write_file(dot_path, render_dot(learned, diff, truth));
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causal structure discovery and inference over Boolean smart-home variables", "cbnlearn"};
    app.require_subcommand(1);

    std::string scenario, out_path, data_path;
    std::size_t obs = 500;
    std::uint64_t seed = 0;

    auto* gen = app.add_subcommand("gen-data", "Sample observational records from a scenario");
    gen->add_option("--scenario", scenario, "Scenario file")->required();
    gen->add_option("--obs", obs, "Number of records")->required();
    gen->add_option("--seed", seed, "Random seed");
    gen->add_option("--out", out_path, "Dataset CSV to write")->required();

    DiscoverArgs d;
    auto* discover = app.add_subcommand("discover", "Learn a causal diagram by intervening on the scenario");
    discover->add_option("--scenario", d.scenario, "Scenario file")->required();
    discover->add_option("--data", d.data, "Observational dataset (drawn from the scenario otherwise)");
    discover->add_option("--alpha", d.alpha, "Significance level")->check(CLI::Range(1e-12, 0.5));
    discover->add_option("--interventions", d.interventions, "Samples per arm and lock assignment")
        ->check(CLI::PositiveNumber);
    discover->add_option("--obs", d.observations, "Observational records when --data is absent");
    discover->add_option("--seed", d.seed, "Random seed");
    discover->add_option("--nd", d.nd, "Comma-separated non-doable variables (overrides the scenario)");
    discover->add_option("--out", d.out, "Learned DAG (DOT)")->required();
    discover->add_option("--raw", d.raw, "Candidate graph before resolution (DOT)");

    FitArgs f;
    auto* fit = app.add_subcommand("fit", "Estimate CPTs for a structure");
    fit->add_option("--scenario", f.scenario, "Scenario file")->required();
    fit->add_option("--structure", f.structure, "Structure (DOT)")->required();
    fit->add_option("--data", f.data, "Dataset CSV")->required();
    fit->add_option("--out", f.out, "Network file to write")->required();
    fit->add_flag("--augment", f.augment, "Re-estimate sparse rows from interventions");
    fit->add_option("--pseudo-count", f.pseudo_count, "Additive smoothing")->check(CLI::NonNegativeNumber);
    fit->add_option("--min-count", f.min_count, "Rows with fewer records are augmented");
    fit->add_option("--samples", f.samples, "Interventional samples per augmented row");
    fit->add_option("--seed", f.seed, "Random seed for augmentation");

    std::string cbn_path, evidence, method;
    auto* infer = app.add_subcommand("infer", "Posterior beliefs under evidence");
    infer->add_option("--cbn", cbn_path, "Network file")->required();
    infer->add_option("--evidence", evidence, "Evidence such as L=0,H=1");
    infer->add_option("--method", method, "bp or enum")->check(CLI::IsMember({"bp", "enum"}));

    std::string learned_path, truth_path, diff_dot;
    auto* compare = app.add_subcommand("compare", "Compare a learned graph with the ground truth");
    compare->add_option("--learned", learned_path, "Learned graph (DOT)")->required();
    compare->add_option("--truth", truth_path, "Ground-truth scenario")->required();
    compare->add_option("--dot", diff_dot, "Colored comparison graph (DOT)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(scenario, obs, seed, out_path, out);
        if (discover->parsed()) return cmd_discover(d, out, err);
        if (fit->parsed()) return cmd_fit(f, out, err);
        if (infer->parsed()) return cmd_infer(cbn_path, evidence, method, out);
        if (compare->parsed()) return cmd_compare(learned_path, truth_path, diff_dot, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        for (const auto& diag : e.diagnostics()) {
            err << "error: ";
            if (diag.line) err << "line " << diag.line << ": ";
            err << diag.message << '\n';
        }
        return kExitData;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

} // namespace cbnlearn
