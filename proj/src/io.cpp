#include "cbnlearn/io.hpp"

#include "cbnlearn/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

namespace cbnlearn {

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diagnostics) {
    std::ostringstream os;
    for (std::size_t i = 0; i < diagnostics.size(); ++i) {
        if (i) os << '\n';
        if (diagnostics[i].line) os << "line " << diagnostics[i].line << ": ";
        os << diagnostics[i].message;
    }
    return os.str();
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream is{std::string(s)};
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

bool valid_name(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::optional<bool> parse_flag(std::string_view s) {
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    return std::nullopt;
}

} // namespace

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : Error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::string format_real(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string format_probability(double value) {
    // printf rounds the exact binary value, so only true decimal ties
    // (dyadic values such as 0.03125) hit the rounding mode: ties to even.
    if (value == 0.0) value = 0.0;  // drop the sign of -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

// ---------------------------------------------------------------------------
// Scenario documents

ScenarioConfig parse_scenario(std::string_view text) {
    struct Pending {
        VariableSpec spec;
        std::size_t line = 0;
        bool parents_seen = false;
        std::vector<std::optional<double>> rows{std::nullopt};
    };
    std::vector<Pending> vars;
    std::map<std::string, std::size_t> index;
    ScenarioConfig config;
    std::vector<Diagnostic> diags;
    std::set<std::string> options_seen;

    const auto lines = lines_of(text);
    for (std::size_t ln = 1; ln <= lines.size(); ++ln) {
        std::string_view line = lines[ln - 1];
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto fail = [&](const std::string& msg) { diags.push_back({ln, msg}); };

        const auto head = split_ws(line.substr(0, line.find(':')));
        const std::string& directive = head[0];

        if (directive == "variable") {
            const auto toks = split_ws(line);
            if (toks.size() != 3 || (toks[2] != "doable" && toks[2] != "nd")) {
                fail("expected 'variable <name> doable|nd'");
                continue;
            }
            if (!valid_name(toks[1])) {
                fail("invalid variable name '" + toks[1] + "'");
                continue;
            }
            if (index.contains(toks[1])) {
                fail("duplicate variable '" + toks[1] + "'");
                continue;
            }
            index[toks[1]] = vars.size();
            Pending p;
            p.spec.name = toks[1];
            p.spec.doable = toks[2] == "doable";
            p.line = ln;
            vars.push_back(std::move(p));
        } else if (directive == "parents") {
            const auto colon = line.find(':');
            if (colon == std::string_view::npos || head.size() != 2) {
                fail("expected 'parents <name>: <parent> ...'");
                continue;
            }
            auto it = index.find(head[1]);
            if (it == index.end()) {
                fail("parents for undeclared variable '" + head[1] + "'");
                continue;
            }
            Pending& p = vars[it->second];
            if (p.parents_seen) {
                fail("second parents line for '" + head[1] + "'");
                continue;
            }
            if (std::any_of(p.rows.begin(), p.rows.end(), [](const auto& r) { return r.has_value(); })) {
                fail("parents of '" + head[1] + "' must precede its cpt lines");
                continue;
            }
            bool ok = true;
            std::vector<std::string> parents;
            for (const auto& name : split_ws(line.substr(colon + 1))) {
                if (!index.contains(name)) {
                    fail("undeclared parent '" + name + "'");
                    ok = false;
                } else if (name == head[1]) {
                    fail("'" + name + "' cannot be its own parent");
                    ok = false;
                } else if (std::find(parents.begin(), parents.end(), name) != parents.end()) {
                    fail("parent '" + name + "' listed twice");
                    ok = false;
                } else {
                    parents.push_back(name);
                }
            }
            if (!ok) continue;
            if (parents.size() > 20) {
                fail("too many parents for '" + head[1] + "'");
                continue;
            }
            p.parents_seen = true;
            p.spec.parents = std::move(parents);
            p.rows.assign(std::size_t{1} << p.spec.parents.size(), std::nullopt);
        } else if (directive == "cpt") {
            const auto colon = line.find(':');
            if (colon == std::string_view::npos || head.size() < 2 || head.size() > 3) {
                fail("expected 'cpt <name> <parent-bits>: <probability>'");
                continue;
            }
            auto it = index.find(head[1]);
            if (it == index.end()) {
                fail("cpt for undeclared variable '" + head[1] + "'");
                continue;
            }
            Pending& p = vars[it->second];
            const std::string bits = head.size() == 3 ? head[2] : "";
            if (bits.size() != p.spec.parents.size() ||
                !std::all_of(bits.begin(), bits.end(), [](char c) { return c == '0' || c == '1'; })) {
                fail("cpt row '" + bits + "' does not match the " + std::to_string(p.spec.parents.size()) +
                     " parent(s) of '" + head[1] + "'");
                continue;
            }
            const auto prob = parse_real(line.substr(colon + 1));
            if (!prob || !(*prob >= 0.0 && *prob <= 1.0)) {
                fail("probability must be a number in [0,1]");
                continue;
            }
            std::size_t row = 0;
            for (char c : bits) row = (row << 1) | (c == '1' ? 1u : 0u);
            if (p.rows[row]) {
                fail("duplicate cpt row '" + bits + "' for '" + head[1] + "'");
                continue;
            }
            p.rows[row] = *prob;
        } else if (directive == "option") {
            const auto toks = split_ws(line);
            if (toks.size() != 3) {
                fail("expected 'option <key> <value>'");
                continue;
            }
            const std::string& key = toks[1];
            const std::string& value = toks[2];
            if (!options_seen.insert(key).second) {
                fail("option '" + key + "' given twice");
                continue;
            }
            if (key == "nd") {
                for (const auto& name : split(value, ',')) {
                    if (!valid_name(name)) fail("invalid variable name '" + name + "' in nd option");
                    config.options.nd_set.insert(name);
                }
            } else if (key == "base") {
                config.options.base = value;
            } else if (key == "proximity_edge") {
                auto flag = parse_flag(value);
                if (!flag) fail("proximity_edge expects 0 or 1");
                else config.options.proximity_edge = *flag;
            } else if (key.size() > 7 && key.ends_with("_effect")) {
                auto strength = parse_real(value);
                if (!strength || !(*strength >= 0.0 && *strength <= 1.0)) fail("effect strength must lie in [0,1]");
                else config.options.effect_strengths[key] = *strength;
            } else {
                fail("unknown option '" + key + "'");
            }
        } else {
            fail("unknown directive '" + directive + "'");
        }
    }

    for (auto& p : vars) {
        for (std::size_t row = 0; row < p.rows.size(); ++row) {
            if (!p.rows[row]) {
                std::string bits;
                for (std::size_t j = 0; j < p.spec.parents.size(); ++j)
                    bits += ((row >> (p.spec.parents.size() - 1 - j)) & 1u) ? '1' : '0';
                diags.push_back({p.line, "missing cpt row '" + bits + "' for '" + p.spec.name + "'"});
            } else {
                p.spec.cpt.push_back(*p.rows[row]);
            }
        }
        config.variables.push_back(std::move(p.spec));
    }
    for (const auto& name : config.options.nd_set)
        if (!config.variables.empty() && !index.contains(name))
            diags.push_back({0, "nd option names undeclared variable '" + name + "'"});

    if (!diags.empty()) throw ParseError(std::move(diags));
    return config;
}

namespace {

std::string bits_of(std::size_t row, std::size_t k) {
    std::string bits;
    for (std::size_t j = 0; j < k; ++j) bits += ((row >> (k - 1 - j)) & 1u) ? '1' : '0';
    return bits;
}

void render_options(std::ostringstream& os, const ScenarioOptions& options) {
    if (!options.base.empty()) os << "option base " << options.base << '\n';
    if (!options.nd_set.empty()) {
        os << "option nd ";
        bool first = true;
        for (const auto& n : options.nd_set) {
            os << (first ? "" : ",") << n;
            first = false;
        }
        os << '\n';
    }
    if (options.proximity_edge) os << "option proximity_edge 1\n";
    for (const auto& [key, value] : options.effect_strengths) os << "option " << key << ' ' << format_real(value) << '\n';
}

} // namespace

std::string render_scenario(const ScenarioConfig& config) {
    std::ostringstream os;
    for (const auto& v : config.variables) os << "variable " << v.name << (v.doable ? " doable" : " nd") << '\n';
    for (const auto& v : config.variables) {
        if (v.parents.empty()) continue;
        os << "parents " << v.name << ':';
        for (const auto& p : v.parents) os << ' ' << p;
        os << '\n';
    }
    for (const auto& v : config.variables)
        for (std::size_t row = 0; row < v.cpt.size(); ++row) {
            const auto bits = bits_of(row, v.parents.size());
            os << "cpt " << v.name << ' ' << bits << ": " << format_real(v.cpt[row]) << '\n';
        }
    render_options(os, config.options);
    return os.str();
}

std::string render_cbn(const CausalBayesianNetwork& cbn) {
    const auto report = validate_cbn(cbn);
    if (!report.ok()) throw StructuralError("cannot serialise invalid network: " + report.violations.front());
    const auto& s = cbn.structure;
    std::ostringstream os;
    for (const auto& v : s.variables()) os << "variable " << v.name << (v.doable ? " doable" : " nd") << '\n';
    for (const auto& cpt : cbn.cpts) {
        if (cpt.parents.empty()) continue;
        os << "parents " << s.name(cpt.owner) << ':';
        for (VarId p : cpt.parents) os << ' ' << s.name(p);
        os << '\n';
    }
    for (const auto& cpt : cbn.cpts) {
        for (std::size_t row = 0; row < cpt.rows.size(); ++row) {
            os << "cpt " << s.name(cpt.owner) << ' ' << bits_of(row, cpt.parents.size()) << ": "
               << format_real(cpt.rows[row]);
            const auto& prov = cpt.provenance[row];
            if (prov.kind != RowProvenance::Kind::Specified) {
                os << "  # " << to_string(prov.kind);
                if (prov.kind != RowProvenance::Kind::Smoothed) os << " n=" << prov.count;
            }
            os << '\n';
        }
    }
    return os.str();
}

CausalBayesianNetwork parse_cbn(std::string_view text) {
    const ScenarioConfig config = parse_scenario(text);
    if (!config.options.base.empty()) throw ConfigError("a network file must list its CPTs explicitly");
    return CausalBayesianNetwork::from_scm(build_scenario(config));
}

// ---------------------------------------------------------------------------
// Datasets

std::string render_dataset_csv(const Dataset& dataset) {
    std::string out = "regime";
    for (const auto& v : dataset.variables) out += ',' + v;
    out += '\n';
    for (const auto& r : dataset.records) {
        out += r.observational() ? std::string("obs") : format_intervention(dataset.variables, *r.regime);
        for (std::uint8_t value : r.state.values()) {
            out += ',';
            out += value ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

Dataset parse_dataset_csv(std::string_view text, const std::vector<std::string>& expected_variables) {
    const auto lines = lines_of(text);
    std::vector<Diagnostic> diags;
    Dataset dataset;
    std::size_t ln = 0;
    for (; ln < lines.size() && trim(lines[ln]).empty(); ++ln) {
    }
    if (ln == lines.size()) throw ParseError({{0, "dataset file is empty"}});

    const auto header = split(trim(lines[ln]), ',');
    if (header.empty() || header[0] != "regime") throw ParseError({{ln + 1, "header must start with 'regime'"}});
    dataset.variables.assign(header.begin() + 1, header.end());
    for (const auto& v : dataset.variables)
        if (!valid_name(v)) diags.push_back({ln + 1, "invalid variable name '" + v + "' in header"});
    if (!expected_variables.empty() && dataset.variables != expected_variables)
        diags.push_back({ln + 1, "header does not match the scenario variables"});
    if (!diags.empty()) throw ParseError(std::move(diags));

    for (++ln; ln < lines.size(); ++ln) {
        const auto line = trim(lines[ln]);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) {
            diags.push_back({ln + 1, "expected " + std::to_string(header.size()) + " cells, found " +
                                         std::to_string(cells.size())});
            continue;
        }
        Record record;
        const std::string& regime = cells[0];
        if (regime != "obs") {
            if (!(regime.starts_with("do(") && regime.ends_with(")"))) {
                diags.push_back({ln + 1, "regime must be 'obs' or 'do(...)'"});
                continue;
            }
            Intervention intervention;
            bool ok = true;
            for (const auto& part : split(std::string_view(regime).substr(3, regime.size() - 4), ';')) {
                const auto eq = part.find('=');
                const auto var = eq == std::string::npos ? std::nullopt : dataset.find(part.substr(0, eq));
                const std::string value = eq == std::string::npos ? "" : part.substr(eq + 1);
                if (!var || (value != "0" && value != "1") || intervention.contains(*var)) {
                    diags.push_back({ln + 1, "malformed assignment '" + part + "' in regime"});
                    ok = false;
                    break;
                }
                intervention[*var] = value == "1";
            }
            if (!ok) continue;
            record.regime = std::move(intervention);
        }
        std::vector<std::uint8_t> values;
        bool ok = true;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (cells[c] != "0" && cells[c] != "1") {
                diags.push_back({ln + 1, "cell '" + cells[c] + "' is not 0 or 1"});
                ok = false;
                break;
            }
            values.push_back(cells[c] == "1" ? 1 : 0);
        }
        if (!ok) continue;
        record.state = WorldState(std::move(values));
        dataset.records.push_back(std::move(record));
    }
    if (!diags.empty()) throw ParseError(std::move(diags));
    return dataset;
}

// ---------------------------------------------------------------------------
// DOT

namespace {

std::string quoted(const std::string& s) { return '"' + s + '"'; }

void render_nodes(std::ostringstream& os, const std::vector<Variable>& variables) {
    for (const auto& v : variables) {
        os << "  " << quoted(v.name);
        if (v.doable)
            os << " [shape=circle];\n";
        else
            os << " [shape=box, style=\"rounded,filled\", fillcolor=\"lightblue\"];\n";
    }
}

std::string statistic_tooltip(double statistic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "chi2=%.4f", statistic);
    return buf;
}

void render_edge(std::ostringstream& os, const std::vector<Variable>& variables, Arrow a, const std::string& cls,
                 const std::string& extra, std::optional<double> statistic) {
    os << "  " << quoted(variables[a.from.index].name) << " -> " << quoted(variables[a.to.index].name)
       << " [class=\"" << cls << '"';
    if (!extra.empty()) os << ", " << extra;
    if (statistic) os << ", tooltip=\"" << statistic_tooltip(*statistic) << '"';
    os << "];\n";
}

std::string evidence_style(EvidenceKind kind) {
    switch (kind) {
    case EvidenceKind::DoConfirmed: return "style=solid";
    case EvidenceKind::NdCandidate: return "style=dashed, color=\"blue\", arrowhead=odot";
    case EvidenceKind::Flagged: return "style=dashed, label=\"flagged\"";
    }
    return "";
}

} // namespace

std::string render_dot(const LearnedGraph& graph) {
    std::ostringstream os;
    const auto& vars = graph.diagram.variables();
    os << "digraph causal {\n";
    render_nodes(os, vars);
    for (const auto& a : graph.diagram.arrows()) {
        auto it = graph.evidence.find(a);
        const EvidenceKind kind = it == graph.evidence.end() ? EvidenceKind::DoConfirmed : it->second.kind;
        std::optional<double> stat;
        if (it != graph.evidence.end()) stat = it->second.best_statistic;
        render_edge(os, vars, a, to_string(kind), evidence_style(kind), stat);
    }
    os << "}\n";
    return os.str();
}

std::string render_dot(const CandidateGraph& graph) {
    std::ostringstream os;
    os << "digraph candidate {\n";
    render_nodes(os, graph.variables);
    for (const auto& [a, e] : graph.arrows)
        render_edge(os, graph.variables, a, to_string(e.kind), evidence_style(e.kind), e.best_statistic);
    os << "}\n";
    return os.str();
}

std::string render_dot(const LearnedGraph& learned, const EdgeDiff& diff, const CausalDiagram& truth) {
    std::ostringstream os;
    const auto& vars = truth.variables();
    os << "digraph comparison {\n";
    // Truth order, learned doable flags.
    std::vector<Variable> nodes = vars;
    for (auto& v : nodes)
        if (const auto id = learned.diagram.find(v.name)) v.doable = learned.diagram.doable(*id);
    render_nodes(os, nodes);
    std::map<Arrow, std::string> edges;
    auto flagged = [&](Arrow t) {
        const auto from = learned.diagram.find(truth.name(t.from));
        const auto to = learned.diagram.find(truth.name(t.to));
        if (!from || !to) return false;
        auto it = learned.evidence.find(Arrow{*from, *to});
        return it != learned.evidence.end() && it->second.kind == EvidenceKind::Flagged;
    };
    for (Arrow a : diff.correct) edges[a] = "correct";
    for (Arrow a : diff.added) edges[a] = "added";
    for (Arrow a : diff.missed) edges[a] = "missed";
    for (const auto& [a, cls] : edges) {
        std::string extra = cls == "correct" ? "color=\"green\"" : cls == "added" ? "color=\"yellow\"" : "color=\"red\"";
        if (cls != "missed" && flagged(a)) extra += ", label=\"flagged\"";
        if (diff.bidirectional.contains(a)) extra += ", dir=both";
        render_edge(os, vars, a, cls, extra, std::nullopt);
    }
    os << "}\n";
    return os.str();
}

LearnedGraph parse_dot(std::string_view text) {
    static const std::regex header(R"re(^\s*digraph\s+\w*\s*\{\s*$)re");
    static const std::regex node(R"re(^\s*"([^"]+)"\s*(\[(.*)\])?\s*;?\s*$)re");
    static const std::regex edge(R"re(^\s*"([^"]+)"\s*->\s*"([^"]+)"\s*(\[(.*)\])?\s*;?\s*$)re");
    static const std::regex attr(R"re((\w+)\s*=\s*("([^"]*)"|[^,\s\]]+))re");

    auto attributes = [](const std::string& list) {
        std::map<std::string, std::string> out;
        for (auto it = std::sregex_iterator(list.begin(), list.end(), attr); it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            out[m[1]] = m[3].matched ? m[3].str() : m[2].str();
        }
        return out;
    };

    std::vector<Diagnostic> diags;
    std::vector<Variable> variables;
    struct PendingEdge {
        std::string from, to;
        EdgeEvidence evidence;
        std::size_t line;
    };
    std::vector<PendingEdge> edges;
    bool opened = false, closed = false;

    const auto lines = lines_of(text);
    for (std::size_t ln = 1; ln <= lines.size(); ++ln) {
        const std::string line(trim(lines[ln - 1]));
        if (line.empty() || line.starts_with("//")) continue;
        std::smatch m;
        if (!opened) {
            if (std::regex_match(line, header))
                opened = true;
            else
                diags.push_back({ln, "expected 'digraph <name> {'"});
            continue;
        }
        if (line == "}") {
            closed = true;
            continue;
        }
        if (std::regex_match(line, m, edge)) {
            const auto attrs = attributes(m[4].str());
            const std::string cls = attrs.contains("class") ? attrs.at("class") : "do_confirmed";
            if (cls == "missed") continue;
            EdgeEvidence e;
            if (cls == "flagged" || (attrs.contains("label") && attrs.at("label") == "flagged"))
                e.kind = EvidenceKind::Flagged;
            else if (cls == "nd_candidate")
                e.kind = EvidenceKind::NdCandidate;
            if (attrs.contains("tooltip") && attrs.at("tooltip").starts_with("chi2="))
                if (auto v = parse_real(attrs.at("tooltip").substr(5))) e.best_statistic = *v;
            edges.push_back({m[1], m[2], e, ln});
        } else if (std::regex_match(line, m, node)) {
            const auto attrs = attributes(m[3].str());
            const bool nd = attrs.contains("shape") && attrs.at("shape") == "box";
            if (std::any_of(variables.begin(), variables.end(), [&](const Variable& v) { return v.name == m[1]; }))
                diags.push_back({ln, "node '" + m[1].str() + "' declared twice"});
            else
                variables.push_back({m[1], !nd});
        } else if (line.find('=') != std::string::npos && line.find('"') == std::string::npos) {
            continue;  // graph attribute such as rankdir=LR;
        } else {
            diags.push_back({ln, "unrecognised DOT statement"});
        }
    }
    if (!opened || !closed) diags.push_back({0, "incomplete digraph"});

    LearnedGraph graph;
    if (diags.empty()) {
        try {
            graph.diagram = CausalDiagram(variables);
        } catch (const StructuralError& e) {
            diags.push_back({0, e.what()});
        }
    }
    for (const auto& pe : edges) {
        if (!diags.empty()) break;
        const auto from = graph.diagram.find(pe.from);
        const auto to = graph.diagram.find(pe.to);
        if (!from || !to || from == to) {
            diags.push_back({pe.line, "edge " + pe.from + " -> " + pe.to + " references an undeclared node"});
            continue;
        }
        graph.diagram.add_arrow(*from, *to);
        graph.evidence[Arrow{*from, *to}] = pe.evidence;
    }
    if (!diags.empty()) throw ParseError(std::move(diags));
    return graph;
}

// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("failed writing '" + path + "'");
}

} // namespace cbnlearn
