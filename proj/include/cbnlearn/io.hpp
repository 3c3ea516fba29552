#pragma once

#include "cbnlearn/cbn.hpp"
#include "cbnlearn/discovery.hpp"
#include "cbnlearn/error.hpp"
#include "cbnlearn/simulator.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace cbnlearn {

struct Diagnostic {
    std::size_t line = 0;  ///< 1-based; 0 when not tied to a line
    std::string message;
};

/// Raised by the text parsers; carries every problem found.
class ParseError : public Error {
public:
    explicit ParseError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

// Scenario documents -------------------------------------------------------
//
//   # comment
//   variable P doable
//   variable T nd
//   parents T: H W O
//   cpt P : 0.3
//   cpt T 010: 0.95          (bits follow the parents line)
//   option nd Pr,Pow,T
//   option base living_room
//   option proximity_edge 1
//   option light_power_effect 0.05

ScenarioConfig parse_scenario(std::string_view text);
std::string render_scenario(const ScenarioConfig& config);

/// A network serialised as an explicit scenario, loadable as an Scm.
std::string render_cbn(const CausalBayesianNetwork& cbn);
CausalBayesianNetwork parse_cbn(std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double value);
/// Fixed four decimals, ties to even.
std::string format_probability(double value);

// Datasets -----------------------------------------------------------------
//
//   regime,P,Pr,...
//   obs,0,1,...
//   do(H=1;L=0),1,0,...

std::string render_dataset_csv(const Dataset& dataset);
/// When expected_variables is non-empty the header must match it exactly.
Dataset parse_dataset_csv(std::string_view text, const std::vector<std::string>& expected_variables = {});

// DOT ----------------------------------------------------------------------
//
// Non-doable nodes are rounded boxes, doable nodes circles. Every edge
// carries class="<kind>" so that the tool can read its own output back.

std::string render_dot(const LearnedGraph& graph);
/// Pre-resolution graph; ND arrows end in an open circle.
std::string render_dot(const CandidateGraph& graph);
/// Learned arrows colored by diff class: green correct, yellow added, red missed.
std::string render_dot(const LearnedGraph& learned, const EdgeDiff& diff, const CausalDiagram& truth);

/// Reads the node/edge subset render_dot emits. Edges of class "missed" are
/// skipped; class "flagged" restores Flagged evidence.
LearnedGraph parse_dot(std::string_view text);

// Files --------------------------------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace cbnlearn
