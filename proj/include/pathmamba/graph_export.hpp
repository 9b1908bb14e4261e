#pragma once

#include <string>
#include <vector>

#include "pathmamba/graph.hpp"

namespace pathmamba {

enum class ExportFormat { graphml, dot, json };

// Throws a usage error for unknown format names.
ExportFormat parse_export_format(const std::string& name);
std::string format_name(ExportFormat fmt);

struct ScoredGraph {
    Graph graph;
    std::vector<double> node_scores;
    std::vector<double> edge_scores;
};

// Emits nodes and edges with `score` attributes. Numbers are printed
// canonically so export -> parse -> export is a fixed point.
std::string export_scored_graph(const Graph& graph, const std::vector<double>& node_scores,
                                const std::vector<double>& edge_scores, ExportFormat fmt);

// Parses documents produced by export_scored_graph.
ScoredGraph parse_scored_graph(const std::string& text, ExportFormat fmt);

}  // namespace pathmamba
