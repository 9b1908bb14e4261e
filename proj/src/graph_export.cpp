#include "pathmamba/graph_export.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pathmamba {

using nlohmann::json;

namespace {

std::string fmt_score(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void check_scores(const Graph& g, const std::vector<double>& node_scores,
                  const std::vector<double>& edge_scores) {
    if (static_cast<int>(node_scores.size()) != g.node_count()) {
        throw std::invalid_argument("export: node score count " +
                                    std::to_string(node_scores.size()) + " != node count " +
                                    std::to_string(g.node_count()));
    }
    if (static_cast<int>(edge_scores.size()) != g.edge_count()) {
        throw std::invalid_argument("export: edge score count " +
                                    std::to_string(edge_scores.size()) + " != edge count " +
                                    std::to_string(g.edge_count()));
    }
}

// Pulls the value of `attr="..."` out of a tag snippet; empty if absent.
std::string attr_value(const std::string& text, size_t from, size_t to,
                       const std::string& attr) {
    std::string needle = attr + "=\"";
    size_t p = text.find(needle, from);
    if (p == std::string::npos || p >= to) return {};
    p += needle.size();
    size_t q = text.find('"', p);
    return text.substr(p, q - p);
}

}  // namespace

ExportFormat parse_export_format(const std::string& name) {
    if (name == "graphml") return ExportFormat::graphml;
    if (name == "dot") return ExportFormat::dot;
    if (name == "json") return ExportFormat::json;
    throw std::invalid_argument("unknown export format '" + name +
                                "' (expected graphml, dot, or json)");
}

std::string format_name(ExportFormat fmt) {
    switch (fmt) {
        case ExportFormat::graphml: return "graphml";
        case ExportFormat::dot: return "dot";
        case ExportFormat::json: return "json";
    }
    return "?";
}

std::string export_scored_graph(const Graph& graph, const std::vector<double>& node_scores,
                                const std::vector<double>& edge_scores, ExportFormat fmt) {
    check_scores(graph, node_scores, edge_scores);
    std::ostringstream out;
    switch (fmt) {
        case ExportFormat::graphml: {
            out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
                << "  <key id=\"nscore\" for=\"node\" attr.name=\"score\" attr.type=\"double\"/>\n"
                << "  <key id=\"escore\" for=\"edge\" attr.name=\"score\" attr.type=\"double\"/>\n"
                << "  <graph id=\"G\" edgedefault=\"undirected\" nodes=\""
                << graph.node_count() << "\">\n";
            for (int v = 0; v < graph.node_count(); ++v) {
                out << "    <node id=\"n" << v << "\"><data key=\"nscore\">"
                    << fmt_score(node_scores[static_cast<size_t>(v)]) << "</data></node>\n";
            }
            for (int e = 0; e < graph.edge_count(); ++e) {
                const Edge& ed = graph.edges()[static_cast<size_t>(e)];
                out << "    <edge source=\"n" << ed.u << "\" target=\"n" << ed.v
                    << "\"><data key=\"escore\">" << fmt_score(edge_scores[static_cast<size_t>(e)])
                    << "</data></edge>\n";
            }
            out << "  </graph>\n</graphml>\n";
            break;
        }
        case ExportFormat::dot: {
            out << "graph G {\n  // nodes=" << graph.node_count() << "\n";
            for (int v = 0; v < graph.node_count(); ++v) {
                out << "  " << v << " [score=\"" << fmt_score(node_scores[static_cast<size_t>(v)])
                    << "\"];\n";
            }
            for (int e = 0; e < graph.edge_count(); ++e) {
                const Edge& ed = graph.edges()[static_cast<size_t>(e)];
                out << "  " << ed.u << " -- " << ed.v << " [score=\""
                    << fmt_score(edge_scores[static_cast<size_t>(e)]) << "\"];\n";
            }
            out << "}\n";
            break;
        }
        case ExportFormat::json: {
            json j;
            j["node_count"] = graph.node_count();
            json nodes = json::array();
            for (int v = 0; v < graph.node_count(); ++v) {
                nodes.push_back({{"id", v}, {"score", node_scores[static_cast<size_t>(v)]}});
            }
            json edges = json::array();
            for (int e = 0; e < graph.edge_count(); ++e) {
                const Edge& ed = graph.edges()[static_cast<size_t>(e)];
                edges.push_back({{"source", ed.u},
                                 {"target", ed.v},
                                 {"score", edge_scores[static_cast<size_t>(e)]}});
            }
            j["nodes"] = nodes;
            j["edges"] = edges;
            out << j.dump(2) << "\n";
            break;
        }
    }
    return out.str();
}

ScoredGraph parse_scored_graph(const std::string& text, ExportFormat fmt) {
    std::vector<double> node_scores;
    std::vector<double> edge_scores;
    std::vector<Edge> edges;
    int node_count = 0;

    switch (fmt) {
        case ExportFormat::graphml: {
            size_t gpos = text.find("<graph ");
            if (gpos == std::string::npos) throw std::runtime_error("graphml: no <graph> element");
            node_count = std::stoi(attr_value(text, gpos, text.find('>', gpos) + 1, "nodes"));
            node_scores.assign(static_cast<size_t>(node_count), 0.0);
            size_t pos = 0;
            while ((pos = text.find("<node id=\"n", pos)) != std::string::npos) {
                size_t end = text.find("</node>", pos);
                int id = std::stoi(text.substr(pos + 11));
                size_t dpos = text.find("<data key=\"nscore\">", pos);
                double score = std::stod(text.substr(dpos + 19));
                node_scores.at(static_cast<size_t>(id)) = score;
                pos = end;
            }
            pos = 0;
            while ((pos = text.find("<edge ", pos)) != std::string::npos) {
                size_t end = text.find("</edge>", pos);
                std::string src = attr_value(text, pos, end, "source");
                std::string dst = attr_value(text, pos, end, "target");
                size_t dpos = text.find("<data key=\"escore\">", pos);
                double score = std::stod(text.substr(dpos + 19));
                edges.push_back(Edge{std::stoi(src.substr(1)), std::stoi(dst.substr(1))});
                edge_scores.push_back(score);
                pos = end;
            }
            break;
        }
        case ExportFormat::dot: {
            std::istringstream in(text);
            std::string line;
            while (std::getline(in, line)) {
                size_t c = line.find("// nodes=");
                if (c != std::string::npos) {
                    node_count = std::stoi(line.substr(c + 9));
                    node_scores.assign(static_cast<size_t>(node_count), 0.0);
                    continue;
                }
                size_t score_pos = line.find("[score=\"");
                if (score_pos == std::string::npos) continue;
                double score = std::stod(line.substr(score_pos + 8));
                size_t dash = line.find("--");
                if (dash != std::string::npos) {
                    int u = std::stoi(line);
                    int v = std::stoi(line.substr(dash + 2));
                    edges.push_back(Edge{u, v});
                    edge_scores.push_back(score);
                } else {
                    int v = std::stoi(line);
                    node_scores.at(static_cast<size_t>(v)) = score;
                }
            }
            break;
        }
        case ExportFormat::json: {
            json j = json::parse(text);
            node_count = j.at("node_count").get<int>();
            node_scores.assign(static_cast<size_t>(node_count), 0.0);
            for (const auto& n : j.at("nodes")) {
                node_scores.at(n.at("id").get<size_t>()) = n.at("score").get<double>();
            }
            for (const auto& e : j.at("edges")) {
                edges.push_back(Edge{e.at("source").get<int>(), e.at("target").get<int>()});
                edge_scores.push_back(e.at("score").get<double>());
            }
            break;
        }
    }

    ScoredGraph result;
    result.graph = Graph(node_count, edges);
    result.node_scores = std::move(node_scores);
    // Edge order in the parsed text may differ from canonical order; realign.
    result.edge_scores.assign(static_cast<size_t>(result.graph.edge_count()), 0.0);
    for (size_t i = 0; i < edges.size(); ++i) {
        int ix = result.graph.edge_index(edges[i].u, edges[i].v);
        result.edge_scores[static_cast<size_t>(ix)] = edge_scores[i];
    }
    return result;
}

}  // namespace pathmamba
