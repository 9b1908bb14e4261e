#include "pathmamba/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pathmamba {

namespace fs = std::filesystem;
using nlohmann::json;

void LabeledGraph::validate(int num_classes) const {
    if (label < 0 || label >= num_classes) {
        throw std::invalid_argument("graph '" + id + "': label " + std::to_string(label) +
                                    " out of range for " + std::to_string(num_classes) +
                                    " classes");
    }
    if (features.rows() != graph.node_count()) {
        throw std::invalid_argument("graph '" + id + "': feature rows " +
                                    std::to_string(features.rows()) + " != node count " +
                                    std::to_string(graph.node_count()));
    }
    if (!features.all_finite()) {
        throw std::invalid_argument("graph '" + id + "': non-finite feature value");
    }
    for (const Edge& e : motif_edges) {
        if (graph.edge_index(e.u, e.v) < 0) {
            throw std::invalid_argument("graph '" + id + "': motif edge (" +
                                        std::to_string(e.u) + "," + std::to_string(e.v) +
                                        ") missing from graph");
        }
    }
}

void Dataset::validate() const {
    if (graphs.empty()) throw std::invalid_argument("dataset is empty");
    if (class_names.empty()) throw std::invalid_argument("dataset has no class names");
    for (const LabeledGraph& g : graphs) g.validate(num_classes());
}

DatasetSummary summarize(const Dataset& dataset) {
    DatasetSummary s;
    s.graph_count = static_cast<int>(dataset.graphs.size());
    s.class_counts.assign(static_cast<size_t>(dataset.num_classes()), 0);
    double nodes = 0.0, edges = 0.0;
    for (const LabeledGraph& g : dataset.graphs) {
        ++s.class_counts[static_cast<size_t>(g.label)];
        nodes += g.graph.node_count();
        edges += g.graph.edge_count();
        s.feature_dim = static_cast<int>(g.features.cols());
    }
    if (s.graph_count > 0) {
        s.mean_nodes = nodes / s.graph_count;
        s.mean_edges = edges / s.graph_count;
    }
    return s;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

nd::Tensor read_feature_file(const std::string& path, const std::string& graph_id) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("graph '" + graph_id + "': missing feature file " + path);
    }
    std::vector<double> values;
    int64_t rows = 0, cols = -1;
    std::string line;
    while (std::getline(in, line)) {
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (cols < 0) {
            cols = static_cast<int64_t>(toks.size());
        } else if (static_cast<int64_t>(toks.size()) != cols) {
            throw std::runtime_error("graph '" + graph_id + "': feature row " +
                                     std::to_string(rows) + " has " +
                                     std::to_string(toks.size()) + " values, expected " +
                                     std::to_string(cols));
        }
        for (size_t j = 0; j < toks.size(); ++j) {
            double v;
            try {
                v = std::stod(toks[j]);
            } catch (const std::exception&) {
                throw std::runtime_error("graph '" + graph_id + "': bad feature value '" +
                                         toks[j] + "' at row " + std::to_string(rows) +
                                         " col " + std::to_string(j));
            }
            if (!std::isfinite(v)) {
                throw std::runtime_error("graph '" + graph_id + "': non-finite feature at row " +
                                         std::to_string(rows) + " col " + std::to_string(j));
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) {
        throw std::runtime_error("graph '" + graph_id + "': empty feature file");
    }
    return nd::Tensor(rows, cols, std::move(values));
}

std::vector<Edge> read_edge_file(const std::string& path, const std::string& graph_id) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("graph '" + graph_id + "': missing edge file " + path);
    }
    std::vector<Edge> edges;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks.size() != 2) {
            throw std::runtime_error("graph '" + graph_id + "': malformed edge line " +
                                     std::to_string(lineno) + ": '" + line + "'");
        }
        edges.push_back(Edge{std::stoi(toks[0]), std::stoi(toks[1])});
    }
    return edges;
}

Dataset load_dataset(const std::string& root) {
    fs::path dir(root);
    fs::path manifest = dir / "manifest.tsv";
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error("missing manifest: " + manifest.string());

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty manifest: " + manifest.string());
    Dataset ds;
    {
        std::istringstream ss(header);
        std::string name;
        while (std::getline(ss, name, '\t')) {
            if (!name.empty()) ds.class_names.push_back(name);
        }
    }
    if (ds.class_names.empty()) {
        throw std::runtime_error("manifest header has no class names: " + manifest.string());
    }

    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     " is not <graph_id>\\t<label>: '" + line + "'");
        }
        std::string id = line.substr(0, tab);
        int label = std::stoi(line.substr(tab + 1));

        LabeledGraph item;
        item.id = id;
        item.label = label;
        item.features = read_feature_file((dir / (id + ".feat")).string(), id);
        const int n = static_cast<int>(item.features.rows());

        // Directed duplicates in the file collapse to one undirected edge.
        std::vector<Edge> edges = read_edge_file((dir / (id + ".edges")).string(), id);
        for (Edge& e : edges) {
            if (e.u > e.v) std::swap(e.u, e.v);
        }
        std::sort(edges.begin(), edges.end(),
                  [](const Edge& a, const Edge& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); });
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        try {
            item.graph = Graph(n, std::move(edges));
        } catch (const std::exception& e) {
            throw std::runtime_error("graph '" + id + "': " + e.what());
        }
        ds.graphs.push_back(std::move(item));
    }

    fs::path truth = dir / "truth.json";
    if (fs::exists(truth)) {
        std::ifstream tin(truth);
        json j = json::parse(tin);
        std::map<std::string, size_t> by_id;
        for (size_t i = 0; i < ds.graphs.size(); ++i) by_id[ds.graphs[i].id] = i;
        for (auto& [id, entry] : j.items()) {
            auto it = by_id.find(id);
            if (it == by_id.end()) continue;
            LabeledGraph& g = ds.graphs[it->second];
            g.motif_nodes = entry.value("nodes", std::vector<int>{});
            for (const auto& e : entry.value("edges", std::vector<std::vector<int>>{})) {
                g.motif_edges.push_back(Edge{e.at(0), e.at(1)});
            }
        }
        if (j.contains("__seed__")) ds.rng_seed = j["__seed__"].get<uint64_t>();
    }

    ds.validate();
    return ds;
}

Dataset load_and_preprocess_dataset(const std::string& root) {
    fs::path dir(root);
    fs::path manifest = dir / "manifest.tsv";
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error("missing manifest: " + manifest.string());
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty manifest: " + manifest.string());
    Dataset ds;
    {
        std::istringstream ss(header);
        std::string name;
        while (std::getline(ss, name, '\t')) {
            if (!name.empty()) ds.class_names.push_back(name);
        }
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error("manifest line is not <graph_id>\\t<label>: '" + line + "'");
        }
        LabeledGraph item;
        item.id = line.substr(0, tab);
        item.label = std::stoi(line.substr(tab + 1));
        nd::Tensor raw_features = read_feature_file((dir / (item.id + ".feat")).string(), item.id);
        std::vector<Edge> raw_edges = read_edge_file((dir / (item.id + ".edges")).string(), item.id);
        PreprocessResult pre;
        try {
            pre = preprocess_graph(static_cast<int>(raw_features.rows()), raw_edges);
        } catch (const std::exception& e) {
            throw std::runtime_error("graph '" + item.id + "': " + e.what());
        }
        item.graph = pre.graph;
        // Keep only the feature rows of surviving nodes, in the new order.
        nd::Tensor kept(pre.graph.node_count(), raw_features.cols());
        for (int64_t old_row = 0; old_row < raw_features.rows(); ++old_row) {
            const int new_row = pre.old_to_new[static_cast<size_t>(old_row)];
            if (new_row < 0) continue;
            for (int64_t j = 0; j < raw_features.cols(); ++j) {
                kept.at(new_row, j) = raw_features.at(old_row, j);
            }
        }
        item.features = std::move(kept);
        ds.graphs.push_back(std::move(item));
    }
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& dataset, const std::string& root) {
    fs::path dir(root);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "manifest.tsv");
        for (size_t c = 0; c < dataset.class_names.size(); ++c) {
            out << (c ? "\t" : "") << dataset.class_names[c];
        }
        out << "\n";
        for (const LabeledGraph& g : dataset.graphs) {
            out << g.id << "\t" << g.label << "\n";
        }
    }
    char buf[64];
    bool any_motif = false;
    for (const LabeledGraph& g : dataset.graphs) {
        {
            std::ofstream out(dir / (g.id + ".edges"));
            for (const Edge& e : g.graph.edges()) out << e.u << " " << e.v << "\n";
        }
        {
            std::ofstream out(dir / (g.id + ".feat"));
            for (int64_t i = 0; i < g.features.rows(); ++i) {
                for (int64_t j = 0; j < g.features.cols(); ++j) {
                    std::snprintf(buf, sizeof(buf), "%.17g", g.features.at(i, j));
                    out << (j ? " " : "") << buf;
                }
                out << "\n";
            }
        }
        any_motif = any_motif || !g.motif_nodes.empty();
    }
    if (any_motif) {
        json truth = json::object();
        truth["__seed__"] = dataset.rng_seed;
        for (const LabeledGraph& g : dataset.graphs) {
            if (g.motif_nodes.empty()) continue;
            json entry;
            entry["nodes"] = g.motif_nodes;
            json edges = json::array();
            for (const Edge& e : g.motif_edges) edges.push_back({e.u, e.v});
            entry["edges"] = edges;
            truth[g.id] = entry;
        }
        std::ofstream out(dir / "truth.json");
        out << truth.dump(2) << "\n";
    }
}

}  // namespace pathmamba
