#include "pathmamba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pathmamba {

namespace {

std::vector<bool> selection_mask(int n, const std::vector<int>& selected) {
    std::vector<bool> mask(static_cast<size_t>(n), false);
    for (int v : selected) {
        if (v < 0 || v >= n) {
            throw std::invalid_argument("selected node " + std::to_string(v) +
                                        " out of range for N=" + std::to_string(n));
        }
        mask[static_cast<size_t>(v)] = true;
    }
    return mask;
}

}  // namespace

Graph remove_selected(const Graph& g, const std::vector<int>& selected) {
    auto mask = selection_mask(g.node_count(), selected);
    std::vector<Edge> kept;
    for (const Edge& e : g.edges()) {
        if (!mask[static_cast<size_t>(e.u)] && !mask[static_cast<size_t>(e.v)]) kept.push_back(e);
    }
    return Graph(g.node_count(), std::move(kept));
}

Graph induce_selected(const Graph& g, const std::vector<int>& selected) {
    auto mask = selection_mask(g.node_count(), selected);
    std::vector<Edge> kept;
    for (const Edge& e : g.edges()) {
        if (mask[static_cast<size_t>(e.u)] && mask[static_cast<size_t>(e.v)]) kept.push_back(e);
    }
    return Graph(g.node_count(), std::move(kept));
}

nd::Tensor zero_rows(const nd::Tensor& features, const std::vector<int>& rows) {
    auto mask = selection_mask(static_cast<int>(features.rows()), rows);
    nd::Tensor out = features;
    for (int64_t i = 0; i < out.rows(); ++i) {
        if (!mask[static_cast<size_t>(i)]) continue;
        for (int64_t j = 0; j < out.cols(); ++j) out.at(i, j) = 0.0;
    }
    return out;
}

nd::Tensor keep_rows(const nd::Tensor& features, const std::vector<int>& rows) {
    auto mask = selection_mask(static_cast<int>(features.rows()), rows);
    nd::Tensor out = features;
    for (int64_t i = 0; i < out.rows(); ++i) {
        if (mask[static_cast<size_t>(i)]) continue;
        for (int64_t j = 0; j < out.cols(); ++j) out.at(i, j) = 0.0;
    }
    return out;
}

FidelityReport fidelity_report(const PredictProbFn& predict,
                               const std::vector<FidelityItem>& items) {
    if (items.empty()) throw std::invalid_argument("fidelity: empty explanation set");
    FidelityReport report;
    report.per_graph.reserve(items.size());
    double plus = 0.0, minus = 0.0;
    for (const FidelityItem& item : items) {
        std::vector<double> full = predict(*item.graph, *item.features);
        const int pred = static_cast<int>(std::max_element(full.begin(), full.end()) -
                                          full.begin());
        Graph removed = remove_selected(*item.graph, item.kept_nodes);
        nd::Tensor removed_feats = zero_rows(*item.features, item.kept_nodes);
        Graph kept = induce_selected(*item.graph, item.kept_nodes);
        nd::Tensor kept_feats = keep_rows(*item.features, item.kept_nodes);

        FidelityReport::PerGraph pg;
        pg.f_full = full[static_cast<size_t>(pred)];
        pg.f_removed = predict(removed, removed_feats)[static_cast<size_t>(pred)];
        pg.f_kept = predict(kept, kept_feats)[static_cast<size_t>(pred)];
        plus += pg.f_full - pg.f_removed;
        minus += pg.f_kept - pg.f_full;
        report.per_graph.push_back(pg);
    }
    report.fidelity_plus = plus / static_cast<double>(items.size());
    report.fidelity_minus = minus / static_cast<double>(items.size());
    return report;
}

double fidelity_plus(const PredictProbFn& predict, const std::vector<FidelityItem>& items) {
    return fidelity_report(predict, items).fidelity_plus;
}

double fidelity_minus(const PredictProbFn& predict, const std::vector<FidelityItem>& items) {
    return fidelity_report(predict, items).fidelity_minus;
}

// ---- path and diameter ----

namespace {

struct LongestPathSearch {
    const Graph& g;
    std::vector<bool> visited;
    int best = 0;

    explicit LongestPathSearch(const Graph& graph)
        : g(graph), visited(static_cast<size_t>(graph.node_count()), false) {}

    // Nodes still reachable from `v` through unvisited territory; used as an
    // upper bound for pruning.
    int reachable_bound(int v) const {
        std::vector<bool> seen = visited;
        std::deque<int> queue{v};
        seen[static_cast<size_t>(v)] = true;
        int count = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            ++count;
            for (int w : g.neighbors(u)) {
                if (!seen[static_cast<size_t>(w)]) {
                    seen[static_cast<size_t>(w)] = true;
                    queue.push_back(w);
                }
            }
        }
        return count;
    }

    void dfs(int v, int depth) {
        best = std::max(best, depth);
        if (depth + reachable_bound(v) - 1 <= best) return;
        visited[static_cast<size_t>(v)] = true;
        for (int w : g.neighbors(v)) {
            if (!visited[static_cast<size_t>(w)]) dfs(w, depth + 1);
        }
        visited[static_cast<size_t>(v)] = false;
    }
};

}  // namespace

int max_path_length(const Graph& subgraph) {
    if (subgraph.node_count() > 64) {
        throw std::invalid_argument("max_path_length: graph has " +
                                    std::to_string(subgraph.node_count()) +
                                    " nodes (cap is 64); sample or shrink the subgraph");
    }
    LongestPathSearch search(subgraph);
    for (int v = 0; v < subgraph.node_count(); ++v) search.dfs(v, 0);
    return search.best;
}

int max_path_length(const std::vector<Graph>& subgraphs) {
    int best = 0;
    for (const Graph& g : subgraphs) best = std::max(best, max_path_length(g));
    return best;
}

int graph_diameter(const Graph& g) {
    if (g.node_count() == 0) return 0;
    int comp_count = 0;
    std::vector<int> comp = connected_components(g, &comp_count);
    std::vector<int> size(static_cast<size_t>(comp_count), 0);
    for (int c : comp) ++size[static_cast<size_t>(c)];
    const int largest =
        static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());

    int diameter = 0;
    std::vector<int> dist(static_cast<size_t>(g.node_count()));
    for (int s = 0; s < g.node_count(); ++s) {
        if (comp[static_cast<size_t>(s)] != largest) continue;
        std::fill(dist.begin(), dist.end(), -1);
        std::deque<int> queue{s};
        dist[static_cast<size_t>(s)] = 0;
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            diameter = std::max(diameter, dist[static_cast<size_t>(v)]);
            for (int w : g.neighbors(v)) {
                if (dist[static_cast<size_t>(w)] < 0) {
                    dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(v)] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    return diameter;
}

double avg_diameter(const std::vector<Graph>& subgraphs) {
    if (subgraphs.empty()) return 0.0;
    double sum = 0.0;
    for (const Graph& g : subgraphs) sum += graph_diameter(g);
    return sum / static_cast<double>(subgraphs.size());
}

// ---- classification ----

ClassificationReport classification_report(const std::vector<int>& predictions,
                                           const std::vector<int>& labels, int num_classes) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("classification_report: " +
                                    std::to_string(predictions.size()) + " predictions vs " +
                                    std::to_string(labels.size()) + " labels");
    }
    ClassificationReport r;
    r.confusion.assign(static_cast<size_t>(num_classes),
                       std::vector<int>(static_cast<size_t>(num_classes), 0));
    int correct = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        ++r.confusion[static_cast<size_t>(labels[i])][static_cast<size_t>(predictions[i])];
        if (labels[i] == predictions[i]) ++correct;
    }
    r.accuracy = labels.empty() ? 0.0 : static_cast<double>(correct) / labels.size();
    r.precision.assign(static_cast<size_t>(num_classes), 0.0);
    r.recall.assign(static_cast<size_t>(num_classes), 0.0);
    r.precision_degenerate.assign(static_cast<size_t>(num_classes), false);
    for (int c = 0; c < num_classes; ++c) {
        int tp = r.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)];
        int predicted = 0, actual = 0;
        for (int k = 0; k < num_classes; ++k) {
            predicted += r.confusion[static_cast<size_t>(k)][static_cast<size_t>(c)];
            actual += r.confusion[static_cast<size_t>(c)][static_cast<size_t>(k)];
        }
        if (predicted == 0) {
            r.precision_degenerate[static_cast<size_t>(c)] = true;
        } else {
            r.precision[static_cast<size_t>(c)] = static_cast<double>(tp) / predicted;
        }
        r.recall[static_cast<size_t>(c)] = actual == 0 ? 0.0 : static_cast<double>(tp) / actual;
    }
    return r;
}

// ---- enrichment ----

GoMapping GoMapping::load(const std::string& path, const std::string& universe_path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read gene-term mapping: " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected gene<TAB>term");
        }
        pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    std::vector<std::string> universe;
    if (!universe_path.empty()) {
        std::ifstream uin(universe_path);
        if (!uin) throw std::runtime_error("cannot read universe file: " + universe_path);
        while (std::getline(uin, line)) {
            if (!line.empty()) universe.push_back(line);
        }
    }
    return from_pairs(pairs, universe);
}

GoMapping GoMapping::from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                                const std::vector<std::string>& universe) {
    GoMapping go;
    std::set<std::string> genes;
    for (const auto& [gene, term] : pairs) {
        go.gene_terms[gene].insert(term);
        genes.insert(gene);
    }
    if (universe.empty()) {
        go.background.assign(genes.begin(), genes.end());
    } else {
        std::set<std::string> uni(universe.begin(), universe.end());
        for (const std::string& g : genes) {
            if (!uni.count(g)) {
                throw std::invalid_argument("mapped gene '" + g + "' missing from universe");
            }
        }
        go.background.assign(uni.begin(), uni.end());
    }
    return go;
}

namespace {

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double hypergeom_tail(int population, int term_size, int draws, int observed) {
    if (population < 0 || term_size < 0 || draws < 0 ||
        term_size > population || draws > population) {
        throw std::invalid_argument("hypergeom_tail: inconsistent configuration");
    }
    if (observed <= std::max(0, draws + term_size - population)) return 1.0;
    const int hi = std::min(term_size, draws);
    if (observed > hi) return 0.0;
    const double denom = log_choose(population, draws);
    double tail = 0.0;
    for (int k = observed; k <= hi; ++k) {
        tail += std::exp(log_choose(term_size, k) +
                         log_choose(population - term_size, draws - k) - denom);
    }
    return std::min(tail, 1.0);
}

std::vector<EnrichedTerm> hypergeom_enrich(const std::vector<std::string>& genes,
                                           const GoMapping& go, double alpha,
                                           bool benjamini_hochberg) {
    std::set<std::string> background(go.background.begin(), go.background.end());
    std::set<std::string> sample;
    for (const std::string& g : genes) {
        if (!background.count(g)) {
            throw std::invalid_argument("gene '" + g + "' not in background universe");
        }
        sample.insert(g);
    }
    // Term sizes over the background.
    std::map<std::string, int> term_size;
    std::map<std::string, int> overlap;
    for (const auto& [gene, terms] : go.gene_terms) {
        for (const std::string& t : terms) {
            ++term_size[t];
            if (sample.count(gene)) ++overlap[t];
        }
    }
    std::vector<EnrichedTerm> tested;
    for (const auto& [term, size] : term_size) {
        EnrichedTerm e;
        e.term = term;
        e.overlap = overlap.count(term) ? overlap[term] : 0;
        e.p_value = hypergeom_tail(static_cast<int>(background.size()), size,
                                   static_cast<int>(sample.size()), e.overlap);
        tested.push_back(e);
    }
    std::sort(tested.begin(), tested.end(), [](const EnrichedTerm& a, const EnrichedTerm& b) {
        return a.p_value < b.p_value || (a.p_value == b.p_value && a.term < b.term);
    });
    std::vector<EnrichedTerm> accepted;
    if (benjamini_hochberg) {
        const double m = static_cast<double>(tested.size());
        size_t cutoff = 0;
        for (size_t i = 0; i < tested.size(); ++i) {
            if (tested[i].p_value < alpha * static_cast<double>(i + 1) / m) cutoff = i + 1;
        }
        accepted.assign(tested.begin(), tested.begin() + static_cast<long>(cutoff));
    } else {
        for (const EnrichedTerm& e : tested) {
            if (e.p_value < alpha) accepted.push_back(e);
        }
    }
    return accepted;
}

int ebf(const std::vector<std::string>& subgraph_genes, const GoMapping& go, double alpha) {
    return static_cast<int>(hypergeom_enrich(subgraph_genes, go, alpha).size());
}

EnrichmentReport enrichment_report(const std::vector<EnrichmentInput>& subgraphs,
                                   const GoMapping& go, double alpha, double top_ratio) {
    if (!(top_ratio > 0.0 && top_ratio <= 1.0)) {
        throw std::invalid_argument("enrichment: top_ratio must be in (0,1]");
    }
    EnrichmentReport report;
    double ebf_sum = 0.0, ecs_sum = 0.0, p_sum = 0.0;
    int p_count = 0;
    for (const EnrichmentInput& sg : subgraphs) {
        if (sg.genes.empty()) {
            throw std::invalid_argument("enrichment: subgraph with empty gene set");
        }
        if (sg.genes.size() != sg.node_scores.size()) {
            throw std::invalid_argument("enrichment: gene/score count mismatch");
        }
        auto terms = hypergeom_enrich(sg.genes, go, alpha);
        ebf_sum += static_cast<double>(terms.size());
        for (const EnrichedTerm& t : terms) {
            p_sum += t.p_value;
            ++p_count;
        }
        report.per_subgraph.push_back(terms);

        // Top genes by score, ties toward the lower index.
        const size_t top_n = static_cast<size_t>(
            std::ceil(top_ratio * static_cast<double>(sg.genes.size())));
        std::vector<size_t> order(sg.genes.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return sg.node_scores[a] > sg.node_scores[b];
        });
        std::vector<std::string> top;
        for (size_t i = 0; i < top_n; ++i) top.push_back(sg.genes[order[i]]);
        auto top_terms = hypergeom_enrich(top, go, alpha);
        ecs_sum += static_cast<double>(top_terms.size()) / static_cast<double>(top_n);
    }
    const double count = static_cast<double>(subgraphs.size());
    report.ebf_mean = subgraphs.empty() ? 0.0 : ebf_sum / count;
    report.ecs = subgraphs.empty() ? 0.0 : ecs_sum / count;
    report.mean_p = p_count == 0 ? 1.0 : p_sum / p_count;
    return report;
}

// ---- statistics helpers ----

double ranking_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    if (scores.size() != positive.size()) {
        throw std::invalid_argument("ranking_auc: score/flag count mismatch");
    }
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    // Average ranks over ties.
    std::vector<double> rank(scores.size(), 0.0);
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double rank_sum = 0.0;
    int64_t pos = 0;
    for (size_t k = 0; k < scores.size(); ++k) {
        if (positive[k]) {
            rank_sum += rank[k];
            ++pos;
        }
    }
    const int64_t neg = static_cast<int64_t>(scores.size()) - pos;
    if (pos == 0 || neg == 0) {
        throw std::invalid_argument("ranking_auc: need both positive and negative examples");
    }
    return (rank_sum - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1)) /
           (static_cast<double>(pos) * static_cast<double>(neg));
}

double sign_test_p(int successes, int trials) {
    if (trials < 0 || successes < 0 || successes > trials) {
        throw std::invalid_argument("sign_test_p: bad counts");
    }
    double p = 0.0;
    for (int j = successes; j <= trials; ++j) {
        p += std::exp(log_choose(trials, j) - trials * std::log(2.0));
    }
    return std::min(p, 1.0);
}

}  // namespace pathmamba
