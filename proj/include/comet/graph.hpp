#pragma once

#include "comet/affiliation.hpp"
#include "comet/ingest.hpp"
#include "comet/lexicon.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace comet::graph {

struct NodeInfo {
    std::string alias_key;
    std::string set_id;
    std::string nation_id;
    std::optional<bool> deceased; // unknown until the mortality join runs
};

// Undirected weighted co-mention network. Nodes are roster members; an edge
// weight counts the posts whose titles mention both endpoints.
class ComentionGraph {
public:
    int add_node(NodeInfo info);
    int node_index(const std::string& alias_key) const; // -1 when absent

    void add_comention(int u, int v, std::int64_t posts = 1);
    void set_edge_weight(int u, int v, std::int64_t w);
    std::int64_t edge_weight(int u, int v) const; // 0 when absent

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return weights_.size(); }

    const std::vector<NodeInfo>& nodes() const { return nodes_; }
    NodeInfo& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
    const NodeInfo& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

    // (u, v) with u < v, ascending; deterministic iteration order.
    const std::map<std::pair<int, int>, std::int64_t>& edges() const { return weights_; }

    std::vector<std::vector<std::pair<int, std::int64_t>>> adjacency() const;
    std::vector<std::size_t> degrees() const;

private:
    std::vector<NodeInfo> nodes_;
    std::map<std::string, int> index_;
    std::map<std::pair<int, int>, std::int64_t> weights_;
};

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    double median_degree = 0.0;
    double mean_edge_weight = 0.0;
    std::map<std::size_t, std::size_t> degree_distribution;
};

// Scans every title (tagged or not) for roster aliases via token-run
// canonical matching, so surface variants of a roster key still count. A
// title mentioning k >= 2 distinct members adds 1 to each of its pairs.
ComentionGraph build_graph(const std::vector<ingest::PostRecord>& posts,
                           const affiliation::Roster& roster,
                           const lexicon::LexiconConfig& lex);

// Distinct roster members mentioned by one title (node indices, ascending).
std::vector<int> roster_matches(const std::string& title, const ComentionGraph& g,
                                const lexicon::LexiconConfig& lex);

GraphStats graph_stats(const ComentionGraph& g);

void export_edge_csv(const ComentionGraph& g, const std::string& edges_path,
                     const std::string& nodes_path);
ComentionGraph import_edge_csv(const std::string& edges_path, const std::string& nodes_path);

void export_graphml(const ComentionGraph& g, const std::string& path);
ComentionGraph import_graphml(const std::string& path);

bool same_graph(const ComentionGraph& a, const ComentionGraph& b);

} // namespace comet::graph
