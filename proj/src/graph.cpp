#include "comet/graph.hpp"

#include "comet/csv.hpp"
#include "comet/error.hpp"
#include "comet/text.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace comet::graph {

int ComentionGraph::add_node(NodeInfo info) {
    auto it = index_.find(info.alias_key);
    if (it != index_.end()) return it->second;
    const int idx = static_cast<int>(nodes_.size());
    index_.emplace(info.alias_key, idx);
    nodes_.push_back(std::move(info));
    return idx;
}

int ComentionGraph::node_index(const std::string& alias_key) const {
    auto it = index_.find(alias_key);
    return it == index_.end() ? -1 : it->second;
}

void ComentionGraph::add_comention(int u, int v, std::int64_t posts) {
    if (u == v) return; // no self-loops
    if (u > v) std::swap(u, v);
    weights_[{u, v}] += posts;
}

void ComentionGraph::set_edge_weight(int u, int v, std::int64_t w) {
    if (u == v) return;
    if (u > v) std::swap(u, v);
    weights_[{u, v}] = w;
}

std::int64_t ComentionGraph::edge_weight(int u, int v) const {
    if (u > v) std::swap(u, v);
    auto it = weights_.find({u, v});
    return it == weights_.end() ? 0 : it->second;
}

std::vector<std::vector<std::pair<int, std::int64_t>>> ComentionGraph::adjacency() const {
    std::vector<std::vector<std::pair<int, std::int64_t>>> adj(nodes_.size());
    for (const auto& [uv, w] : weights_) {
        adj[static_cast<std::size_t>(uv.first)].emplace_back(uv.second, w);
        adj[static_cast<std::size_t>(uv.second)].emplace_back(uv.first, w);
    }
    return adj;
}

std::vector<std::size_t> ComentionGraph::degrees() const {
    std::vector<std::size_t> deg(nodes_.size(), 0);
    for (const auto& [uv, w] : weights_) {
        (void)w;
        ++deg[static_cast<std::size_t>(uv.first)];
        ++deg[static_cast<std::size_t>(uv.second)];
    }
    return deg;
}

std::vector<int> roster_matches(const std::string& title, const ComentionGraph& g,
                                const lexicon::LexiconConfig& lex) {
    const std::vector<text::Token> tokens = text::tokenize_outside_brackets(title);
    std::set<int> matched;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string key;
        for (std::size_t j = i; j < tokens.size() && tokens[j].segment == tokens[i].segment; ++j) {
            key += text::canonical_key(text::stripped(title, tokens[j]));
            if (key.empty()) continue;
            std::string probe = key;
            auto merged = lex.merge_map.find(key);
            if (merged != lex.merge_map.end()) probe = text::canonical_key(merged->second);
            const int idx = g.node_index(probe);
            if (idx >= 0) matched.insert(idx);
        }
    }
    return {matched.begin(), matched.end()};
}

ComentionGraph build_graph(const std::vector<ingest::PostRecord>& posts,
                           const affiliation::Roster& roster,
                           const lexicon::LexiconConfig& lex) {
    ComentionGraph g;
    for (const affiliation::RosterMember& m : roster.members)
        g.add_node({m.alias_key, m.set_id, m.nation_id, std::nullopt});

    for (const ingest::PostRecord& post : posts) {
        const std::vector<int> matched = roster_matches(post.title, g, lex);
        for (std::size_t a = 0; a < matched.size(); ++a)
            for (std::size_t b = a + 1; b < matched.size(); ++b)
                g.add_comention(matched[a], matched[b]);
    }
    return g;
}

GraphStats graph_stats(const ComentionGraph& g) {
    GraphStats s;
    s.node_count = g.node_count();
    s.edge_count = g.edge_count();
    if (s.node_count == 0) return s;

    std::vector<std::size_t> deg = g.degrees();
    for (std::size_t d : deg) ++s.degree_distribution[d];
    std::sort(deg.begin(), deg.end());
    const std::size_t n = deg.size();
    s.median_degree = (n % 2 == 1)
                          ? static_cast<double>(deg[n / 2])
                          : (static_cast<double>(deg[n / 2 - 1]) + static_cast<double>(deg[n / 2])) / 2.0;

    if (s.edge_count > 0) {
        double total = 0.0;
        for (const auto& [uv, w] : g.edges()) {
            (void)uv;
            total += static_cast<double>(w);
        }
        s.mean_edge_weight = total / static_cast<double>(s.edge_count);
    }
    return s;
}

namespace {

std::string deceased_str(const std::optional<bool>& d) {
    if (!d) return "";
    return *d ? "true" : "false";
}

std::optional<bool> deceased_from_str(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    return std::nullopt;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string xml_unescape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const std::size_t semi = s.find(';', i);
        if (semi == std::string::npos) {
            out.push_back(s[i++]);
            continue;
        }
        const std::string ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") out.push_back('&');
        else if (ent == "lt") out.push_back('<');
        else if (ent == "gt") out.push_back('>');
        else if (ent == "quot") out.push_back('"');
        else if (ent == "apos") out.push_back('\'');
        else out += "&" + ent + ";";
        i = semi + 1;
    }
    return out;
}

} // namespace

void export_edge_csv(const ComentionGraph& g, const std::string& edges_path,
                     const std::string& nodes_path) {
    std::ofstream nodes(nodes_path, std::ios::binary);
    if (!nodes) throw Error(ErrorKind::IoError, "cannot write " + nodes_path);
    csv::write_row(nodes, {"alias_key", "set_id", "nation_id", "deceased"});
    for (const NodeInfo& n : g.nodes())
        csv::write_row(nodes, {n.alias_key, n.set_id, n.nation_id, deceased_str(n.deceased)});

    std::ofstream edges(edges_path, std::ios::binary);
    if (!edges) throw Error(ErrorKind::IoError, "cannot write " + edges_path);
    csv::write_row(edges, {"source_alias", "target_alias", "weight"});
    for (const auto& [uv, w] : g.edges())
        csv::write_row(edges, {g.node(uv.first).alias_key, g.node(uv.second).alias_key,
                               std::to_string(w)});
}

ComentionGraph import_edge_csv(const std::string& edges_path, const std::string& nodes_path) {
    ComentionGraph g;
    {
        std::ifstream in(nodes_path, std::ios::binary);
        if (!in) throw Error(ErrorKind::IoError, "cannot open " + nodes_path);
        std::vector<std::string> row;
        bool header = true;
        while (csv::read_row(in, row)) {
            if (header) {
                header = false;
                continue;
            }
            if (row.size() == 1 && row[0].empty()) continue;
            if (row.size() < 4)
                throw Error(ErrorKind::MalformedRecord, "nodes csv needs 4 columns");
            g.add_node({row[0], row[1], row[2], deceased_from_str(row[3])});
        }
    }
    {
        std::ifstream in(edges_path, std::ios::binary);
        if (!in) throw Error(ErrorKind::IoError, "cannot open " + edges_path);
        std::vector<std::string> row;
        bool header = true;
        while (csv::read_row(in, row)) {
            if (header) {
                header = false;
                continue;
            }
            if (row.size() == 1 && row[0].empty()) continue;
            if (row.size() < 3)
                throw Error(ErrorKind::MalformedRecord, "edges csv needs 3 columns");
            const int u = g.node_index(row[0]);
            const int v = g.node_index(row[1]);
            if (u < 0 || v < 0)
                throw Error(ErrorKind::MalformedRecord, "edge references unknown node");
            g.set_edge_weight(u, v, std::stoll(row[2]));
        }
    }
    return g;
}

void export_graphml(const ComentionGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"d0\" for=\"node\" attr.name=\"set_id\" attr.type=\"string\"/>\n"
        << "  <key id=\"d1\" for=\"node\" attr.name=\"nation_id\" attr.type=\"string\"/>\n"
        << "  <key id=\"d2\" for=\"node\" attr.name=\"deceased\" attr.type=\"boolean\"/>\n"
        << "  <key id=\"d3\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n"
        << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    for (const NodeInfo& n : g.nodes()) {
        out << "    <node id=\"" << xml_escape(n.alias_key) << "\">"
            << "<data key=\"d0\">" << xml_escape(n.set_id) << "</data>"
            << "<data key=\"d1\">" << xml_escape(n.nation_id) << "</data>";
        if (n.deceased) out << "<data key=\"d2\">" << (*n.deceased ? "true" : "false") << "</data>";
        out << "</node>\n";
    }
    for (const auto& [uv, w] : g.edges()) {
        out << "    <edge source=\"" << xml_escape(g.node(uv.first).alias_key) << "\" target=\""
            << xml_escape(g.node(uv.second).alias_key) << "\"><data key=\"d3\">" << w
            << "</data></edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

ComentionGraph import_graphml(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string xml = buf.str();

    // Minimal reader for the structure export_graphml emits.
    auto attr = [](const std::string& element, const std::string& name) -> std::string {
        const std::string probe = name + "=\"";
        const std::size_t at = element.find(probe);
        if (at == std::string::npos) return "";
        const std::size_t end = element.find('"', at + probe.size());
        return xml_unescape(element.substr(at + probe.size(), end - at - probe.size()));
    };
    auto data_value = [&attr](const std::string& element, const std::string& key) -> std::string {
        std::size_t pos = 0;
        while ((pos = element.find("<data ", pos)) != std::string::npos) {
            const std::size_t open_end = element.find('>', pos);
            const std::size_t close = element.find("</data>", open_end);
            if (open_end == std::string::npos || close == std::string::npos) break;
            const std::string open_tag = element.substr(pos, open_end - pos + 1);
            if (attr(open_tag, "key") == key)
                return xml_unescape(element.substr(open_end + 1, close - open_end - 1));
            pos = close + 7;
        }
        return "";
    };

    ComentionGraph g;
    std::size_t pos = 0;
    while ((pos = xml.find("<node ", pos)) != std::string::npos) {
        const std::size_t close = xml.find("</node>", pos);
        const std::size_t self_close = xml.find("/>", pos);
        std::string element;
        std::size_t next;
        if (close != std::string::npos && (self_close == std::string::npos || close < self_close)) {
            element = xml.substr(pos, close - pos + 7);
            next = close + 7;
        } else {
            element = xml.substr(pos, self_close - pos + 2);
            next = self_close + 2;
        }
        NodeInfo n;
        n.alias_key = attr(element.substr(0, element.find('>') + 1), "id");
        n.set_id = data_value(element, "d0");
        n.nation_id = data_value(element, "d1");
        const std::string dec = data_value(element, "d2");
        n.deceased = deceased_from_str(dec);
        g.add_node(std::move(n));
        pos = next;
    }
    pos = 0;
    while ((pos = xml.find("<edge ", pos)) != std::string::npos) {
        const std::size_t close = xml.find("</edge>", pos);
        if (close == std::string::npos)
            throw Error(ErrorKind::MalformedRecord, "unterminated <edge> in " + path);
        const std::string element = xml.substr(pos, close - pos + 7);
        const std::string open_tag = element.substr(0, element.find('>') + 1);
        const int u = g.node_index(attr(open_tag, "source"));
        const int v = g.node_index(attr(open_tag, "target"));
        if (u < 0 || v < 0) throw Error(ErrorKind::MalformedRecord, "edge references unknown node");
        const std::string w = data_value(element, "d3");
        g.set_edge_weight(u, v, w.empty() ? 1 : std::stoll(w));
        pos = close + 7;
    }
    return g;
}

bool same_graph(const ComentionGraph& a, const ComentionGraph& b) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    for (std::size_t i = 0; i < a.node_count(); ++i) {
        const NodeInfo& na = a.node(static_cast<int>(i));
        const int j = b.node_index(na.alias_key);
        if (j < 0) return false;
        const NodeInfo& nb = b.node(j);
        if (na.set_id != nb.set_id || na.nation_id != nb.nation_id || na.deceased != nb.deceased)
            return false;
    }
    for (const auto& [uv, w] : a.edges()) {
        const int u = b.node_index(a.node(uv.first).alias_key);
        const int v = b.node_index(a.node(uv.second).alias_key);
        if (u < 0 || v < 0 || b.edge_weight(u, v) != w) return false;
    }
    return true;
}

} // namespace comet::graph
