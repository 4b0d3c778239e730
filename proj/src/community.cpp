#include "comet/community.hpp"

#include "comet/error.hpp"
#include "comet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace comet::community {

namespace {

// Aggregated working graph for one Louvain level. Self-loops carry intra
// weight from collapsed communities; strength counts them twice.
struct LevelGraph {
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<double> self_loop;
    std::vector<double> strength;
    double total_weight = 0.0; // W: each edge once, self-loops once
};

LevelGraph from_comention(const graph::ComentionGraph& g) {
    LevelGraph lg;
    const std::size_t n = g.node_count();
    lg.adj.assign(n, {});
    lg.self_loop.assign(n, 0.0);
    lg.strength.assign(n, 0.0);
    for (const auto& [uv, w] : g.edges()) {
        const double wt = static_cast<double>(w);
        lg.adj[static_cast<std::size_t>(uv.first)].emplace_back(uv.second, wt);
        lg.adj[static_cast<std::size_t>(uv.second)].emplace_back(uv.first, wt);
        lg.strength[static_cast<std::size_t>(uv.first)] += wt;
        lg.strength[static_cast<std::size_t>(uv.second)] += wt;
        lg.total_weight += wt;
    }
    return lg;
}

// One pass structure for the local-move phase over an arbitrary level graph.
struct LocalMoveResult {
    std::vector<int> community; // dense ids
    bool improved = false;
};

LocalMoveResult local_moves(const LevelGraph& lg, double resolution, Rng& rng) {
    const std::size_t n = lg.adj.size();
    const double W = lg.total_weight;
    std::vector<int> community(n);
    std::iota(community.begin(), community.end(), 0);
    std::vector<double> comm_strength = lg.strength;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> weight_to(n, 0.0);
    std::vector<int> touched;

    bool any_move = false;
    bool moved_this_pass = true;
    while (moved_this_pass) {
        moved_this_pass = false;
        rng.shuffle(order);
        for (const std::size_t node : order) {
            const int old_c = community[node];
            touched.clear();
            for (const auto& [nbr, w] : lg.adj[node]) {
                const int c = community[static_cast<std::size_t>(nbr)];
                if (weight_to[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
                weight_to[static_cast<std::size_t>(c)] += w;
            }
            const double k_i = lg.strength[node];
            comm_strength[static_cast<std::size_t>(old_c)] -= k_i;

            // Gain of joining community c (node currently detached):
            //   dQ = k_{i,c}/W - resolution * s_c * k_i / (2 W^2)
            auto gain = [&](int c) {
                return weight_to[static_cast<std::size_t>(c)] / W -
                       resolution * comm_strength[static_cast<std::size_t>(c)] * k_i / (2.0 * W * W);
            };

            int best_c = old_c;
            double best_gain = gain(old_c);
            for (const int c : touched) {
                if (c == old_c) continue;
                const double cand = gain(c);
                if (cand > best_gain + 1e-12) {
                    best_gain = cand;
                    best_c = c;
                }
            }
            comm_strength[static_cast<std::size_t>(best_c)] += k_i;
            if (best_c != old_c) {
                community[node] = best_c;
                moved_this_pass = true;
                any_move = true;
            }
            for (const int c : touched) weight_to[static_cast<std::size_t>(c)] = 0.0;
        }
    }

    // densify ids
    std::vector<int> remap(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int& r = remap[static_cast<std::size_t>(community[i])];
        if (r < 0) r = next++;
        community[i] = r;
    }
    return {std::move(community), any_move};
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<int>& community, int n_comm) {
    LevelGraph out;
    out.adj.assign(static_cast<std::size_t>(n_comm), {});
    out.self_loop.assign(static_cast<std::size_t>(n_comm), 0.0);
    out.strength.assign(static_cast<std::size_t>(n_comm), 0.0);
    out.total_weight = lg.total_weight;

    std::map<std::pair<int, int>, double> merged;
    for (std::size_t u = 0; u < lg.adj.size(); ++u) {
        const int cu = community[u];
        out.self_loop[static_cast<std::size_t>(cu)] += lg.self_loop[u];
        for (const auto& [v, w] : lg.adj[u]) {
            if (static_cast<std::size_t>(v) < u) continue; // each edge once
            const int cv = community[static_cast<std::size_t>(v)];
            if (cu == cv) out.self_loop[static_cast<std::size_t>(cu)] += w;
            else merged[{std::min(cu, cv), std::max(cu, cv)}] += w;
        }
    }
    for (std::size_t c = 0; c < out.self_loop.size(); ++c)
        out.strength[c] += 2.0 * out.self_loop[c];
    for (const auto& [uv, w] : merged) {
        out.adj[static_cast<std::size_t>(uv.first)].emplace_back(uv.second, w);
        out.adj[static_cast<std::size_t>(uv.second)].emplace_back(uv.first, w);
        out.strength[static_cast<std::size_t>(uv.first)] += w;
        out.strength[static_cast<std::size_t>(uv.second)] += w;
    }
    return out;
}

} // namespace

double modularity(const graph::ComentionGraph& g, const std::vector<int>& assignment,
                  double resolution) {
    if (assignment.size() != g.node_count())
        throw Error(ErrorKind::IncompleteAssignment,
                    "assignment covers " + std::to_string(assignment.size()) + " of " +
                        std::to_string(g.node_count()) + " nodes");
    if (g.edge_count() == 0) return 0.0;

    int n_comm = 0;
    for (int c : assignment) {
        if (c < 0) throw Error(ErrorKind::IncompleteAssignment, "negative community id");
        n_comm = std::max(n_comm, c + 1);
    }
    std::vector<double> intra(static_cast<std::size_t>(n_comm), 0.0);
    std::vector<double> strength(static_cast<std::size_t>(n_comm), 0.0);
    double W = 0.0;
    for (const auto& [uv, w] : g.edges()) {
        const double wt = static_cast<double>(w);
        W += wt;
        const int cu = assignment[static_cast<std::size_t>(uv.first)];
        const int cv = assignment[static_cast<std::size_t>(uv.second)];
        if (cu == cv) intra[static_cast<std::size_t>(cu)] += wt;
        strength[static_cast<std::size_t>(cu)] += wt;
        strength[static_cast<std::size_t>(cv)] += wt;
    }
    double q = 0.0;
    for (int c = 0; c < n_comm; ++c) {
        const double s = strength[static_cast<std::size_t>(c)] / (2.0 * W);
        q += intra[static_cast<std::size_t>(c)] / W - resolution * s * s;
    }
    return q;
}

CommunityPartition louvain(const graph::ComentionGraph& g, double resolution,
                           std::uint64_t seed) {
    if (g.node_count() == 0)
        throw Error(ErrorKind::IncompleteAssignment, "louvain requires at least one node");

    CommunityPartition part;
    part.resolution = resolution;
    part.seed = seed;
    part.assignment.resize(g.node_count());
    std::iota(part.assignment.begin(), part.assignment.end(), 0);

    if (g.edge_count() == 0) {
        part.community_count = static_cast<int>(g.node_count());
        part.modularity_q = 0.0;
        return part;
    }

    Rng rng(seed);
    LevelGraph level = from_comention(g);
    std::vector<int> node_to_comm(g.node_count());
    std::iota(node_to_comm.begin(), node_to_comm.end(), 0);

    while (true) {
        LocalMoveResult moves = local_moves(level, resolution, rng);
        if (!moves.improved) break;
        const int n_comm = 1 + *std::max_element(moves.community.begin(), moves.community.end());
        for (int& c : node_to_comm) c = moves.community[static_cast<std::size_t>(c)];
        if (n_comm == static_cast<int>(level.adj.size())) break; // nothing merged
        level = aggregate(level, moves.community, n_comm);
    }

    // densify final ids in first-seen node order
    std::map<int, int> remap;
    for (int& c : node_to_comm) {
        auto [it, inserted] = remap.emplace(c, static_cast<int>(remap.size()));
        c = it->second;
        (void)inserted;
    }
    part.assignment = node_to_comm;
    part.community_count = static_cast<int>(remap.size());
    part.modularity_q = modularity(g, part.assignment, resolution);
    return part;
}

CompositionTable composition(const CommunityPartition& partition,
                             const graph::ComentionGraph& g) {
    CompositionTable table;
    table.community_count = partition.community_count;

    std::map<std::string, std::vector<std::size_t>> members_by_set;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        members_by_set[g.node(static_cast<int>(i)).set_id].push_back(i);

    for (const auto& [set_id, members] : members_by_set) {
        std::vector<double> row(static_cast<std::size_t>(partition.community_count), 0.0);
        for (std::size_t node : members)
            row[static_cast<std::size_t>(partition.assignment[node])] += 1.0;
        for (double& cell : row) cell /= static_cast<double>(members.size());
        table.set_ids.push_back(set_id);
        table.proportions.push_back(std::move(row));
    }
    return table;
}

PermutationBaseline permutation_baseline(const CommunityPartition& partition,
                                         const graph::ComentionGraph& g,
                                         std::size_t iterations, std::uint64_t seed) {
    if (iterations < 1)
        throw Error(ErrorKind::ConfigInvalid, "permutation baseline needs iterations >= 1");

    const CompositionTable observed = composition(partition, g);
    const std::size_t rows = observed.set_ids.size();
    const std::size_t cols = static_cast<std::size_t>(observed.community_count);

    std::map<std::string, std::vector<std::size_t>> members_by_set;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        members_by_set[g.node(static_cast<int>(i)).set_id].push_back(i);

    std::vector<std::vector<double>> sum(rows, std::vector<double>(cols, 0.0));
    std::vector<std::vector<double>> sum_sq(rows, std::vector<double>(cols, 0.0));

    std::vector<int> labels = partition.assignment;
    for (std::size_t iter = 0; iter < iterations; ++iter) {
        // Substream per iteration: the average is identical no matter how
        // iterations are scheduled across threads.
        Rng rng(substream_seed(seed, iter));
        labels = partition.assignment; // permute the original multiset every time
        rng.shuffle(labels);

        std::size_t r = 0;
        for (const auto& [set_id, members] : members_by_set) {
            (void)set_id;
            std::vector<double> row(cols, 0.0);
            for (std::size_t node : members)
                row[static_cast<std::size_t>(labels[node])] += 1.0;
            for (std::size_t c = 0; c < cols; ++c) {
                const double prop = row[c] / static_cast<double>(members.size());
                sum[r][c] += prop;
                sum_sq[r][c] += prop * prop;
            }
            ++r;
        }
    }

    PermutationBaseline base;
    base.iterations = iterations;
    base.mean.set_ids = observed.set_ids;
    base.mean.community_count = observed.community_count;
    base.mean.proportions.assign(rows, std::vector<double>(cols, 0.0));
    base.std_error.assign(rows, std::vector<double>(cols, 0.0));
    base.observed_minus_baseline.assign(rows, std::vector<double>(cols, 0.0));

    const double n_it = static_cast<double>(iterations);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double mean = sum[r][c] / n_it;
            const double var = std::max(0.0, sum_sq[r][c] / n_it - mean * mean);
            base.mean.proportions[r][c] = mean;
            base.std_error[r][c] = std::sqrt(var / n_it);
            const double dev = observed.proportions[r][c] - mean;
            base.observed_minus_baseline[r][c] = dev;
            base.max_abs_deviation = std::max(base.max_abs_deviation, std::abs(dev));
        }
    }
    return base;
}

double normalized_mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw Error(ErrorKind::IncompleteAssignment, "labelings must cover the same nodes");
    const double n = static_cast<double>(a.size());

    std::map<int, double> ca, cb;
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1.0;
        cb[b[i]] += 1.0;
        joint[{a[i], b[i]}] += 1.0;
    }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (const auto& [label, count] : ca) {
        (void)label;
        const double p = count / n;
        ha -= p * std::log(p);
    }
    for (const auto& [label, count] : cb) {
        (void)label;
        const double p = count / n;
        hb -= p * std::log(p);
    }
    for (const auto& [ab, count] : joint) {
        const double pab = count / n;
        const double pa = ca[ab.first] / n;
        const double pb = cb[ab.second] / n;
        mi += pab * std::log(pab / (pa * pb));
    }
    if (ha + hb == 0.0) return 1.0; // both trivial, hence identical
    return 2.0 * mi / (ha + hb);
}

} // namespace comet::community
