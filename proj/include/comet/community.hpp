#pragma once

#include "comet/graph.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace comet::community {

struct CommunityPartition {
    std::vector<int> assignment; // node index -> community id, dense from 0
    int community_count = 0;
    double modularity_q = 0.0;
    double resolution = 1.0;
    std::uint64_t seed = 0;
};

// set_id (row) x community (column) -> proportion of the set's members in
// that community; rows sum to 1.
struct CompositionTable {
    std::vector<std::string> set_ids;
    int community_count = 0;
    std::vector<std::vector<double>> proportions;
};

// Weighted modularity of an assignment:
//   Q = sum_c ( w_c / W - (s_c / 2W)^2 )
// with w_c intra-community weight, s_c community strength, W total weight.
// The resolution parameter scales the null term (1.0 = classic objective).
double modularity(const graph::ComentionGraph& g, const std::vector<int>& assignment,
                  double resolution = 1.0);

// Two-phase Louvain: seeded-shuffle local moves to a fixed point, then
// aggregation, repeated until no level improves Q. Deterministic per seed.
CommunityPartition louvain(const graph::ComentionGraph& g, double resolution = 1.0,
                           std::uint64_t seed = 0);

CompositionTable composition(const CommunityPartition& partition,
                             const graph::ComentionGraph& g);

// Averaged composition over `iterations` uniform permutations of the
// community-label multiset, with per-iteration seeded substreams. Also keeps
// the per-cell Monte Carlo standard error and the observed-minus-baseline
// deviation so "clustering beats chance" is a checkable number.
struct PermutationBaseline {
    CompositionTable mean;
    std::vector<std::vector<double>> std_error;
    std::vector<std::vector<double>> observed_minus_baseline;
    double max_abs_deviation = 0.0;
    std::size_t iterations = 0;
};

PermutationBaseline permutation_baseline(const CommunityPartition& partition,
                                         const graph::ComentionGraph& g,
                                         std::size_t iterations = 10000,
                                         std::uint64_t seed = 0);

// Normalized mutual information between two labelings of the same nodes;
// 1 for identical partitions, ~0 for independent ones. Two trivial
// single-cluster partitions compare as 1.
double normalized_mutual_information(const std::vector<int>& a, const std::vector<int>& b);

} // namespace comet::community
