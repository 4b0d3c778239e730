#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace comet::graph {
class ComentionGraph;
}

namespace comet::ergm {

// Simple undirected binary graph; dense adjacency (desk-scale n).
class BinaryGraph {
public:
    explicit BinaryGraph(int n = 0) : n_(n), adj_(static_cast<std::size_t>(n) * n, 0),
                                      degree_(static_cast<std::size_t>(n), 0) {}

    int n() const { return n_; }
    bool has(int u, int v) const { return adj_[idx(u, v)] != 0; }
    void set(int u, int v, bool present);
    int degree(int u) const { return degree_[static_cast<std::size_t>(u)]; }
    long edge_count() const { return edges_; }
    double density() const;

private:
    std::size_t idx(int u, int v) const {
        return static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(v);
    }
    int n_ = 0;
    std::vector<std::uint8_t> adj_;
    std::vector<int> degree_;
    long edges_ = 0;
};

// Weighted co-mention edges binarize to presence/absence.
BinaryGraph binarize(const graph::ComentionGraph& g);

enum class TermKind { Edges, GwDegree, NodeCov };

struct Term {
    TermKind kind = TermKind::Edges;
    double decay = 0.5;               // GwDegree only
    std::string attribute;            // NodeCov label
    std::vector<double> values;       // NodeCov per-node values
    std::string label() const;
};

struct ErgmModel {
    std::vector<Term> terms;          // must contain an Edges term
};

void validate_model(const ErgmModel& model, int n_nodes);

// Change in each statistic when dyad (u, v) turns on, evaluated with the
// dyad off and the rest of the graph as given.
Eigen::VectorXd change_stats(const BinaryGraph& g, const ErgmModel& model, int u, int v);

Eigen::VectorXd statistics(const BinaryGraph& g, const ErgmModel& model);

struct ErgmDiagnostics {
    double acceptance_rate = 0.0;
    std::vector<double> effective_sample_size; // per statistic
    int n_samples = 0;
};

struct ErgmFit {
    std::vector<std::string> term_labels;
    Eigen::VectorXd theta;
    Eigen::VectorXd se;
    std::string method;                // "mple" or "mcmc_mle"
    double pseudo_log_likelihood = 0.0;
    double aic = 0.0;                  // pseudo-likelihood AIC
    bool converged = false;
    ErgmDiagnostics diagnostics;       // populated for mcmc_mle
};

// Maximum pseudo-likelihood: logistic regression of dyad states on change
// statistics. Exact MLE for dyad-independent models. Throws
// SeparationDetected (e.g. empty graph with an edges term).
ErgmFit fit_mple(const BinaryGraph& g, const ErgmModel& model);

struct SimulateOptions {
    long burn_in = 20000;
    int n_samples = 200;
    long thin = 500;
};

struct SimulationResult {
    Eigen::MatrixXd stats;      // n_samples x n_terms
    double acceptance_rate = 0.0;
    BinaryGraph final_graph;
};

// Metropolis single-dyad-toggle chain from the given starting graph.
SimulationResult simulate(const ErgmModel& model, const Eigen::VectorXd& theta,
                          const BinaryGraph& start, std::uint64_t seed,
                          const SimulateOptions& opts);

struct McmcMleOptions {
    int max_rounds = 25;        // convergence = moment gaps within ~3 MC SEs
    SimulateOptions sim;
};

// Stochastic-approximation refinement of the MPLE against simulated moments.
// Throws Degeneracy when chains collapse to (near-)empty or complete graphs.
ErgmFit fit_mcmc_mle(const BinaryGraph& g, const ErgmModel& model, std::uint64_t seed,
                     const McmcMleOptions& opts = {});

} // namespace comet::ergm
