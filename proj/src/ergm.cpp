#include "comet/ergm.hpp"

#include "comet/error.hpp"
#include "comet/graph.hpp"
#include "comet/logistic.hpp"
#include "comet/rng.hpp"

#include <cmath>

namespace comet::ergm {

void BinaryGraph::set(int u, int v, bool present) {
    if (u == v) return;
    const bool cur = has(u, v);
    if (cur == present) return;
    adj_[idx(u, v)] = present ? 1 : 0;
    adj_[idx(v, u)] = present ? 1 : 0;
    const int d = present ? 1 : -1;
    degree_[static_cast<std::size_t>(u)] += d;
    degree_[static_cast<std::size_t>(v)] += d;
    edges_ += d;
}

double BinaryGraph::density() const {
    if (n_ < 2) return 0.0;
    const double dyads = 0.5 * static_cast<double>(n_) * static_cast<double>(n_ - 1);
    return static_cast<double>(edges_) / dyads;
}

BinaryGraph binarize(const graph::ComentionGraph& g) {
    BinaryGraph b(static_cast<int>(g.node_count()));
    for (const auto& [pair, w] : g.edges()) {
        if (w > 0) b.set(pair.first, pair.second, true);
    }
    return b;
}

std::string Term::label() const {
    switch (kind) {
        case TermKind::Edges: return "edges";
        case TermKind::GwDegree: return "gwdegree";
        case TermKind::NodeCov: return "nodecov." + attribute;
    }
    return "unknown";
}

void validate_model(const ErgmModel& model, int n_nodes) {
    bool has_edges = false;
    for (const auto& t : model.terms) {
        if (t.kind == TermKind::Edges) has_edges = true;
        if (t.kind == TermKind::NodeCov &&
            t.values.size() != static_cast<std::size_t>(n_nodes)) {
            throw Error(ErrorKind::DimensionMismatch,
                        "nodecov '" + t.attribute + "' values do not cover all nodes");
        }
        if (t.kind == TermKind::GwDegree && (t.decay <= 0.0 || !std::isfinite(t.decay))) {
            throw Error(ErrorKind::ConfigInvalid, "gwdegree decay must be positive");
        }
    }
    if (!has_edges) {
        throw Error(ErrorKind::ConfigInvalid, "ERGM requires an edges term");
    }
}

Eigen::VectorXd change_stats(const BinaryGraph& g, const ErgmModel& model, int u, int v) {
    Eigen::VectorXd delta(static_cast<Eigen::Index>(model.terms.size()));
    // Degrees without the dyad.
    const bool present = g.has(u, v);
    const int du = g.degree(u) - (present ? 1 : 0);
    const int dv = g.degree(v) - (present ? 1 : 0);
    for (std::size_t t = 0; t < model.terms.size(); ++t) {
        const Term& term = model.terms[t];
        double d = 0.0;
        switch (term.kind) {
            case TermKind::Edges:
                d = 1.0;
                break;
            case TermKind::GwDegree: {
                const double base = 1.0 - std::exp(-term.decay);
                d = std::pow(base, du) + std::pow(base, dv);
                break;
            }
            case TermKind::NodeCov:
                d = term.values[static_cast<std::size_t>(u)] +
                    term.values[static_cast<std::size_t>(v)];
                break;
        }
        delta[static_cast<Eigen::Index>(t)] = d;
    }
    return delta;
}

Eigen::VectorXd statistics(const BinaryGraph& g, const ErgmModel& model) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.terms.size()));
    const int n = g.n();
    for (std::size_t t = 0; t < model.terms.size(); ++t) {
        const Term& term = model.terms[t];
        double val = 0.0;
        switch (term.kind) {
            case TermKind::Edges:
                val = static_cast<double>(g.edge_count());
                break;
            case TermKind::GwDegree: {
                const double base = 1.0 - std::exp(-term.decay);
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += 1.0 - std::pow(base, g.degree(i));
                }
                val = std::exp(term.decay) * acc;
                break;
            }
            case TermKind::NodeCov: {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += static_cast<double>(g.degree(i)) *
                           term.values[static_cast<std::size_t>(i)];
                }
                val = acc;
                break;
            }
        }
        s[static_cast<Eigen::Index>(t)] = val;
    }
    return s;
}

ErgmFit fit_mple(const BinaryGraph& g, const ErgmModel& model) {
    validate_model(model, g.n());
    const int n = g.n();
    const Eigen::Index k = static_cast<Eigen::Index>(model.terms.size());
    const Eigen::Index dyads = static_cast<Eigen::Index>(n) * (n - 1) / 2;
    Eigen::MatrixXd X(dyads, k);
    Eigen::VectorXd y(dyads);
    Eigen::Index row = 0;
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            X.row(row) = change_stats(g, model, u, v).transpose();
            y[row] = g.has(u, v) ? 1.0 : 0.0;
            ++row;
        }
    }

    ErgmFit fit;
    for (const auto& t : model.terms) fit.term_labels.push_back(t.label());
    fit.method = "mple";
    const logistic::LogisticFit lf = logistic::fit_logistic(y, X, 200, 1e-10);
    fit.theta = lf.beta;
    fit.se = lf.se;
    fit.pseudo_log_likelihood = lf.log_likelihood;
    fit.aic = 2.0 * static_cast<double>(k) - 2.0 * lf.log_likelihood;
    fit.converged = lf.converged;
    return fit;
}

SimulationResult simulate(const ErgmModel& model, const Eigen::VectorXd& theta,
                          const BinaryGraph& start, std::uint64_t seed,
                          const SimulateOptions& opts) {
    const int n = start.n();
    validate_model(model, n);
    if (theta.size() != static_cast<Eigen::Index>(model.terms.size())) {
        throw Error(ErrorKind::DimensionMismatch, "theta length differs from term count");
    }
    SimulationResult res;
    res.final_graph = start;
    BinaryGraph& g = res.final_graph;
    Rng rng(seed);
    long accepted = 0;
    long proposed = 0;

    auto step = [&]() {
        // Uniform dyad proposal.
        const int u = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        int v = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - 1)));
        if (v >= u) ++v;
        const Eigen::VectorXd delta = change_stats(g, model, u, v);
        const double dot = theta.dot(delta);
        const bool present = g.has(u, v);
        const double log_ratio = present ? -dot : dot;
        ++proposed;
        if (log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio)) {
            g.set(u, v, !present);
            ++accepted;
        }
    };

    for (long i = 0; i < opts.burn_in; ++i) step();
    res.stats.resize(opts.n_samples, static_cast<Eigen::Index>(model.terms.size()));
    for (int s = 0; s < opts.n_samples; ++s) {
        for (long i = 0; i < opts.thin; ++i) step();
        res.stats.row(s) = statistics(g, model).transpose();
    }
    res.acceptance_rate = proposed > 0 ? static_cast<double>(accepted) /
                                         static_cast<double>(proposed) : 0.0;
    return res;
}

namespace {

double lag1_autocorrelation(const Eigen::VectorXd& x) {
    const Eigen::Index m = x.size();
    if (m < 3) return 0.0;
    const double mu = x.mean();
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        den += (x[i] - mu) * (x[i] - mu);
        if (i + 1 < m) num += (x[i] - mu) * (x[i + 1] - mu);
    }
    if (den <= 0.0) return 0.0;
    return num / den;
}

} // namespace

ErgmFit fit_mcmc_mle(const BinaryGraph& g, const ErgmModel& model, std::uint64_t seed,
                     const McmcMleOptions& opts) {
    validate_model(model, g.n());
    ErgmFit fit = fit_mple(g, model);
    fit.method = "mcmc_mle";
    fit.converged = false;

    const Eigen::VectorXd s_obs = statistics(g, model);
    const Eigen::Index k = s_obs.size();
    Eigen::VectorXd theta = fit.theta;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(k, k);
    SimulationResult sim;

    for (int round = 0; round < opts.max_rounds; ++round) {
        sim = simulate(model, theta, g, substream_seed(seed, static_cast<std::uint64_t>(round)),
                       opts.sim);
        const int m = opts.sim.n_samples;

        // Degeneracy guard: the chain collapsing to (near-)empty or complete.
        int degenerate = 0;
        const double dyads = 0.5 * static_cast<double>(g.n()) * static_cast<double>(g.n() - 1);
        for (int s = 0; s < m; ++s) {
            const double dens = sim.stats(s, 0) / dyads; // term 0 is edges by convention
            if (dens < 1e-4 || dens > 1.0 - 1e-4) ++degenerate;
        }
        if (degenerate > m / 2) {
            std::string msg = "ERGM degenerate at theta = [";
            for (Eigen::Index i = 0; i < k; ++i) {
                msg += (i ? ", " : "") + std::to_string(theta[i]);
            }
            msg += "]";
            throw Error(ErrorKind::Degeneracy, msg);
        }

        Eigen::VectorXd s_bar = sim.stats.colwise().mean().transpose();
        Eigen::MatrixXd centered = sim.stats.rowwise() - s_bar.transpose();
        cov = (centered.transpose() * centered) / static_cast<double>(m - 1);
        // Ridge keeps the moment equation solvable when a statistic mixes slowly.
        cov.diagonal().array() += 1e-8 * (1.0 + cov.diagonal().array().abs());

        const Eigen::VectorXd gap = s_obs - s_bar;
        // Converged when every moment gap sits within ~3 Monte Carlo SEs.
        double worst = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) {
            const double sd = std::sqrt(std::max(cov(i, i), 1e-12));
            worst = std::max(worst, std::abs(gap[i]) / sd);
        }
        if (worst < 3.0 / std::sqrt(static_cast<double>(m))) {
            fit.converged = true;
            break;
        }

        Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
        Eigen::VectorXd step = ldlt.solve(gap);
        const double gain = 1.0 / std::pow(1.0 + static_cast<double>(round), 0.6);
        // Trust region on the step keeps early rounds stable.
        const double norm = step.lpNorm<Eigen::Infinity>();
        const double cap = 1.0;
        if (norm > cap) step *= cap / norm;
        theta += gain * step;
    }

    fit.theta = theta;
    // SEs from the inverse of the simulated statistic covariance (Fisher
    // information estimate at theta-hat).
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    const Eigen::MatrixXd fisher_inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
    fit.se.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        fit.se[i] = fisher_inv(i, i) > 0.0 ? std::sqrt(fisher_inv(i, i)) : 0.0;
    }

    fit.diagnostics.acceptance_rate = sim.acceptance_rate;
    fit.diagnostics.n_samples = opts.sim.n_samples;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double rho = std::min(std::max(lag1_autocorrelation(sim.stats.col(i)), -0.99), 0.99);
        const double ess = static_cast<double>(opts.sim.n_samples) * (1.0 - rho) / (1.0 + rho);
        fit.diagnostics.effective_sample_size.push_back(ess);
    }

    // Pseudo-likelihood AIC at the refined estimate (reported, not optimized).
    const int n = g.n();
    double pll = 0.0;
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const double eta = theta.dot(change_stats(g, model, u, v));
            pll += (g.has(u, v) ? eta : 0.0) - logistic::log1pexp(eta);
        }
    }
    fit.pseudo_log_likelihood = pll;
    fit.aic = 2.0 * static_cast<double>(k) - 2.0 * pll;
    return fit;
}

} // namespace comet::ergm
