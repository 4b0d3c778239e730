#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace comet::logistic {

struct LogisticFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;            // Fisher-information Wald SEs
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;
    double mcfadden_r2 = 0.0;
    double aic = 0.0;
    bool converged = false;
    int iterations = 0;
};

// IRLS to tolerance 1e-8 on the coefficient step. Throws SingularDesign when
// X'WX is not invertible, SeparationDetected when coefficients diverge.
LogisticFit fit_logistic(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         int max_iter = 200, double tol = 1e-8);

struct BootstrapFit {
    LogisticFit point;             // fit on the original sample
    Eigen::VectorXd boot_se;       // SD of coefficients over resamples
    int n_resamples = 0;
    int redraws = 0;               // separated resamples redrawn (audited)
};

// Nonparametric case resampling with per-replicate RNG substreams; results
// do not depend on evaluation order. Separated resamples are redrawn and
// counted.
BootstrapFit fit_logistic_bootstrap(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                    int n_resamples, std::uint64_t seed);

double log1pexp(double eta);
double sigmoid(double eta);

// Bernoulli log-likelihood of y given linear predictor eta.
double bernoulli_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

} // namespace comet::logistic
