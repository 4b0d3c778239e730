#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace comet::glmm {

// pi^2/3, the level-1 latent variance of the logistic link.
inline constexpr double kLogisticLatentVariance = 3.289868133696453;

struct GroupingFactor {
    std::string name;
    std::vector<int> levels;            // per-row codes 0..n_levels-1
    int n_levels = 0;
    std::vector<std::string> level_labels; // sorted; index = code
};

// Codes labels in sorted order. Throws ConfigInvalid when fewer than 2
// distinct labels appear (a degenerate factor).
GroupingFactor make_factor(const std::string& name, const std::vector<std::string>& labels);

struct GlmmOptions {
    int max_iter = 500;        // outer quasi-Newton iterations
    double tol = 1e-7;         // projected-gradient sup-norm
    int inner_max_iter = 200;  // Newton solves for the random-effect mode
    double inner_tol = 1e-11;
};

struct GlmmSpec {
    Eigen::VectorXd y;                 // binary outcome
    Eigen::MatrixXd X;                 // intercept + standardized covariates
    std::vector<std::string> beta_names;
    std::vector<GroupingFactor> factors; // independent random intercepts
    GlmmOptions options;
};

struct GlmmFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;                // Wald, log-odds scale
    std::vector<double> odds_ratios;   // exp(beta)
    std::vector<double> sigma2;        // one per factor, >= 0
    double log_likelihood = 0.0;       // Laplace-approximate marginal
    double aic = 0.0;                  // 2k - 2*loglik, k = |beta| + n_factors
    double composite_r2 = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> beta_names;
    std::vector<std::string> factor_names;
    std::vector<std::string> warnings;
};

// Laplace-approximate maximum likelihood over (beta, log sigma^2) with a
// quasi-Newton outer loop and per-mode inner Newton solves. sigma^2 floors at
// 1e-10 (reported as 0 at that boundary). Throws SingularDesign,
// SeparationDetected, NonConvergence.
GlmmFit fit_glmm(const GlmmSpec& spec);

// Laplace objective and its analytic gradient at (beta, phi = log sigma^2);
// exposed for the finite-difference acceptance check.
double laplace_objective(const GlmmSpec& spec, const Eigen::VectorXd& beta,
                         const Eigen::VectorXd& phi);
void laplace_gradient(const GlmmSpec& spec, const Eigen::VectorXd& beta,
                      const Eigen::VectorXd& phi, Eigen::VectorXd& grad_beta,
                      Eigen::VectorXd& grad_phi);

// Percentages (individual level first, then factors in spec order) with the
// level-1 variance fixed at pi^2/3. Sums to 100 exactly up to rounding.
std::vector<double> variance_decomposition(const std::vector<double>& sigma2);

// Latent-scale marginal R^2: var(X beta) / (var(X beta) + sum sigma^2 + pi^2/3).
double composite_r2(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                    const std::vector<double>& sigma2);

// Inverse-logit of the fixed-effect predictor with random effects at zero;
// |eta| > 30 clamps and sets *clamped when provided.
double predict_probability(const Eigen::VectorXd& beta, const Eigen::VectorXd& x,
                           bool* clamped = nullptr);

} // namespace comet::glmm
