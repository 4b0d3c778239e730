#include "comet/logistic.hpp"

#include "comet/error.hpp"
#include "comet/rng.hpp"

#include <cmath>

namespace comet::logistic {

double log1pexp(double eta) {
    if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
    return std::log1p(std::exp(eta));
}

double sigmoid(double eta) {
    if (eta >= 0.0) {
        const double e = std::exp(-eta);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double bernoulli_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        ll += y[i] * eta[i] - log1pexp(eta[i]);
    }
    return ll;
}

LogisticFit fit_logistic(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         int max_iter, double tol) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "fit_logistic: y and X row counts differ");
    }
    if (n < p) {
        throw Error(ErrorKind::SingularDesign, "fit_logistic: more columns than rows");
    }
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        qr.setThreshold(1e-10);
        if (qr.rank() < p) {
            throw Error(ErrorKind::SingularDesign, "fit_logistic: design not full rank");
        }
    }

    LogisticFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd mu(n), w(n);
    for (int iter = 1; iter <= max_iter; ++iter) {
        fit.iterations = iter;
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = sigmoid(eta[i]);
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
        }
        const Eigen::MatrixXd xtw = X.transpose() * w.asDiagonal();
        const Eigen::MatrixXd info = xtw * X;
        const Eigen::VectorXd score = X.transpose() * (y - mu);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            throw Error(ErrorKind::SingularDesign, "fit_logistic: information matrix not PD");
        }
        const Eigen::VectorXd step = ldlt.solve(score);
        fit.beta += step;
        eta = X * fit.beta;
        if (fit.beta.lpNorm<Eigen::Infinity>() > 1e2) {
            throw Error(ErrorKind::SeparationDetected,
                        "fit_logistic: coefficients diverging (|beta| > 100)");
        }
        // Perfect prediction means the MLE does not exist (the likelihood is
        // maximized only as ||beta|| -> inf), so report separation.
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(y[i] - sigmoid(eta[i])));
        }
        if (worst < 1e-6) {
            throw Error(ErrorKind::SeparationDetected,
                        "fit_logistic: fitted probabilities reached 0/1 for every row");
        }
        if (step.lpNorm<Eigen::Infinity>() < tol) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged) {
        throw Error(ErrorKind::NonConvergence, "fit_logistic: IRLS iteration cap reached");
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = sigmoid(eta[i]);
        w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
    }
    const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    fit.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();

    fit.log_likelihood = bernoulli_log_likelihood(y, eta);
    const double pbar = y.mean();
    if (pbar > 0.0 && pbar < 1.0) {
        fit.null_log_likelihood = static_cast<double>(n) *
            (pbar * std::log(pbar) + (1.0 - pbar) * std::log(1.0 - pbar));
        fit.mcfadden_r2 = 1.0 - fit.log_likelihood / fit.null_log_likelihood;
    } else {
        fit.null_log_likelihood = 0.0;
        fit.mcfadden_r2 = 0.0;
    }
    fit.aic = 2.0 * static_cast<double>(p) - 2.0 * fit.log_likelihood;
    return fit;
}

BootstrapFit fit_logistic_bootstrap(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                    int n_resamples, std::uint64_t seed) {
    if (n_resamples < 2) {
        throw Error(ErrorKind::ConfigInvalid, "bootstrap needs at least 2 resamples");
    }
    BootstrapFit out;
    out.point = fit_logistic(y, X);
    out.n_resamples = n_resamples;

    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    Eigen::MatrixXd boot_betas(n_resamples, p);
    for (int b = 0; b < n_resamples; ++b) {
        // One substream per replicate; redraws advance within the substream,
        // so replicate b is reproducible regardless of evaluation order.
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(b)));
        for (int attempt = 0;; ++attempt) {
            Eigen::VectorXd yb(n);
            Eigen::MatrixXd Xb(n, p);
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::uint64_t j = rng.uniform_int(static_cast<std::uint64_t>(n));
                yb[i] = y[static_cast<Eigen::Index>(j)];
                Xb.row(i) = X.row(static_cast<Eigen::Index>(j));
            }
            try {
                const LogisticFit fb = fit_logistic(yb, Xb);
                boot_betas.row(b) = fb.beta.transpose();
                break;
            } catch (const Error& e) {
                if ((e.kind() == ErrorKind::SeparationDetected ||
                     e.kind() == ErrorKind::SingularDesign) && attempt < 100) {
                    ++out.redraws;
                    continue;
                }
                throw;
            }
        }
    }

    out.boot_se.resize(p);
    for (Eigen::Index c = 0; c < p; ++c) {
        const double m = boot_betas.col(c).mean();
        double ss = 0.0;
        for (int b = 0; b < n_resamples; ++b) {
            const double d = boot_betas(b, c) - m;
            ss += d * d;
        }
        // Sample SD over replicates (the bootstrap SE convention).
        out.boot_se[c] = std::sqrt(ss / static_cast<double>(n_resamples - 1));
    }
    return out;
}

} // namespace comet::logistic
