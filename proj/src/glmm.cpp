#include "comet/glmm.hpp"

#include "comet/error.hpp"
#include "comet/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace comet::glmm {

namespace {

constexpr double kPhiFloor = -23.025850929940457; // log(1e-10)

struct Layout {
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    Eigen::Index q = 0;                 // total random-effect dimension
    std::vector<Eigen::Index> offsets;  // block start per factor
    std::vector<Eigen::Index> sizes;    // block size per factor
};

Layout make_layout(const GlmmSpec& spec) {
    Layout lo;
    lo.n = spec.X.rows();
    lo.p = spec.X.cols();
    for (const auto& f : spec.factors) {
        lo.offsets.push_back(lo.q);
        lo.sizes.push_back(f.n_levels);
        lo.q += f.n_levels;
    }
    return lo;
}

// Random-effect column index of row i under factor f.
inline Eigen::Index re_col(const Layout& lo, const GlmmSpec& spec, std::size_t f, Eigen::Index i) {
    return lo.offsets[f] + spec.factors[f].levels[static_cast<std::size_t>(i)];
}

Eigen::VectorXd linear_predictor(const GlmmSpec& spec, const Layout& lo,
                                 const Eigen::VectorXd& beta, const Eigen::VectorXd& u) {
    Eigen::VectorXd eta = spec.X * beta;
    for (std::size_t f = 0; f < spec.factors.size(); ++f) {
        for (Eigen::Index i = 0; i < lo.n; ++i) eta[i] += u[re_col(lo, spec, f, i)];
    }
    return eta;
}

double penalized_loglik(const GlmmSpec& spec, const Layout& lo, const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& inv_sigma2) {
    const Eigen::VectorXd eta = linear_predictor(spec, lo, beta, u);
    double ll = logistic::bernoulli_log_likelihood(spec.y, eta);
    for (std::size_t f = 0; f < spec.factors.size(); ++f) {
        const auto seg = u.segment(lo.offsets[f], lo.sizes[f]);
        ll -= 0.5 * inv_sigma2[static_cast<Eigen::Index>(f)] * seg.squaredNorm();
    }
    return ll;
}

// State shared by objective/gradient at a solved random-effect mode.
struct ModeState {
    Eigen::VectorXd u;        // mode of the penalized log-likelihood
    Eigen::VectorXd eta, mu, w;
    Eigen::MatrixXd H;        // Z'WZ + D^-1 at the mode
    Eigen::LDLT<Eigen::MatrixXd> Hldlt;
    double logdet_H = 0.0;
    bool ok = false;
};

// Newton solve for u given (beta, phi); warm starts from state.u.
void solve_mode(const GlmmSpec& spec, const Layout& lo, const Eigen::VectorXd& beta,
                const Eigen::VectorXd& inv_sigma2, ModeState& st) {
    st.ok = false;
    if (st.u.size() != lo.q) st.u = Eigen::VectorXd::Zero(lo.q);
    Eigen::VectorXd u = st.u;
    double f_cur = penalized_loglik(spec, lo, beta, u, inv_sigma2);

    for (int iter = 0; iter < spec.options.inner_max_iter; ++iter) {
        const Eigen::VectorXd eta = linear_predictor(spec, lo, beta, u);
        Eigen::VectorXd mu(lo.n), w(lo.n);
        for (Eigen::Index i = 0; i < lo.n; ++i) {
            mu[i] = logistic::sigmoid(eta[i]);
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
        }
        // grad = Z'(y - mu) - D^-1 u ; H = Z'WZ + D^-1
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(lo.q);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(lo.q, lo.q);
        for (std::size_t f = 0; f < spec.factors.size(); ++f) {
            for (Eigen::Index i = 0; i < lo.n; ++i) {
                grad[re_col(lo, spec, f, i)] += spec.y[i] - mu[i];
            }
        }
        for (Eigen::Index i = 0; i < lo.n; ++i) {
            for (std::size_t f = 0; f < spec.factors.size(); ++f) {
                const Eigen::Index a = re_col(lo, spec, f, i);
                for (std::size_t g2 = f; g2 < spec.factors.size(); ++g2) {
                    const Eigen::Index b = re_col(lo, spec, g2, i);
                    H(a, b) += w[i];
                    if (a != b) H(b, a) += w[i];
                }
            }
        }
        for (std::size_t f = 0; f < spec.factors.size(); ++f) {
            for (Eigen::Index j = 0; j < lo.sizes[f]; ++j) {
                const Eigen::Index a = lo.offsets[f] + j;
                grad[a] -= inv_sigma2[static_cast<Eigen::Index>(f)] * u[a];
                H(a, a) += inv_sigma2[static_cast<Eigen::Index>(f)];
            }
        }

        if (grad.lpNorm<Eigen::Infinity>() < spec.options.inner_tol) {
            st.u = u;
            st.eta = eta;
            st.mu = mu;
            st.w = w;
            st.H = H;
            st.Hldlt.compute(H);
            if (st.Hldlt.info() != Eigen::Success) return;
            st.logdet_H = st.Hldlt.vectorD().array().max(1e-300).log().sum();
            st.ok = true;
            return;
        }

        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success) return;
        const Eigen::VectorXd step = ldlt.solve(grad);
        // Backtracking keeps the penalized log-likelihood non-decreasing.
        double t = 1.0;
        for (int half = 0; half < 40; ++half) {
            const Eigen::VectorXd u_try = u + t * step;
            const double f_try = penalized_loglik(spec, lo, beta, u_try, inv_sigma2);
            if (f_try >= f_cur - 1e-14) {
                u = u_try;
                f_cur = f_try;
                break;
            }
            t *= 0.5;
        }
    }
    // Accept the final iterate if the gradient is nearly flat (loose guard).
    st.u = u;
    const Eigen::VectorXd eta = linear_predictor(spec, lo, beta, u);
    Eigen::VectorXd mu(lo.n), w(lo.n);
    for (Eigen::Index i = 0; i < lo.n; ++i) {
        mu[i] = logistic::sigmoid(eta[i]);
        w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
    }
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(lo.q, lo.q);
    for (Eigen::Index i = 0; i < lo.n; ++i) {
        for (std::size_t f = 0; f < spec.factors.size(); ++f) {
            const Eigen::Index a = re_col(lo, spec, f, i);
            for (std::size_t g2 = f; g2 < spec.factors.size(); ++g2) {
                const Eigen::Index b = re_col(lo, spec, g2, i);
                H(a, b) += w[i];
                if (a != b) H(b, a) += w[i];
            }
        }
    }
    for (std::size_t f = 0; f < spec.factors.size(); ++f) {
        for (Eigen::Index j = 0; j < lo.sizes[f]; ++j) {
            H(lo.offsets[f] + j, lo.offsets[f] + j) += inv_sigma2[static_cast<Eigen::Index>(f)];
        }
    }
    st.eta = eta;
    st.mu = mu;
    st.w = w;
    st.H = H;
    st.Hldlt.compute(H);
    if (st.Hldlt.info() != Eigen::Success) return;
    st.logdet_H = st.Hldlt.vectorD().array().max(1e-300).log().sum();
    st.ok = true;
}

double objective_at(const GlmmSpec& spec, const Layout& lo, const Eigen::VectorXd& beta,
                    const Eigen::VectorXd& phi, ModeState& st) {
    Eigen::VectorXd inv_sigma2(phi.size());
    for (Eigen::Index f = 0; f < phi.size(); ++f) inv_sigma2[f] = std::exp(-phi[f]);
    solve_mode(spec, lo, beta, inv_sigma2, st);
    if (!st.ok) return -std::numeric_limits<double>::infinity();
    double ll = logistic::bernoulli_log_likelihood(spec.y, st.eta);
    for (std::size_t f = 0; f < spec.factors.size(); ++f) {
        const auto seg = st.u.segment(lo.offsets[f], lo.sizes[f]);
        ll -= 0.5 * inv_sigma2[static_cast<Eigen::Index>(f)] * seg.squaredNorm();
        ll -= 0.5 * static_cast<double>(lo.sizes[f]) * phi[static_cast<Eigen::Index>(f)];
    }
    ll -= 0.5 * st.logdet_H;
    return ll;
}

// Analytic gradient at a solved mode. Derivation: envelope theorem on the
// penalized part (grad wrt u vanishes at the mode) plus the log-det chain
// through W(eta) and D^-1.
void gradient_at(const GlmmSpec& spec, const Layout& lo, const Eigen::VectorXd& /*beta*/,
                 const Eigen::VectorXd& phi, const ModeState& st,
                 Eigen::VectorXd& grad_beta, Eigen::VectorXd& grad_phi) {
    const Eigen::Index n = lo.n;
    const Eigen::Index p = lo.p;
    const Eigen::Index q = lo.q;
    const std::size_t F = spec.factors.size();

    Eigen::VectorXd inv_sigma2(phi.size());
    for (Eigen::Index f = 0; f < phi.size(); ++f) inv_sigma2[f] = std::exp(-phi[f]);

    // Dense Z (n x q); scales fine at desk size.
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, q);
    for (std::size_t f = 0; f < F; ++f) {
        for (Eigen::Index i = 0; i < n; ++i) Z(i, re_col(lo, spec, f, i)) = 1.0;
    }

    const Eigen::MatrixXd Hinv = st.Hldlt.solve(Eigen::MatrixXd::Identity(q, q));
    // s_i = z_i' H^-1 z_i ; wp_i = w_i (1 - 2 mu_i) = dW/deta.
    Eigen::VectorXd s(n), wp(n);
    const Eigen::MatrixXd ZHinv = Z * Hinv;
    for (Eigen::Index i = 0; i < n; ++i) {
        s[i] = ZHinv.row(i).dot(Z.row(i));
        wp[i] = st.w[i] * (1.0 - 2.0 * st.mu[i]);
    }
    const Eigen::VectorXd resid = spec.y - st.mu;

    grad_beta.resize(p);
    if (q > 0) {
        // du/dbeta_k = -H^-1 Z'W x_k.
        const Eigen::MatrixXd ZtWX = Z.transpose() * st.w.asDiagonal() * spec.X;
        const Eigen::MatrixXd dU = -st.Hldlt.solve(ZtWX); // q x p
        for (Eigen::Index k = 0; k < p; ++k) {
            const Eigen::VectorXd deta = spec.X.col(k) + Z * dU.col(k);
            grad_beta[k] = spec.X.col(k).dot(resid) - 0.5 * (s.array() * wp.array() * deta.array()).sum();
        }
    } else {
        for (Eigen::Index k = 0; k < p; ++k) grad_beta[k] = spec.X.col(k).dot(resid);
    }

    grad_phi.resize(static_cast<Eigen::Index>(F));
    for (std::size_t f = 0; f < F; ++f) {
        const Eigen::Index fe = static_cast<Eigen::Index>(f);
        const auto seg = st.u.segment(lo.offsets[f], lo.sizes[f]);
        double g = 0.5 * inv_sigma2[fe] * seg.squaredNorm() - 0.5 * static_cast<double>(lo.sizes[f]);
        // d logdet(H)/dphi_f via d(D^-1)/dphi_f = -P_f / sigma2_f.
        double tr = 0.0;
        for (Eigen::Index j = 0; j < lo.sizes[f]; ++j) {
            tr += Hinv(lo.offsets[f] + j, lo.offsets[f] + j);
        }
        g += 0.5 * tr * inv_sigma2[fe];
        // W(eta) moves because the mode moves: du/dphi_f = H^-1 P_f u / sigma2_f.
        Eigen::VectorXd pf_u = Eigen::VectorXd::Zero(q);
        pf_u.segment(lo.offsets[f], lo.sizes[f]) = seg * inv_sigma2[fe];
        const Eigen::VectorXd du = st.Hldlt.solve(pf_u);
        const Eigen::VectorXd deta = Z * du;
        g -= 0.5 * (s.array() * wp.array() * deta.array()).sum();
        grad_phi[fe] = g;
    }
}

void validate_spec(const GlmmSpec& spec) {
    const Eigen::Index n = spec.X.rows();
    if (spec.y.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "glmm: y and X row counts differ");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (spec.y[i] != 0.0 && spec.y[i] != 1.0) {
            throw Error(ErrorKind::ConfigInvalid, "glmm: outcome must be binary");
        }
    }
    for (const auto& f : spec.factors) {
        if (f.n_levels < 2) {
            throw Error(ErrorKind::ConfigInvalid,
                        "glmm: grouping factor '" + f.name + "' has fewer than 2 levels");
        }
        if (f.levels.size() != static_cast<std::size_t>(n)) {
            throw Error(ErrorKind::DimensionMismatch,
                        "glmm: factor '" + f.name + "' length differs from outcome");
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(spec.X);
    qr.setThreshold(1e-10);
    if (qr.rank() < spec.X.cols()) {
        throw Error(ErrorKind::SingularDesign, "glmm: design not full rank");
    }
}

} // namespace

GroupingFactor make_factor(const std::string& name, const std::vector<std::string>& labels) {
    GroupingFactor f;
    f.name = name;
    std::map<std::string, int> codes;
    for (const auto& l : labels) codes.emplace(l, 0);
    if (codes.size() < 2) {
        throw Error(ErrorKind::ConfigInvalid,
                    "grouping factor '" + name + "' has fewer than 2 distinct labels");
    }
    int next = 0;
    for (auto& [label, code] : codes) {
        code = next++;
        f.level_labels.push_back(label);
    }
    f.n_levels = next;
    f.levels.reserve(labels.size());
    for (const auto& l : labels) f.levels.push_back(codes[l]);
    return f;
}

double laplace_objective(const GlmmSpec& spec, const Eigen::VectorXd& beta,
                         const Eigen::VectorXd& phi) {
    const Layout lo = make_layout(spec);
    ModeState st;
    return objective_at(spec, lo, beta, phi, st);
}

void laplace_gradient(const GlmmSpec& spec, const Eigen::VectorXd& beta,
                      const Eigen::VectorXd& phi, Eigen::VectorXd& grad_beta,
                      Eigen::VectorXd& grad_phi) {
    const Layout lo = make_layout(spec);
    ModeState st;
    objective_at(spec, lo, beta, phi, st);
    if (!st.ok) {
        throw Error(ErrorKind::NonConvergence, "glmm gradient: mode solve failed");
    }
    gradient_at(spec, lo, beta, phi, st, grad_beta, grad_phi);
}

GlmmFit fit_glmm(const GlmmSpec& spec) {
    validate_spec(spec);
    const Layout lo = make_layout(spec);
    const Eigen::Index p = lo.p;
    const std::size_t F = spec.factors.size();
    const Eigen::Index dim = p + static_cast<Eigen::Index>(F);

    GlmmFit fit;
    fit.beta_names = spec.beta_names;
    for (const auto& f : spec.factors) fit.factor_names.push_back(f.name);

    // Start from the plain logistic fit; phi starts at log(0.1).
    Eigen::VectorXd theta(dim);
    {
        logistic::LogisticFit init = logistic::fit_logistic(spec.y, spec.X, 200, 1e-8);
        theta.head(p) = init.beta;
    }
    for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(F); ++f) {
        theta[p + f] = std::log(0.1);
    }

    ModeState st;
    auto split = [&](const Eigen::VectorXd& th, Eigen::VectorXd& beta, Eigen::VectorXd& phi) {
        beta = th.head(p);
        phi = th.tail(static_cast<Eigen::Index>(F));
    };
    auto eval_obj = [&](const Eigen::VectorXd& th) {
        Eigen::VectorXd beta, phi;
        split(th, beta, phi);
        return objective_at(spec, lo, beta, phi, st);
    };
    auto eval_grad = [&](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
        Eigen::VectorXd beta, phi, gb, gp;
        split(th, beta, phi);
        gradient_at(spec, lo, beta, phi, st, gb, gp);
        g.resize(dim);
        g.head(p) = gb;
        g.tail(static_cast<Eigen::Index>(F)) = gp;
    };
    auto project = [&](Eigen::VectorXd& th) {
        for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(F); ++f) {
            th[p + f] = std::max(th[p + f], kPhiFloor);
        }
    };
    // Zero gradient components that push an at-floor phi further down.
    auto projected_gradient = [&](const Eigen::VectorXd& th, const Eigen::VectorXd& g) {
        Eigen::VectorXd pg = g;
        for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(F); ++f) {
            if (th[p + f] <= kPhiFloor + 1e-12 && g[p + f] < 0.0) pg[p + f] = 0.0;
        }
        return pg;
    };

    project(theta);
    double f_cur = eval_obj(theta);
    if (!std::isfinite(f_cur)) {
        throw Error(ErrorKind::NonConvergence, "glmm: objective not finite at start");
    }
    Eigen::VectorXd g_cur(dim);
    eval_grad(theta, g_cur);

    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(dim, dim); // inverse-Hessian approx (of -obj)
    std::vector<bool> active_prev(static_cast<std::size_t>(F), false);
    int stall_count = 0;

    for (int iter = 1; iter <= spec.options.max_iter; ++iter) {
        fit.iterations = iter;
        const Eigen::VectorXd pg = projected_gradient(theta, g_cur);
        if (pg.lpNorm<Eigen::Infinity>() < spec.options.tol) {
            fit.converged = true;
            break;
        }
        // Objective creep near a phi floor: successive accepted steps that no
        // longer move the objective with an already-small gradient.
        if (stall_count >= 3 && pg.lpNorm<Eigen::Infinity>() < 1e-4) {
            fit.converged = true;
            fit.warnings.push_back("stopped on objective stall; gradient sup-norm " +
                                   std::to_string(pg.lpNorm<Eigen::Infinity>()));
            break;
        }
        if (theta.head(p).lpNorm<Eigen::Infinity>() > 1e2) {
            throw Error(ErrorKind::SeparationDetected, "glmm: coefficients diverging");
        }

        // Reset the quasi-Newton memory whenever the floor active-set flips.
        std::vector<bool> active(static_cast<std::size_t>(F), false);
        for (std::size_t f = 0; f < F; ++f) {
            active[f] = theta[p + static_cast<Eigen::Index>(f)] <= kPhiFloor + 1e-12;
        }
        if (active != active_prev) {
            B.setIdentity();
            active_prev = active;
        }

        Eigen::VectorXd dir = B * pg; // ascent direction
        if (dir.dot(pg) <= 1e-14 * dir.norm() * pg.norm()) {
            B.setIdentity();
            dir = pg;
        }

        double t = 1.0;
        Eigen::VectorXd theta_new = theta;
        double f_new = f_cur;
        bool accepted = false;
        const double slope = pg.dot(dir);
        for (int half = 0; half < 60; ++half) {
            theta_new = theta + t * dir;
            project(theta_new);
            f_new = eval_obj(theta_new);
            if (std::isfinite(f_new) && f_new >= f_cur + 1e-4 * t * slope - 1e-13) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Flat along this direction; call it converged if the projected
            // gradient is small, else report failure below.
            if (pg.lpNorm<Eigen::Infinity>() < 1e-3) {
                fit.converged = true;
                fit.warnings.push_back("line search stalled near optimum; gradient "
                                       "sup-norm " + std::to_string(pg.lpNorm<Eigen::Infinity>()));
                break;
            }
            throw Error(ErrorKind::NonConvergence, "glmm: line search failed");
        }

        Eigen::VectorXd g_new(dim);
        // Re-solve at the accepted point (eval_obj already left st at theta_new).
        eval_grad(theta_new, g_new);
        const Eigen::VectorXd s_vec = theta_new - theta;
        const Eigen::VectorXd y_vec = projected_gradient(theta_new, g_new) - pg;
        const double sy = -s_vec.dot(y_vec); // minimize -obj convention
        if (sy > 1e-12) {
            const Eigen::VectorXd ym = -y_vec;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
            const Eigen::MatrixXd V = I - (s_vec * ym.transpose()) / sy;
            B = V * B * V.transpose() + (s_vec * s_vec.transpose()) / sy;
        }
        stall_count = (f_new - f_cur) < 1e-10 * (1.0 + std::abs(f_cur)) ? stall_count + 1 : 0;
        theta = theta_new;
        f_cur = f_new;
        g_cur = g_new;
    }
    if (!fit.converged) {
        const double pg_norm =
            projected_gradient(theta, g_cur).lpNorm<Eigen::Infinity>();
        if (pg_norm < 1e-4) {
            fit.converged = true;
            fit.warnings.push_back("iteration cap with near-zero gradient (sup-norm " +
                                   std::to_string(pg_norm) + "); treating as converged");
        } else {
            throw Error(ErrorKind::NonConvergence, "glmm: outer iteration cap reached");
        }
    }

    // Final state at the optimum.
    f_cur = eval_obj(theta);
    fit.beta = theta.head(p);
    fit.log_likelihood = f_cur;
    for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(F); ++f) {
        double s2 = std::exp(theta[p + f]);
        if (s2 <= 1.5e-10) s2 = 0.0; // floor == structural zero
        fit.sigma2.push_back(s2);
    }
    for (Eigen::Index k = 0; k < p; ++k) fit.odds_ratios.push_back(std::exp(fit.beta[k]));
    fit.aic = 2.0 * (static_cast<double>(p) + static_cast<double>(F)) - 2.0 * fit.log_likelihood;
    fit.composite_r2 = composite_r2(spec.X, fit.beta, fit.sigma2);

    // Wald SEs: observed information of the Laplace objective by central
    // differences of the analytic gradient, over beta and off-floor phis.
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index k = 0; k < p; ++k) free_idx.push_back(k);
    for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(F); ++f) {
        if (theta[p + f] > kPhiFloor + 1e-9) free_idx.push_back(p + f);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(free_idx.size());
    Eigen::MatrixXd hess(m, m);
    const double h = 1e-5;
    for (Eigen::Index a = 0; a < m; ++a) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp[free_idx[static_cast<std::size_t>(a)]] += h;
        tm[free_idx[static_cast<std::size_t>(a)]] -= h;
        Eigen::VectorXd gp(dim), gm(dim);
        eval_obj(tp); // re-solve the mode; the analytic gradient is only valid there
        eval_grad(tp, gp);
        eval_obj(tm);
        eval_grad(tm, gm);
        for (Eigen::Index b = 0; b < m; ++b) {
            hess(b, a) = (gp[free_idx[static_cast<std::size_t>(b)]] -
                          gm[free_idx[static_cast<std::size_t>(b)]]) / (2.0 * h);
        }
    }
    hess = 0.5 * (hess + hess.transpose().eval()); // symmetrize
    const Eigen::MatrixXd info = -hess;            // observed information
    fit.se = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    if (lu.isInvertible()) {
        const Eigen::MatrixXd cov = lu.inverse();
        for (Eigen::Index k = 0; k < p; ++k) {
            const double v = cov(k, k);
            fit.se[k] = v > 0.0 ? std::sqrt(v) : std::numeric_limits<double>::quiet_NaN();
        }
    } else {
        // Fall back to the beta block only (phi boundary can degrade the full matrix).
        const Eigen::MatrixXd info_bb = info.topLeftCorner(p, p);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info_bb);
        if (ldlt.info() == Eigen::Success) {
            const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
            for (Eigen::Index k = 0; k < p; ++k) {
                const double v = cov(k, k);
                fit.se[k] = v > 0.0 ? std::sqrt(v) : std::numeric_limits<double>::quiet_NaN();
            }
        }
        fit.warnings.push_back("information matrix singular; SEs from the beta block only");
    }
    return fit;
}

std::vector<double> variance_decomposition(const std::vector<double>& sigma2) {
    double total = kLogisticLatentVariance;
    for (double s : sigma2) total += s;
    std::vector<double> pct;
    pct.push_back(100.0 * kLogisticLatentVariance / total);
    for (double s : sigma2) pct.push_back(100.0 * s / total);
    return pct;
}

double composite_r2(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                    const std::vector<double>& sigma2) {
    const Eigen::VectorXd eta = X * beta;
    const double m = eta.mean();
    double var = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) var += (eta[i] - m) * (eta[i] - m);
    var /= static_cast<double>(eta.size()); // population variance
    double total = var + kLogisticLatentVariance;
    for (double s : sigma2) total += s;
    return var / total;
}

double predict_probability(const Eigen::VectorXd& beta, const Eigen::VectorXd& x,
                           bool* clamped) {
    if (beta.size() != x.size()) {
        throw Error(ErrorKind::DimensionMismatch, "predict: covariate row length mismatch");
    }
    double eta = beta.dot(x);
    if (clamped) *clamped = false;
    if (eta > 30.0) {
        eta = 30.0;
        if (clamped) *clamped = true;
    } else if (eta < -30.0) {
        eta = -30.0;
        if (clamped) *clamped = true;
    }
    return logistic::sigmoid(eta);
}

} // namespace comet::glmm
