#include "hatescope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <boost/math/distributions/students_t.hpp>

namespace hatescope {

DesignMatrix DesignMatrix::select(const std::vector<std::size_t>& columns) const {
    DesignMatrix d;
    d.x.resize(x.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        d.x.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(columns[j]));
        d.names.push_back(names[columns[j]]);
    }
    d.y = y;
    d.has_intercept = has_intercept && !columns.empty() && columns.front() == 0;
    return d;
}

DesignMatrix make_design(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns,
                         std::vector<double> response, bool intercept) {
    if (names.size() != columns.size()) throw std::invalid_argument("column names and data differ in count");
    const std::size_t n = response.size();
    const std::size_t offset = intercept ? 1 : 0;
    DesignMatrix d;
    d.has_intercept = intercept;
    d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size() + offset));
    if (intercept) {
        d.x.col(0).setOnes();
        d.names.push_back("(Intercept)");
    }
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != n) throw std::invalid_argument("column '" + names[j] + "' has wrong length");
        for (std::size_t i = 0; i < n; ++i) d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + offset)) = columns[j][i];
        d.names.push_back(names[j]);
    }
    d.y = std::move(response);
    return d;
}

void validate(const DesignMatrix& d) {
    if (d.y.size() != d.rows()) throw std::invalid_argument("response length differs from design rows");
    if (d.names.size() != d.cols()) throw std::invalid_argument("column names differ from design columns");
    if (d.rows() <= d.cols()) throw std::invalid_argument("design needs more rows than columns");
    if (!d.x.allFinite()) throw std::invalid_argument("design has non-finite entries");
    for (double v : d.y)
        if (!(v >= 0) || v != std::floor(v)) throw std::invalid_argument("response must be non-negative integer counts");
}

// ---------------------------------------------------------------------------
// Negative binomial likelihood pieces. Counts are integral, so the gamma-function
// differences are exact finite sums.
// ---------------------------------------------------------------------------

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kMaxEta = 700.0;

// log Gamma(y + theta) - log Gamma(theta)
double log_rising(double theta, double y) {
    if (y > 1e5) return std::lgamma(y + theta) - std::lgamma(theta);
    double s = 0;
    for (int j = 0; j < static_cast<int>(y); ++j) s += std::log(theta + j);
    return s;
}

// d/dtheta and d2/dtheta2 of log_rising
void rising_derivs(double theta, double y, double& d1, double& d2) {
    d1 = 0;
    d2 = 0;
    for (int j = 0; j < static_cast<int>(y); ++j) {
        double inv = 1.0 / (theta + j);
        d1 += inv;
        d2 -= inv * inv;
    }
}

double obs_loglik(double y, double mu, double theta) {
    // theta log(theta/(theta+mu)) + y log(mu/(theta+mu))
    double ll = log_rising(theta, y) - std::lgamma(y + 1) - theta * std::log1p(mu / theta);
    if (y > 0) ll -= y * std::log1p(theta / mu);
    return ll;
}

struct Problem {
    const MatrixXd& x;  // equilibrated
    const VectorXd& y;

    VectorXd mean(const VectorXd& beta) const {
        VectorXd eta = x * beta;
        for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = std::exp(std::min(eta[i], kMaxEta));
        return eta;
    }

    double loglik(const VectorXd& mu, double theta) const {
        double ll = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) ll += obs_loglik(y[i], mu[i], theta);
        return ll;
    }

    double loglik_beta(const VectorXd& beta, double theta) const { return loglik(mean(beta), theta); }

    // First and second derivative of the log-likelihood in theta given mu.
    void theta_derivs(const VectorXd& mu, double theta, double& g, double& h) const {
        g = 0;
        h = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double d1, d2;
            rising_derivs(theta, y[i], d1, d2);
            const double tm = theta + mu[i];
            g += d1 - std::log1p(mu[i] / theta) + (mu[i] - y[i]) / tm;
            h += d2 + mu[i] / (theta * tm) + (y[i] - mu[i]) / (tm * tm);
        }
    }
};

VectorXd weighted_ls(const MatrixXd& x, const VectorXd& w, const VectorXd& z) {
    VectorXd sw = w.array().sqrt();
    MatrixXd xw = x.array().colwise() * sw.array();
    Eigen::ColPivHouseholderQR<MatrixXd> qr(xw);
    if (qr.rank() < x.cols()) throw RankDeficientError();
    return qr.solve(VectorXd(z.array() * sw.array()));
}

// Fisher scoring for beta at fixed theta (theta = +inf gives Poisson weights).
int irls(const Problem& pb, VectorXd& beta, double theta, double tol, int max_iter) {
    const bool poisson = !std::isfinite(theta);
    auto ll_of = [&](const VectorXd& b) {
        VectorXd mu = pb.mean(b);
        if (!poisson) return pb.loglik(mu, theta);
        double ll = 0;
        for (Eigen::Index i = 0; i < mu.size(); ++i) ll += pb.y[i] * std::log(mu[i]) - mu[i];
        return ll;
    };
    double ll = ll_of(beta);
    int it = 0;
    for (; it < max_iter; ++it) {
        VectorXd eta = pb.x * beta;
        VectorXd mu = pb.mean(beta);
        VectorXd w(mu.size()), z(mu.size());
        for (Eigen::Index i = 0; i < mu.size(); ++i) {
            w[i] = poisson ? mu[i] : mu[i] / (1.0 + mu[i] / theta);
            z[i] = eta[i] + (pb.y[i] - mu[i]) / mu[i];
        }
        VectorXd next = weighted_ls(pb.x, w, z);
        double ll_next = ll_of(next);
        for (int halving = 0; halving < 30 && !(ll_next >= ll - 1e-12 * std::abs(ll)); ++halving) {
            next = 0.5 * (beta + next);
            ll_next = ll_of(next);
        }
        const double delta = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        ll = ll_next;
        if (delta < tol) {
            ++it;
            break;
        }
    }
    return it;
}

// Safeguarded Newton on s = log theta for the profile likelihood at fixed mu.
double newton_log_theta(const Problem& pb, const VectorXd& mu, double theta, double s_min, double s_max) {
    double s = std::log(theta);
    double ll = pb.loglik(mu, theta);
    for (int it = 0; it < 100; ++it) {
        double g, h;
        pb.theta_derivs(mu, std::exp(s), g, h);
        const double th = std::exp(s);
        const double gs = th * g;
        const double hs = th * th * h + gs;
        double step = hs < 0 ? -gs / hs : (gs > 0 ? 1.0 : -1.0);
        step = std::clamp(step, -5.0, 5.0);
        double s_next = std::clamp(s + step, s_min, s_max);
        double ll_next = pb.loglik(mu, std::exp(s_next));
        for (int k = 0; k < 60 && ll_next < ll; ++k) {
            step *= 0.5;
            s_next = std::clamp(s + step, s_min, s_max);
            ll_next = pb.loglik(mu, std::exp(s_next));
        }
        if (ll_next < ll) break;
        const double moved = std::abs(s_next - s);
        s = s_next;
        ll = ll_next;
        if (moved < 1e-12) break;
    }
    return std::exp(s);
}

// Gradient and Hessian of the log-likelihood in (beta, log theta).
void joint_derivs(const Problem& pb, const VectorXd& beta, double theta, bool with_theta, VectorXd& grad,
                  MatrixXd& hess) {
    const Eigen::Index p = pb.x.cols();
    const Eigen::Index m = with_theta ? p + 1 : p;
    VectorXd mu = pb.mean(beta);
    VectorXd d_eta(mu.size()), d2_eta(mu.size()), d_eta_theta(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const double tm = theta + mu[i];
        d_eta[i] = theta * (pb.y[i] - mu[i]) / tm;
        d2_eta[i] = -theta * mu[i] * (theta + pb.y[i]) / (tm * tm);
        d_eta_theta[i] = mu[i] * (pb.y[i] - mu[i]) / (tm * tm);
    }
    grad.resize(m);
    hess.resize(m, m);
    grad.head(p) = pb.x.transpose() * d_eta;
    hess.topLeftCorner(p, p) = pb.x.transpose() * (pb.x.array().colwise() * d2_eta.array()).matrix();
    if (with_theta) {
        double g, h;
        pb.theta_derivs(mu, theta, g, h);
        const double gs = theta * g;
        grad[p] = gs;
        VectorXd cross = theta * (pb.x.transpose() * d_eta_theta);
        hess.block(0, p, p, 1) = cross;
        hess.block(p, 0, 1, p) = cross.transpose();
        hess(p, p) = theta * theta * h + gs;
    }
}

}  // namespace

double negbin_loglik(const DesignMatrix& design, std::span<const double> beta, double theta) {
    VectorXd b = Eigen::Map<const VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    VectorXd y = Eigen::Map<const VectorXd>(design.y.data(), static_cast<Eigen::Index>(design.y.size()));
    Problem pb{design.x, y};
    return pb.loglik_beta(b, theta);
}

RegressionFit fit_negbin(const DesignMatrix& design, const NegBinOptions& opt) {
    validate(design);
    const Eigen::Index n = design.x.rows();
    const Eigen::Index p = design.x.cols();

    // Equilibrate columns to unit RMS; coefficients and errors are mapped back at the end.
    VectorXd scale(p);
    MatrixXd xs = design.x;
    for (Eigen::Index j = 0; j < p; ++j) {
        scale[j] = std::sqrt(design.x.col(j).squaredNorm() / static_cast<double>(n));
        if (scale[j] == 0) throw RankDeficientError();
        xs.col(j) /= scale[j];
    }
    {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(xs);
        qr.setThreshold(1e-10);
        if (qr.rank() < p) throw RankDeficientError();
    }
    VectorXd y = Eigen::Map<const VectorXd>(design.y.data(), n);
    Problem pb{xs, y};

    // Poisson warm start from mu = y + 0.1.
    VectorXd beta;
    {
        VectorXd eta = (y.array() + 0.1).log();
        VectorXd mu = (y.array() + 0.1);
        VectorXd z = eta.array() + (y.array() - mu.array()) / mu.array();
        beta = weighted_ls(xs, mu, z);
    }
    irls(pb, beta, std::numeric_limits<double>::infinity(), 1e-10, 100);

    const double s_min = std::log(opt.theta_min), s_max = std::log(opt.theta_max);
    double theta;
    {
        VectorXd mu = pb.mean(beta);
        double num = mu.squaredNorm();
        double den = ((y - mu).array().square() - mu.array()).sum();
        theta = den > 0 ? num / den : opt.theta_max;
        theta = std::clamp(theta, opt.theta_min, opt.theta_max);
    }

    RegressionFit fit;
    int outer = 0;
    for (; outer < opt.max_outer; ++outer) {
        const VectorXd beta_prev = beta;
        const double s_prev = std::log(theta);
        irls(pb, beta, theta, opt.tolerance * 1e-2, 50);
        theta = newton_log_theta(pb, pb.mean(beta), theta, s_min, s_max);
        const double db = (beta - beta_prev).cwiseAbs().maxCoeff();
        const double ds = std::abs(std::log(theta) - s_prev);
        if (db < opt.tolerance && ds < opt.tolerance) {
            fit.converged = true;
            ++outer;
            break;
        }
    }
    fit.iterations = outer;

    auto at_bound = [&](double th) {
        const double s = std::log(th);
        return s <= s_min + 1e-9 || s >= s_max - 1e-9;
    };

    // Joint Newton polish in (beta, log theta); beta only when theta sits on a bound.
    for (int it = 0; it < 20; ++it) {
        const bool with_theta = !at_bound(theta);
        VectorXd g;
        MatrixXd h;
        joint_derivs(pb, beta, theta, with_theta, g, h);
        Eigen::LDLT<MatrixXd> ldlt(-h);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
        VectorXd step = ldlt.solve(g);
        const double ll0 = pb.loglik_beta(beta, theta);
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, t *= 0.5) {
            VectorXd b1 = beta + t * step.head(p);
            double th1 = with_theta ? std::exp(std::clamp(std::log(theta) + t * step[p], s_min, s_max)) : theta;
            if (pb.loglik_beta(b1, th1) >= ll0) {
                beta = b1;
                theta = th1;
                accepted = true;
                break;
            }
        }
        if (!accepted || t * step.cwiseAbs().maxCoeff() < 1e-14) break;
    }

    fit.theta = theta;
    fit.theta_at_bound = at_bound(theta);
    VectorXd mu = pb.mean(beta);
    fit.loglik = pb.loglik(mu, theta);
    fit.aic = -2.0 * fit.loglik + 2.0 * static_cast<double>(p + 1);
    fit.fitted.assign(mu.data(), mu.data() + n);

    VectorXd g;
    MatrixXd h;
    joint_derivs(pb, beta, theta, !fit.theta_at_bound, g, h);
    MatrixXd info = -h;
    Eigen::FullPivLU<MatrixXd> lu(info);
    if (!lu.isInvertible()) throw RankDeficientError();
    MatrixXd cov = lu.inverse();

    fit.names = design.names;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double b = beta[j] / scale[j];
        const double var = cov(j, j);
        const double se = var > 0 ? std::sqrt(var) / scale[j] : std::numeric_limits<double>::quiet_NaN();
        const double z = beta[j] / std::sqrt(var);
        fit.beta.push_back(b);
        fit.se.push_back(se);
        fit.z.push_back(z);
        fit.p.push_back(std::isfinite(z) ? std::erfc(std::abs(z) / std::sqrt(2.0)) : std::numeric_limits<double>::quiet_NaN());
    }
    return fit;
}

// ---------------------------------------------------------------------------

StepwiseResult stepwise_backward(const DesignMatrix& design, const NegBinOptions& options, Exec exec) {
    StepwiseResult result;
    std::vector<std::size_t> active(design.cols());
    std::iota(active.begin(), active.end(), 0);
    result.fit = fit_negbin(design, options);

    while (true) {
        std::vector<std::size_t> removable;
        for (std::size_t k = 0; k < active.size(); ++k)
            if (!(design.has_intercept && active[k] == 0)) removable.push_back(k);
        StepwiseStep step;
        step.current_aic = result.fit.aic;
        if (removable.empty()) {
            result.trace.push_back(step);
            break;
        }

        const long long m = static_cast<long long>(removable.size());
        std::vector<std::optional<RegressionFit>> fits(removable.size());
        std::vector<std::string> errors(removable.size());
        auto run = [&](long long c) {
            std::vector<std::size_t> cols;
            for (std::size_t k = 0; k < active.size(); ++k)
                if (k != removable[c]) cols.push_back(active[k]);
            try {
                fits[c] = fit_negbin(design.select(cols), options);
            } catch (const std::exception& e) {
                errors[c] = e.what();
            }
        };
        if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
            for (long long c = 0; c < m; ++c) run(c);
        } else {
            for (long long c = 0; c < m; ++c) run(c);
        }

        std::optional<std::size_t> best;
        for (std::size_t c = 0; c < removable.size(); ++c) {
            const std::string& name = design.names[active[removable[c]]];
            if (!fits[c]) {
                result.aborted = true;
                result.error = "removing " + name + ": " + errors[c];
                result.trace.push_back(step);
                return result;
            }
            step.candidates.push_back(name);
            step.candidate_aic.push_back(fits[c]->aic);
            if (!best || fits[c]->aic < fits[*best]->aic) best = c;
        }
        if (!(fits[*best]->aic < result.fit.aic)) {
            result.trace.push_back(step);
            break;
        }
        step.removed = design.names[active[removable[*best]]];
        result.removal_order.push_back(step.removed);
        result.trace.push_back(step);
        active.erase(active.begin() + static_cast<long>(removable[*best]));
        result.fit = std::move(*fits[*best]);
    }
    return result;
}

std::string fit_table_csv(const RegressionFit& fit) {
    std::string out = "variable,beta,se,p\n";
    auto row = [&](std::size_t j) {
        out += csv_row({fit.names[j], format_double(fit.beta[j]), format_double(fit.se[j]), format_double(fit.p[j])});
    };
    std::optional<std::size_t> intercept;
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
        if (fit.names[j] == "(Intercept)") {
            intercept = j;
            continue;
        }
        row(j);
    }
    if (intercept) row(*intercept);
    return out;
}

std::string stepwise_trace_csv(const StepwiseResult& result) {
    std::string out = "step,candidate,aic,current_aic,removed\n";
    for (std::size_t s = 0; s < result.trace.size(); ++s) {
        const auto& st = result.trace[s];
        if (st.candidates.empty())
            out += csv_row({std::to_string(s + 1), "", "", format_double(st.current_aic), "false"});
        for (std::size_t c = 0; c < st.candidates.size(); ++c)
            out += csv_row({std::to_string(s + 1), st.candidates[c], format_double(st.candidate_aic[c]),
                            format_double(st.current_aic), st.candidates[c] == st.removed ? "true" : "false"});
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> mid_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && x[idx[j]] == x[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
        i = j;
    }
    return ranks;
}

double students_t_two_sided(double t, double df) {
    if (std::isinf(t)) return 0.0;
    boost::math::students_t_distribution<double> dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("correlation inputs differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("correlation needs at least 3 points");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw std::invalid_argument("zero variance");
    Correlation c;
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    if (std::abs(c.r) == 1.0) {
        c.p = 0.0;
    } else {
        const double t = c.r * std::sqrt(static_cast<double>(n - 2) / (1.0 - c.r * c.r));
        c.p = students_t_two_sided(t, static_cast<double>(n - 2));
    }
    return c;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("correlation inputs differ in length");
    auto rx = mid_ranks(x);
    auto ry = mid_ranks(y);
    return pearson(rx, ry);
}

TTest ttest_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("t-test needs at least 2 values per sample");
    auto mean = [](std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); };
    auto ss = [](std::span<const double> v, double m) {
        double s = 0;
        for (double e : v) s += (e - m) * (e - m);
        return s;
    };
    const double ma = mean(a), mb = mean(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = (ss(a, ma) + ss(b, mb)) / (na + nb - 2.0);
    if (pooled == 0) throw std::invalid_argument("zero pooled variance");
    TTest res;
    res.df = static_cast<int>(a.size() + b.size() - 2);
    res.t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    res.p = students_t_two_sided(res.t, res.df);
    return res;
}

}  // namespace hatescope
