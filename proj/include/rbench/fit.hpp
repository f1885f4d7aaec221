// Copyright 2026 The rbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RBENCH_FIT_HPP
#define RBENCH_FIT_HPP

// Least-squares fits of decay curves to
//   order 0:  F(m) = A p^m + B
//   order 1:  F(m) = A p^m + B + G (m-1) p^(m-2)
// where G = C (q - p^2) is the only identifiable combination of the
// first-order amplitude and the gate-dependence term.

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rbench/common.hpp"
#include "rbench/protocol.hpp"

namespace rbench {

/// r = 1 - p - (1 - p)/d.
inline double error_rate(double p, int d) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0, 1], got " + detail::format_double(p));
    if (d < 2) throw ValidationError("dimension must be >= 2");
    return 1.0 - p - (1.0 - p) / d;
}

inline double model_zeroth(double m, double a, double b, double p) { return a * std::pow(p, m) + b; }

inline double model_first(double m, double a, double b, double p, double g) {
    const double tail = m == 1.0 ? 0.0 : g * (m - 1.0) * std::pow(p, m - 2.0);
    return a * std::pow(p, m) + b + tail;
}

struct FitResult {
    int order = 0;
    double A = 0.0;
    double B = 0.0;
    double p = 0.0;
    /// Combined first-order amplitude C (q - p^2); order 1 only.
    std::optional<double> G;
    /// Set only when an analytic C is supplied (see resolve_gate_dependence).
    std::optional<double> C;
    std::optional<double> q;
    double r = 0.0;
    double residual_rms = 0.0;
    /// data - model, in ascending order of m.
    std::vector<double> per_point_residuals;
    bool converged = false;
    int iterations = 0;

    /// G / C, computed directly to avoid cancellation in q - p^2.
    std::optional<double> q_minus_p2() const {
        if (!G || !C) return std::nullopt;
        return *G / *C;
    }
    double evaluate(double m) const { return order == 0 ? model_zeroth(m, A, B, p) : model_first(m, A, B, p, *G); }
};

/// Factor G through a known first-order amplitude C, setting q = G/C + p^2.
inline void resolve_gate_dependence(FitResult& fit, double c) {
    if (fit.order != 1 || !fit.G) throw ValidationError("gate dependence is only defined for first-order fits");
    if (std::abs(c) < 1e-12) throw ValidationError("first-order amplitude C is zero; q - p^2 is not identifiable");
    fit.C = c;
    fit.q = *fit.G / c + fit.p * fit.p;
}

struct FitOptions {
    int max_iterations = 2000;
    double xtol = 1e-13;
    double ftol = 1e-16;
};

namespace detail {

struct FitData {
    std::vector<double> m, y, sqrt_w;
};

inline FitData prepare_fit_data(const DecayCurve& curve, std::size_t min_points) {
    std::vector<CurvePoint> pts = curve.points;
    std::sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.m < b.m; });
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].m == pts[i - 1].m) throw ValidationError("duplicate sequence length " + std::to_string(pts[i].m));
    }
    if (pts.size() < min_points) {
        throw ValidationError("fit needs at least " + std::to_string(min_points) + " distinct sequence lengths, got " +
                              std::to_string(pts.size()));
    }
    const bool weighted = std::all_of(pts.begin(), pts.end(), [](const CurvePoint& p) { return p.f_stderr > 0.0; });
    FitData data;
    for (const auto& p : pts) {
        if (!std::isfinite(p.f_mean)) throw ValidationError("non-finite fidelity at m = " + std::to_string(p.m));
        data.m.push_back(p.m);
        data.y.push_back(p.f_mean);
        data.sqrt_w.push_back(weighted ? 1.0 / p.f_stderr : 1.0);
    }
    return data;
}

struct LmOutcome {
    Eigen::VectorXd theta;
    bool converged;
    int iterations;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with a central-difference
/// Jacobian. Parameter `clamp_index` is held inside [0, 1].
template <class Model>
LmOutcome levenberg_marquardt(const Model& model, const FitData& data, Eigen::VectorXd theta, int clamp_index,
                              const FitOptions& opts) {
    const auto n = static_cast<Eigen::Index>(data.m.size());
    const auto k = theta.size();
    auto residuals = [&](const Eigen::VectorXd& t) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r(i) = data.sqrt_w[i] * (data.y[i] - model(data.m[i], t));
        return r;
    };
    auto clamp = [&](Eigen::VectorXd& t) { t(clamp_index) = std::clamp(t(clamp_index), 0.0, 1.0); };

    clamp(theta);
    Eigen::VectorXd r = residuals(theta);
    double cost = r.squaredNorm();
    double lambda = -1.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        if (cost == 0.0) return {theta, true, it - 1};
        Eigen::MatrixXd jac(n, k);
        for (Eigen::Index j = 0; j < k; ++j) {
            const double h = 1e-6 * std::max(std::abs(theta(j)), 1.0);
            Eigen::VectorXd hi = theta, lo = theta;
            hi(j) += h;
            lo(j) -= h;
            // d(model)/d(theta) = -d(residual)/d(theta)
            jac.col(j) = (residuals(lo) - residuals(hi)) / (2.0 * h);
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        Eigen::VectorXd scale = jtj.diagonal();
        const double floor = std::max(scale.maxCoeff(), 1e-300) * 1e-12;
        for (Eigen::Index j = 0; j < k; ++j) scale(j) = std::max(scale(j), floor);
        if (lambda < 0.0) lambda = 1e-3;

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += lambda * scale;
            const Eigen::VectorXd step = lhs.ldlt().solve(grad);
            Eigen::VectorXd trial = theta + step;
            clamp(trial);
            const Eigen::VectorXd r_trial = residuals(trial);
            const double cost_trial = r_trial.squaredNorm();
            if (std::isfinite(cost_trial) && cost_trial < cost) {
                const double moved = (trial - theta).norm();
                const double reduction = cost - cost_trial;
                theta = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = std::max(lambda / 3.0, 1e-15);
                accepted = true;
                if (moved <= opts.xtol * (theta.norm() + opts.xtol) || reduction <= opts.ftol * cost) {
                    return {theta, true, it};
                }
            } else {
                lambda *= 4.0;
                // No descent direction left at machine precision: a stationary point.
                if (lambda > 1e16) return {theta, true, it};
            }
        }
    }
    return {theta, false, opts.max_iterations};
}

/// B from the tail, then log-linear regression of |F - B| against m.
inline Eigen::Vector3d initial_zeroth(const FitData& data) {
    const std::size_t n = data.m.size();
    const double b = 0.5 * (data.y[n - 1] + data.y[n - 2]);
    const double sign = data.y.front() >= b ? 1.0 : -1.0;
    std::vector<double> xs, ls;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = sign * (data.y[i] - b);
        if (v > 1e-9) {
            xs.push_back(data.m[i]);
            ls.push_back(std::log(v));
        }
    }
    if (xs.size() < 2) return {data.y.front() - b, b, 1.0};
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double ml = std::accumulate(ls.begin(), ls.end(), 0.0) / static_cast<double>(ls.size());
    double sxx = 0.0, sxl = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxl += (xs[i] - mx) * (ls[i] - ml);
    }
    const double slope = sxx > 0.0 ? sxl / sxx : 0.0;
    const double p = std::clamp(std::exp(slope), 1e-3, 0.999999);
    const double a = sign * std::exp(ml - slope * mx);
    return {a, b, p};
}

/// Weighted linear least squares for the amplitudes at fixed p; returns the cost.
inline double profile_cost(const FitData& data, double p, int order, Eigen::VectorXd& coef) {
    const auto n = static_cast<Eigen::Index>(data.m.size());
    const Eigen::Index cols = order == 0 ? 2 : 3;
    Eigen::MatrixXd x(n, cols);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = data.m[i], w = data.sqrt_w[i];
        x(i, 0) = w * std::pow(p, m);
        x(i, 1) = w;
        if (order == 1) x(i, 2) = m == 1.0 ? 0.0 : w * (m - 1.0) * std::pow(p, m - 2.0);
        y(i) = w * data.y[i];
    }
    coef = x.colPivHouseholderQr().solve(y);
    return (y - x * coef).squaredNorm();
}

/// Indices of the lowest local minima of `cost`, at most `keep` of them.
inline std::vector<std::size_t> lowest_local_minima(const std::vector<double>& cost, std::size_t keep) {
    std::vector<std::size_t> minima;
    for (std::size_t i = 0; i < cost.size(); ++i) {
        const bool left = i == 0 || cost[i] <= cost[i - 1];
        const bool right = i + 1 == cost.size() || cost[i] <= cost[i + 1];
        if (left && right) minima.push_back(i);
    }
    std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
    if (minima.size() > keep) minima.resize(keep);
    return minima;
}

/// Minimum of the profile cost inside [lo, hi], following every low local
/// minimum of successively finer scans, then golden-section search.
inline void refine_profile(const FitData& data, int order, double lo, double hi, int depth, double& best_p,
                           double& best_cost) {
    Eigen::VectorXd coef;
    if (depth == 0) {
        const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
        double f1 = profile_cost(data, x1, order, coef), f2 = profile_cost(data, x2, order, coef);
        while (hi - lo > 1e-15) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = profile_cost(data, x1, order, coef);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = profile_cost(data, x2, order, coef);
            }
        }
        const double p = 0.5 * (lo + hi);
        const double c = profile_cost(data, p, order, coef);
        if (c < best_cost) {
            best_cost = c;
            best_p = p;
        }
        return;
    }
    constexpr int kScan = 60;
    const double h = (hi - lo) / kScan;
    std::vector<double> cost(kScan + 1);
    for (int j = 0; j <= kScan; ++j) cost[j] = profile_cost(data, lo + h * j, order, coef);
    for (std::size_t j : lowest_local_minima(cost, 3)) {
        const double centre = lo + h * static_cast<double>(j);
        if (cost[j] < best_cost) {
            best_cost = cost[j];
            best_p = centre;
        }
        refine_profile(data, order, std::max(lo, centre - h), std::min(hi, centre + h), depth - 1, best_p,
                       best_cost);
    }
}

/// Global search of the profile cost over p in [0, 1]. The profile can have
/// closely spaced minima (G trades against a shift of p), so every low local
/// minimum of a fine grid is refined.
inline Eigen::VectorXd profile_start(const FitData& data, int order) {
    std::vector<double> grid;
    for (int i = 0; i <= 1000; ++i) grid.push_back(1e-3 * i);
    for (double u = 3.0; u <= 7.0; u += 0.02) grid.push_back(1.0 - std::pow(10.0, -u));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    Eigen::VectorXd coef;
    std::vector<double> cost(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) cost[i] = profile_cost(data, grid[i], order, coef);

    double best_p = 1.0, best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t idx : lowest_local_minima(cost, 6)) {
        const double lo = grid[idx < 2 ? 0 : idx - 2], hi = grid[std::min(idx + 2, grid.size() - 1)];
        if (cost[idx] < best_cost) {
            best_cost = cost[idx];
            best_p = grid[idx];
        }
        refine_profile(data, order, lo, hi, 3, best_p, best_cost);
    }
    profile_cost(data, best_p, order, coef);
    Eigen::VectorXd theta(order == 0 ? 3 : 4);
    theta(0) = coef(0);
    theta(1) = coef(1);
    theta(2) = best_p;
    if (order == 1) theta(3) = coef(2);
    return theta;
}

/// Linear-prediction seed for equally spaced m. With step s and P = p^s the
/// first differences v_k of the curve satisfy v_{k+1} = P v_k (order 0) or
/// v_{k+2} = 2P v_{k+1} - P^2 v_k (order 1), both linear in the unknowns.
inline std::optional<Eigen::VectorXd> prony_start(const FitData& data, int order) {
    const std::size_t n = data.m.size();
    const double step = data.m[1] - data.m[0];
    for (std::size_t i = 2; i < n; ++i) {
        if (std::abs(data.m[i] - data.m[i - 1] - step) > 1e-9) return std::nullopt;
    }
    std::vector<double> v(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) v[i] = data.y[i + 1] - data.y[i];
    double big_p;
    if (order == 0) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k + 1 < v.size(); ++k) {
            num += v[k + 1] * v[k];
            den += v[k] * v[k];
        }
        if (den <= 0.0) return std::nullopt;
        big_p = num / den;
    } else {
        if (v.size() < 4) return std::nullopt;
        Eigen::MatrixXd x(static_cast<Eigen::Index>(v.size() - 2), 2);
        Eigen::VectorXd y(x.rows());
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
            x(k, 0) = v[k + 1];
            x(k, 1) = v[k];
            y(k) = v[k + 2];
        }
        big_p = 0.5 * x.colPivHouseholderQr().solve(y)(0);
    }
    if (!(big_p > 0.0) || !std::isfinite(big_p)) return std::nullopt;
    const double p = std::min(std::pow(big_p, 1.0 / step), 1.0);
    Eigen::VectorXd coef;
    profile_cost(data, p, order, coef);
    Eigen::VectorXd theta(order == 0 ? 3 : 4);
    theta(0) = coef(0);
    theta(1) = coef(1);
    theta(2) = p;
    if (order == 1) theta(3) = coef(2);
    return theta;
}

inline std::vector<Eigen::VectorXd> seeds(const FitData& data, int order, std::vector<Eigen::VectorXd> extra) {
    extra.push_back(profile_start(data, order));
    if (auto prony = prony_start(data, order)) extra.push_back(*prony);
    return extra;
}

/// Lowest-cost parameter vector among the seeds.
template <class Model>
Eigen::VectorXd best_start(const Model& model, const FitData& data, const std::vector<Eigen::VectorXd>& seeds) {
    Eigen::VectorXd best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& t : seeds) {
        double c = 0.0;
        for (std::size_t i = 0; i < data.m.size(); ++i) {
            const double r = data.sqrt_w[i] * (data.y[i] - model(data.m[i], t));
            c += r * r;
        }
        if (c < best_cost) {
            best_cost = c;
            best = t;
        }
    }
    return best;
}

inline bool is_flat(const FitData& data) {
    const auto [lo, hi] = std::minmax_element(data.y.begin(), data.y.end());
    return *hi - *lo <= 1e-12;
}

inline void finish_fit(FitResult& fit, const FitData& data, int d) {
    fit.per_point_residuals.clear();
    double ss = 0.0;
    for (std::size_t i = 0; i < data.m.size(); ++i) {
        const double res = data.y[i] - fit.evaluate(data.m[i]);
        fit.per_point_residuals.push_back(res);
        ss += res * res;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(data.m.size()));
    fit.r = error_rate(fit.p, d);
}

}  // namespace detail

/// Weighted fit of A p^m + B. Weights are 1/stderr^2 when every point has a
/// positive stderr, uniform otherwise. Points are sorted by m first, so the
/// result does not depend on their input order.
inline FitResult fit_zeroth(const DecayCurve& curve, int d, const FitOptions& opts = {}) {
    const auto data = detail::prepare_fit_data(curve, 3);
    const auto model = [](double m, const Eigen::VectorXd& t) { return model_zeroth(m, t(0), t(1), t(2)); };
    FitResult fit;
    fit.order = 0;
    if (detail::is_flat(data)) {
        // p is indeterminate; report the p = 1 representative and flag it.
        fit.A = 0.0;
        fit.B = data.y.front();
        fit.p = 1.0;
        fit.converged = false;
        detail::finish_fit(fit, data, d);
        return fit;
    }
    const Eigen::VectorXd init =
        detail::best_start(model, data, detail::seeds(data, 0, {detail::initial_zeroth(data)}));
    const auto out = detail::levenberg_marquardt(model, data, init, 2, opts);
    fit.A = out.theta(0);
    fit.B = out.theta(1);
    fit.p = out.theta(2);
    fit.converged = out.converged;
    fit.iterations = out.iterations;
    detail::finish_fit(fit, data, d);
    return fit;
}

/// Weighted fit of A p^m + B + G (m-1) p^(m-2). Seeds: the zeroth-order fit
/// with G = 0, the minimum of the cost profiled over p (the model is linear
/// in A, B and G at fixed p), and a linear-prediction estimate when the m
/// values are equally spaced. The G and p directions are nearly collinear,
/// so a local method started at G = 0 alone tends to stall.
inline FitResult fit_first(const DecayCurve& curve, int d, const FitOptions& opts = {}) {
    const auto data = detail::prepare_fit_data(curve, 5);
    const FitResult zeroth = fit_zeroth(curve, d, opts);
    const auto model = [](double m, const Eigen::VectorXd& t) { return model_first(m, t(0), t(1), t(2), t(3)); };
    FitResult fit;
    fit.order = 1;
    if (detail::is_flat(data)) {
        fit.A = 0.0;
        fit.B = data.y.front();
        fit.p = 1.0;
        fit.G = 0.0;
        fit.converged = false;
        detail::finish_fit(fit, data, d);
        return fit;
    }
    Eigen::VectorXd seed(4);
    seed << zeroth.A, zeroth.B, zeroth.p, 0.0;
    const Eigen::VectorXd init = detail::best_start(model, data, detail::seeds(data, 1, {seed}));
    const auto out = detail::levenberg_marquardt(model, data, init, 2, opts);
    fit.A = out.theta(0);
    fit.B = out.theta(1);
    fit.p = out.theta(2);
    fit.G = out.theta(3);
    fit.converged = out.converged;
    fit.iterations = out.iterations;
    detail::finish_fit(fit, data, d);
    return fit;
}

}  // namespace rbench

#endif  // RBENCH_FIT_HPP
