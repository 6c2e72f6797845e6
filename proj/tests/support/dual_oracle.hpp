#pragma once

// Brute-force maximizer of the soft-margin SVM dual for tiny problems.
// All but the last two coefficients run over a grid of step `step`; the last
// pair is then fixed by the equality constraint up to one free coordinate,
// which is maximized exactly on its feasible interval.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace qksvm::oracle {

struct DualOptimum {
    double objective = -std::numeric_limits<double>::infinity();
    std::vector<double> alphas;
};

inline double dual_value(const std::vector<double>& a, const std::vector<int>& y, const Eigen::MatrixXd& K) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lin += a[i];
        for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * y[i] * y[j] * K(i, j);
    }
    return lin - 0.5 * quad;
}

namespace detail {

struct DualSearch {
    const std::vector<int>& y;
    const Eigen::MatrixXd& K;
    double C;
    double step;
    std::size_t n;
    std::vector<double> a;
    // g[k] = sum over fixed i of a_i y_i K(i, k)
    std::vector<double> g;
    DualOptimum best;

    void leaf(double s, double lin, double quad) {
        const std::size_t p = n - 2, q = n - 1;
        // a_p = t, a_q = -y_q (s + y_p t) >= 0.
        const double yp = y[p], yq = y[q];
        double lo = 0.0, hi = C;
        // a_q = c0 + c1 t
        const double c0 = -yq * s, c1 = -yq * yp;
        auto bound = [&](double lo_aq, double hi_aq) {
            // lo_aq <= c0 + c1 t <= hi_aq
            const double t1 = (lo_aq - c0) / c1, t2 = (hi_aq - c0) / c1;
            lo = std::max(lo, std::min(t1, t2));
            hi = std::min(hi, std::max(t1, t2));
        };
        bound(0.0, C);
        if (lo > hi + 1e-12) return;
        hi = std::max(hi, lo);
        auto value = [&](double t) {
            const double aq = c0 + c1 * t;
            const double l = lin + t + aq;
            const double qv = quad + 2.0 * (t * yp * g[p] + aq * yq * g[q]) + t * t * K(p, p) + aq * aq * K(q, q) +
                              2.0 * t * aq * yp * yq * K(p, q);
            return l - 0.5 * qv;
        };
        std::vector<double> cands{lo, hi};
        // Stationary point of the 1-D quadratic.
        const double A = K(p, p) + c1 * c1 * K(q, q) + 2.0 * c1 * yp * yq * K(p, q);
        const double B = 1.0 + c1 - (yp * g[p] + c1 * yq * g[q]) -
                         (c0 * c1 * K(q, q) + c0 * yp * yq * K(p, q));
        if (A > 0) cands.push_back(std::clamp(B / A, lo, hi));
        for (double t : cands) {
            const double v = value(t);
            if (v > best.objective) {
                best.objective = v;
                best.alphas = a;
                best.alphas[p] = t;
                best.alphas[q] = c0 + c1 * t;
            }
        }
    }

    void recurse(std::size_t i, double s, double lin, double quad) {
        if (i == n - 2) {
            leaf(s, lin, quad);
            return;
        }
        const int steps = static_cast<int>(std::lround(C / step));
        for (int k = 0; k <= steps; ++k) {
            const double v = std::min(C, k * step);
            a[i] = v;
            // quad gains 2 v y_i g[i] + v^2 K_ii
            const double q2 = quad + 2.0 * v * y[i] * g[i] + v * v * K(i, i);
            for (std::size_t m = 0; m < n; ++m) g[m] += v * y[i] * K(i, m);
            recurse(i + 1, s + v * y[i], lin + v, q2);
            for (std::size_t m = 0; m < n; ++m) g[m] -= v * y[i] * K(i, m);
        }
        a[i] = 0.0;
    }
};

}  // namespace detail

// Requires n >= 2.
inline DualOptimum brute_force_dual(const Eigen::MatrixXd& K, const std::vector<int>& y, double C, double step) {
    detail::DualSearch s{y, K, C, step, y.size(), std::vector<double>(y.size(), 0.0), std::vector<double>(y.size(), 0.0), {}};
    s.recurse(0, 0.0, 0.0, 0.0);
    return s.best;
}

}  // namespace qksvm::oracle
