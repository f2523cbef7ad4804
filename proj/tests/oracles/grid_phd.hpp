#pragma once

#include <cmath>
#include <numbers>
#include <vector>

// Exact quadrature recursion of the multi-target intensity on a 1-D grid:
// birth terms seeded from last step's observations, survivor convolution with
// the motion kernel, then the collapsed multi-observation update. Node j is
// the center of cell j; integrals are midpoint sums.

namespace oracle {

inline double gauss(double x, double sigma) {
    return std::exp(-0.5 * (x / sigma) * (x / sigma)) /
           (sigma * std::sqrt(2.0 * std::numbers::pi));
}

struct GridPhd {
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;
    std::vector<double> density;

    static GridPhd zeros(double lo, double hi, int n) {
        GridPhd g;
        g.lo = lo;
        g.hi = hi;
        g.n = n;
        g.density.assign(static_cast<size_t>(n), 0.0);
        return g;
    }

    double dx() const { return (hi - lo) / n; }
    double x(int j) const { return lo + (j + 0.5) * dx(); }

    double mass() const {
        double m = 0.0;
        for (double v : density) m += v;
        return m * dx();
    }

    /// prior = p_b * sum_i birth_i + (1 - p_d) * (motion kernel * posterior)
    void predict(const std::vector<double>& prev_reports, double p_b, double p_d,
                 double sigma_birth, double sigma_w) {
        std::vector<double> prior(static_cast<size_t>(n), 0.0);
        const double cell = dx();
        for (int j = 0; j < n; ++j) {
            double b = 0.0;
            for (double z : prev_reports) b += gauss(x(j) - z, sigma_birth);
            double m = 0.0;
            for (int k = 0; k < n; ++k)
                m += gauss(x(j) - x(k), sigma_w) * density[static_cast<size_t>(k)];
            prior[static_cast<size_t>(j)] = p_b * b + (1.0 - p_d) * m * cell;
        }
        density = std::move(prior);
    }

    /// posterior = sum_i (L_i * prior) / C_i + p_fn * prior
    void update(const std::vector<double>& reports, double sigma_obs, double p_fn) {
        const double cell = dx();
        std::vector<double> posterior(static_cast<size_t>(n), 0.0);
        for (int j = 0; j < n; ++j)
            posterior[static_cast<size_t>(j)] = p_fn * density[static_cast<size_t>(j)];
        for (double z : reports) {
            double c = 0.0;
            for (int j = 0; j < n; ++j)
                c += gauss(z - x(j), sigma_obs) * density[static_cast<size_t>(j)];
            c *= cell;
            if (!(c > 0.0)) continue;
            for (int j = 0; j < n; ++j)
                posterior[static_cast<size_t>(j)] +=
                    gauss(z - x(j), sigma_obs) * density[static_cast<size_t>(j)] / c;
        }
        density = std::move(posterior);
    }
};

}  // namespace oracle
