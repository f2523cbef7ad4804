#include "terratrack/gmm.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "terratrack/rng.hpp"

namespace terratrack {

namespace {

constexpr double kCovFloor = 1.0;        // m^2, per eigenvalue
constexpr double kDegenerateWeight = 1e-6;
constexpr double kTinyDensity = 1e-300;

struct Cov2 {
    double xx, xy, yy;
};

/// Floors both eigenvalues of a symmetric 2x2 matrix. Returns true if the
/// floor changed anything.
bool floor_eigenvalues(Cov2& c) {
    const double mean = 0.5 * (c.xx + c.yy);
    const double half_diff = 0.5 * (c.xx - c.yy);
    const double disc = std::sqrt(half_diff * half_diff + c.xy * c.xy);
    const double l1 = mean + disc;
    const double l2 = mean - disc;
    if (l1 >= kCovFloor && l2 >= kCovFloor) return false;

    if (std::abs(c.xy) < 1e-30) {
        c.xx = std::max(c.xx, kCovFloor);
        c.yy = std::max(c.yy, kCovFloor);
        c.xy = 0.0;
        return true;
    }
    // Eigenvector for l1 and its orthogonal complement.
    double vx = c.xy, vy = l1 - c.xx;
    const double norm = std::sqrt(vx * vx + vy * vy);
    vx /= norm;
    vy /= norm;
    const double f1 = std::max(l1, kCovFloor);
    const double f2 = std::max(l2, kCovFloor);
    c.xx = f1 * vx * vx + f2 * vy * vy;
    c.xy = (f1 - f2) * vx * vy;
    c.yy = f1 * vy * vy + f2 * vx * vx;
    return true;
}

struct GaussEval {
    double mx, my, inv_xx, inv_xy, inv_yy, norm;

    static GaussEval from(double mx, double my, const Cov2& c) {
        const double det = c.xx * c.yy - c.xy * c.xy;
        const double inv_det = 1.0 / det;
        return {mx, my, c.yy * inv_det, -c.xy * inv_det, c.xx * inv_det,
                1.0 / (kTwoPi * std::sqrt(det))};
    }

    double operator()(double x, double y) const {
        const double dx = x - mx;
        const double dy = y - my;
        const double q = dx * dx * inv_xx + 2.0 * dx * dy * inv_xy + dy * dy * inv_yy;
        return norm * std::exp(-0.5 * q);
    }
};

size_t count_distinct_positions(const WeightedCloud& cloud) {
    std::unordered_set<uint64_t> seen;
    seen.reserve(cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) {
        if (!(cloud.weights[i] > 0.0)) continue;
        uint64_t hx, hy;
        double x = cloud.states[i].x, y = cloud.states[i].y;
        std::memcpy(&hx, &x, 8);
        std::memcpy(&hy, &y, 8);
        seen.insert(rng::splitmix64(hx) ^ hy);
    }
    return seen.size();
}

/// Index of the positive-weight particle farthest (min squared distance) from
/// the given means; ties resolve to the lowest index.
size_t farthest_particle(const WeightedCloud& cloud,
                         const std::vector<GmComponent>& comps, size_t n_means) {
    size_t best = 0;
    double best_d = -1.0;
    for (size_t i = 0; i < cloud.size(); ++i) {
        if (!(cloud.weights[i] > 0.0)) continue;
        double d = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < n_means; ++c) {
            const double dx = cloud.states[i].x - comps[c].mean_x;
            const double dy = cloud.states[i].y - comps[c].mean_y;
            d = std::min(d, dx * dx + dy * dy);
        }
        if (d > best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

GaussianMixture fit(const WeightedCloud& cloud, int k, uint64_t stream_key,
                    int max_iter, double tol, FitTrace* trace) {
    if (k < 1) throw std::invalid_argument("gmm::fit: k must be >= 1");
    const size_t n = cloud.size();
    double total_w = 0.0;
    for (double w : cloud.weights) {
        if (w < 0.0) throw std::invalid_argument("gmm::fit: negative weight");
        total_w += w;
    }
    if (!(total_w > 0.0))
        throw std::invalid_argument("gmm::fit: cloud has no positive weight");
    if (static_cast<size_t>(k) > count_distinct_positions(cloud))
        throw std::invalid_argument(
            "gmm::fit: k exceeds the number of distinct particle positions");

    // Spherical starting covariance from the overall spread.
    double cx = 0.0, cy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cx += cloud.weights[i] * cloud.states[i].x;
        cy += cloud.weights[i] * cloud.states[i].y;
    }
    cx /= total_w;
    cy /= total_w;
    double spread = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = cloud.states[i].x - cx;
        const double dy = cloud.states[i].y - cy;
        spread += cloud.weights[i] * (dx * dx + dy * dy);
    }
    const double init_var = std::max(kCovFloor, spread / total_w / (2.0 * k));

    // Farthest-point initialization: the first mean is a weight-proportional
    // draw, subsequent means maximize the distance to those already chosen.
    std::vector<GmComponent> comps(static_cast<size_t>(k));
    {
        rng::Substream rs(stream_key, 0, 0);
        double target = rs.uniform() * total_w;
        size_t first = n - 1;
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            acc += cloud.weights[i];
            if (acc > target) {
                first = i;
                break;
            }
        }
        comps[0].mean_x = cloud.states[first].x;
        comps[0].mean_y = cloud.states[first].y;
        for (size_t c = 1; c < comps.size(); ++c) {
            const size_t idx = farthest_particle(cloud, comps, c);
            comps[c].mean_x = cloud.states[idx].x;
            comps[c].mean_y = cloud.states[idx].y;
        }
        for (auto& comp : comps) {
            comp.weight = 1.0 / static_cast<double>(k);
            comp.cov_xx = init_var;
            comp.cov_xy = 0.0;
            comp.cov_yy = init_var;
        }
    }

    std::vector<double> resp(n * comps.size());
    std::vector<double> density_sum(n);
    std::vector<char> reinitialized(comps.size(), 0);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        const size_t m = comps.size();
        std::vector<GaussEval> evals;
        evals.reserve(m);
        for (const auto& c : comps)
            evals.push_back(GaussEval::from(c.mean_x, c.mean_y,
                                            {c.cov_xx, c.cov_xy, c.cov_yy}));

        // E-step. Forking a team per iteration only pays off for big clouds.
        const int64_t nn = static_cast<int64_t>(n);
        const bool parallel_estep = n >= 16384;
#pragma omp parallel for schedule(static) if (parallel_estep)
        for (int64_t i = 0; i < nn; ++i) {
            const double x = cloud.states[i].x;
            const double y = cloud.states[i].y;
            double sum = 0.0;
            for (size_t c = 0; c < m; ++c) {
                const double d = comps[c].weight * evals[c](x, y);
                resp[i * m + c] = d;
                sum += d;
            }
            density_sum[i] = sum;
            if (sum > 0.0) {
                const double inv = 1.0 / sum;
                for (size_t c = 0; c < m; ++c) resp[i * m + c] *= inv;
            } else {
                // All densities underflowed: hard-assign to the nearest mean.
                size_t best = 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (size_t c = 0; c < m; ++c) {
                    const double dx = x - comps[c].mean_x;
                    const double dy = y - comps[c].mean_y;
                    const double d = dx * dx + dy * dy;
                    if (d < best_d) {
                        best_d = d;
                        best = c;
                    }
                }
                for (size_t c = 0; c < m; ++c) resp[i * m + c] = (c == best) ? 1.0 : 0.0;
            }
        }
        double ll = 0.0;
        for (size_t i = 0; i < n; ++i)
            ll += cloud.weights[i] * std::log(std::max(density_sum[i], kTinyDensity));

        // M-step.
        bool floored = false;
        bool structural_change = false;
        for (size_t c = 0; c < m; ++c) {
            double wsum = 0.0, sx = 0.0, sy = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double wr = cloud.weights[i] * resp[i * m + c];
                wsum += wr;
                sx += wr * cloud.states[i].x;
                sy += wr * cloud.states[i].y;
            }
            comps[c].weight = wsum / total_w;
            if (wsum > 0.0) {
                comps[c].mean_x = sx / wsum;
                comps[c].mean_y = sy / wsum;
                double cxx = 0.0, cxy = 0.0, cyy = 0.0;
                for (size_t i = 0; i < n; ++i) {
                    const double wr = cloud.weights[i] * resp[i * m + c];
                    const double dx = cloud.states[i].x - comps[c].mean_x;
                    const double dy = cloud.states[i].y - comps[c].mean_y;
                    cxx += wr * dx * dx;
                    cxy += wr * dx * dy;
                    cyy += wr * dy * dy;
                }
                Cov2 cov{cxx / wsum, cxy / wsum, cyy / wsum};
                floored |= floor_eigenvalues(cov);
                comps[c].cov_xx = cov.xx;
                comps[c].cov_xy = cov.xy;
                comps[c].cov_yy = cov.yy;
            }
        }

        // Degenerate components: one reseed at the farthest particle, then drop.
        for (size_t c = 0; c < comps.size();) {
            if (comps[c].weight >= kDegenerateWeight) {
                ++c;
                continue;
            }
            structural_change = true;
            if (!reinitialized[c]) {
                reinitialized[c] = 1;
                const size_t idx = farthest_particle(cloud, comps, comps.size());
                comps[c].mean_x = cloud.states[idx].x;
                comps[c].mean_y = cloud.states[idx].y;
                comps[c].cov_xx = init_var;
                comps[c].cov_xy = 0.0;
                comps[c].cov_yy = init_var;
                comps[c].weight = 1.0 / static_cast<double>(comps.size());
                if (trace) ++trace->reinits;
                ++c;
            } else {
                comps.erase(comps.begin() + static_cast<long>(c));
                reinitialized.erase(reinitialized.begin() + static_cast<long>(c));
                if (trace) ++trace->dropped_components;
            }
        }
        {
            double wsum = 0.0;
            for (const auto& comp : comps) wsum += comp.weight;
            for (auto& comp : comps) comp.weight /= wsum;
        }

        if (trace) {
            trace->log_likelihood.push_back(ll);
            if (floored) ++trace->floored_iterations;
        }
        // EM never decreases the objective unless the floor or a reseed
        // intervened; checked in debug builds.
        if (!floored && !structural_change)
            assert(ll >= prev_ll - 1e-9 * (std::abs(prev_ll) + 1.0));

        if (iter > 0 && !structural_change &&
            std::abs(ll - prev_ll) <= tol * (std::abs(prev_ll) + 1e-12))
            break;
        prev_ll = ll;
    }

    // Speed and heading summaries from a hard assignment.
    {
        const size_t m = comps.size();
        std::vector<GaussEval> evals;
        evals.reserve(m);
        for (const auto& c : comps)
            evals.push_back(GaussEval::from(c.mean_x, c.mean_y,
                                            {c.cov_xx, c.cov_xy, c.cov_yy}));
        std::vector<double> wsum(m, 0.0), speed(m, 0.0), hsin(m, 0.0), hcos(m, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double x = cloud.states[i].x;
            const double y = cloud.states[i].y;
            size_t best = 0;
            double best_d = -1.0;
            for (size_t c = 0; c < m; ++c) {
                const double d = comps[c].weight * evals[c](x, y);
                if (d > best_d) {
                    best_d = d;
                    best = c;
                }
            }
            const double w = cloud.weights[i];
            wsum[best] += w;
            speed[best] += w * cloud.states[i].speed;
            hsin[best] += w * std::sin(cloud.states[i].heading);
            hcos[best] += w * std::cos(cloud.states[i].heading);
        }
        for (size_t c = 0; c < m; ++c) {
            if (wsum[c] > 0.0) {
                comps[c].mean_speed = speed[c] / wsum[c];
                comps[c].mean_heading = std::atan2(hsin[c], hcos[c]);
            }
        }
    }

    GaussianMixture mixture;
    mixture.components = std::move(comps);
    return mixture;
}

std::vector<Peak> extract_peaks(const GaussianMixture& mixture, double expected_count) {
    std::vector<Peak> peaks;
    peaks.reserve(mixture.components.size());
    for (const auto& c : mixture.components)
        peaks.push_back({c.mean_x, c.mean_y, c.weight * expected_count});
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.mass > b.mass; });
    return peaks;
}

int choose_k(double expected_count) {
    if (!(expected_count > 1e-3)) return 0;
    return static_cast<int>(std::max(1ll, std::llround(expected_count)));
}

}  // namespace terratrack
