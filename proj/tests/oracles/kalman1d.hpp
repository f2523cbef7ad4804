#pragma once

#include <vector>

// Exact conjugate recursion for the 1-D linear-Gaussian model
//   x_t = x_{t-1} + w,  w ~ N(0, q)
//   z_t = x_t + v,      v ~ N(0, r)
// starting from x_0 ~ N(m0, p0). Reference for the bootstrap filter.

namespace oracle {

struct Kalman1D {
    double mean;
    double var;
    double q;  // process variance
    double r;  // observation variance

    void predict() { var += q; }

    void update(double z) {
        const double gain = var / (var + r);
        mean += gain * (z - mean);
        var *= (1.0 - gain);
    }
};

}  // namespace oracle
