#pragma once

#if defined(__FAST_MATH__)
#error "compensated accumulation is broken under -ffast-math"
#endif

#include <cmath>

namespace abfield {

// Neumaier variant of Kahan summation. Accumulation order is fixed by the
// caller; summing the same values in the same order is bit-reproducible.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

} // namespace abfield
