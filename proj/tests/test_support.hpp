#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ammi/markov.hpp"
#include "ammi/tensor.hpp"

namespace ammi::test {

inline double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max({std::fabs(want), std::fabs(got), 1e-12});
}

// Central finite differences of a scalar function of one tensor, compared
// coordinate by coordinate against an analytic gradient. Coordinates where
// both sides are below `dead` are treated as matching zeros.
inline double max_grad_rel_err(const std::function<double(const nn::Tensor&)>& f,
                               const nn::Tensor& at, const nn::Tensor& analytic,
                               double step = 1e-4, double dead = 1e-8) {
    double worst = 0.0;
    for (size_t i = 0; i < at.v.size(); ++i) {
        nn::Tensor hi = at, lo = at;
        hi.v[i] += step;
        lo.v[i] -= step;
        double fd = (f(hi) - f(lo)) / (2.0 * step);
        double ad = analytic.v[i];
        if (std::fabs(fd) < dead && std::fabs(ad) < dead) continue;
        worst = std::max(worst, std::fabs(fd - ad) / std::max({std::fabs(fd), std::fabs(ad)}));
    }
    return worst;
}

// Context integer at 0-based position i of a code integer (bit k = bit k of
// the code), matching the table indexing convention.
inline int code_context(uint32_t code, int i, int order) {
    int c = 0;
    for (int j = 1; j <= order; ++j) {
        int pos = i - j;
        if (pos < 0) break;
        c |= static_cast<int>((code >> pos) & 1u) << (j - 1);
    }
    return c;
}

}  // namespace ammi::test
