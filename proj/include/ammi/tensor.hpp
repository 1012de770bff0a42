#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ammi::nn {

// Dense row-major 2-D buffer of doubles. Vectors are 1 x n or n x 1.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c, double fill = 0.0)
        : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

    static Tensor row(std::vector<double> vals) {
        Tensor t;
        t.rows = 1;
        t.cols = static_cast<int>(vals.size());
        t.v = std::move(vals);
        return t;
    }

    static Tensor scalar(double x) {
        Tensor t(1, 1);
        t.v[0] = x;
        return t;
    }

    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

// Batch of sparse rows; the only non-dense input the graph accepts. Each row
// is a sorted (column, value) list over a logical width of `cols`.
struct SparseRows {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<std::pair<int, double>>> items;
};

}  // namespace ammi::nn
