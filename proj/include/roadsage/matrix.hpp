#pragma once

#include <cstddef>
#include <vector>

namespace roadsage {

// Minimal dense row-major double matrix; the only linear algebra container
// the network needs.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return v.size(); }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
    bool all_finite() const;
};

// C (+)= A * B^T;  A: n x k, B: m x k, C: n x m.
void gemm_nt(const Mat& a, const Mat& b, Mat& c, bool accumulate = false);
// C (+)= A^T * B;  A: n x k, B: n x m, C: k x m.
void gemm_tn(const Mat& a, const Mat& b, Mat& c, bool accumulate = false);
// C (+)= A * B;    A: n x k, B: k x m, C: n x m.
void gemm_nn(const Mat& a, const Mat& b, Mat& c, bool accumulate = false);

}  // namespace roadsage
