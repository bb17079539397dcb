#include "roadsage/matrix.hpp"

#include <cassert>
#include <cmath>

namespace roadsage {

bool Mat::all_finite() const {
    for (const double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void gemm_nt(const Mat& a, const Mat& b, Mat& c, bool accumulate) {
    assert(a.cols == b.cols);
    if (c.rows != a.rows || c.cols != b.rows) c = Mat(a.rows, b.rows);
    if (!accumulate) c.zero();
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
            ci[j] += s;
        }
    }
}

void gemm_tn(const Mat& a, const Mat& b, Mat& c, bool accumulate) {
    assert(a.rows == b.rows);
    if (c.rows != a.cols || c.cols != b.cols) c = Mat(a.cols, b.cols);
    if (!accumulate) c.zero();
    for (int n = 0; n < a.rows; ++n) {
        const double* an = a.row(n);
        const double* bn = b.row(n);
        for (int i = 0; i < a.cols; ++i) {
            const double s = an[i];
            if (s == 0.0) continue;
            double* ci = c.row(i);
            for (int j = 0; j < b.cols; ++j) ci[j] += s * bn[j];
        }
    }
}

void gemm_nn(const Mat& a, const Mat& b, Mat& c, bool accumulate) {
    assert(a.cols == b.rows);
    if (c.rows != a.rows || c.cols != b.cols) c = Mat(a.rows, b.cols);
    if (!accumulate) c.zero();
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int k = 0; k < a.cols; ++k) {
            const double s = ai[k];
            if (s == 0.0) continue;
            const double* bk = b.row(k);
            for (int j = 0; j < b.cols; ++j) ci[j] += s * bk[j];
        }
    }
}

}  // namespace roadsage
