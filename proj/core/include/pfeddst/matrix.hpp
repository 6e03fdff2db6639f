#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pfeddst {

/// Row-major dense matrix of 64-bit reals. All weight tensors live in this.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(int r, int c, double fill = 0.0);

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    const double& operator()(int r, int c) const {
        return data[static_cast<std::size_t>(r) * cols + c];
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
    void fill(double v);

    bool all_finite() const;
};

using Vector = std::vector<double>;

/// C = A * B. Throws ShapeError on mismatch; `what` names the call site.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, const std::string& what = "");

/// C = A^T * B.
DenseMatrix matmul_transA(const DenseMatrix& a, const DenseMatrix& b, const std::string& what = "");

/// C = A * B^T.
DenseMatrix matmul_transB(const DenseMatrix& a, const DenseMatrix& b, const std::string& what = "");

/// Adds bias to every row of m in place. bias size must equal m.cols.
void add_row_bias(DenseMatrix& m, const Vector& bias);

/// Column sums of m.
Vector column_sums(const DenseMatrix& m);

bool all_finite(const Vector& v);

} // namespace pfeddst
