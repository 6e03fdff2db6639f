#include "pfeddst/matrix.hpp"

#include "pfeddst/error.hpp"

#include <algorithm>
#include <cmath>

namespace pfeddst {

DenseMatrix::DenseMatrix(int r, int c, double v)
    : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), v) {
    if (r < 0 || c < 0) throw ShapeError("DenseMatrix: negative dimension");
}

void DenseMatrix::fill(double v) { std::fill(data.begin(), data.end(), v); }

bool DenseMatrix::all_finite() const {
    for (double x : data)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

namespace {

[[noreturn]] void shape_fail(const std::string& what, const DenseMatrix& a, const DenseMatrix& b,
                             const char* op) {
    throw ShapeError((what.empty() ? std::string("matmul") : what) + ": incompatible shapes " +
                     std::to_string(a.rows) + "x" + std::to_string(a.cols) + " " + op + " " +
                     std::to_string(b.rows) + "x" + std::to_string(b.cols));
}

} // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, const std::string& what) {
    if (a.cols != b.rows) shape_fail(what, a, b, "*");
    DenseMatrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

DenseMatrix matmul_transA(const DenseMatrix& a, const DenseMatrix& b, const std::string& what) {
    if (a.rows != b.rows) shape_fail(what, a, b, "^T*");
    DenseMatrix c(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        for (int i = 0; i < a.cols; ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) c(i, j) += aki * b(k, j);
        }
    }
    return c;
}

DenseMatrix matmul_transB(const DenseMatrix& a, const DenseMatrix& b, const std::string& what) {
    if (a.cols != b.cols) shape_fail(what, a, b, "*^T");
    DenseMatrix c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < b.rows; ++j) {
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
            c(i, j) = s;
        }
    }
    return c;
}

void add_row_bias(DenseMatrix& m, const Vector& bias) {
    if (static_cast<int>(bias.size()) != m.cols)
        throw ShapeError("add_row_bias: bias size " + std::to_string(bias.size()) +
                         " != cols " + std::to_string(m.cols));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m(i, j) += bias[static_cast<std::size_t>(j)];
}

Vector column_sums(const DenseMatrix& m) {
    Vector s(static_cast<std::size_t>(m.cols), 0.0);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) s[static_cast<std::size_t>(j)] += m(i, j);
    return s;
}

} // namespace pfeddst
