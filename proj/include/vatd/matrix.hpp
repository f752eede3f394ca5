#pragma once

#include <cstddef>
#include <vector>

namespace vatd {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Everything in this project is small
// enough that a flat vector plus hand-written loops beats pulling in a
// linear algebra dependency.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double* operator[](int r) { return a.data() + static_cast<size_t>(r) * cols; }
    const double* operator[](int r) const { return a.data() + static_cast<size_t>(r) * cols; }

    size_t size() const { return a.size(); }
};

// out = M x
void matvec(const Matrix& m, const Vec& x, Vec& out);

// out = M^T x
void matvec_t(const Matrix& m, const Vec& x, Vec& out);

// M += scale * u v^T
void add_outer(Matrix& m, const Vec& u, const Vec& v, double scale);

// y += scale * x
void axpy(Vec& y, const Vec& x, double scale);

double dot(const double* x, const double* y, int n);
double dot(const Vec& x, const Vec& y);

}  // namespace vatd
