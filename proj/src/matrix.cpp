#include "vatd/matrix.hpp"

#include <cassert>

namespace vatd {

void matvec(const Matrix& m, const Vec& x, Vec& out) {
    assert(static_cast<int>(x.size()) == m.cols);
    out.assign(static_cast<size_t>(m.rows), 0.0);
    for (int r = 0; r < m.rows; ++r) {
        out[static_cast<size_t>(r)] = dot(m[r], x.data(), m.cols);
    }
}

void matvec_t(const Matrix& m, const Vec& x, Vec& out) {
    assert(static_cast<int>(x.size()) == m.rows);
    out.assign(static_cast<size_t>(m.cols), 0.0);
    for (int r = 0; r < m.rows; ++r) {
        const double xr = x[static_cast<size_t>(r)];
        if (xr == 0.0) continue;
        const double* row = m[r];
        for (int c = 0; c < m.cols; ++c) {
            out[static_cast<size_t>(c)] += xr * row[c];
        }
    }
}

void add_outer(Matrix& m, const Vec& u, const Vec& v, double scale) {
    assert(static_cast<int>(u.size()) == m.rows);
    assert(static_cast<int>(v.size()) == m.cols);
    for (int r = 0; r < m.rows; ++r) {
        const double ur = scale * u[static_cast<size_t>(r)];
        if (ur == 0.0) continue;
        double* row = m[r];
        for (int c = 0; c < m.cols; ++c) {
            row[c] += ur * v[static_cast<size_t>(c)];
        }
    }
}

void axpy(Vec& y, const Vec& x, double scale) {
    assert(y.size() == x.size());
    for (size_t i = 0; i < y.size(); ++i) {
        y[i] += scale * x[i];
    }
}

double dot(const double* x, const double* y, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s += x[i] * y[i];
    }
    return s;
}

double dot(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    return dot(x.data(), y.data(), static_cast<int>(x.size()));
}

}  // namespace vatd
