#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kgsol::detail {

/// Solve A x = b in place by Gaussian elimination with partial pivoting.
/// A is n x n row-major. Returns false when the matrix is singular.
inline bool solve_dense(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(A[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(A[static_cast<std::size_t>(r) * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < 1e-300) return false;
        if (piv != col) {
            for (int k = col; k < n; ++k)
                std::swap(A[static_cast<std::size_t>(piv) * n + k], A[static_cast<std::size_t>(col) * n + k]);
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        const double inv = 1.0 / A[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = A[static_cast<std::size_t>(r) * n + col] * inv;
            if (f == 0.0) continue;
            for (int k = col; k < n; ++k)
                A[static_cast<std::size_t>(r) * n + k] -= f * A[static_cast<std::size_t>(col) * n + k];
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<std::size_t>(r)];
        for (int k = r + 1; k < n; ++k) s -= A[static_cast<std::size_t>(r) * n + k] * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(r)] = s / A[static_cast<std::size_t>(r) * n + r];
    }
    return true;
}

/// Thomas algorithm for a constant-coefficient tridiagonal system
/// (diag, off) with Dirichlet ends; rhs and solution have length n.
inline std::vector<double> solve_tridiag_const(double diag, double off, const std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    std::vector<double> c(n, 0.0), d(n, 0.0), x(n, 0.0);
    double denom = diag;
    if (std::abs(denom) < 1e-300) throw std::runtime_error("tridiagonal solve: zero pivot");
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag - off * c[i - 1];
        if (std::abs(denom) < 1e-300) throw std::runtime_error("tridiagonal solve: zero pivot");
        c[i] = off / denom;
        d[i] = (rhs[i] - off * d[i - 1]) / denom;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

}  // namespace kgsol::detail
