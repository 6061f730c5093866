#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "kgsol/grid.hpp"

namespace kgsol {

struct TitchmarshCheck {
    int lhs = 0;  // last nonzero index of u * v
    int rhs = 0;  // last nonzero of u plus last nonzero of v
    bool equal = false;
};

namespace detail {

inline int last_nonzero(const std::vector<cplx>& u, double rel_tol) {
    double scale = 0.0;
    for (const auto& z : u) scale = std::max(scale, std::abs(z));
    if (scale == 0.0) return -1;
    for (int i = static_cast<int>(u.size()); i-- > 0;)
        if (std::abs(u[static_cast<std::size_t>(i)]) > rel_tol * scale) return i;
    return -1;
}

}  // namespace detail

/// Discrete counterpart of the Titchmarsh convolution identity
/// sup supp(u * v) = sup supp u + sup supp v.
inline TitchmarshCheck titchmarsh_support(const std::vector<cplx>& u, const std::vector<cplx>& v) {
    const double tol = 1e-14;
    const int lu = detail::last_nonzero(u, tol);
    const int lv = detail::last_nonzero(v, tol);
    if (lu < 0 || lv < 0)
        throw std::invalid_argument("titchmarsh_support: sequences must not be identically zero");

    std::vector<cplx> conv(u.size() + v.size() - 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) conv[i + j] += u[i] * v[j];

    TitchmarshCheck out;
    out.lhs = detail::last_nonzero(conv, tol);
    out.rhs = lu + lv;
    out.equal = out.lhs == out.rhs;
    return out;
}

}  // namespace kgsol
