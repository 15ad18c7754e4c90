#pragma once

#include <array>

#include "core/common.hpp"

namespace gva {

// Real spherical-harmonic basis up to degree 3 in the usual splatting
// ordering, evaluated at a unit direction. n_coeffs = (degree+1)^2.
constexpr int kMaxShDegree = 3;
constexpr int kMaxShCoeffs = 16;

inline constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

void sh_basis(const Vec3& dir, int degree, double* out);

// d basis[i] / d dir, rows indexed like sh_basis output.
void sh_basis_grad(const Vec3& dir, int degree, Vec3* out);

// Color decode shared by cloud and renderer: channel = 0.5 + sum_i f[i*3+ch] *
// basis[i], clamped to [0,1]. `f` holds (degree+1)^2 coefficient triples.
Vec3 sh_color(const double* f, int degree, const Vec3& dir);

// Reverse-mode partner of sh_color. Channels that were clamped in the forward
// pass propagate zero gradient. d_f must hold 3*(degree+1)^2 doubles and is
// accumulated into; returns the gradient w.r.t. dir (accumulated into d_dir).
void sh_color_backward(const double* f, int degree, const Vec3& dir, const Vec3& d_rgb,
                       double* d_f, Vec3& d_dir);

}  // namespace gva
