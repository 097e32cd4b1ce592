#pragma once

#include <array>
#include <vector>

namespace wmkit {

// One-level orthonormal Haar LL subband of a plane (h, w even):
// ll[i][j] = (x[2i][2j] + x[2i][2j+1] + x[2i+1][2j] + x[2i+1][2j+1]) / 2.
void haar_ll_forward(const std::vector<double>& x, int h, int w, std::vector<double>& ll);

// Adjoint/inverse restricted to the LL subband: distributes dll[i][j]/2 onto
// the four pixels of block (i,j). With scale=1 this is both the exact inverse
// update for an LL-only change and the transpose of haar_ll_forward.
void haar_ll_adjoint_add(std::vector<double>& x, int h, int w, const std::vector<double>& dll);

// Orthonormal 8-point DCT-II basis matrix: row u holds the basis vector.
// B[0][j] = sqrt(1/8), B[u][j] = sqrt(2/8) * cos((2j+1)u*pi/16).
const std::array<std::array<double, 8>, 8>& dct8_basis();

// Single 2-D DCT coefficient (u,v) of an 8x8 block laid out row-major in
// `blk` with row stride `stride`.
double dct8_coeff(const double* blk, int stride, int u, int v);

// Adds delta * (basis_u ⊗ basis_v) to the block: the exact spatial-domain
// update for changing coefficient (u,v) by delta, and the adjoint of
// dct8_coeff.
void dct8_coeff_adjoint_add(double* blk, int stride, int u, int v, double delta);

}  // namespace wmkit
