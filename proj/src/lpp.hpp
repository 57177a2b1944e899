// Last-passage percolation: plain rectangles, and the cylindric environment
// whose point-to-point value matches the rightmost particle of the pushTASEP
// dynamics in law.
//
// Cylinder geometry. The environment lives on the quotient of the quadrant
// {x, y >= 1} by the shift (x, y) ~ (x + N, y - T): an infinite periodic
// strip tiled by N x T fundamental domains. Lifted to the quadrant, cell
// (x, y) carries copy index k(x,y) = floor((x-1)/N) + floor((y-1)/T), which
// is invariant under the shift, and cells related by the shift hold the SAME
// random weight (the field is the pullback from the quotient). There are
// therefore exactly N*T independent weights per copy index, stored once.
// A monotone (right/down) path never meets an identified pair twice: the
// shift strictly increases x and strictly decreases y, while along a path
// both coordinates are non-decreasing. Copy k weights are iid Geo(u^2 q^k)
// in the P(w >= s) = z^s sense — geometrically damped in k, which is what
// makes the truncation to k <= K certifiable.

#pragma once

#include "prec.hpp"
#include "rng.hpp"
#include "sampling.hpp"

#include <cstdint>
#include <vector>

namespace qpt {

// ---------------------------------------------------------------------------
// Rectangles

struct RectEnvironment {
    long rows = 0, cols = 0;
    std::vector<long> w;  // row-major, rows*cols entries, all >= 0
    long at(long r, long c) const { return w[std::size_t(r * cols + c)]; }
};

// Max over monotone (right/down) paths from (0,0) to (rows-1, cols-1) of the
// sum of weights on the path.
long rect_lpp(const RectEnvironment& env);

// Shape of the RSK P-tableau of the weight matrix (row-insertion on the
// generalized permutation). Row lengths, weakly decreasing.
std::vector<long> rsk_shape(const RectEnvironment& env);

// iid Geo(z): P(w >= k) = z^k. The classical corner-growth environment.
RectEnvironment sample_rect_geo(long rows, long cols, double z, RngStream& rng);

// ---------------------------------------------------------------------------
// Cylinder

struct CylinderEnvironment {
    long N = 0, T = 0;  // fundamental domain (x-extent N, y-extent T)
    long K = 0;         // copies 0..K carry weights; beyond is zeroed
    double trunc_bound = 0.0;  // P(any zeroed cell was actually nonzero) bound
    // copies[k] is the k-th fundamental domain, row-major x-major:
    // entry (i, j) at copies[k][i*T + j], 0 <= i < N, 0 <= j < T.
    std::vector<std::vector<long>> copies;
};

// Smallest K with the certified truncation bound below eps.
long cylinder_copy_count(long N, long T, double u, double q, double eps);

CylinderEnvironment sample_cylinder(long N, long T, double u, double q, double eps,
                                    RngStream& rng);

// Max over monotone paths started at (1,1), over the whole truncated region.
long cylinder_lpp(const CylinderEnvironment& env);

// Chain of full rectangles along the even diagonal copies: their passage
// times concatenate into one admissible path, so the sum is a pathwise lower
// bound for cylinder_lpp. Returns (sum of diagonal rectangle values, number
// of rectangles used).
std::pair<long, long> diagonal_lower_bound(const CylinderEnvironment& env);

}  // namespace qpt
