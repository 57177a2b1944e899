#include "lpp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpt {

long rect_lpp(const RectEnvironment& env) {
    if (env.rows < 1 || env.cols < 1)
        throw std::domain_error("rect_lpp: empty rectangle");
    if (long(env.w.size()) != env.rows * env.cols)
        throw std::invalid_argument("rect_lpp: weight size mismatch");
    std::vector<long> dp(std::size_t(env.cols), 0);
    for (long r = 0; r < env.rows; ++r) {
        for (long c = 0; c < env.cols; ++c) {
            long best = dp[std::size_t(c)];                 // from above
            if (c > 0) best = std::max(best, dp[std::size_t(c - 1)]);  // from the left
            if (r == 0 && c == 0) best = 0;
            dp[std::size_t(c)] = best + env.at(r, c);
        }
    }
    return dp[std::size_t(env.cols - 1)];
}

std::vector<long> rsk_shape(const RectEnvironment& env) {
    // Row-insert the generalized permutation: for each row i (in order), the
    // letters j with multiplicity w(i,j), j ascending. Only the shape is
    // tracked, so bumping works on the rows of the P-tableau directly.
    std::vector<std::vector<long>> tableau;
    for (long r = 0; r < env.rows; ++r) {
        for (long c = 0; c < env.cols; ++c) {
            for (long rep = 0; rep < env.at(r, c); ++rep) {
                long v = c;
                for (std::size_t row = 0;; ++row) {
                    if (row == tableau.size()) {
                        tableau.push_back({v});
                        break;
                    }
                    auto& trow = tableau[row];
                    // bump the leftmost entry strictly greater than v
                    auto it = std::upper_bound(trow.begin(), trow.end(), v);
                    if (it == trow.end()) {
                        trow.push_back(v);
                        break;
                    }
                    std::swap(v, *it);
                }
            }
        }
    }
    std::vector<long> shape;
    shape.reserve(tableau.size());
    for (const auto& row : tableau) shape.push_back(long(row.size()));
    return shape;
}

RectEnvironment sample_rect_geo(long rows, long cols, double z, RngStream& rng) {
    if (rows < 1 || cols < 1) throw std::domain_error("sample_rect_geo: empty rectangle");
    RectEnvironment env;
    env.rows = rows;
    env.cols = cols;
    env.w.resize(std::size_t(rows * cols));
    for (auto& v : env.w) v = geo_sample(z, rng);
    return env;
}

// ---------------------------------------------------------------------------

long cylinder_copy_count(long N, long T, double u, double q, double eps) {
    if (N < 1 || T < 1) throw std::domain_error("cylinder_copy_count: N,T >= 1");
    if (!(q > 0 && q < 1) || !(u > 0 && u < 1))
        throw std::domain_error("cylinder_copy_count: u,q in (0,1)");
    if (!(eps > 0)) throw std::domain_error("cylinder_copy_count: eps > 0");
    // Copy index k holds exactly N*T independent weights, and
    // P(Geo(u^2 q^k) > 0) = u^2 q^k, so a union bound gives
    //   P(some cell with copy index k > K is nonzero)
    //     <= sum_{k>K} N T u^2 q^k = N T u^2 q^{K+1}/(1-q).
    const double pref = double(N) * double(T) * u * u / (1.0 - q);
    for (long K = 0; K < 10000; ++K) {
        const double tail = pref * std::pow(q, double(K + 1));
        if (tail < eps) return K;
    }
    throw PrecisionError("cylinder_copy_count: no certifiable K below cap");
}

CylinderEnvironment sample_cylinder(long N, long T, double u, double q, double eps,
                                    RngStream& rng) {
    CylinderEnvironment env;
    env.N = N;
    env.T = T;
    env.K = cylinder_copy_count(N, T, u, q, eps);
    env.trunc_bound = double(N) * double(T) * u * u / (1.0 - q) *
                      std::pow(q, double(env.K + 1));
    env.copies.resize(std::size_t(env.K) + 1);
    for (long k = 0; k <= env.K; ++k) {
        auto& grid = env.copies[std::size_t(k)];
        grid.resize(std::size_t(N * T));
        const double z = u * u * std::pow(q, double(k));
        for (auto& v : grid) v = geo_sample(z, rng);
    }
    return env;
}

long cylinder_lpp(const CylinderEnvironment& env) {
    const long N = env.N, T = env.T, K = env.K;
    if (N < 1 || T < 1) throw std::domain_error("cylinder_lpp: empty environment");
    // Column-by-column DP over the staircase region {k(x,y) <= K}. For
    // x-column a = (x-1)/N the admissible y range is 1..T*(K - a + 1).
    const long xmax = N * (K + 1);
    std::vector<long> prev;  // dp for column x-1
    long best = 0;
    for (long x = 1; x <= xmax; ++x) {
        const long a = (x - 1) / N;
        const long ymax = T * (K - a + 1);
        std::vector<long> cur(static_cast<std::size_t>(ymax), 0);
        for (long y = 1; y <= ymax; ++y) {
            const long b = (y - 1) / T;
            const long w =
                env.copies[std::size_t(a + b)]
                          [std::size_t(((x - 1) % N) * T + (y - 1) % T)];
            long inc = 0;
            bool reachable = (x == 1 && y == 1);
            if (x > 1 && y <= long(prev.size())) {
                inc = std::max(inc, prev[std::size_t(y - 1)]);
                reachable = true;
            }
            if (y > 1) {
                inc = std::max(inc, cur[std::size_t(y - 2)]);
                reachable = true;
            }
            (void)reachable;  // every cell in the staircase is reachable from (1,1)
            cur[std::size_t(y - 1)] = inc + w;
            best = std::max(best, cur[std::size_t(y - 1)]);
        }
        prev = std::move(cur);
    }
    return best;
}

std::pair<long, long> diagonal_lower_bound(const CylinderEnvironment& env) {
    long sum = 0, used = 0;
    for (long i = 0; 2 * i <= env.K; ++i) {
        RectEnvironment rect;
        rect.rows = env.N;
        rect.cols = env.T;
        rect.w.assign(env.copies[std::size_t(2 * i)].begin(),
                      env.copies[std::size_t(2 * i)].end());
        sum += rect_lpp(rect);
        ++used;
    }
    return {sum, used};
}

}  // namespace qpt
