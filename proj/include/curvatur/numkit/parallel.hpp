#pragma once

// Data-parallel kernels. Each kernel has a serial reference path and an
// OpenMP path; both write per-item results into fixed slots and reduce in
// index order, so the two agree bit for bit regardless of thread count.

#include "curvatur/numkit/quadrature.hpp"

#include <functional>
#include <vector>

namespace curvatur {

enum class Exec { serial, parallel };

// Number of worker threads the parallel path will use.
int max_threads();
void set_threads(int n);

// out[i] = fn(i) for i in [0, n).
void for_each_index(int n, const std::function<void(int)>& fn, Exec exec = Exec::parallel);

// Vector-valued integrand: writes `width` values for the point (u, v).
using GridIntegrand = std::function<void(double u, double v, double* out)>;

// Tensor Gauss-Legendre rule (8x8 nodes per cell) on a cells_u x cells_v grid.
std::vector<double> integrate_grid(const GridIntegrand& f, int width, const Box2& box, int cells_u, int cells_v,
                                   Exec exec = Exec::parallel);

struct Grid2Result {
    std::vector<double> values;
    double error = 0.0;
    int cells = 0;
};

// Doubles the grid until every component changes by at most
// max(abs_tol, rel_tol * |value|). Throws ConvergenceError past max_cells.
Grid2Result integrate_2d(const GridIntegrand& f, int width, const Box2& box, double rel_tol, double abs_tol,
                         Exec exec = Exec::parallel, int start_cells = 4, int max_cells = 256);

} // namespace curvatur
