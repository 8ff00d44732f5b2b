#include "curvatur/numkit/parallel.hpp"

#include "curvatur/error.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace curvatur {

int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n)
{
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

void for_each_index(int n, const std::function<void(int)>& fn, Exec exec)
{
    if (exec == Exec::serial) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    // Exceptions may not cross the parallel region; rethrow the first one.
    std::exception_ptr first;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical(curvatur_first_exception)
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

std::vector<double> integrate_grid(const GridIntegrand& f, int width, const Box2& box, int cells_u, int cells_v,
                                   Exec exec)
{
    const auto& xs = GaussLegendre::nodes();
    const auto& ws = GaussLegendre::weights();
    const int p = GaussLegendre::order;
    const double du = (box.u1 - box.u0) / cells_u, dv = (box.v1 - box.v0) / cells_v;
    const int ncell = cells_u * cells_v;
    std::vector<double> per_cell(static_cast<std::size_t>(ncell) * width, 0.0);

    for_each_index(
        ncell,
        [&](int c) {
            const int iu = c / cells_v, iv = c % cells_v;
            const double uc = box.u0 + (iu + 0.5) * du, vc = box.v0 + (iv + 0.5) * dv;
            std::vector<double> tmp(width);
            double* acc = &per_cell[static_cast<std::size_t>(c) * width];
            for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b) {
                    f(uc + 0.5 * du * xs[a], vc + 0.5 * dv * xs[b], tmp.data());
                    const double w = ws[a] * ws[b] * 0.25 * du * dv;
                    for (int k = 0; k < width; ++k) acc[k] += w * tmp[k];
                }
        },
        exec);

    std::vector<double> total(width, 0.0);
    for (int c = 0; c < ncell; ++c)
        for (int k = 0; k < width; ++k) total[k] += per_cell[static_cast<std::size_t>(c) * width + k];
    return total;
}

Grid2Result integrate_2d(const GridIntegrand& f, int width, const Box2& box, double rel_tol, double abs_tol,
                         Exec exec, int start_cells, int max_cells)
{
    int cells = start_cells;
    std::vector<double> prev = integrate_grid(f, width, box, cells, cells, exec);
    while (true) {
        const int next = cells * 2;
        std::vector<double> cur = integrate_grid(f, width, box, next, next, exec);
        double worst = 0.0;
        bool ok = true;
        for (int k = 0; k < width; ++k) {
            double diff = std::abs(cur[k] - prev[k]);
            worst = std::max(worst, diff);
            if (diff > std::max(abs_tol, rel_tol * std::abs(cur[k]))) ok = false;
        }
        if (!std::all_of(cur.begin(), cur.end(), [](double x) { return std::isfinite(x); }))
            throw ConvergenceError("2D quadrature: non-finite integrand", cur.empty() ? 0.0 : cur[0]);
        if (ok) return {cur, worst, next};
        if (next >= max_cells) throw ConvergenceError("2D quadrature: grid limit reached", cur.empty() ? 0.0 : cur[0]);
        prev = std::move(cur);
        cells = next;
    }
}

} // namespace curvatur
