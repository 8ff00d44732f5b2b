#include "curvatur/numkit/richardson.hpp"

#include "curvatur/error.hpp"

#include <cmath>

namespace curvatur {

Extrapolated richardson(const ExtrapolationLadder& ladder)
{
    const auto& h = ladder.steps;
    const auto& f = ladder.values;
    const std::size_t n = h.size();
    if (n < 3 || f.size() != n) throw PreconditionError("richardson: need at least three rungs");
    if (ladder.order < 1) throw PreconditionError("richardson: order must be >= 1");
    for (std::size_t k = 1; k < n; ++k)
        if (std::abs(h[k] - 0.5 * h[k - 1]) > 1e-12 * h[k - 1])
            throw PreconditionError("richardson: steps must halve");

    std::vector<std::vector<double>> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i].resize(i + 1);
        t[i][0] = f[i];
        for (std::size_t k = 1; k <= i; ++k) {
            double factor = std::pow(2.0, static_cast<double>(ladder.order * static_cast<int>(k))) - 1.0;
            t[i][k] = t[i][k - 1] + (t[i][k - 1] - t[i - 1][k - 1]) / factor;
        }
    }
    Extrapolated out;
    out.value = t[n - 1][n - 1];
    out.error = std::abs(t[n - 1][n - 1] - t[n - 2][n - 2]);
    for (std::size_t k = 2; k < n; ++k) {
        double prev = std::abs(f[k - 1] - f[k - 2]);
        double cur = std::abs(f[k] - f[k - 1]);
        if (cur > prev && cur > 1e-15 * (1.0 + std::abs(f[k]))) out.non_monotone = true;
    }
    return out;
}

} // namespace curvatur
