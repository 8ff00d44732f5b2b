#pragma once

#include <vector>

namespace curvatur {

// Samples f(h_k) on a halving ladder h_{k+1} = h_k / 2. The error of f(h) is
// assumed to expand in powers h^p, h^{2p}, h^{3p}, ...
struct ExtrapolationLadder {
    std::vector<double> steps;
    std::vector<double> values;
    int order = 2;
};

struct Extrapolated {
    double value = 0.0;
    double error = 0.0;
    // Successive rung differences did not shrink.
    bool non_monotone = false;
};

// Richardson tableau; value is the last diagonal entry, error the difference
// of the last two diagonal entries. Throws PreconditionError on fewer than
// three rungs, a non-halving ladder or order < 1.
Extrapolated richardson(const ExtrapolationLadder& ladder);

} // namespace curvatur
