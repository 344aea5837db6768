#pragma once

#include <cstdint>
#include <vector>

#include "gsmix/sub_density.hpp"

namespace gsmix {

// Limit description of a design under a local alternative: drift h, the
// lower-triangular table of cumulative-information ratios
// ratios[k-1][j-1] = lim n_(k)/n_(j) for j <= k, and the interim boundaries.
// The stopped, centered statistic V = Z_(D) - h*sqrt(ratios[D-1][0]) has a
// distribution determined by these alone.
struct LocalAltSpec {
    double h = 0.0;
    std::vector<std::vector<double>> ratios;
    std::vector<double> boundary;  // c_1 .. c_{K-1}

    int stages() const { return static_cast<int>(ratios.size()); }
};

LocalAltSpec local_spec_of(const Design& d, double h);

// Cumulative sizes on the limit scale (first stage = 1), reconstructed from
// the last ratio row. Throws std::invalid_argument when the table is
// internally inconsistent (any row disagreeing with the reconstruction by
// more than 1e-9 relative) or malformed.
std::vector<double> relative_sizes(const LocalAltSpec& spec);

// Stopping-stage probabilities in the limit.
std::vector<double> limit_stop_probs(const LocalAltSpec& spec, EngineGrid g = {});

// CDF of V for a two-stage spec via a single one-dimensional integral.
double mixture_cdf_two_stage(const LocalAltSpec& spec, double v);

// CDF of V for any number of stages via the stage-density recursion run on
// the limit scale. Matches the two-stage closed form versions exactly.
double mixture_cdf_k_stage(const LocalAltSpec& spec, double v, EngineGrid g = {});

// Finite-sample CDF of the centered stopped statistic
// V = Z_(D) - theta*sqrt(n_(D)) for the design run at theta = h/sqrt(n_1).
double finite_centered_cdf(const Design& d, double h, double v, EngineGrid g = {});

struct ConvergenceRow {
    long scale = 1;
    double sup_diff = 0.0;
};

// Sup distance over v_grid between the finite-sample centered CDF at each
// size multiple and the limit CDF. With normal increments this is exact at
// every scale (quadrature noise only).
std::vector<ConvergenceRow> convergence_check(const Design& d, double h,
                                              const std::vector<long>& scales,
                                              const std::vector<double>& v_grid,
                                              EngineGrid g = {});

// Same comparison with centered exponential increments, estimated by Monte
// Carlo: demonstrates the limit being approached as the scale grows.
std::vector<ConvergenceRow> convergence_check_mc(const Design& d, double h,
                                                 const std::vector<long>& scales,
                                                 const std::vector<double>& v_grid,
                                                 long reps, std::uint64_t seed);

}  // namespace gsmix
