#pragma once

#include <vector>

#include "gsmix/numerics.hpp"

namespace gsmix {

// Per-stage quadrature resolution for the stage-density recursion.
struct EngineGrid {
    int panels = 64;
    int points = 16;
};

// A group sequential design: per-stage group sizes n[k] and one-sided upper
// critical values c[k] on the cumulative standardized scale. The trial stops
// at the first interim stage with Z > c[k]; at the final stage it rejects
// when Z > c[K-1]. cum[k] is the cumulative sample size.
struct Design {
    std::vector<int> n;
    std::vector<double> c;
    std::vector<double> cum;

    Design() = default;  // empty placeholder; every operation validates
    Design(std::vector<int> n_, std::vector<double> c_);
    int stages() const { return static_cast<int>(n.size()); }
};

// Real-valued analysis schedule: cumulative sizes plus boundaries. Used
// directly by the local-limit machinery where stage sizes are not integers;
// the terminal boundary may be +infinity (pure CDF evaluation, no rejection).
struct Schedule {
    std::vector<double> cum;
    std::vector<double> c;

    int stages() const { return static_cast<int>(cum.size()); }
};

Schedule schedule_of(const Design& d);

// Sub-density of (trial reaches `stage`, Z_(stage) = t, t below the stage
// boundary) tabulated on a quadrature grid. mass() is the continuation
// probability through this stage.
struct StageDensity {
    int stage = 1;
    QuadratureGrid grid;
    std::vector<double> values;

    double mass() const;
};

// Stage-1 density truncated at c[0].
StageDensity initial_density(const Schedule& s, double theta, EngineGrid g = {});

// One step of the stopped-process recursion: the truncated density at
// prev.stage is pushed through the conditional normal transition and
// truncated at the next boundary.
StageDensity propagate(const StageDensity& prev, const Schedule& s, double theta,
                       EngineGrid g = {});

// Pr(trial reaches stage prev.stage+1 and Z at that stage <= v), evaluated
// in closed form from the tabulated previous density. v may exceed the
// stage boundary.
double reach_cdf(const StageDensity& prev, const Schedule& s, double theta, double v);

// Point value of the reached-stage density at prev.stage+1 (untruncated in t).
double density_at(const StageDensity& prev, const Schedule& s, double theta, double t);

// Truncated density at `stage` obtained by running the recursion from stage 1.
StageDensity continuation_density(const Schedule& s, double theta, int stage,
                                  EngineGrid g = {});

// Stopping-stage distribution and stagewise/cumulative rejection probabilities.
struct StopReport {
    std::vector<double> stop_prob;
    std::vector<double> reject_prob;
    std::vector<double> cum_reject;
};

StopReport stopping_probabilities(const Schedule& s, double theta, EngineGrid g = {});
StopReport stopping_probabilities(const Design& d, double theta, EngineGrid g = {});

// CDF of the stopped statistic Z_(D): sum over stages of
// Pr(D = k, Z_(k) <= v). mixture_components returns the per-stage terms.
std::vector<double> mixture_components(const Schedule& s, double theta, double v,
                                       EngineGrid g = {});
double mixture_cdf(const Schedule& s, double theta, double v, EngineGrid g = {});
double mixture_cdf(const Design& d, double theta, double v, EngineGrid g = {});

double expected_sample_size(const Design& d, double theta, EngineGrid g = {});

}  // namespace gsmix
