#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsmix/sub_density.hpp"

namespace gsmix {

// Data from one stopped trial: per-stage sample means up to the stopping
// stage and the cumulative standardized statistics they imply.
struct TrialOutcome {
    Design design;
    int stop_stage = 1;
    std::vector<double> stage_means;
    std::vector<double> cumulative_z;
};

struct PathError : std::runtime_error {
    int stage;
    PathError(int stage_, const std::string& msg) : std::runtime_error(msg), stage(stage_) {}
};

// Builds the outcome and replays the stopping rule over it. Throws PathError
// naming the first offending stage when the data could not have been
// produced by the design (continuing past a crossed boundary, or stopping
// early without a crossing).
TrialOutcome make_outcome(const Design& d, const std::vector<double>& stage_means);

enum class MleKind { Unconditional, Conditional };

struct MleResult {
    double estimate = 0.0;
    MleKind kind = MleKind::Unconditional;
    bool diverged = false;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

// Overall sample mean at the stopping stage.
MleResult mle_unconditional(const TrialOutcome& o);

// Maximizer of the stopping-stage conditional likelihood: the normal
// likelihood divided by Pr_theta(stop at the observed stage). Solved by
// root-finding the score on a bracket of half-width 10/sqrt(n1) around the
// unconditional estimate. When the score has no root there the maximum sits
// at an edge; the result is flagged diverged and the better edge returned.
MleResult mle_conditional(const TrialOutcome& o, EngineGrid g = {});

// Log stopping-stage probability, its first and second theta-derivatives.
// Closed forms where the stopping event is a single normal tail (stage 1,
// or either stage of a two-stage design); interior stages of longer designs
// fall back to quadrature. Throws when the probability underflows.
double log_stop_prob(const Design& d, int stage, double theta, EngineGrid g = {});
double dlog_stop_prob(const Design& d, int stage, double theta, EngineGrid g = {});
double d2log_stop_prob(const Design& d, int stage, double theta, EngineGrid g = {});

// Information in the observed data at the stopping stage: the plain and
// fixed-design measures coincide with the cumulative size; the
// stage-conditional measure subtracts the curvature the stopping event
// removes.
struct ObservedInfo {
    double i = 0.0;
    double i_conditional = 0.0;
    double i_fixed = 0.0;
};

ObservedInfo observed_info(const TrialOutcome& o, double theta, EngineGrid g = {});

// Design-level expected information at theta.
struct InfoReport {
    double theta = 0.0;
    std::vector<double> stage_i;
    std::vector<double> stage_i_conditional;
    std::vector<double> stage_i_fixed;
    std::vector<double> stop_prob;
    double overall_i = 0.0;
    double overall_i_conditional = 0.0;
    double overall_i_fixed = 0.0;
    double info_loss = 0.0;  // overall_i - overall_i_conditional, always >= 0
    std::vector<double> frac_adapted;
    std::vector<double> frac_fixed;
};

InfoReport expected_info(const Design& d, double theta, EngineGrid g = {});

// Stagewise estimator moments. Conditional summaries EXCLUDE replicates
// whose conditional score has no root in the bracket and report the excluded
// fraction as divergence_rate.
struct StageMoments {
    int stage = 0;  // 0 marks the overall row
    double pr_stage = 0.0;
    double divergence_rate = 0.0;
    double bias = 0.0;
    double sd = 0.0;
    double mse = 0.0;
};

struct MomentsReport {
    MleKind kind = MleKind::Unconditional;
    std::vector<StageMoments> per_stage;
    StageMoments overall;
};

enum class MomentMethod { Quadrature, MonteCarlo };

// Quadrature path covers designs with at most two stages (closed truncated
// normal forms for the unconditional kind, integration of the score root for
// the conditional kind, with the divergence boundary located exactly).
// The Monte Carlo path works for any design.
MomentsReport estimator_moments(const Design& d, double theta, MleKind kind,
                                MomentMethod method, long reps = 100000,
                                std::uint64_t seed = 1, EngineGrid g = {});

// Monotone likelihood ratio spot check: the stage sub-density ratio between
// theta_hi and theta_lo must be nondecreasing along the supplied increasing
// grid of statistic values (within slack).
bool mlr_check(const Design& d, double theta_hi, double theta_lo, int stage,
               const std::vector<double>& grid, double slack = 1e-9, EngineGrid g = {});

}  // namespace gsmix
