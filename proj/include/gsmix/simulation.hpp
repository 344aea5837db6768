#pragma once

#include <cstdint>
#include <vector>

#include "gsmix/estimation.hpp"

namespace gsmix {

struct CollectFlags {
    bool estimators = false;
};

struct SimConfig {
    Design design;
    double theta = 0.0;
    long reps = 100000;
    std::uint64_t master_seed = 1;
    CollectFlags collect;
    int threads = 0;  // 0: GSMIX_THREADS, then hardware count

    explicit SimConfig(Design d) : design(std::move(d)) {}
};

struct EstimatorSample {
    int stage = 0;
    double unconditional = 0.0;
    double conditional = 0.0;
    bool diverged = false;
};

// Replicate r always consumes RNG stream (seed, r), and per-replicate
// outputs land in preallocated slots, so results are identical for any
// worker count.
struct SimResult {
    long reps = 0;
    std::uint64_t seed = 0;
    std::vector<long> stop_count;
    std::vector<long> reject_count;
    std::vector<long> cum_reject_count;
    double mean_n = 0.0;
    std::vector<EstimatorSample> samples;  // one per replicate when collected
};

TrialOutcome simulate_trial(const Design& d, double theta, RngStream& rng);

SimResult run_oc(const SimConfig& cfg);
SimResult run_estimator_study(const SimConfig& cfg);

// Exclusion-policy moment summaries: conditional summaries drop replicates
// flagged diverged and report the dropped fraction per stage.
MomentsReport summarize_moments(const SimResult& res, const Design& d, double theta,
                                MleKind kind);

struct HistBin {
    double lo = 0.0;
    double hi = 0.0;
    long count = 0;
};

std::vector<HistBin> histogram(const std::vector<double>& xs, int bins, double lo, double hi);

int resolve_threads(int requested);

}  // namespace gsmix
