#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gsmix/sub_density.hpp"

namespace gsmix {

// Requirements handed to the solver: overall one-sided level alpha, target
// power, and one alternative per stage (decreasing: later looks power
// smaller effects). Stage k is sized so that cumulative power at
// alternatives[k] reaches `power` while the conditional level spent at each
// look is alphas[k].
struct DesignSpec {
    int k = 1;
    double alpha = 0.05;
    double power = 0.8;
    std::vector<double> alternatives;
    // Per-stage conditional levels. Empty means equal spending:
    // every entry solve_alpha0(alpha, k).
    std::vector<double> alphas;

    std::vector<double> resolved_alphas() const;
    void validate() const;
};

// Equal conditional level a0 such that K looks at level a0 each give
// overall level alpha: 1 - (1-a0)^K = alpha.
double solve_alpha0(double alpha, int k);

struct InfeasibleError : std::runtime_error {
    int stage;
    double achieved_power;
    InfeasibleError(int stage_, double achieved, const std::string& msg)
        : std::runtime_error(msg), stage(stage_), achieved_power(achieved) {}
};

// Boundary and size for stage k (1-based) given the earlier stages.
// The boundary makes the conditional rejection level at stage k equal to
// alphas[k-1] under theta = 0; the size is the smallest integer meeting the
// power requirement at alternatives[k-1]. Throws InfeasibleError when no
// size up to n_cap works.
struct StageSolution {
    int n;
    double c;
    double attained_power;
};

StageSolution solve_stage_k(const std::vector<int>& n_prev, const std::vector<double>& c_prev,
                            const DesignSpec& spec, int stage, EngineGrid g = {},
                            int n_cap = 1000000);

struct OcRow {
    double theta;
    std::vector<double> stop_prob;
    std::vector<double> reject_prob;
    std::vector<double> cum_reject;
    double expected_n;
};

struct DesignSolution {
    Design design;
    std::vector<double> alphas;
    std::vector<double> attained_power;  // cumulative power at each stage's alternative
    std::vector<OcRow> summary;          // theta = 0 and each alternative
};

DesignSolution solve_design(const DesignSpec& spec, EngineGrid g = {}, int n_cap = 1000000);

// Checks a design against a spec by quadrature: overall level within
// level_tol of spec.alpha and cumulative power at each alternative at least
// spec.power - power_slack. Collects human-readable failures.
struct ValidationReport {
    double overall_alpha = 0.0;
    std::vector<double> power_at_alternatives;
    bool pass = true;
    std::vector<std::string> failures;
};

ValidationReport validate_design(const Design& d, const DesignSpec& spec, EngineGrid g = {},
                                 double level_tol = 0.002, double power_slack = 0.005);

OcRow oc_row(const Design& d, double theta, EngineGrid g = {});

}  // namespace gsmix
