#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gsmix/estimation.hpp"
#include "gsmix/numerics.hpp"

using namespace gsmix;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Design pocock() { return Design({100, 100}, {2.18, 2.18}); }

doctest::Approx near(double x, double tol) {
    return doctest::Approx(x).scale(1.0).epsilon(tol);
}
}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("outcome replay computes the cumulative statistics") {
    TrialOutcome o = make_outcome(pocock(), {0.15, 0.25});
    CHECK(o.stop_stage == 2);
    CHECK(o.cumulative_z[0] == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(o.cumulative_z[1] == doctest::Approx(40.0 / std::sqrt(200.0)).epsilon(1e-13));

    TrialOutcome first = make_outcome(pocock(), {0.25});
    CHECK(first.stop_stage == 1);
    CHECK(first.cumulative_z[0] == doctest::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("outcome replay rejects impossible paths") {
    // crossed at stage 1 but data continues
    CHECK_THROWS_AS((void)make_outcome(pocock(), {0.25, 0.1}), PathError);
    // stopped early without a crossing
    CHECK_THROWS_AS((void)make_outcome(pocock(), {0.10}), PathError);
    try {
        (void)make_outcome(pocock(), {0.25, 0.1});
    } catch (const PathError& e) {
        CHECK(e.stage == 1);
    }
    CHECK_THROWS_AS((void)make_outcome(pocock(), {}), std::invalid_argument);
    CHECK_THROWS_AS((void)make_outcome(pocock(), {0.1, 0.1, 0.1}), std::invalid_argument);
}

TEST_CASE("unconditional estimate is the overall mean") {
    TrialOutcome o = make_outcome(pocock(), {0.15, 0.25});
    MleResult u = mle_unconditional(o);
    CHECK(u.estimate == doctest::Approx(0.2).epsilon(1e-13));
    CHECK_FALSE(u.diverged);

    TrialOutcome stop1 = make_outcome(Design({98, 98, 576}, {2.12, 2.01, 2.02}),
                                      {2.9379 / std::sqrt(98.0)});
    CHECK(mle_unconditional(stop1).estimate == near(0.296772716064, 1e-10));
}

TEST_CASE("conditional estimate matches the score root") {
    // stage-1 stop: root pulled below the sample mean
    TrialOutcome o1 = make_outcome(pocock(), {0.295});
    MleResult c1 = mle_conditional(o1);
    CHECK_FALSE(c1.diverged);
    CHECK(c1.estimate == near(0.210143744129, 1e-9));

    // far beyond the boundary the correction is negligible
    TrialOutcome far = make_outcome(pocock(), {0.6});
    CHECK(mle_conditional(far).estimate == near(0.599972917487, 1e-9));

    // just above the boundary the score has no root: flagged, edge returned
    TrialOutcome edge = make_outcome(pocock(), {0.219});
    MleResult ce = mle_conditional(edge);
    CHECK(ce.diverged);
    CHECK(ce.estimate == near(-0.781, 1e-9));
    CHECK(ce.bracket_lo == near(-0.781, 1e-12));

    // stage-2 stop: root pulled above the sample mean
    TrialOutcome o2 = make_outcome(pocock(), {0.05, 1.0 / std::sqrt(200.0) * 2.0 - 0.05});
    // means chosen so z2 = 1.0
    CHECK(o2.cumulative_z[1] == doctest::Approx(1.0).epsilon(1e-12));
    MleResult c2 = mle_conditional(o2);
    CHECK_FALSE(c2.diverged);
    CHECK(c2.estimate == near(0.078980159914, 1e-9));
}

TEST_CASE("stopping stage log probability and derivatives") {
    Design d = pocock();
    // closed forms against the engine quadrature
    StopReport r = stopping_probabilities(d, 0.13);
    CHECK(std::exp(log_stop_prob(d, 1, 0.13)) == near(r.stop_prob[0], 1e-9));
    CHECK(std::exp(log_stop_prob(d, 2, 0.13)) == near(r.stop_prob[1], 1e-9));

    // interior stage of a longer design falls back to quadrature
    Design d3({98, 98, 576}, {2.12, 2.01, 2.02});
    StopReport r3 = stopping_probabilities(d3, 0.1);
    CHECK(std::exp(log_stop_prob(d3, 2, 0.1)) == near(r3.stop_prob[1], 1e-9));

    // single stage design stops with probability one
    CHECK(log_stop_prob(Design({88}, {1.96}), 1, 0.2) == 0.0);

    // first derivative agrees with a central difference
    double h = 1e-6;
    double fd = (log_stop_prob(d, 1, 0.13 + h) - log_stop_prob(d, 1, 0.13 - h)) / (2.0 * h);
    CHECK(dlog_stop_prob(d, 1, 0.13) == near(fd, 1e-5));

    // unreachable stage underflows
    CHECK_THROWS_AS((void)log_stop_prob(Design({100, 100}, {40.0, 2.18}), 1, 0.0),
                    std::runtime_error);
}

TEST_CASE("observed information at the stopping stage") {
    TrialOutcome o = make_outcome(pocock(), {0.15, 0.25});
    ObservedInfo info = observed_info(o, 0.2);
    CHECK(info.i == 200.0);
    CHECK(info.i_fixed == 200.0);
    // conditioning on the stopping stage removes curvature
    CHECK(info.i_conditional < info.i);

    TrialOutcome o1 = make_outcome(pocock(), {0.295});
    ObservedInfo i1 = observed_info(o1, 0.295);
    CHECK(i1.i == 100.0);
    CHECK(i1.i_conditional < 100.0);
}

TEST_CASE("expected information and its loss") {
    Design d = pocock();
    // closed-form reference losses
    CHECK(expected_info(d, 0.0).info_loss == near(9.529552198411, 1e-6));
    CHECK(expected_info(d, 0.218).info_loss == near(63.661977236758, 1e-6));

    for (double theta = -0.1; theta <= 0.5 + 1e-9; theta += 0.03) {
        InfoReport rep = expected_info(d, theta);
        CHECK(rep.info_loss == rep.overall_i - rep.overall_i_conditional);
        CHECK(rep.info_loss >= 0.0);
        CHECK(rep.overall_i == near(rep.overall_i_fixed, 1e-12));
    }

    // removing the interim look removes the loss; overall measures hit the
    // fixed size up to grid truncation and the loss cancels exactly
    InfoReport flat = expected_info(Design({100, 100}, {kInf, 2.18}), 0.218);
    CHECK(flat.overall_i == near(200.0, 1e-9));
    CHECK(flat.overall_i_conditional == near(200.0, 1e-9));
    CHECK(flat.info_loss == 0.0);

    // a finite but unreachable boundary collapses the same way
    InfoReport hi = expected_info(Design({100, 100}, {40.0, 2.18}), 0.218);
    CHECK(hi.overall_i_conditional == near(200.0, 1e-9));
    CHECK(std::abs(hi.info_loss) < 1e-9);
}

TEST_CASE("unconditional moments by quadrature match truncated normal forms") {
    Design d = pocock();
    MomentsReport r0 =
        estimator_moments(d, 0.0, MleKind::Unconditional, MomentMethod::Quadrature);
    CHECK(r0.per_stage[0].pr_stage == near(0.014628730776, 1e-9));
    CHECK(r0.per_stage[0].bias == near(0.253356978232, 1e-8));
    CHECK(r0.per_stage[0].sd == near(0.032280998058, 1e-8));
    CHECK(r0.per_stage[0].mse == near(0.065231821255, 1e-8));
    CHECK(r0.per_stage[1].bias == near(-0.001880657139, 1e-8));
    CHECK(r0.per_stage[1].sd == near(0.069220455795, 1e-8));
    CHECK(r0.per_stage[1].mse == near(0.004795008372, 1e-8));
    CHECK(r0.per_stage[0].divergence_rate == 0.0);

    MomentsReport r1 =
        estimator_moments(d, 0.218, MleKind::Unconditional, MomentMethod::Quadrature);
    CHECK(r1.per_stage[0].pr_stage == near(0.5, 1e-10));
    CHECK(r1.per_stage[0].bias == near(0.079788456080, 1e-8));
    CHECK(r1.per_stage[0].sd == near(0.060281027499, 1e-8));
    CHECK(r1.per_stage[0].mse == near(0.010000000000, 1e-8));
    CHECK(r1.per_stage[1].bias == near(-0.039894228040, 1e-8));
    CHECK(r1.per_stage[1].sd == near(0.058381937010, 1e-8));
    CHECK(r1.per_stage[1].mse == near(0.005000000000, 1e-8));

    // overall row mixes the stages by their probabilities
    double mix = r1.per_stage[0].pr_stage * r1.per_stage[0].bias +
                 r1.per_stage[1].pr_stage * r1.per_stage[1].bias;
    CHECK(r1.overall.bias == near(mix, 1e-10));
}

TEST_CASE("conditional moments by quadrature with exclusion of divergent mass") {
    Design d = pocock();
    MomentsReport r0 =
        estimator_moments(d, 0.0, MleKind::Conditional, MomentMethod::Quadrature);
    CHECK(r0.per_stage[0].divergence_rate == near(0.225331465678, 1e-8));
    CHECK(r0.per_stage[0].bias == near(-0.060823221006, 1e-7));
    CHECK(r0.per_stage[0].sd == near(0.267698941298, 1e-7));
    CHECK(r0.per_stage[0].mse == near(0.075362187386, 1e-7));
    CHECK(r0.per_stage[1].divergence_rate == near(0.0, 1e-9));
    CHECK(r0.per_stage[1].bias == near(0.002308289726, 1e-7));
    CHECK(r0.per_stage[1].sd == near(0.074234244493, 1e-7));
    CHECK(r0.per_stage[1].mse == near(0.005516051257, 1e-7));

    MomentsReport r1 =
        estimator_moments(d, 0.218, MleKind::Conditional, MomentMethod::Quadrature);
    CHECK(r1.per_stage[0].divergence_rate == near(0.078891522518, 1e-8));
    CHECK(r1.per_stage[0].bias == near(-0.080840310398, 1e-7));
    CHECK(r1.per_stage[0].sd == near(0.241736143214, 1e-7));
    CHECK(r1.per_stage[0].mse == near(0.064971518721, 1e-7));
    CHECK(r1.per_stage[1].bias == near(0.005441884680, 1e-7));
    CHECK(r1.per_stage[1].sd == near(0.085150548929, 1e-7));
    CHECK(r1.per_stage[1].mse == near(0.007280230092, 1e-7));
}

TEST_CASE("quadrature moments limited to two stages") {
    Design d3({98, 98, 576}, {2.12, 2.01, 2.02});
    CHECK_THROWS_AS((void)estimator_moments(d3, 0.0, MleKind::Unconditional,
                                            MomentMethod::Quadrature),
                    std::invalid_argument);
}

TEST_CASE("monotone likelihood ratio") {
    Design d2 = pocock();
    Design d3({98, 98, 576}, {2.12, 2.01, 2.02});
    Design d1({88}, {1.96});
    std::vector<double> grid;
    for (double v = -2.0; v <= 2.0 + 1e-9; v += 0.2) grid.push_back(v);

    int cases = 0;
    for (auto [hi, lo] : std::vector<std::pair<double, double>>{
             {0.1, 0.0}, {0.2, 0.1}, {0.3, 0.0}, {0.25, -0.05}}) {
        CHECK(mlr_check(d1, hi, lo, 1, grid));
        CHECK(mlr_check(d2, hi, lo, 1, grid));
        CHECK(mlr_check(d2, hi, lo, 2, grid));
        CHECK(mlr_check(d3, hi, lo, 2, grid));
        CHECK(mlr_check(d3, hi, lo, 3, grid));
        cases += 5;
    }
    CHECK(cases >= 20);

    CHECK_THROWS_AS((void)mlr_check(d2, 0.0, 0.1, 1, grid), std::invalid_argument);
    CHECK_THROWS_AS((void)mlr_check(d2, 0.1, 0.0, 1, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS((void)mlr_check(d2, 0.1, 0.0, 1, {0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS((void)mlr_check(d2, 0.1, 0.0, 5, grid), std::invalid_argument);
}

}  // TEST_SUITE
