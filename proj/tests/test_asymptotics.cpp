#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gsmix/asymptotics.hpp"
#include "gsmix/numerics.hpp"

using namespace gsmix;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

LocalAltSpec two_stage_spec(double h, double r, double c1) {
    LocalAltSpec s;
    s.h = h;
    s.ratios = {{1.0}, {r, 1.0}};
    s.boundary = {c1};
    return s;
}

doctest::Approx near(double x, double tol) {
    return doctest::Approx(x).scale(1.0).epsilon(tol);
}
}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("ratio table reconstruction and validation") {
    LocalAltSpec s = two_stage_spec(0.0, 2.0, 2.18);
    std::vector<double> sizes = relative_sizes(s);
    CHECK(sizes[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sizes[1] == doctest::Approx(2.0).epsilon(1e-12));

    LocalAltSpec three;
    three.h = 0.0;
    three.ratios = {{1.0}, {2.0, 1.0}, {788.0 / 98.0, 788.0 / 196.0, 1.0}};
    three.boundary = {2.12, 2.01};
    std::vector<double> s3 = relative_sizes(three);
    CHECK(s3[2] == doctest::Approx(788.0 / 98.0).epsilon(1e-12));

    LocalAltSpec bad = three;
    bad.ratios[1][0] = 2.1;  // disagrees with the last row
    CHECK_THROWS_AS((void)relative_sizes(bad), std::invalid_argument);

    bad = three;
    bad.ratios[2][2] = 1.01;  // diagonal must be one
    CHECK_THROWS_AS((void)relative_sizes(bad), std::invalid_argument);

    bad = three;
    bad.ratios[2] = {8.0, 9.0, 1.0};  // sizes must increase
    CHECK_THROWS_AS((void)relative_sizes(bad), std::invalid_argument);

    bad = three;
    bad.ratios[1] = {2.0};  // triangular shape
    CHECK_THROWS_AS((void)relative_sizes(bad), std::invalid_argument);
}

TEST_CASE("spec of a concrete design") {
    Design d({98, 98, 576}, {2.12, 2.01, 2.02});
    LocalAltSpec s = local_spec_of(d, 1.5);
    CHECK(s.h == 1.5);
    CHECK(s.stages() == 3);
    CHECK(s.ratios[2][0] == doctest::Approx(772.0 / 98.0).epsilon(1e-12));
    CHECK(s.boundary == std::vector<double>{2.12, 2.01});
}

TEST_CASE("no interim look collapses to the plain normal") {
    LocalAltSpec s = two_stage_spec(0.0, 2.0, kInf);
    for (int i = 0; i <= 100; ++i) {
        double v = -4.0 + 8.0 * i / 100.0;
        CHECK(mixture_cdf_two_stage(s, v) == near(norm_cdf(v), 1e-8));
    }
}

TEST_CASE("two stage closed form anchors") {
    CHECK(mixture_cdf_two_stage(two_stage_spec(0.0, 3.0, 2.18), 0.5) ==
          near(0.689635840364, 1e-9));
    CHECK(mixture_cdf_two_stage(two_stage_spec(1.0, 2.0, 2.18), 0.5) ==
          near(0.669188112090, 1e-9));
    // monotone and bounded
    double prev = 0.0;
    LocalAltSpec s = two_stage_spec(0.7, 2.0, 2.18);
    for (double v = -5.0; v <= 5.0; v += 0.2) {
        double f = mixture_cdf_two_stage(s, v);
        CHECK(f >= prev - 1e-12);
        CHECK(f <= 1.0 + 1e-12);
        prev = f;
    }
}

TEST_CASE("recursion path matches the closed form") {
    for (double h : {0.0, 1.0}) {
        LocalAltSpec s = two_stage_spec(h, 2.0, 2.18);
        for (double v = -3.0; v <= 3.0 + 1e-9; v += 0.5)
            CHECK(mixture_cdf_k_stage(s, v) == near(mixture_cdf_two_stage(s, v), 1e-8));
    }
}

TEST_CASE("limit matches the finite design on its own scale") {
    Design d({100, 100}, {2.18, 2.18});
    for (double h : {0.0, 1.0}) {
        LocalAltSpec s = local_spec_of(d, h);
        for (int i = 0; i <= 100; ++i) {
            double v = -4.0 + 8.0 * i / 100.0;
            CHECK(mixture_cdf_k_stage(s, v) == near(finite_centered_cdf(d, h, v), 1e-6));
        }
    }
}

TEST_CASE("limit stop probabilities") {
    std::vector<double> p = limit_stop_probs(two_stage_spec(0.0, 2.0, 2.18));
    CHECK(p[0] == near(0.014628730776, 1e-9));
    CHECK(p[0] + p[1] == near(1.0, 1e-10));
}

TEST_CASE("normal increments are exact at every scale") {
    Design d({5, 5}, {2.0, 2.0});
    std::vector<double> grid;
    for (double v = -3.0; v <= 3.0 + 1e-9; v += 0.25) grid.push_back(v);
    auto rows = convergence_check(d, 0.8, {1, 2, 4}, grid);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) CHECK(r.sup_diff < 1e-6);
}

TEST_CASE("exponential increments approach the limit") {
    Design d({5, 5}, {2.0, 2.0});
    std::vector<double> grid;
    for (double v = -3.0; v <= 3.0 + 1e-9; v += 0.25) grid.push_back(v);
    auto rows = convergence_check_mc(d, 0.8, {1, 16}, grid, 40000, 20260819u);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].sup_diff < 0.2);
    CHECK(rows[1].sup_diff < 0.03);
    CHECK(rows[1].sup_diff < rows[0].sup_diff);
}

}  // TEST_SUITE
