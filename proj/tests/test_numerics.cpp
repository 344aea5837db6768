#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "doctest.h"
#include "gsmix/numerics.hpp"

using namespace gsmix;

TEST_SUITE("numerics") {

TEST_CASE("normal pdf/cdf/sf reference values") {
    CHECK(norm_pdf(0.0) == doctest::Approx(0.39894228040143267794).epsilon(1e-15));
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_sf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
    // deep tail keeps relative accuracy
    CHECK(norm_sf(10.0) == doctest::Approx(7.61985302416053e-24).epsilon(1e-12));
    CHECK(norm_cdf(-10.0) == doctest::Approx(7.61985302416053e-24).epsilon(1e-12));
    CHECK(norm_cdf(40.0) == 1.0);
    CHECK(norm_sf(-40.0) == 1.0);
}

TEST_CASE("quantile round trip and frozen values") {
    for (double p : {1e-10, 1e-4, 0.025, 0.3, 0.5, 0.8, 0.975, 1.0 - 1e-7}) {
        double x = norm_quantile(p);
        CHECK(norm_cdf(x) == doctest::Approx(p).epsilon(1e-10));
    }
    CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(norm_quantile(0.9828) == doctest::Approx(2.115352).epsilon(1e-6));
    CHECK_THROWS_AS((void)norm_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS((void)norm_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS((void)norm_quantile(-0.2), std::domain_error);
}

TEST_CASE("composite Gauss-Legendre integrates the normal density") {
    QuadratureGrid g = make_grid(-8.5, 8.5, 64, 16);
    double total = integrate([](double x) { return norm_pdf(x); }, g);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    // weights sum to the interval length
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    CHECK(wsum == doctest::Approx(17.0).epsilon(1e-13));

    CHECK_THROWS_AS(make_grid(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(0.0, 1.0, 0, 16), std::invalid_argument);
}

TEST_CASE("integrate reports non-finite integrand values") {
    QuadratureGrid g = make_grid(0.0, 1.0, 2, 4);
    CHECK_THROWS_AS((void)integrate([](double x) { return 1.0 / (x - x); }, g),
                    std::runtime_error);
}

TEST_CASE("find_root accuracy and bracket validation") {
    double r = find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // root independent of which side brackets from above
    double r2 = find_root([](double x) { return 2.0 - x * x; }, 0.0, 2.0);
    CHECK(r2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS((void)find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("philox known answers") {
    // zero key/counter
    {
        std::uint32_t ctr[4] = {0, 0, 0, 0}, key[2] = {0, 0}, out[4];
        philox4x32_10(ctr, key, out);
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    // all-ones
    {
        std::uint32_t ctr[4] = {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu};
        std::uint32_t key[2] = {0xffffffffu, 0xffffffffu}, out[4];
        philox4x32_10(ctr, key, out);
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    // pi digits
    {
        std::uint32_t ctr[4] = {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u};
        std::uint32_t key[2] = {0xa4093822u, 0x299f31d0u}, out[4];
        philox4x32_10(ctr, key, out);
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("stream regression constants") {
    RngStream rng = derive_stream(20260819u, 0);
    CHECK(rng.next_uniform() == doctest::Approx(0.2251586700799067).epsilon(1e-15));
    CHECK(rng.next_uniform() == doctest::Approx(0.95040346653723229).epsilon(1e-15));

    RngStream rng2 = derive_stream(20260819u, 0);
    CHECK(rng2.next_normal() == doctest::Approx(1.6436488259573609).epsilon(1e-14));
    CHECK(rng2.next_normal() == doctest::Approx(-0.52945102403150068).epsilon(1e-14));

    // distinct replicates give distinct draws
    RngStream other = derive_stream(20260819u, 1);
    CHECK(other.next_uniform() != rng2.next_uniform());
}

TEST_CASE("stream moments") {
    RngStream rng = derive_stream(7u, 42);
    const int n = 1000000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < n; ++i) su += rng.next_uniform();
    RngStream rng2 = derive_stream(8u, 42);
    for (int i = 0; i < n; ++i) {
        double z = rng2.next_normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.002));
    CHECK(sn / n == doctest::Approx(0.0).epsilon(1.0).scale(1.0));
    CHECK(std::abs(sn / n) < 0.004);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.006));
}

}  // TEST_SUITE
