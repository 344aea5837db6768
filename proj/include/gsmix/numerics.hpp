#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace gsmix {

// Standard normal density, CDF, upper tail and quantile.
// cdf/sf are erfc-based and keep full relative accuracy deep in the tails;
// quantile is a rational approximation polished by one Halley step, good to
// about 1e-13 absolute over (0,1). Throws std::domain_error outside (0,1).
double norm_pdf(double x);
double norm_cdf(double x);
double norm_sf(double x);
double norm_quantile(double p);

// Composite Gauss-Legendre rule on [lower, upper]: `panels` equal panels,
// `points` nodes each. Weights sum to (upper - lower).
struct QuadratureGrid {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

QuadratureGrid make_grid(double lower, double upper, int panels = 256, int points = 16);

// Integrates f over the grid. Throws std::runtime_error naming the offending
// node if f returns a non-finite value.
double integrate(const std::function<double(double)>& f, const QuadratureGrid& grid);

// Brent root bracketing solver. Requires f(lo) and f(hi) of opposite sign
// (throws std::invalid_argument reporting both endpoint values otherwise).
// Returns x with |f(x)| <= ftol or bracket width <= xtol.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double xtol = 1e-12, double ftol = 0.0);

// Counter-based RNG: Philox4x32-10. One independent stream per
// (seed, replicate) pair, so parallel simulation can hand stream r to
// replicate r and get identical draws regardless of scheduling.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t replicate);

    double next_uniform();   // open interval (0,1), 53-bit resolution
    double next_normal();    // Box-Muller pair, one value cached

private:
    void fill_block();

    std::uint32_t key_[2];
    std::uint32_t replicate_[2];
    std::uint64_t draw_ = 0;
    double buf_[2];
    int buffered_ = 0;
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

RngStream derive_stream(std::uint64_t seed, std::uint64_t replicate);

// Raw Philox4x32-10 block function (exposed for known-answer tests).
void philox4x32_10(const std::uint32_t counter[4], const std::uint32_t key[2],
                   std::uint32_t out[4]);

}  // namespace gsmix
