#include "gsmix/numerics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gsmix {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kTwoPi = 6.28318530717958647692;

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("norm_quantile: p must lie in (0,1)");

    // Acklam's rational approximation, then one Halley correction.
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley step against the erfc-based CDF.
    double e = norm_cdf(x) - p;
    double u = e / norm_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
// Legendre polynomial recurrence.
void legendre_rule(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

}  // namespace

QuadratureGrid make_grid(double lower, double upper, int panels, int points) {
    if (!(std::isfinite(lower) && std::isfinite(upper)) || !(lower < upper))
        throw std::invalid_argument("make_grid: need finite lower < upper");
    if (panels < 1 || points < 1)
        throw std::invalid_argument("make_grid: panels and points must be positive");

    std::vector<double> xu, wu;
    legendre_rule(points, xu, wu);

    QuadratureGrid g;
    g.lower = lower;
    g.upper = upper;
    g.nodes.reserve(static_cast<std::size_t>(panels) * points);
    g.weights.reserve(static_cast<std::size_t>(panels) * points);
    double h = (upper - lower) / panels;
    for (int p = 0; p < panels; ++p) {
        double mid = lower + (p + 0.5) * h;
        for (int j = 0; j < points; ++j) {
            g.nodes.push_back(mid + 0.5 * h * xu[j]);
            g.weights.push_back(0.5 * h * wu[j]);
        }
    }
    return g;
}

double integrate(const std::function<double(double)>& f, const QuadratureGrid& grid) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        double v = f(grid.nodes[i]);
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "integrate: integrand not finite at node " << grid.nodes[i];
            throw std::runtime_error(msg.str());
        }
        s += grid.weights[i] * v;
    }
    return s;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double xtol, double ftol) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        std::ostringstream msg;
        msg << "find_root: no sign change on [" << a << ", " << b << "]: f(lo)=" << fa
            << ", f(hi)=" << fb;
        throw std::invalid_argument(msg.str());
    }

    // Brent's method: inverse quadratic / secant with bisection fallback.
    double c = a, fc = fa;
    double d = b - a, e = b - a;
    for (int iter = 0; iter < 200; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * xtol;
        double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) <= ftol) return b;

        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                double qq = fa / fc;
                double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if (std::fabs(d) > tol1)
            b += d;
        else
            b += (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw std::runtime_error("find_root: did not converge in 200 iterations");
}

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kPhiloxM0, c[0], hi0, lo0);
    mul_hi_lo(kPhiloxM1, c[2], hi1, lo1);
    std::uint32_t r0 = hi1 ^ c[1] ^ k[0];
    std::uint32_t r1 = lo1;
    std::uint32_t r2 = hi0 ^ c[3] ^ k[1];
    std::uint32_t r3 = lo0;
    c[0] = r0; c[1] = r1; c[2] = r2; c[3] = r3;
}

}  // namespace

void philox4x32_10(const std::uint32_t counter[4], const std::uint32_t key[2],
                   std::uint32_t out[4]) {
    std::uint32_t c[4] = {counter[0], counter[1], counter[2], counter[3]};
    std::uint32_t k[2] = {key[0], key[1]};
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k);
        k[0] += kPhiloxW0;
        k[1] += kPhiloxW1;
    }
    out[0] = c[0]; out[1] = c[1]; out[2] = c[2]; out[3] = c[3];
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t replicate) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    replicate_[0] = static_cast<std::uint32_t>(replicate);
    replicate_[1] = static_cast<std::uint32_t>(replicate >> 32);
}

void RngStream::fill_block() {
    std::uint32_t ctr[4] = {static_cast<std::uint32_t>(draw_),
                            static_cast<std::uint32_t>(draw_ >> 32),
                            replicate_[0], replicate_[1]};
    std::uint32_t out[4];
    philox4x32_10(ctr, key_, out);
    ++draw_;
    auto to_unit = [](std::uint32_t hi, std::uint32_t lo) {
        std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    };
    buf_[0] = to_unit(out[1], out[0]);
    buf_[1] = to_unit(out[3], out[2]);
    buffered_ = 2;
}

double RngStream::next_uniform() {
    if (buffered_ == 0) fill_block();
    return buf_[2 - buffered_--];
}

double RngStream::next_normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_normal_ = r * std::sin(kTwoPi * u2);
    have_cached_normal_ = true;
    return r * std::cos(kTwoPi * u2);
}

RngStream derive_stream(std::uint64_t seed, std::uint64_t replicate) {
    return RngStream(seed, replicate);
}

}  // namespace gsmix
