#include "gsmix/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gsmix {

LocalAltSpec local_spec_of(const Design& d, double h) {
    LocalAltSpec spec;
    spec.h = h;
    int K = d.stages();
    spec.ratios.resize(K);
    for (int k = 0; k < K; ++k) {
        spec.ratios[k].resize(k + 1);
        for (int j = 0; j <= k; ++j) spec.ratios[k][j] = d.cum[k] / d.cum[j];
    }
    spec.boundary.assign(d.c.begin(), d.c.end() - 1);
    return spec;
}

std::vector<double> relative_sizes(const LocalAltSpec& spec) {
    int K = spec.stages();
    if (K < 1) throw std::invalid_argument("local spec: needs at least one stage");
    if (!std::isfinite(spec.h)) throw std::invalid_argument("local spec: h must be finite");
    if (static_cast<int>(spec.boundary.size()) != K - 1)
        throw std::invalid_argument("local spec: need one boundary per interim stage");
    for (int k = 0; k < K; ++k) {
        if (static_cast<int>(spec.ratios[k].size()) != k + 1) {
            std::ostringstream msg;
            msg << "local spec: ratio row " << (k + 1) << " must have " << (k + 1)
                << " entries";
            throw std::invalid_argument(msg.str());
        }
        for (int j = 0; j <= k; ++j)
            if (!(spec.ratios[k][j] >= 1.0) || !std::isfinite(spec.ratios[k][j]))
                throw std::invalid_argument(
                    "local spec: cumulative ratios must be finite and at least 1");
        if (std::fabs(spec.ratios[k][k] - 1.0) > 1e-12)
            throw std::invalid_argument("local spec: diagonal ratio entries must equal 1");
    }

    // sizes implied by the last row, then every row checked against them
    const std::vector<double>& last = spec.ratios[K - 1];
    std::vector<double> cum(K);
    for (int j = 0; j < K; ++j) cum[j] = last[0] / last[j];
    for (int j = 1; j < K; ++j)
        if (!(cum[j] > cum[j - 1] * (1.0 + 1e-12)))
            throw std::invalid_argument(
                "local spec: implied cumulative sizes must be strictly increasing");
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j <= k; ++j) {
            double expect = cum[k] / cum[j];
            if (std::fabs(spec.ratios[k][j] - expect) > 1e-9 * expect) {
                std::ostringstream msg;
                msg << "local spec: ratio entry (" << (k + 1) << "," << (j + 1) << ")="
                    << spec.ratios[k][j] << " inconsistent with the last row (expected "
                    << expect << ")";
                throw std::invalid_argument(msg.str());
            }
        }
    }
    return cum;
}

namespace {

Schedule limit_schedule(const LocalAltSpec& spec) {
    Schedule s;
    s.cum = relative_sizes(spec);
    s.c = spec.boundary;
    s.c.push_back(std::numeric_limits<double>::infinity());
    return s;
}

// CDF of the stopped centered statistic for a schedule run at drift theta:
// each stage's component is evaluated at its own shifted point
// v + theta*sqrt(n_(k)).
double centered_cdf(const Schedule& s, double theta, double v, EngineGrid g) {
    int K = s.stages();
    auto shifted = [&](int k) { return v + theta * std::sqrt(s.cum[k - 1]); };
    auto stage1_cdf = [&](double x) { return norm_cdf(x - theta * std::sqrt(s.cum[0])); };

    if (K == 1) return stage1_cdf(shifted(1));

    double total = 0.0;
    double v1 = shifted(1);
    if (v1 > s.c[0]) total += std::max(0.0, stage1_cdf(v1) - stage1_cdf(s.c[0]));

    StageDensity dens = initial_density(s, theta, g);
    for (int k = 2; k <= K; ++k) {
        if (k > 2) dens = propagate(dens, s, theta, g);
        double vk = shifted(k);
        if (k < K) {
            if (vk > s.c[k - 1])
                total += std::max(0.0, reach_cdf(dens, s, theta, vk) -
                                           reach_cdf(dens, s, theta, s.c[k - 1]));
        } else {
            total += reach_cdf(dens, s, theta, vk);
        }
    }
    return total;
}

}  // namespace

std::vector<double> limit_stop_probs(const LocalAltSpec& spec, EngineGrid g) {
    Schedule s = limit_schedule(spec);
    return stopping_probabilities(s, spec.h, g).stop_prob;
}

double mixture_cdf_two_stage(const LocalAltSpec& spec, double v) {
    if (spec.stages() != 2)
        throw std::invalid_argument("mixture_cdf_two_stage: spec must have two stages");
    std::vector<double> cum = relative_sizes(spec);
    double r = cum[1];
    double c1 = spec.boundary[0];
    double h = spec.h;

    double total = 0.0;
    double upper;
    if (std::isfinite(c1)) {
        // crossing slice at stage 1
        if (v + h > c1) total += std::max(0.0, norm_cdf(v) - norm_cdf(c1 - h));
        upper = c1 - h;
    } else {
        upper = 8.5;
    }
    if (upper <= -8.5) return total;

    // continuation: y = Z_(1) - h is standard normal below c1 - h, and the
    // second-stage increment contributes the remaining variance r - 1
    double rr = std::sqrt(r);
    double sd = std::sqrt(r - 1.0);
    QuadratureGrid grid = make_grid(-8.5, upper, 256, 16);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double y = grid.nodes[i];
        total += grid.weights[i] * norm_pdf(y) * norm_cdf((rr * v - y) / sd);
    }
    return total;
}

double mixture_cdf_k_stage(const LocalAltSpec& spec, double v, EngineGrid g) {
    Schedule s = limit_schedule(spec);
    return centered_cdf(s, spec.h, v, g);
}

double finite_centered_cdf(const Design& d, double h, double v, EngineGrid g) {
    double theta = h / std::sqrt(double(d.n[0]));
    Schedule s = schedule_of(d);
    return centered_cdf(s, theta, v, g);
}

std::vector<ConvergenceRow> convergence_check(const Design& d, double h,
                                              const std::vector<long>& scales,
                                              const std::vector<double>& v_grid,
                                              EngineGrid g) {
    if (scales.empty() || v_grid.empty())
        throw std::invalid_argument("convergence_check: need scales and a v grid");
    LocalAltSpec spec = local_spec_of(d, h);
    std::vector<double> limit(v_grid.size());
    for (std::size_t i = 0; i < v_grid.size(); ++i)
        limit[i] = mixture_cdf_k_stage(spec, v_grid[i], g);

    std::vector<ConvergenceRow> rows;
    for (long m : scales) {
        if (m < 1) throw std::invalid_argument("convergence_check: scales must be positive");
        std::vector<int> n(d.n);
        for (int& x : n) x = static_cast<int>(x * m);
        Design scaled(n, d.c);
        double sup = 0.0;
        for (std::size_t i = 0; i < v_grid.size(); ++i)
            sup = std::max(sup, std::fabs(finite_centered_cdf(scaled, h, v_grid[i], g) - limit[i]));
        rows.push_back(ConvergenceRow{m, sup});
    }
    return rows;
}

std::vector<ConvergenceRow> convergence_check_mc(const Design& d, double h,
                                                 const std::vector<long>& scales,
                                                 const std::vector<double>& v_grid,
                                                 long reps, std::uint64_t seed) {
    if (scales.empty() || v_grid.empty() || reps < 1)
        throw std::invalid_argument("convergence_check_mc: need scales, a v grid and reps");
    LocalAltSpec spec = local_spec_of(d, h);
    std::vector<double> limit(v_grid.size());
    for (std::size_t i = 0; i < v_grid.size(); ++i)
        limit[i] = mixture_cdf_k_stage(spec, v_grid[i]);

    int K = d.stages();
    std::vector<ConvergenceRow> rows;
    for (std::size_t si = 0; si < scales.size(); ++si) {
        long m = scales[si];
        if (m < 1)
            throw std::invalid_argument("convergence_check_mc: scales must be positive");
        std::vector<double> cum(K);
        for (int k = 0; k < K; ++k) cum[k] = double(d.cum[k]) * m;
        double theta = h / std::sqrt(double(d.n[0]) * m);

        std::vector<long> below(v_grid.size(), 0);
        for (long rep = 0; rep < reps; ++rep) {
            // one stream per (scale, replicate)
            RngStream rng = derive_stream(seed + 0x1000003ULL * si, rep);
            double sum = 0.0;
            double z = 0.0, shift = 0.0;
            for (int k = 0; k < K; ++k) {
                long nk = static_cast<long>(d.n[k]) * m;
                // centered exponential increments, unit variance
                for (long i = 0; i < nk; ++i) sum += -std::log(rng.next_uniform()) - 1.0;
                z = (sum + theta * cum[k]) / std::sqrt(cum[k]);
                shift = theta * std::sqrt(cum[k]);
                if (k < K - 1 && z > d.c[k]) break;
            }
            double vstat = z - shift;
            for (std::size_t i = 0; i < v_grid.size(); ++i)
                if (vstat <= v_grid[i]) below[i]++;
        }
        double sup = 0.0;
        for (std::size_t i = 0; i < v_grid.size(); ++i)
            sup = std::max(sup, std::fabs(double(below[i]) / reps - limit[i]));
        rows.push_back(ConvergenceRow{m, sup});
    }
    return rows;
}

}  // namespace gsmix
