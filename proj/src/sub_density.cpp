#include "gsmix/sub_density.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gsmix {

namespace {

// Half-width of the integration window in standard deviations. Mass beyond
// this is below 1e-16 and is dropped.
constexpr double kTrunc = 8.5;

void check_schedule(const Schedule& s) {
    int k = s.stages();
    if (k < 1) throw std::invalid_argument("schedule: needs at least one stage");
    if (static_cast<int>(s.c.size()) != k)
        throw std::invalid_argument("schedule: boundary count must match stage count");
    double prev = 0.0;
    for (int i = 0; i < k; ++i) {
        if (!(s.cum[i] > prev) || !std::isfinite(s.cum[i]))
            throw std::invalid_argument("schedule: cumulative sizes must be finite and increasing");
        prev = s.cum[i];
        // +infinity disables stopping (or rejection, at the last stage)
        if (std::isnan(s.c[i]) || s.c[i] == -std::numeric_limits<double>::infinity())
            throw std::invalid_argument("schedule: boundaries must be numbers above -infinity");
    }
}

// Conditional transition Z_(k) | Z_(k-1)=s is normal with mean a*s + b and
// variance v2, where a, b, v2 depend only on the cumulative sizes.
struct Transition {
    double a;
    double b;
    double sd;
};

Transition transition_params(const Schedule& s, double theta, int next_stage) {
    double nk = s.cum[next_stage - 1];
    double nprev = s.cum[next_stage - 2];
    Transition t;
    t.a = std::sqrt(nprev / nk);
    t.b = theta * (nk - nprev) / std::sqrt(nk);
    t.sd = std::sqrt((nk - nprev) / nk);
    return t;
}

QuadratureGrid stage_grid(const Schedule& s, double theta, int stage, EngineGrid g) {
    double drift = theta * std::sqrt(s.cum[stage - 1]);
    double c = s.c[stage - 1];
    double hi = std::isfinite(c) ? c : drift + kTrunc;
    double lo = std::min(hi, drift) - kTrunc;
    return make_grid(lo, hi, g.panels, g.points);
}

}  // namespace

Design::Design(std::vector<int> n_, std::vector<double> c_) : n(std::move(n_)), c(std::move(c_)) {
    if (n.empty()) throw std::invalid_argument("design: needs at least one stage");
    if (c.size() != n.size())
        throw std::invalid_argument("design: boundary count must match stage count");
    cum.resize(n.size());
    long long total = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] < 1) throw std::invalid_argument("design: stage sizes must be positive");
        // +infinity is allowed and disables stopping (or rejection) at that stage
        if (std::isnan(c[i]) || c[i] == -std::numeric_limits<double>::infinity())
            throw std::invalid_argument("design: boundaries must be numbers above -infinity");
        total += n[i];
        cum[i] = static_cast<double>(total);
    }
}

Schedule schedule_of(const Design& d) { return Schedule{d.cum, d.c}; }

double StageDensity::mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += grid.weights[i] * values[i];
    return m;
}

StageDensity initial_density(const Schedule& s, double theta, EngineGrid g) {
    check_schedule(s);
    StageDensity d;
    d.stage = 1;
    d.grid = stage_grid(s, theta, 1, g);
    double drift = theta * std::sqrt(s.cum[0]);
    d.values.resize(d.grid.size());
    for (std::size_t i = 0; i < d.grid.size(); ++i)
        d.values[i] = norm_pdf(d.grid.nodes[i] - drift);
    return d;
}

StageDensity propagate(const StageDensity& prev, const Schedule& s, double theta,
                       EngineGrid g) {
    int k = prev.stage + 1;
    if (k > s.stages())
        throw std::invalid_argument("propagate: no stage beyond the last");
    Transition tr = transition_params(s, theta, k);
    StageDensity d;
    d.stage = k;
    d.grid = stage_grid(s, theta, k, g);
    d.values.assign(d.grid.size(), 0.0);
    for (std::size_t j = 0; j < prev.grid.size(); ++j) {
        double w = prev.grid.weights[j] * prev.values[j];
        if (w == 0.0) continue;
        double mean = tr.a * prev.grid.nodes[j] + tr.b;
        for (std::size_t i = 0; i < d.grid.size(); ++i)
            d.values[i] += w * norm_pdf((d.grid.nodes[i] - mean) / tr.sd) / tr.sd;
    }
    return d;
}

double reach_cdf(const StageDensity& prev, const Schedule& s, double theta, double v) {
    Transition tr = transition_params(s, theta, prev.stage + 1);
    double p = 0.0;
    for (std::size_t j = 0; j < prev.grid.size(); ++j) {
        double w = prev.grid.weights[j] * prev.values[j];
        p += w * norm_cdf((v - tr.a * prev.grid.nodes[j] - tr.b) / tr.sd);
    }
    return p;
}

double density_at(const StageDensity& prev, const Schedule& s, double theta, double t) {
    Transition tr = transition_params(s, theta, prev.stage + 1);
    double f = 0.0;
    for (std::size_t j = 0; j < prev.grid.size(); ++j) {
        double w = prev.grid.weights[j] * prev.values[j];
        f += w * norm_pdf((t - tr.a * prev.grid.nodes[j] - tr.b) / tr.sd) / tr.sd;
    }
    return f;
}

StageDensity continuation_density(const Schedule& s, double theta, int stage, EngineGrid g) {
    if (stage < 1 || stage > s.stages())
        throw std::invalid_argument("continuation_density: stage out of range");
    StageDensity d = initial_density(s, theta, g);
    for (int k = 2; k <= stage; ++k) d = propagate(d, s, theta, g);
    return d;
}

StopReport stopping_probabilities(const Schedule& s, double theta, EngineGrid g) {
    check_schedule(s);
    int K = s.stages();
    StopReport r;
    r.stop_prob.assign(K, 0.0);
    r.reject_prob.assign(K, 0.0);
    r.cum_reject.assign(K, 0.0);

    if (K == 1) {
        r.stop_prob[0] = 1.0;
        r.reject_prob[0] = std::isfinite(s.c[0]) ? norm_sf(s.c[0] - theta * std::sqrt(s.cum[0])) : 0.0;
        r.cum_reject[0] = r.reject_prob[0];
        return r;
    }

    StageDensity d = initial_density(s, theta, g);
    double reach = 1.0;
    for (int k = 1; k < K; ++k) {
        if (k > 1) d = propagate(d, s, theta, g);
        double cont = d.mass();
        r.stop_prob[k - 1] = reach - cont;
        r.reject_prob[k - 1] = reach - cont;
        reach = cont;
    }
    r.stop_prob[K - 1] = reach;
    if (std::isfinite(s.c[K - 1]))
        r.reject_prob[K - 1] = reach - reach_cdf(d, s, theta, s.c[K - 1]);

    double acc = 0.0;
    for (int k = 0; k < K; ++k) {
        acc += r.reject_prob[k];
        r.cum_reject[k] = acc;
    }
    return r;
}

StopReport stopping_probabilities(const Design& d, double theta, EngineGrid g) {
    return stopping_probabilities(schedule_of(d), theta, g);
}

std::vector<double> mixture_components(const Schedule& s, double theta, double v,
                                       EngineGrid g) {
    check_schedule(s);
    int K = s.stages();
    std::vector<double> comp(K, 0.0);

    auto stage1_cdf = [&](double x) { return norm_cdf(x - theta * std::sqrt(s.cum[0])); };

    // Terminal stage contributes its full reached-CDF; an interim stage k
    // contributes only the crossing slice (F_k(v) - F_k(c_k))+ since stopping
    // there requires Z > c_k.
    if (K == 1) {
        comp[0] = stage1_cdf(v);
        return comp;
    }

    if (v > s.c[0]) comp[0] = std::max(0.0, stage1_cdf(v) - stage1_cdf(s.c[0]));

    StageDensity d = initial_density(s, theta, g);
    for (int k = 2; k <= K; ++k) {
        if (k > 2) d = propagate(d, s, theta, g);
        if (k < K) {
            double ck = s.c[k - 1];
            if (v > ck)
                comp[k - 1] =
                    std::max(0.0, reach_cdf(d, s, theta, v) - reach_cdf(d, s, theta, ck));
        } else {
            comp[k - 1] = reach_cdf(d, s, theta, v);
        }
    }
    return comp;
}

double mixture_cdf(const Schedule& s, double theta, double v, EngineGrid g) {
    std::vector<double> comp = mixture_components(s, theta, v, g);
    double t = 0.0;
    for (double x : comp) t += x;
    return t;
}

double mixture_cdf(const Design& d, double theta, double v, EngineGrid g) {
    return mixture_cdf(schedule_of(d), theta, v, g);
}

double expected_sample_size(const Design& d, double theta, EngineGrid g) {
    StopReport r = stopping_probabilities(d, theta, g);
    double e = 0.0;
    for (int k = 0; k < d.stages(); ++k) e += d.cum[k] * r.stop_prob[k];
    return e;
}

}  // namespace gsmix
