#include "gsmix/design.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gsmix {

void DesignSpec::validate() const {
    if (k < 1) throw std::invalid_argument("design spec: k must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("design spec: alpha must lie in (0,1)");
    if (!(power > 0.0 && power < 1.0))
        throw std::invalid_argument("design spec: power must lie in (0,1)");
    if (static_cast<int>(alternatives.size()) != k)
        throw std::invalid_argument("design spec: need one alternative per stage");
    for (int i = 0; i < k; ++i) {
        if (!(alternatives[i] > 0.0))
            throw std::invalid_argument("design spec: alternatives must be positive");
        if (i > 0 && !(alternatives[i] < alternatives[i - 1]))
            throw std::invalid_argument("design spec: alternatives must be strictly decreasing");
    }
    if (!alphas.empty()) {
        if (static_cast<int>(alphas.size()) != k)
            throw std::invalid_argument("design spec: need one conditional level per stage");
        for (double a : alphas)
            if (!(a > 0.0 && a < 1.0))
                throw std::invalid_argument("design spec: conditional levels must lie in (0,1)");
    }
}

double solve_alpha0(double alpha, int k) {
    if (!(alpha > 0.0 && alpha < 1.0) || k < 1)
        throw std::invalid_argument("solve_alpha0: need alpha in (0,1) and k >= 1");
    return 1.0 - std::pow(1.0 - alpha, 1.0 / k);
}

std::vector<double> DesignSpec::resolved_alphas() const {
    if (!alphas.empty()) return alphas;
    return std::vector<double>(k, solve_alpha0(alpha, k));
}

namespace {

// Smallest n in [1, cap] with pred(n) true, assuming pred is monotone in n.
// Returns cap+1 when even cap fails.
int smallest_n(const std::function<bool(int)>& pred, int start, int cap) {
    int hi = std::min(std::max(start, 1), cap);
    if (pred(hi)) {
        int lo = 1;
        // pred(hi) holds; shrink
        while (lo < hi) {
            int mid = lo + (hi - lo) / 2;
            if (pred(mid))
                hi = mid;
            else
                lo = mid + 1;
        }
        return hi;
    }
    int lo = hi;  // pred(lo) false
    while (hi < cap) {
        hi = std::min(cap, hi * 2 + 1);
        if (pred(hi)) break;
        lo = hi;
    }
    if (!pred(hi)) return cap + 1;
    while (lo + 1 < hi) {
        int mid = lo + (hi - lo) / 2;
        if (pred(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return hi;
}

}  // namespace

StageSolution solve_stage_k(const std::vector<int>& n_prev, const std::vector<double>& c_prev,
                            const DesignSpec& spec, int stage, EngineGrid g, int n_cap) {
    spec.validate();
    if (stage < 1 || stage > spec.k)
        throw std::invalid_argument("solve_stage_k: stage out of range");
    if (static_cast<int>(n_prev.size()) != stage - 1 || c_prev.size() != n_prev.size())
        throw std::invalid_argument("solve_stage_k: need exactly the earlier stages");

    std::vector<double> alphas = spec.resolved_alphas();
    double target = spec.power;
    double theta_k = spec.alternatives[stage - 1];

    if (stage == 1) {
        double c1 = norm_quantile(1.0 - alphas[0]);
        auto ok = [&](int n) { return norm_sf(c1 - theta_k * std::sqrt(double(n))) >= target; };
        double zp = norm_quantile(target);
        int guess = static_cast<int>(std::ceil(std::pow((c1 + zp) / theta_k, 2)));
        int n1 = smallest_n(ok, guess, n_cap);
        if (n1 > n_cap)
            throw InfeasibleError(1, norm_sf(c1 - theta_k * std::sqrt(double(n_cap))),
                                  "solve_stage_k: stage 1 power unreachable within size cap");
        return StageSolution{n1, c1, norm_sf(c1 - theta_k * std::sqrt(double(n1)))};
    }

    // Earlier stages as a schedule; the stage being solved is appended per
    // candidate size.
    std::vector<double> cum(stage - 1);
    double tot = 0.0;
    for (int i = 0; i < stage - 1; ++i) {
        tot += n_prev[i];
        cum[i] = tot;
    }
    Schedule prev_sched{cum, c_prev};
    StageDensity d_null = continuation_density(prev_sched, 0.0, stage - 1, g);
    StageDensity d_alt = continuation_density(prev_sched, theta_k, stage - 1, g);
    double reach_null = d_null.mass();
    double alpha_k = alphas[stage - 1];

    double c_solved = 0.0, power_solved = 0.0;
    auto eval = [&](int n) {
        std::vector<double> cum_ext = cum;
        cum_ext.push_back(tot + n);
        std::vector<double> c_ext = c_prev;
        c_ext.push_back(std::numeric_limits<double>::infinity());
        Schedule ext{cum_ext, c_ext};
        // boundary from the conditional level spent at this look
        auto level_gap = [&](double c) {
            double cross = reach_null - reach_cdf(d_null, ext, 0.0, c);
            return cross - alpha_k * reach_null;
        };
        double c = find_root(level_gap, -10.0, 12.0, 1e-11);
        double cont = reach_cdf(d_alt, ext, theta_k, c);
        c_solved = c;
        power_solved = 1.0 - cont;
        return power_solved >= target;
    };

    int start = n_prev[stage - 2];
    int n = smallest_n(eval, start, n_cap);
    if (n > n_cap) {
        eval(n_cap);
        std::ostringstream msg;
        msg << "solve_stage_k: stage " << stage << " cumulative power "
            << power_solved << " below target " << target << " even at size cap " << n_cap;
        throw InfeasibleError(stage, power_solved, msg.str());
    }
    eval(n);  // refresh outputs for the accepted size
    return StageSolution{n, c_solved, power_solved};
}

OcRow oc_row(const Design& d, double theta, EngineGrid g) {
    StopReport r = stopping_probabilities(d, theta, g);
    OcRow row;
    row.theta = theta;
    row.stop_prob = r.stop_prob;
    row.reject_prob = r.reject_prob;
    row.cum_reject = r.cum_reject;
    row.expected_n = 0.0;
    for (int k = 0; k < d.stages(); ++k) row.expected_n += d.cum[k] * r.stop_prob[k];
    return row;
}

DesignSolution solve_design(const DesignSpec& spec, EngineGrid g, int n_cap) {
    spec.validate();
    std::vector<int> n;
    std::vector<double> c;
    std::vector<double> attained;
    for (int stage = 1; stage <= spec.k; ++stage) {
        StageSolution s = solve_stage_k(n, c, spec, stage, g, n_cap);
        n.push_back(s.n);
        c.push_back(s.c);
        attained.push_back(s.attained_power);
    }
    DesignSolution sol{Design(n, c), spec.resolved_alphas(), attained, {}};
    sol.summary.push_back(oc_row(sol.design, 0.0, g));
    for (double th : spec.alternatives) sol.summary.push_back(oc_row(sol.design, th, g));
    return sol;
}

ValidationReport validate_design(const Design& d, const DesignSpec& spec, EngineGrid g,
                                 double level_tol, double power_slack) {
    spec.validate();
    if (d.stages() != spec.k)
        throw std::invalid_argument("validate_design: stage count mismatch");

    ValidationReport rep;
    Schedule s = schedule_of(d);
    StopReport null_report = stopping_probabilities(s, 0.0, g);
    rep.overall_alpha = null_report.cum_reject.back();
    if (std::fabs(rep.overall_alpha - spec.alpha) > level_tol) {
        rep.pass = false;
        std::ostringstream msg;
        msg << "overall level " << rep.overall_alpha << " differs from " << spec.alpha
            << " by more than " << level_tol;
        rep.failures.push_back(msg.str());
    }
    for (int k = 1; k <= spec.k; ++k) {
        double th = spec.alternatives[k - 1];
        double cont = continuation_density(s, th, k, g).mass();
        double pw = 1.0 - cont;
        rep.power_at_alternatives.push_back(pw);
        if (pw < spec.power - power_slack) {
            rep.pass = false;
            std::ostringstream msg;
            msg << "cumulative power " << pw << " at alternative " << th << " (stage " << k
                << ") below " << spec.power << " - " << power_slack;
            rep.failures.push_back(msg.str());
        }
    }
    return rep;
}

}  // namespace gsmix
