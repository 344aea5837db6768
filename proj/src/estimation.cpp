#include "gsmix/estimation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gsmix/simulation.hpp"

namespace gsmix {

namespace {

// hazard ratios phi/sf and phi/Phi used by the tail-stop score terms
double lambda_upper(double x) {
    double s = norm_sf(x);
    if (s <= 0.0) throw std::runtime_error("tail ratio underflow");
    return norm_pdf(x) / s;
}

double lambda_lower(double x) {
    double s = norm_cdf(x);
    if (s <= 0.0) throw std::runtime_error("tail ratio underflow");
    return norm_pdf(x) / s;
}

void check_stage(const Design& d, int stage) {
    if (stage < 1 || stage > d.stages())
        throw std::invalid_argument("stage out of range for the design");
}

}  // namespace

TrialOutcome make_outcome(const Design& d, const std::vector<double>& stage_means) {
    int m = static_cast<int>(stage_means.size());
    if (m < 1 || m > d.stages())
        throw std::invalid_argument("make_outcome: need 1..K stage means");

    TrialOutcome o;
    o.design = d;
    o.stop_stage = m;
    o.stage_means = stage_means;
    o.cumulative_z.resize(m);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
        sum += d.n[j] * stage_means[j];
        o.cumulative_z[j] = sum / std::sqrt(d.cum[j]);
    }
    for (int j = 0; j < m - 1; ++j) {
        if (o.cumulative_z[j] > d.c[j]) {
            std::ostringstream msg;
            msg << "inconsistent path: boundary crossed at stage " << (j + 1)
                << " (z=" << o.cumulative_z[j] << " > c=" << d.c[j] << ") but data continue";
            throw PathError(j + 1, msg.str());
        }
    }
    if (m < d.stages() && !(o.cumulative_z[m - 1] > d.c[m - 1])) {
        std::ostringstream msg;
        msg << "inconsistent path: stopped at stage " << m << " with z=" << o.cumulative_z[m - 1]
            << " not above c=" << d.c[m - 1];
        throw PathError(m, msg.str());
    }
    return o;
}

MleResult mle_unconditional(const TrialOutcome& o) {
    MleResult r;
    r.kind = MleKind::Unconditional;
    int m = o.stop_stage;
    r.estimate = o.cumulative_z[m - 1] / std::sqrt(o.design.cum[m - 1]);
    return r;
}

double log_stop_prob(const Design& d, int stage, double theta, EngineGrid g) {
    check_stage(d, stage);
    int K = d.stages();
    if (K == 1) return 0.0;
    double rn1 = std::sqrt(d.cum[0]);
    if (stage == 1) {
        double p = norm_sf(d.c[0] - theta * rn1);
        if (p <= 0.0) throw std::runtime_error("log_stop_prob: stage 1 probability underflow");
        return std::log(p);
    }
    if (K == 2) {
        double p = norm_cdf(d.c[0] - theta * rn1);
        if (p <= 0.0) throw std::runtime_error("log_stop_prob: stage 2 probability underflow");
        return std::log(p);
    }
    double p = stopping_probabilities(d, theta, g).stop_prob[stage - 1];
    if (p < 1e-300) {
        std::ostringstream msg;
        msg << "log_stop_prob: stage " << stage << " probability underflow";
        throw std::runtime_error(msg.str());
    }
    return std::log(p);
}

double dlog_stop_prob(const Design& d, int stage, double theta, EngineGrid g) {
    check_stage(d, stage);
    int K = d.stages();
    if (K == 1) return 0.0;
    double rn1 = std::sqrt(d.cum[0]);
    if (stage == 1) return rn1 * lambda_upper(d.c[0] - theta * rn1);
    if (K == 2) return -rn1 * lambda_lower(d.c[0] - theta * rn1);
    double h = 1e-5;
    return (log_stop_prob(d, stage, theta + h, g) - log_stop_prob(d, stage, theta - h, g)) /
           (2.0 * h);
}

double d2log_stop_prob(const Design& d, int stage, double theta, EngineGrid g) {
    check_stage(d, stage);
    if (d.stages() == 1) return 0.0;
    auto lp = [&](double t) { return log_stop_prob(d, stage, t, g); };
    // central second difference with one Richardson refinement
    double h = 1e-4;
    double f0 = lp(theta);
    double dh = (lp(theta + h) - 2.0 * f0 + lp(theta - h)) / (h * h);
    double h2 = h / 2.0;
    double dh2 = (lp(theta + h2) - 2.0 * f0 + lp(theta - h2)) / (h2 * h2);
    return (4.0 * dh2 - dh) / 3.0;
}

MleResult mle_conditional(const TrialOutcome& o, EngineGrid g) {
    const Design& d = o.design;
    int m = o.stop_stage;
    double nm = d.cum[m - 1];
    double u = o.cumulative_z[m - 1] / std::sqrt(nm);

    MleResult r;
    r.kind = MleKind::Conditional;
    if (d.stages() == 1) {
        r.estimate = u;
        return r;
    }

    double half = 10.0 / std::sqrt(d.cum[0]);
    double lo = u - half, hi = u + half;
    r.bracket_lo = lo;
    r.bracket_hi = hi;

    auto score = [&](double th) { return nm * (u - th) - dlog_stop_prob(d, m, th, g); };
    double slo = score(lo), shi = score(hi);
    if (slo > 0.0 && shi < 0.0) {
        r.estimate = find_root(score, lo, hi, 1e-11);
        return r;
    }
    if (slo == 0.0) {
        r.estimate = lo;
        return r;
    }
    if (shi == 0.0) {
        r.estimate = hi;
        return r;
    }
    // No interior maximum: take the edge with the higher conditional
    // log-likelihood.
    auto loglik = [&](double th) {
        return -0.5 * nm * (th - u) * (th - u) - log_stop_prob(d, m, th, g);
    };
    r.diverged = true;
    r.estimate = (loglik(lo) >= loglik(hi)) ? lo : hi;
    return r;
}

ObservedInfo observed_info(const TrialOutcome& o, double theta, EngineGrid g) {
    ObservedInfo info;
    double nm = o.design.cum[o.stop_stage - 1];
    info.i = nm;
    info.i_fixed = nm;
    info.i_conditional = nm + d2log_stop_prob(o.design, o.stop_stage, theta, g);
    return info;
}

InfoReport expected_info(const Design& d, double theta, EngineGrid g) {
    InfoReport rep;
    rep.theta = theta;
    rep.stop_prob = stopping_probabilities(d, theta, g).stop_prob;
    int K = d.stages();
    for (int k = 1; k <= K; ++k) {
        double nk = d.cum[k - 1];
        rep.stage_i.push_back(nk);
        rep.stage_i_fixed.push_back(nk);
        // a stage that is (almost) never reached carries no curvature weight
        if (rep.stop_prob[k - 1] < 1e-12)
            rep.stage_i_conditional.push_back(nk);
        else
            rep.stage_i_conditional.push_back(nk + d2log_stop_prob(d, k, theta, g));
    }
    for (int k = 0; k < K; ++k) {
        rep.overall_i += rep.stop_prob[k] * rep.stage_i[k];
        rep.overall_i_conditional += rep.stop_prob[k] * rep.stage_i_conditional[k];
        rep.overall_i_fixed += rep.stop_prob[k] * rep.stage_i_fixed[k];
        rep.frac_adapted.push_back(rep.stage_i[k] / rep.stage_i[K - 1]);
        rep.frac_fixed.push_back(rep.stage_i_fixed[k] / rep.stage_i_fixed[K - 1]);
    }
    rep.info_loss = rep.overall_i - rep.overall_i_conditional;
    return rep;
}

namespace {

struct RegionMoments {
    double mass = 0.0;  // kept probability mass
    double m1 = 0.0;
    double m2 = 0.0;
};

StageMoments finish_row(int stage, double pr_stage, const RegionMoments& rm, double theta) {
    StageMoments s;
    s.stage = stage;
    s.pr_stage = pr_stage;
    if (pr_stage > 0.0)
        s.divergence_rate = std::max(0.0, (pr_stage - rm.mass) / pr_stage);
    if (rm.mass > 0.0) {
        double mean = rm.m1 / rm.mass;
        double second = rm.m2 / rm.mass;
        s.bias = mean - theta;
        s.sd = std::sqrt(std::max(0.0, second - mean * mean));
        s.mse = std::max(0.0, second - 2.0 * theta * mean + theta * theta);
    }
    return s;
}

// Two-stage conditional-estimator moments by integrating the score root
// over each stopping region. The divergence boundary (where the root leaves
// the bracket) is located exactly and the region beyond it excluded.
void conditional_moments_two_stage(const Design& d, double theta, EngineGrid g,
                                   RegionMoments& rm1, RegionMoments& rm2) {
    double n1 = d.cum[0], n2cum = d.cum[1];
    double rn1 = std::sqrt(n1), rn2 = std::sqrt(n2cum);
    double c1 = d.c[0];
    double delta1 = theta * rn1;
    double half = 10.0 / rn1;

    // stop at stage 1: density of z1 on (c1, inf) is the untruncated normal
    {
        double hi = std::max(c1, delta1) + 8.5;
        auto score_at_lo = [&](double z) {
            return n1 * half - rn1 * lambda_upper(c1 - z + half * rn1);
        };
        double zstar;
        if (score_at_lo(c1) >= 0.0)
            zstar = c1;
        else if (score_at_lo(hi) <= 0.0)
            zstar = hi;
        else
            zstar = find_root(score_at_lo, c1, hi, 1e-11);

        if (zstar < hi - 1e-12) {
            QuadratureGrid grid = make_grid(zstar, hi, g.panels, g.points);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                double z = grid.nodes[i];
                double u = z / rn1;
                auto score = [&](double th) {
                    return n1 * (u - th) - rn1 * lambda_upper(c1 - th * rn1);
                };
                double root = find_root(score, u - half, u + half, 1e-10);
                double w = grid.weights[i] * norm_pdf(z - delta1);
                rm1.mass += w;
                rm1.m1 += w * root;
                rm1.m2 += w * root * root;
            }
        }
    }

    // stop at stage 2: integrate over the terminal statistic
    {
        Schedule s = schedule_of(d);
        StageDensity d1 = continuation_density(s, theta, 1, g);
        double a = rn1 / rn2;
        double b = theta * (n2cum - n1) / rn2;
        double lo_t = a * d1.grid.lower + b - 8.5;
        double hi_t = a * c1 + b + 8.5;
        auto score_at_hi = [&](double t) {
            double u = t / rn2;
            return -n2cum * half + rn1 * lambda_lower(c1 - (u + half) * rn1);
        };
        double tstar;
        if (score_at_hi(hi_t) <= 0.0)
            tstar = hi_t;
        else if (score_at_hi(lo_t) >= 0.0)
            tstar = lo_t;
        else
            tstar = find_root(score_at_hi, lo_t, hi_t, 1e-11);

        if (tstar > lo_t + 1e-12) {
            QuadratureGrid grid = make_grid(lo_t, tstar, g.panels, g.points);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                double t = grid.nodes[i];
                double u = t / rn2;
                auto score = [&](double th) {
                    return n2cum * (u - th) + rn1 * lambda_lower(c1 - th * rn1);
                };
                double root = find_root(score, u - half, u + half, 1e-10);
                double w = grid.weights[i] * density_at(d1, s, theta, t);
                rm2.mass += w;
                rm2.m1 += w * root;
                rm2.m2 += w * root * root;
            }
        }
    }
}

}  // namespace

MomentsReport estimator_moments(const Design& d, double theta, MleKind kind,
                                MomentMethod method, long reps, std::uint64_t seed,
                                EngineGrid g) {
    if (method == MomentMethod::MonteCarlo) {
        SimConfig cfg(d);
        cfg.theta = theta;
        cfg.reps = reps;
        cfg.master_seed = seed;
        cfg.collect.estimators = true;
        SimResult res = run_estimator_study(cfg);
        return summarize_moments(res, d, theta, kind);
    }

    int K = d.stages();
    if (K > 2)
        throw std::invalid_argument(
            "estimator_moments: quadrature path covers at most two stages");

    MomentsReport rep;
    rep.kind = kind;

    if (K == 1) {
        StageMoments s;
        s.stage = 1;
        s.pr_stage = 1.0;
        s.sd = 1.0 / std::sqrt(d.cum[0]);
        s.mse = s.sd * s.sd;
        rep.per_stage.push_back(s);
        rep.overall = s;
        rep.overall.stage = 0;
        return rep;
    }

    double rn1 = std::sqrt(d.cum[0]);
    double c1 = d.c[0];
    double delta1 = theta * rn1;
    double p1 = norm_sf(c1 - delta1);
    double p2 = 1.0 - p1;

    RegionMoments rm1, rm2;
    if (kind == MleKind::Unconditional) {
        // closed truncated normal forms
        double alpha = c1 - delta1;
        if (p1 > 0.0) {
            double lam = norm_pdf(alpha) / p1;
            double ez = delta1 + lam;
            double vz = 1.0 + alpha * lam - lam * lam;
            double mean = ez / rn1;
            double var = vz / d.cum[0];
            rm1.mass = p1;
            rm1.m1 = p1 * mean;
            rm1.m2 = p1 * (var + mean * mean);
        }
        if (p2 > 0.0) {
            double lam = norm_pdf(alpha) / p2;
            double ez1 = delta1 - lam;
            double vz1 = 1.0 - alpha * lam - lam * lam;
            double n2 = d.cum[1] - d.cum[0];
            double mean = (rn1 * ez1 + n2 * theta) / d.cum[1];
            double var = (d.cum[0] * vz1 + n2) / (d.cum[1] * d.cum[1]);
            rm2.mass = p2;
            rm2.m1 = p2 * mean;
            rm2.m2 = p2 * (var + mean * mean);
        }
    } else {
        conditional_moments_two_stage(d, theta, g, rm1, rm2);
    }

    rep.per_stage.push_back(finish_row(1, p1, rm1, theta));
    rep.per_stage.push_back(finish_row(2, p2, rm2, theta));
    RegionMoments all;
    all.mass = rm1.mass + rm2.mass;
    all.m1 = rm1.m1 + rm2.m1;
    all.m2 = rm1.m2 + rm2.m2;
    rep.overall = finish_row(0, 1.0, all, theta);
    return rep;
}

bool mlr_check(const Design& d, double theta_hi, double theta_lo, int stage,
               const std::vector<double>& grid, double slack, EngineGrid g) {
    check_stage(d, stage);
    if (!(theta_hi > theta_lo))
        throw std::invalid_argument("mlr_check: need theta_hi > theta_lo");
    if (grid.size() < 2) throw std::invalid_argument("mlr_check: need at least two points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("mlr_check: grid must be increasing");

    Schedule s = schedule_of(d);
    std::vector<double> la(grid.size()), lb(grid.size());
    if (stage == 1) {
        double d1a = theta_hi * std::sqrt(s.cum[0]);
        double d1b = theta_lo * std::sqrt(s.cum[0]);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            la[i] = std::log(norm_pdf(grid[i] - d1a));
            lb[i] = std::log(norm_pdf(grid[i] - d1b));
        }
    } else {
        StageDensity pa = continuation_density(s, theta_hi, stage - 1, g);
        StageDensity pb = continuation_density(s, theta_lo, stage - 1, g);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double fa = density_at(pa, s, theta_hi, grid[i]);
            double fb = density_at(pb, s, theta_lo, grid[i]);
            if (fa < 1e-300 || fb < 1e-300)
                throw std::invalid_argument("mlr_check: grid point outside the stage support");
            la[i] = std::log(fa);
            lb[i] = std::log(fb);
        }
    }
    // ratio compared on the log scale
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double prev = la[i - 1] - lb[i - 1];
        double cur = la[i] - lb[i];
        if (cur < prev - slack) return false;
    }
    return true;
}

}  // namespace gsmix
