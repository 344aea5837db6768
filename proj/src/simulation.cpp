#include "gsmix/simulation.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace gsmix {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GSMIX_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

TrialOutcome simulate_trial(const Design& d, double theta, RngStream& rng) {
    TrialOutcome o;
    o.design = d;
    int K = d.stages();
    o.stage_means.reserve(K);
    o.cumulative_z.reserve(K);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
        double mean = theta + rng.next_normal() / std::sqrt(double(d.n[k]));
        o.stage_means.push_back(mean);
        sum += d.n[k] * mean;
        double z = sum / std::sqrt(d.cum[k]);
        o.cumulative_z.push_back(z);
        o.stop_stage = k + 1;
        if (k < K - 1 && z > d.c[k]) break;
    }
    return o;
}

namespace {

struct WorkerTally {
    std::vector<long> stop_count;
    std::vector<long> reject_count;
};

SimResult run_impl(const SimConfig& cfg, bool collect_estimators) {
    if (cfg.reps < 1) throw std::invalid_argument("simulation: reps must be positive");
    const Design& d = cfg.design;
    int K = d.stages();
    int threads = resolve_threads(cfg.threads);
    if (static_cast<long>(threads) > cfg.reps) threads = static_cast<int>(cfg.reps);

    SimResult res;
    res.reps = cfg.reps;
    res.seed = cfg.master_seed;
    res.stop_count.assign(K, 0);
    res.reject_count.assign(K, 0);
    res.cum_reject_count.assign(K, 0);
    if (collect_estimators) res.samples.resize(cfg.reps);

    std::vector<WorkerTally> tally(threads);
    std::vector<std::thread> pool;
    long chunk = (cfg.reps + threads - 1) / threads;

    auto work = [&](int w) {
        WorkerTally& t = tally[w];
        t.stop_count.assign(K, 0);
        t.reject_count.assign(K, 0);
        long lo = w * chunk;
        long hi = std::min(cfg.reps, lo + chunk);
        TrialOutcome o;
        o.design = d;
        for (long rep = lo; rep < hi; ++rep) {
            RngStream rng = derive_stream(cfg.master_seed, static_cast<std::uint64_t>(rep));
            o.stage_means.clear();
            o.cumulative_z.clear();
            double sum = 0.0;
            int stop = K;
            for (int k = 0; k < K; ++k) {
                double mean = cfg.theta + rng.next_normal() / std::sqrt(double(d.n[k]));
                o.stage_means.push_back(mean);
                sum += d.n[k] * mean;
                double z = sum / std::sqrt(d.cum[k]);
                o.cumulative_z.push_back(z);
                if (k < K - 1 && z > d.c[k]) {
                    stop = k + 1;
                    break;
                }
            }
            o.stop_stage = stop;
            t.stop_count[stop - 1]++;
            bool reject = (stop < K) ? true : (o.cumulative_z[K - 1] > d.c[K - 1]);
            if (reject) t.reject_count[stop - 1]++;
            if (collect_estimators) {
                EstimatorSample& s = res.samples[rep];
                s.stage = stop;
                s.unconditional = mle_unconditional(o).estimate;
                MleResult c = mle_conditional(o);
                s.conditional = c.estimate;
                s.diverged = c.diverged;
            }
        }
    };

    if (threads == 1) {
        work(0);
    } else {
        pool.reserve(threads);
        for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    for (int w = 0; w < threads; ++w) {
        for (int k = 0; k < K; ++k) {
            res.stop_count[k] += tally[w].stop_count[k];
            res.reject_count[k] += tally[w].reject_count[k];
        }
    }
    long acc = 0;
    double total_n = 0.0;
    for (int k = 0; k < K; ++k) {
        acc += res.reject_count[k];
        res.cum_reject_count[k] = acc;
        total_n += d.cum[k] * static_cast<double>(res.stop_count[k]);
    }
    res.mean_n = total_n / static_cast<double>(cfg.reps);
    return res;
}

}  // namespace

SimResult run_oc(const SimConfig& cfg) { return run_impl(cfg, cfg.collect.estimators); }

SimResult run_estimator_study(const SimConfig& cfg) { return run_impl(cfg, true); }

MomentsReport summarize_moments(const SimResult& res, const Design& d, double theta,
                                MleKind kind) {
    if (res.samples.empty())
        throw std::invalid_argument("summarize_moments: result carries no estimator samples");
    int K = d.stages();
    MomentsReport rep;
    rep.kind = kind;

    std::vector<long> kept(K, 0), seen(K, 0);
    std::vector<double> m1(K, 0.0), m2(K, 0.0);
    for (const EstimatorSample& s : res.samples) {
        int k = s.stage - 1;
        seen[k]++;
        if (kind == MleKind::Conditional && s.diverged) continue;
        double x = (kind == MleKind::Conditional) ? s.conditional : s.unconditional;
        kept[k]++;
        m1[k] += x;
        m2[k] += x * x;
    }

    auto make_row = [&](int stage, long seen_n, long kept_n, double s1, double s2,
                        double pr) {
        StageMoments row;
        row.stage = stage;
        row.pr_stage = pr;
        if (seen_n > 0)
            row.divergence_rate = static_cast<double>(seen_n - kept_n) / seen_n;
        if (kept_n > 0) {
            double mean = s1 / kept_n;
            double second = s2 / kept_n;
            row.bias = mean - theta;
            row.sd = std::sqrt(std::max(0.0, second - mean * mean));
            row.mse = std::max(0.0, second - 2.0 * theta * mean + theta * theta);
        }
        return row;
    };

    long tot_seen = 0, tot_kept = 0;
    double tot1 = 0.0, tot2 = 0.0;
    for (int k = 0; k < K; ++k) {
        rep.per_stage.push_back(make_row(k + 1, seen[k], kept[k], m1[k], m2[k],
                                         static_cast<double>(seen[k]) / res.reps));
        tot_seen += seen[k];
        tot_kept += kept[k];
        tot1 += m1[k];
        tot2 += m2[k];
    }
    rep.overall = make_row(0, tot_seen, tot_kept, tot1, tot2, 1.0);
    return rep;
}

std::vector<HistBin> histogram(const std::vector<double>& xs, int bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram: bad bin layout");
    std::vector<HistBin> out(bins);
    double w = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) {
        out[b].lo = lo + b * w;
        out[b].hi = lo + (b + 1) * w;
    }
    for (double x : xs) {
        if (x < lo || x >= hi) continue;
        int b = static_cast<int>((x - lo) / w);
        if (b >= 0 && b < bins) out[b].count++;
    }
    return out;
}

}  // namespace gsmix
