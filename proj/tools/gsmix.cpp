#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gsmix/asymptotics.hpp"
#include "gsmix/design.hpp"
#include "gsmix/design_io.hpp"
#include "gsmix/estimation.hpp"
#include "gsmix/simulation.hpp"

namespace {

using namespace gsmix;
using nlohmann::json;

// "-" means stdout
std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open output file: " + path);
    return file;
}

int cmd_design(const std::string& spec_path, const std::string& out_path,
               const std::string& oc_path) {
    DesignFile f = read_design_file(spec_path);
    DesignSpec spec = spec_of(f);
    DesignSolution sol = solve_design(spec);

    DesignFile out;
    out.k = spec.k;
    out.alpha = spec.alpha;
    out.power = spec.power;
    out.alpha0 = sol.alphas;
    out.boundaries = sol.design;
    write_design_file(out_path, out);

    std::ofstream oc_file;
    std::ostream& oc = open_out(oc_file, oc_path);
    write_oc_header(oc);
    for (const OcRow& row : sol.summary) write_oc_rows(oc, sol.design, row);

    std::cerr << "design:";
    for (int k = 0; k < sol.design.stages(); ++k)
        std::cerr << " stage " << (k + 1) << " n=" << sol.design.n[k]
                  << " c=" << format_sig(sol.design.c[k]);
    std::cerr << "\n";
    return 0;
}

int cmd_oc(const std::string& design_path, const std::vector<double>& thetas,
           const std::string& method, long reps, std::uint64_t seed, int threads,
           const std::string& out_path) {
    if (thetas.empty()) throw std::invalid_argument("oc: need at least one --theta value");
    DesignFile f = read_design_file(design_path);
    Design d = design_of(f);

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    write_oc_header(os);
    for (double th : thetas) {
        if (method == "quad") {
            write_oc_rows(os, d, oc_row(d, th));
        } else {
            SimConfig cfg(d);
            cfg.theta = th;
            cfg.reps = reps;
            cfg.master_seed = seed;
            cfg.threads = threads;
            SimResult res = run_oc(cfg);
            OcRow row;
            row.theta = th;
            row.expected_n = res.mean_n;
            for (int k = 0; k < d.stages(); ++k) {
                row.stop_prob.push_back(double(res.stop_count[k]) / res.reps);
                row.reject_prob.push_back(double(res.reject_count[k]) / res.reps);
                row.cum_reject.push_back(double(res.cum_reject_count[k]) / res.reps);
            }
            write_oc_rows(os, d, row);
        }
    }
    return 0;
}

std::vector<double> read_stage_means(const std::string& path, const Design& d) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open data file: " + path);
    std::vector<double> means;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string stage_s, n_s, mean_s;
        if (!std::getline(ls, stage_s, ',') || !std::getline(ls, n_s, ',') ||
            !std::getline(ls, mean_s))
            throw std::invalid_argument("data file: expected stage,n,mean on line " +
                                        std::to_string(row));
        if (row == 1 && stage_s == "stage") continue;  // header
        int stage, n;
        double mean;
        try {
            stage = std::stoi(stage_s);
            n = std::stoi(n_s);
            mean = std::stod(mean_s);
        } catch (const std::exception&) {
            throw std::invalid_argument("data file: malformed number on line " +
                                        std::to_string(row));
        }
        if (stage != static_cast<int>(means.size()) + 1)
            throw std::invalid_argument("data file: stages must run 1,2,... (line " +
                                        std::to_string(row) + ")");
        if (stage > d.stages())
            throw std::invalid_argument("data file: more stages than the design has");
        if (n != d.n[stage - 1])
            throw std::invalid_argument("data file: stage " + std::to_string(stage) +
                                        " size " + std::to_string(n) +
                                        " does not match the design (" +
                                        std::to_string(d.n[stage - 1]) + ")");
        means.push_back(mean);
    }
    if (means.empty()) throw std::invalid_argument("data file: no stage rows");
    return means;
}

int cmd_estimate(const std::string& design_path, const std::string& data_path,
                 const std::string& out_path) {
    DesignFile f = read_design_file(design_path);
    Design d = design_of(f);
    std::vector<double> means = read_stage_means(data_path, d);

    TrialOutcome o = make_outcome(d, means);
    MleResult mu = mle_unconditional(o);
    MleResult mc = mle_conditional(o);
    ObservedInfo info = observed_info(o, mu.estimate);

    bool reject = (o.stop_stage < d.stages()) ||
                  (o.cumulative_z.back() > d.c[d.stages() - 1]);

    json out;
    out["stop_stage"] = o.stop_stage;
    out["z"] = o.cumulative_z;
    out["decision"] = reject ? "reject" : "accept";
    out["estimate_unconditional"] = mu.estimate;
    out["estimate_conditional"] = mc.estimate;
    out["conditional_diverged"] = mc.diverged;
    out["info"] = {{"i", info.i},
                   {"i_conditional", info.i_conditional},
                   {"i_fixed", info.i_fixed}};

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << out.dump(2) << "\n";
    return 0;
}

int cmd_info(const std::string& design_path, const std::vector<double>& grid,
             const std::string& out_path) {
    if (grid.empty()) throw std::invalid_argument("info: need at least one --theta-grid value");
    DesignFile f = read_design_file(design_path);
    Design d = design_of(f);

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << "theta,stage,n_cum,i,i_conditional,i_fixed,stop_prob,overall_i,"
          "overall_i_conditional,overall_i_fixed,info_loss,frac_adapted,frac_fixed\n";
    for (double th : grid) {
        InfoReport rep = expected_info(d, th);
        for (int k = 0; k < d.stages(); ++k) {
            os << format_sig(th) << ',' << (k + 1) << ',' << format_sig(d.cum[k]) << ','
               << format_sig(rep.stage_i[k]) << ',' << format_sig(rep.stage_i_conditional[k])
               << ',' << format_sig(rep.stage_i_fixed[k]) << ','
               << format_sig(rep.stop_prob[k]) << ',' << format_sig(rep.overall_i) << ','
               << format_sig(rep.overall_i_conditional) << ','
               << format_sig(rep.overall_i_fixed) << ',' << format_sig(rep.info_loss) << ','
               << format_sig(rep.frac_adapted[k]) << ',' << format_sig(rep.frac_fixed[k])
               << "\n";
        }
    }
    return 0;
}

int cmd_asymcdf(const std::string& design_path, double h, const std::vector<double>& v_grid,
                const std::string& out_path) {
    if (v_grid.empty())
        throw std::invalid_argument("asymcdf: need at least one --v-grid value");
    DesignFile f = read_design_file(design_path);
    Design d = design_of(f);
    LocalAltSpec spec = local_spec_of(d, h);

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << "v,cdf\n";
    for (double v : v_grid)
        os << format_sig(v) << ',' << format_sig(mixture_cdf_k_stage(spec, v)) << "\n";
    return 0;
}

int cmd_monitor(const std::string& design_path, const std::vector<double>& zs,
                const std::string& out_path) {
    if (zs.empty()) throw std::invalid_argument("monitor: need at least one --z value");
    DesignFile f = read_design_file(design_path);
    Design d = design_of(f);
    int K = d.stages();
    if (static_cast<int>(zs.size()) > K)
        throw PathError(K, "monitor: more statistics than the design has stages");

    json stages = json::array();
    int stop_stage = 0;
    std::string decision = "continue";
    for (std::size_t i = 0; i < zs.size(); ++i) {
        int k = static_cast<int>(i) + 1;
        if (stop_stage != 0) {
            std::ostringstream msg;
            msg << "monitor: statistic supplied for stage " << k
                << " after the trial stopped at stage " << stop_stage;
            throw PathError(k, msg.str());
        }
        bool cross = zs[i] > d.c[i];
        std::string verdict;
        if (k < K) {
            verdict = cross ? "stop and reject" : "continue";
            if (cross) {
                stop_stage = k;
                decision = "reject";
            }
        } else {
            verdict = cross ? "stop and reject" : "stop and accept";
            stop_stage = k;
            decision = cross ? "reject" : "accept";
        }
        stages.push_back({{"stage", k},
                          {"n_cum", d.cum[i]},
                          {"z", zs[i]},
                          {"boundary", d.c[i]},
                          {"decision", verdict}});
    }

    json out;
    out["stages"] = stages;
    out["decision"] = decision;
    if (stop_stage != 0) out["stop_stage"] = stop_stage;

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << out.dump(2) << "\n";
    return 0;
}

int cmd_estudy(const std::string& design_path, double theta, const std::string& method,
               long reps, std::uint64_t seed, int threads, const std::string& out_path,
               const std::string& hist_path, int hist_bins) {
    DesignFile f = read_design_file(design_path);
    Design d = design_of(f);

    MomentsReport ru, rc;
    SimResult res;
    if (method == "quad") {
        ru = estimator_moments(d, theta, MleKind::Unconditional, MomentMethod::Quadrature);
        rc = estimator_moments(d, theta, MleKind::Conditional, MomentMethod::Quadrature);
    } else {
        SimConfig cfg(d);
        cfg.theta = theta;
        cfg.reps = reps;
        cfg.master_seed = seed;
        cfg.threads = threads;
        res = run_estimator_study(cfg);
        ru = summarize_moments(res, d, theta, MleKind::Unconditional);
        rc = summarize_moments(res, d, theta, MleKind::Conditional);
    }

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << "kind,stage,pr_stage,divergence_rate,bias,sd,mse\n";
    auto emit = [&](const char* kind, const StageMoments& s) {
        os << kind << ',' << s.stage << ',' << format_sig(s.pr_stage) << ','
           << format_sig(s.divergence_rate) << ',' << format_sig(s.bias) << ','
           << format_sig(s.sd) << ',' << format_sig(s.mse) << "\n";
    };
    for (const StageMoments& s : ru.per_stage) emit("unconditional", s);
    emit("unconditional", ru.overall);
    for (const StageMoments& s : rc.per_stage) emit("conditional", s);
    emit("conditional", rc.overall);

    if (!hist_path.empty()) {
        if (method == "quad")
            throw std::invalid_argument("estudy: histograms need --method mc");
        std::ofstream hfile;
        std::ostream& hs = open_out(hfile, hist_path);
        hs << "kind,stage,bin_lo,bin_hi,count\n";
        for (int k = 1; k <= d.stages(); ++k) {
            for (int kind = 0; kind < 2; ++kind) {
                std::vector<double> xs;
                for (const EstimatorSample& s : res.samples) {
                    if (s.stage != k) continue;
                    if (kind == 1 && s.diverged) continue;
                    xs.push_back(kind == 0 ? s.unconditional : s.conditional);
                }
                if (xs.empty()) continue;
                double lo = xs[0], hi = xs[0];
                for (double x : xs) {
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                }
                if (!(hi > lo)) hi = lo + 1e-9;
                for (const HistBin& b : histogram(xs, hist_bins, lo, hi))
                    hs << (kind == 0 ? "unconditional" : "conditional") << ',' << k << ','
                       << format_sig(b.lo) << ',' << format_sig(b.hi) << ',' << b.count
                       << "\n";
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"group sequential design engine"};
    app.require_subcommand(1);

    std::string spec_path, design_path, data_path;
    std::string out_path = "-";
    std::string oc_path = "design.oc.csv";
    std::string hist_path;
    std::string method = "quad";
    std::vector<double> thetas, theta_grid, v_grid, zs;
    double theta = 0.0, h = 0.0;
    long reps = 100000;
    std::uint64_t seed = 1;
    int threads = 0;
    int hist_bins = 50;

    CLI::App* c_design = app.add_subcommand("design", "solve sizes and boundaries from requirements");
    c_design->add_option("spec", spec_path, "requirements JSON")->required();
    c_design->add_option("-o,--out", out_path, "output design JSON")->capture_default_str();
    c_design->add_option("--oc", oc_path, "operating characteristics CSV")->capture_default_str();

    CLI::App* c_oc = app.add_subcommand("oc", "operating characteristics over effect sizes");
    c_oc->add_option("design", design_path, "design JSON")->required();
    c_oc->add_option("--theta", thetas, "effect sizes (comma separated)")
        ->required()
        ->delimiter(',');
    c_oc->add_option("--method", method, "quad or mc")->check(CLI::IsMember({"quad", "mc"}))
        ->capture_default_str();
    c_oc->add_option("--reps", reps, "Monte Carlo replicates")->capture_default_str();
    c_oc->add_option("--seed", seed, "Monte Carlo seed")->capture_default_str();
    c_oc->add_option("--threads", threads, "worker count (0: GSMIX_THREADS or hardware)");
    c_oc->add_option("-o,--out", out_path, "output CSV")->capture_default_str();

    CLI::App* c_est = app.add_subcommand("estimate", "estimates and observed information from stage data");
    c_est->add_option("design", design_path, "design JSON")->required();
    c_est->add_option("--data", data_path, "CSV of stage,n,mean rows")->required();
    c_est->add_option("-o,--out", out_path, "output JSON")->capture_default_str();

    CLI::App* c_info = app.add_subcommand("info", "expected information and information loss");
    c_info->add_option("design", design_path, "design JSON")->required();
    c_info->add_option("--theta-grid", theta_grid, "effect sizes (comma separated)")
        ->required()
        ->delimiter(',');
    c_info->add_option("-o,--out", out_path, "output CSV")->capture_default_str();

    CLI::App* c_asym = app.add_subcommand("asymcdf", "limiting CDF of the centered stopped statistic");
    c_asym->add_option("design", design_path, "design JSON")->required();
    c_asym->add_option("--drift", h, "local drift")->capture_default_str();
    c_asym->add_option("--v-grid", v_grid, "evaluation points (comma separated)")
        ->required()
        ->delimiter(',');
    c_asym->add_option("-o,--out", out_path, "output CSV")->capture_default_str();

    CLI::App* c_mon = app.add_subcommand("monitor", "replay the stopping rule over observed statistics");
    c_mon->add_option("design", design_path, "design JSON")->required();
    c_mon->add_option("--z", zs, "cumulative statistics in stage order (comma separated)")
        ->required()
        ->delimiter(',');
    c_mon->add_option("-o,--out", out_path, "output JSON")->capture_default_str();

    CLI::App* c_study = app.add_subcommand("estudy", "estimator moments by stopping stage");
    c_study->add_option("design", design_path, "design JSON")->required();
    c_study->add_option("--theta", theta, "true effect size")->required();
    c_study->add_option("--method", method, "quad or mc")->check(CLI::IsMember({"quad", "mc"}))
        ->capture_default_str();
    c_study->add_option("--reps", reps, "Monte Carlo replicates")->capture_default_str();
    c_study->add_option("--seed", seed, "Monte Carlo seed")->capture_default_str();
    c_study->add_option("--threads", threads, "worker count (0: GSMIX_THREADS or hardware)");
    c_study->add_option("-o,--out", out_path, "output CSV")->capture_default_str();
    c_study->add_option("--hist", hist_path, "histogram CSV (mc only)");
    c_study->add_option("--hist-bins", hist_bins, "bins per histogram")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (c_design->parsed()) {
            std::string out = (out_path == "-") ? "design.json" : out_path;
            return cmd_design(spec_path, out, oc_path);
        }
        if (c_oc->parsed()) return cmd_oc(design_path, thetas, method, reps, seed, threads, out_path);
        if (c_est->parsed()) return cmd_estimate(design_path, data_path, out_path);
        if (c_info->parsed()) return cmd_info(design_path, theta_grid, out_path);
        if (c_asym->parsed()) return cmd_asymcdf(design_path, h, v_grid, out_path);
        if (c_mon->parsed()) return cmd_monitor(design_path, zs, out_path);
        if (c_study->parsed())
            return cmd_estudy(design_path, theta, method, reps, seed, threads, out_path,
                              hist_path, hist_bins);
    } catch (const gsmix::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const gsmix::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gsmix::PathError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
