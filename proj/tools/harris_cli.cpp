// Command-line front end for the harris library.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "harris/config.hpp"
#include "harris/experiments.hpp"
#include "harris/flow_sim.hpp"
#include "harris/report.hpp"

namespace {

using harris::ExperimentConfig;

/// Values given on the command line; each one overrides the config file.
struct Overrides {
    std::optional<std::string> phi, drift, coupling;
    std::optional<std::string> particles, partitions, gaps, n_grids, interval;
    std::optional<std::size_t> reps, grid_points, check_times, trials, null_trials, stride;
    std::optional<double> dt, T, epsilon;
    std::optional<int> dyadic_level;
};

void add_overrides(CLI::App* sub, Overrides& o) {
    sub->add_option("--phi", o.phi, "covariance: gaussian | indicator | exp:A | cosine:C1,C2[,N]");
    sub->add_option("--drift", o.drift, "drift: zero | affine:c0,c1 | lipschitz:sin | modulus:b,C | one_sided:neg_sqrt");
    sub->add_option("--coupling", o.coupling, "shared_field | label_level");
    sub->add_option("--particles", o.particles, "comma-separated start positions");
    sub->add_option("--partitions", o.partitions, "comma-separated block counts N");
    sub->add_option("--gaps", o.gaps, "comma-separated initial gaps");
    sub->add_option("--n-grid", o.n_grids, "comma-separated grid sizes");
    sub->add_option("--interval", o.interval, "lo,hi");
    sub->add_option("--reps", o.reps, "replicates");
    sub->add_option("--grid-points", o.grid_points, "start grid size for pushforward measures");
    sub->add_option("--check-times", o.check_times, "number of check times");
    sub->add_option("--trials", o.trials, "KS trials");
    sub->add_option("--null-trials", o.null_trials, "KS null calibration trials");
    sub->add_option("--stride", o.stride, "record every k-th fine step");
    sub->add_option("--dt", o.dt, "fine time step");
    sub->add_option("--T,--t", o.T, "time horizon");
    sub->add_option("--epsilon", o.epsilon, "noise level of regularized drift blocks");
    sub->add_option("--dyadic-level", o.dyadic_level, "dual start grid is 2^L x 2^L");
}

std::vector<std::size_t> to_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    for (double v : harris::parse_number_list(s)) {
        if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw std::invalid_argument("expected positive integers in '" + s + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void apply(const Overrides& o, ExperimentConfig& c) {
    if (o.phi) c.phi = *o.phi;
    if (o.drift) c.drift = *o.drift;
    if (o.coupling) c.coupling = *o.coupling;
    if (o.particles) c.particles = harris::parse_number_list(*o.particles);
    if (o.partitions) c.partitions = to_sizes(*o.partitions);
    if (o.gaps) c.gaps = harris::parse_number_list(*o.gaps);
    if (o.n_grids) c.n_grids = to_sizes(*o.n_grids);
    if (o.interval) {
        const auto v = harris::parse_number_list(*o.interval);
        if (v.size() != 2) throw std::invalid_argument("--interval needs lo,hi");
        c.interval_lo = v[0];
        c.interval_hi = v[1];
    }
    if (o.reps) c.reps = *o.reps;
    if (o.grid_points) c.grid_points = *o.grid_points;
    if (o.check_times) c.check_times = *o.check_times;
    if (o.trials) c.trials = *o.trials;
    if (o.null_trials) c.null_trials = *o.null_trials;
    if (o.dt) c.dt_fine = *o.dt;
    if (o.T) c.T = *o.T;
    if (o.epsilon) c.epsilon = *o.epsilon;
    if (o.dyadic_level) c.dyadic_level = *o.dyadic_level;
}

ExperimentConfig defaults_for(const std::string& cmd) {
    ExperimentConfig c;
    if (cmd == "simulate") {
        c.phi = "exp:1";
        c.drift = "zero";
        c.particles = {0.0, 0.25, 0.5, 0.75, 1.0};
        c.partitions = {1};
        c.dt_fine = 1.0 / 1024.0;
    } else if (cmd == "sharpness") {
        c.drift = "zero";
        c.partitions = {1024, 2048, 4096, 8192, 16384};
        c.dt_fine = 1.0 / 65536.0;
        c.reps = 500;
    } else if (cmd == "wasserstein") {
        c.partitions = {8, 16, 32, 64, 128, 256};
        c.dt_fine = 1.0 / 4096.0;
        c.reps = 100;
        c.grid_points = 8;
    } else if (cmd == "weak") {
        c.partitions = {8, 256};
        c.dt_fine = 1.0 / 256.0;
        c.reps = 10000;
    } else if (cmd == "coalesce-prob") {
        c.phi = "exp:1";
        c.drift = "zero";
        c.partitions = {1};
        c.dt_fine = 1e-3;
        c.reps = 100000;
    } else if (cmd == "cluster-count") {
        c.phi = "exp:1";
        c.drift = "zero";
        c.partitions = {1};
        c.dt_fine = 1e-3;
        c.reps = 1000;
    } else if (cmd == "dual") {
        c.partitions = {8};
        c.dt_fine = 1.0 / 1024.0;
        c.interval_lo = -1.0;
        c.interval_hi = 1.0;
    }
    return c;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Splitting schemes for Harris flows with drift"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_path, format;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_path, "output path (stdout when omitted)");
    app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

    const char* names[] = {"simulate", "converge", "wasserstein", "weak", "sharpness", "dual", "coalesce-prob",
                           "cluster-count"};
    const char* help[] = {"simulate a flow and write its paths",
                          "strong convergence rates of the splitting scheme",
                          "Wasserstein distance between pushforward measures",
                          "Kolmogorov-Smirnov weak convergence trend",
                          "zero-drift sharpness ratio",
                          "dual flow and wedge check",
                          "probability that two particles have not coalesced",
                          "mean number of surviving clusters"};
    Overrides o;
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(names); ++i) {
        subs.push_back(app.add_subcommand(names[i], help[i]));
        add_overrides(subs.back(), o);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        std::string cmd;
        for (auto* s : subs)
            if (s->parsed()) cmd = s->get_name();
        ExperimentConfig cfg = defaults_for(cmd);
        if (!config_path.empty()) cfg = harris::load_config(config_path, cfg);
        apply(o, cfg);
        if (seed) cfg.seed = *seed;
        if (!out_path.empty()) cfg.output = out_path;
        if (!format.empty()) cfg.format = format;
        harris::validate(cfg);

        if (cmd == "simulate") {
            harris::SimConfig sim = harris::sim_config(cfg);
            sim.record_stride = o.stride.value_or(1);
            harris::RandomStream rng(cfg.seed, harris::make_stream_id(harris::Purpose::increments, 0, 0));
            const auto rec = harris::simulate(harris::parse_phi(cfg.phi), harris::parse_drift(cfg.drift), cfg.particles,
                                              cfg.T, sim, rng);
            std::ostringstream os;
            harris::write_paths_csv(rec, os);
            if (cfg.output.empty()) {
                std::cout << os.str();
            } else {
                write_text(cfg.output, os.str());
                write_text(cfg.output + ".merges.json", harris::merges_json(rec.merge_events));
            }
            return 0;
        }
        harris::ConvergenceReport report;
        if (cmd == "converge") report = harris::run_strong_rate(cfg);
        else if (cmd == "wasserstein") report = harris::run_wasserstein_rate(cfg);
        else if (cmd == "weak") report = harris::run_weak_convergence(cfg);
        else if (cmd == "sharpness") report = harris::run_sharpness(cfg);
        else if (cmd == "coalesce-prob") report = harris::run_coalesce_prob(cfg);
        else if (cmd == "cluster-count") report = harris::run_cluster_count(cfg);
        else if (cmd == "dual") {
            const harris::DualRun run = harris::run_dual(cfg);
            report = run.report;
            if (!cfg.output.empty()) {
                std::ostringstream fw, dw;
                harris::write_bundle_csv(run.forward, fw);
                harris::write_bundle_csv(run.dual, dw);
                write_text(cfg.output + ".forward.csv", fw.str());
                write_text(cfg.output + ".dual.csv", dw.str());
            }
        }
        harris::emit_report(report, cfg.format, cfg.output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
