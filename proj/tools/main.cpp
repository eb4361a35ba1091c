// SPDX-License-Identifier: Apache-2.0
//
// pilotloop - UL/DL subspace and channel-gain estimation for analog-feedback
// FDD channel training
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pilotloop/presets.hpp"
#include "pilotloop/report.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitAllTrialsFailed = 3;

struct RunArgs {
    std::string preset;
    int M            = 0;
    int tau          = 0;
    double rho_u_db  = 0.0;
    double rho_d_db  = 0.0;
    double P         = 0.0;
    double beta      = 0.0;
    bool has_rho_d   = false;
    bool has_P       = false;
    bool has_beta    = false;
    int trials       = 1000;
    std::uint64_t seed = 1;
    double delta     = 0.1;
    std::string out;
    std::string format = "csv";
    int threads      = 1;
};

std::vector<pilotloop::ScenarioConfig> build_configs(const RunArgs& a, bool& gain_enabled) {
    using namespace pilotloop;
    gain_enabled = true;
    if (!a.preset.empty()) {
        const Preset* p = find_preset(a.preset);
        if (!p) throw std::invalid_argument("unknown preset '" + a.preset + "'");
        gain_enabled = p->gain_enabled;
        return p->make_grid(a.seed, a.trials, a.delta);
    }

    if (a.M == 0 || a.tau == 0)
        throw std::invalid_argument("--M and --tau are required without --preset");

    ScenarioConfig c;
    c.M            = a.M;
    c.tau          = a.tau;
    c.rho_u_target = db_to_linear(a.rho_u_db);
    c.delta        = a.delta;
    c.trials       = a.trials;
    c.seed         = a.seed;

    if (a.has_P != a.has_beta)
        throw std::invalid_argument("--P and --beta must be given together");
    if (a.has_P && a.has_beta) {
        if (a.has_rho_d)
            throw std::invalid_argument(
                "--rho-d-db must be absent when --P and --beta are given (rho_D = beta*P)");
        c.P    = a.P;
        c.beta = a.beta;
    } else {
        if (!a.has_rho_d)
            throw std::invalid_argument("either --rho-d-db or both --P and --beta are required");
        c.beta = 1.0;
        c.P    = db_to_linear(a.rho_d_db) / c.beta;
    }
    return {c};
}

int cmd_run(const RunArgs& args) {
    using namespace pilotloop;

    std::vector<ScenarioConfig> configs;
    bool gain_enabled = true;
    try {
        configs = build_configs(args, gain_enabled);
        for (const ScenarioConfig& c : configs) c.validate();
        if (args.format != "csv" && args.format != "json")
            throw std::invalid_argument("--format must be csv or json");
        if (args.threads < 1) throw std::invalid_argument("--threads must be >= 1");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    RunOptions opt;
    opt.threads   = args.threads;
    opt.with_gain = gain_enabled;
    const std::vector<RunSummary> summaries = sweep(configs, opt);

    std::ostringstream body;
    if (args.format == "json")
        write_json(body, summaries);
    else
        write_csv(body, summaries);

    if (args.out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(args.out, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot open output file '" << args.out << "'\n";
            return kExitConfigError;
        }
        f << body.str();
    }

    bool all_failed = true;
    for (const RunSummary& s : summaries)
        if (!s.scenario_error && s.trials_failed < s.config.trials) all_failed = false;
    return all_failed ? kExitAllTrialsFailed : 0;
}

int cmd_presets() {
    using namespace pilotloop;
    for (const Preset& p : all_presets()) {
        const auto grid = p.make_grid(1, 1000, 0.1);
        std::cout << p.name << "\n"
                  << "  " << p.summary << "\n"
                  << "  grid: " << p.grid_note << "\n"
                  << "  rows: " << grid.size()
                  << (p.gain_enabled ? "" : "  (gain estimators disabled)") << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for analog-feedback FDD channel training: "
                 "UL/DL subspace estimators, Cramer-Rao bounds, power-iteration SVD "
                 "and channel-gain estimators"};
    app.require_subcommand(1);

    RunArgs args;
    CLI::App* run = app.add_subcommand("run", "run one scenario or a preset sweep, emit CSV/JSON");
    run->add_option("--preset", args.preset, "named sweep (see `presets`)");
    run->add_option("--M", args.M, "antenna count");
    run->add_option("--tau", args.tau, "pilot length (>= M)");
    run->add_option("--rho-u-db", args.rho_u_db, "target UL SINR in dB (genie power control)");
    auto* rho_d = run->add_option("--rho-d-db", args.rho_d_db, "DL SINR in dB (with beta = 1)");
    auto* popt  = run->add_option("--P", args.P, "total DL transmit power, linear");
    auto* bopt  = run->add_option("--beta", args.beta, "channel gain beta, linear");
    run->add_option("--trials", args.trials, "Monte Carlo trials per scenario")
        ->default_val(1000);
    run->add_option("--seed", args.seed, "base RNG seed")->default_val(1);
    run->add_option("--delta", args.delta, "power-iteration stopping threshold (rad)")
        ->default_val(0.1);
    run->add_option("--out", args.out, "output path (default: stdout)");
    run->add_option("--format", args.format, "csv|json")->default_val("csv");
    run->add_option("--threads", args.threads, "worker threads for trials")->default_val(1);

    CLI::App* presets = app.add_subcommand("presets", "list the named sweeps and their grids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    args.has_rho_d = rho_d->count() > 0;
    args.has_P     = popt->count() > 0;
    args.has_beta  = bopt->count() > 0;

    if (presets->parsed()) return cmd_presets();
    return cmd_run(args);
}
