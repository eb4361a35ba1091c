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

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "pilotloop/bounds.hpp"
#include "pilotloop/channel.hpp"
#include "pilotloop/gain.hpp"
#include "pilotloop/subspace.hpp"

namespace pilotloop {

/// Per-trial estimates and diagnostics. Distances are to the true g and h
/// subspaces, in radians. A failed trial (degenerate spectrum) keeps NaNs and
/// is excluded from all statistics.
struct TrialRecord {
    int trial_id       = 0;
    double d_ul_svd    = std::numeric_limits<double>::quiet_NaN();
    double d_dl_svd    = std::numeric_limits<double>::quiet_NaN();
    double d_ul_pi     = std::numeric_limits<double>::quiet_NaN();
    double d_dl_pi     = std::numeric_limits<double>::quiet_NaN();
    int pi_iterations  = 0;
    bool pi_converged  = false;
    double zeta_true   = std::numeric_limits<double>::quiet_NaN();
    double zeta_ml     = std::numeric_limits<double>::quiet_NaN();
    double zeta_scm    = std::numeric_limits<double>::quiet_NaN();
    bool ml_overflow   = false;
    bool failed        = false;
};

/// Aggregated scenario results: RMSE = sqrt(mean squared distance) over the
/// successful trials, with bootstrap standard errors (200 resamples);
/// iteration percentiles are nearest-rank. Gain statistics are relative to the
/// mean gain beta*M: bias = mean((zeta_hat - zeta_true))/(beta*M), variance =
/// sample variance of (zeta_hat - zeta_true)/(beta*M).
struct RunSummary {
    ScenarioConfig config;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    SinrSet sinrs{};

    double rmse_ul_svd = std::numeric_limits<double>::quiet_NaN();
    double rmse_dl_svd = std::numeric_limits<double>::quiet_NaN();
    double rmse_ul_pi  = std::numeric_limits<double>::quiet_NaN();
    double rmse_dl_pi  = std::numeric_limits<double>::quiet_NaN();
    double rmse_ul_svd_se = std::numeric_limits<double>::quiet_NaN();
    double rmse_dl_svd_se = std::numeric_limits<double>::quiet_NaN();
    double rmse_ul_pi_se  = std::numeric_limits<double>::quiet_NaN();
    double rmse_dl_pi_se  = std::numeric_limits<double>::quiet_NaN();

    double crb_ul_sqrt = std::numeric_limits<double>::quiet_NaN();
    double crb_dl_sqrt = std::numeric_limits<double>::quiet_NaN();
    bool crb_ul_valid  = false;
    bool crb_dl_valid  = false;

    double iter_mean = std::numeric_limits<double>::quiet_NaN();
    double iter_p5   = std::numeric_limits<double>::quiet_NaN();
    double iter_p95  = std::numeric_limits<double>::quiet_NaN();

    double gain_rel_bias_ml  = std::numeric_limits<double>::quiet_NaN();
    double gain_rel_bias_scm = std::numeric_limits<double>::quiet_NaN();
    double gain_rel_var_ml   = std::numeric_limits<double>::quiet_NaN();
    double gain_rel_var_scm  = std::numeric_limits<double>::quiet_NaN();

    int trials_failed   = 0;
    bool scenario_error = false;
};

struct RunOptions {
    int threads = 1;
    /// Gain estimation runs the ML line search per trial; disable for sweeps
    /// that only study subspaces or iteration counts.
    bool with_gain = true;
    RealizationOptions realization{};
};

namespace detail {

inline TrialRecord run_trial(const ScenarioConfig& c, int trial_id, const RunOptions& opt) {
    RngStream rng(c.seed, static_cast<std::uint64_t>(trial_id));
    const ChannelRealization real = generate_realization(c, rng, opt.realization);

    TrialRecord rec;
    rec.trial_id  = trial_id;
    rec.zeta_true = real.g.squaredNorm();
    try {
        const SubspacePoint g_true = SubspacePoint::from_vector(real.g);
        const SubspacePoint h_true = SubspacePoint::from_vector(real.h);

        const SvdResult svd = full_svd(real.Y_tilde);
        require_separated_top_singular_values(svd.sigma);
        rec.d_ul_svd = subspace_distance(SubspacePoint::from_vector(svd.U.col(0)), g_true);
        rec.d_dl_svd = subspace_distance(SubspacePoint::from_vector(svd.V.col(0)), h_true);

        const PowerIterResult pi = power_iteration_rank1(
            real.Y_tilde, c.delta, default_power_iteration_cap(real.Y_tilde.cols()));
        rec.d_ul_pi      = subspace_distance(pi.g_hat, g_true);
        rec.d_dl_pi      = subspace_distance(pi.h_hat, h_true);
        rec.pi_iterations = pi.iterations;
        rec.pi_converged  = pi.converged;

        if (opt.with_gain) {
            const SinrSet s          = compute_sinrs(c, real.alpha);
            const GainEstimate ml    = ml_gain(real.Y_tilde, s.Q_eff);
            const GainEstimate scm   = scm_gain(real.Y_tilde, s.Q_eff);
            rec.zeta_ml     = ml.zeta_hat;
            rec.zeta_scm    = scm.zeta_hat;
            rec.ml_overflow = ml.overflow_flag;
        }
    } catch (const DegenerateSpectrum&) {
        rec.failed = true;
    }
    return rec;
}

inline double nearest_rank_percentile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

} // namespace detail

/// Runs the configured number of trials, trial t on RNG substream (seed, t),
/// and aggregates. Results are independent of the thread count: records land
/// in trial order and the reduction is sequential.
inline std::pair<std::vector<TrialRecord>, RunSummary>
run_scenario(const ScenarioConfig& c, const RunOptions& opt = {}) {
    c.validate();

    std::vector<TrialRecord> records(static_cast<std::size_t>(c.trials));
    const int nthreads = std::max(1, opt.threads);
    if (nthreads == 1) {
        for (int t = 0; t < c.trials; ++t)
            records[static_cast<std::size_t>(t)] = detail::run_trial(c, t, opt);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= c.trials) return;
                try {
                    records[static_cast<std::size_t>(t)] = detail::run_trial(c, t, opt);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }

    RunSummary s;
    s.config = c;
    s.alpha  = genie_alpha(c);
    s.sinrs  = compute_sinrs(c, s.alpha);

    const CrbReport crb = dl_crb(c, s.sinrs);
    s.crb_ul_sqrt  = std::sqrt(crb.ul_crb);
    s.crb_dl_sqrt  = std::sqrt(crb.dl_crb);
    s.crb_ul_valid = crb.ul_valid;
    s.crb_dl_valid = crb.dl_valid;

    std::vector<double> d_ul_svd, d_dl_svd, d_ul_pi, d_dl_pi, iters;
    std::vector<double> rel_err_ml, rel_err_scm;
    for (const TrialRecord& r : records) {
        if (r.failed) {
            ++s.trials_failed;
            continue;
        }
        d_ul_svd.push_back(r.d_ul_svd);
        d_dl_svd.push_back(r.d_dl_svd);
        d_ul_pi.push_back(r.d_ul_pi);
        d_dl_pi.push_back(r.d_dl_pi);
        iters.push_back(static_cast<double>(r.pi_iterations));
        if (opt.with_gain) {
            const double scale = c.beta * c.M;
            rel_err_ml.push_back((r.zeta_ml - r.zeta_true) / scale);
            rel_err_scm.push_back((r.zeta_scm - r.zeta_true) / scale);
        }
    }

    const std::size_t n = d_ul_svd.size();
    auto rmse = [](const std::vector<double>& d) {
        if (d.empty()) return std::numeric_limits<double>::quiet_NaN();
        double acc = 0.0;
        for (double v : d) acc += v * v;
        return std::sqrt(acc / static_cast<double>(d.size()));
    };
    s.rmse_ul_svd = rmse(d_ul_svd);
    s.rmse_dl_svd = rmse(d_dl_svd);
    s.rmse_ul_pi  = rmse(d_ul_pi);
    s.rmse_dl_pi  = rmse(d_dl_pi);

    // Bootstrap SEs share the index resamples across the four series; the
    // resampling stream is pinned to substream `trials`, which no trial uses.
    if (n >= 1) {
        constexpr int B = 200;
        RngStream boot(c.seed, static_cast<std::uint64_t>(c.trials));
        std::array<std::vector<double>, 4> reps;
        for (auto& r : reps) r.reserve(B);
        const std::array<const std::vector<double>*, 4> series{&d_ul_svd, &d_dl_svd, &d_ul_pi,
                                                               &d_dl_pi};
        for (int b = 0; b < B; ++b) {
            std::array<double, 4> acc{0.0, 0.0, 0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t idx =
                    std::min<std::size_t>(static_cast<std::size_t>(boot.uniform01() * n), n - 1);
                for (int k = 0; k < 4; ++k) {
                    const double v = (*series[k])[idx];
                    acc[k] += v * v;
                }
            }
            for (int k = 0; k < 4; ++k)
                reps[k].push_back(std::sqrt(acc[k] / static_cast<double>(n)));
        }
        auto stddev = [](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double acc = 0.0;
            for (double x : v) acc += (x - mean) * (x - mean);
            return std::sqrt(acc / static_cast<double>(v.size() - 1));
        };
        s.rmse_ul_svd_se = stddev(reps[0]);
        s.rmse_dl_svd_se = stddev(reps[1]);
        s.rmse_ul_pi_se  = stddev(reps[2]);
        s.rmse_dl_pi_se  = stddev(reps[3]);
    }

    if (!iters.empty()) {
        double acc = 0.0;
        for (double v : iters) acc += v;
        s.iter_mean = acc / static_cast<double>(iters.size());
        std::sort(iters.begin(), iters.end());
        s.iter_p5  = detail::nearest_rank_percentile(iters, 5.0);
        s.iter_p95 = detail::nearest_rank_percentile(iters, 95.0);
    }

    if (opt.with_gain && !rel_err_ml.empty()) {
        auto mean_of = [](const std::vector<double>& v) {
            double acc = 0.0;
            for (double x : v) acc += x;
            return acc / static_cast<double>(v.size());
        };
        auto var_of = [&](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            const double m = mean_of(v);
            double acc     = 0.0;
            for (double x : v) acc += (x - m) * (x - m);
            return acc / static_cast<double>(v.size() - 1);
        };
        s.gain_rel_bias_ml  = mean_of(rel_err_ml);
        s.gain_rel_bias_scm = mean_of(rel_err_scm);
        s.gain_rel_var_ml   = var_of(rel_err_ml);
        s.gain_rel_var_scm  = var_of(rel_err_scm);
    }

    return {std::move(records), std::move(s)};
}

/// Runs each scenario independently, order preserved. A scenario that throws
/// becomes an error row (scenario_error set, everything failed) instead of
/// aborting the sweep.
inline std::vector<RunSummary> sweep(const std::vector<ScenarioConfig>& configs,
                                     const RunOptions& opt = {}) {
    std::vector<RunSummary> out;
    out.reserve(configs.size());
    for (const ScenarioConfig& c : configs) {
        try {
            out.push_back(run_scenario(c, opt).second);
        } catch (const std::exception&) {
            RunSummary err;
            err.config         = c;
            err.scenario_error = true;
            err.trials_failed  = c.trials;
            out.push_back(std::move(err));
        }
    }
    return out;
}

} // namespace pilotloop
