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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "pilotloop/linalg.hpp"

namespace pilotloop {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// All scalar parameters of one experiment. Powers and SINRs are linear and
/// relative to a unit perturbation variance; the downlink SINR rho_D = beta*P
/// is derived, and the repeater scaling alpha is set by genie power control
/// from rho_u_target.
struct ScenarioConfig {
    int M             = 4;      ///< antenna count (>= 2)
    int tau           = 4;      ///< pilot length (>= M)
    double P          = 1.0;    ///< total DL transmit power, linear
    double beta       = 1.0;    ///< channel gain beta, linear
    double rho_u_target = 1.0;  ///< target UL SINR, linear
    double delta      = 0.1;    ///< power-iteration stopping threshold (rad)
    int trials        = 1000;   ///< Monte Carlo trial count
    std::uint64_t seed = 1;     ///< base RNG seed; trial t uses substream t

    void validate() const {
        if (M < 2) throw std::invalid_argument("ScenarioConfig: M must be >= 2");
        if (tau < M)
            throw std::invalid_argument("ScenarioConfig: tau must be >= M (pilot length "
                                        "cannot be shorter than the antenna count)");
        if (!(P > 0.0)) throw std::invalid_argument("ScenarioConfig: P must be > 0");
        if (!(beta > 0.0)) throw std::invalid_argument("ScenarioConfig: beta must be > 0");
        if (!(rho_u_target > 0.0))
            throw std::invalid_argument("ScenarioConfig: rho_u_target must be > 0");
        if (!(delta > 0.0 && delta < std::numbers::pi / 2))
            throw std::invalid_argument("ScenarioConfig: delta must lie in (0, pi/2)");
        if (trials < 1) throw std::invalid_argument("ScenarioConfig: trials must be >= 1");
    }
};

inline void to_json(nlohmann::json& j, const ScenarioConfig& c) {
    j = nlohmann::json{{"M", c.M},         {"tau", c.tau},
                       {"P", c.P},         {"beta", c.beta},
                       {"rho_u_target", c.rho_u_target},
                       {"delta", c.delta}, {"trials", c.trials},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, ScenarioConfig& c) {
    j.at("M").get_to(c.M);
    j.at("tau").get_to(c.tau);
    j.at("P").get_to(c.P);
    j.at("beta").get_to(c.beta);
    j.at("rho_u_target").get_to(c.rho_u_target);
    if (j.contains("delta")) j.at("delta").get_to(c.delta);
    if (j.contains("trials")) j.at("trials").get_to(c.trials);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
}

/// Pre- and post-processing SINRs plus the repeater power figures.
struct SinrSet {
    double rho_d;       ///< DL SINR, beta*P
    double rho_u;       ///< UL SINR, alpha*beta*(beta*P + 1)
    double rho_d_post;  ///< after pilot reverse modulation, (tau/M)*beta*P
    double rho_u_post;  ///< alpha*beta*((tau/M)*beta*P + 1)
    double Q;           ///< repeater average transmit power, alpha*(beta*P + 1)
    double Q_eff;       ///< effective power after reverse modulation, alpha*((tau/M)*beta*P + 1)
};

/// Repeater scaling that makes the realized UL SINR hit the configured target.
inline double genie_alpha(const ScenarioConfig& c) {
    c.validate();
    return c.rho_u_target / (c.beta * (c.beta * c.P + 1.0));
}

inline SinrSet compute_sinrs(const ScenarioConfig& c, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("compute_sinrs: alpha must be > 0");
    const double ratio = static_cast<double>(c.tau) / static_cast<double>(c.M);
    SinrSet s{};
    s.rho_d      = c.beta * c.P;
    s.rho_u      = alpha * c.beta * (c.beta * c.P + 1.0);
    s.rho_d_post = ratio * c.beta * c.P;
    s.rho_u_post = alpha * c.beta * (ratio * c.beta * c.P + 1.0);
    s.Q          = alpha * (c.beta * c.P + 1.0);
    s.Q_eff      = alpha * (ratio * c.beta * c.P + 1.0);
    return s;
}

/// Test hook: zeroes the DL and/or UL perturbation after drawing it, giving
/// the exact rank-1 observation. Draws are consumed either way, so a noise-free
/// run sees the same Phi, h, g as the noisy run with the same substream.
struct RealizationOptions {
    bool zero_dl_perturbation = false; ///< force w = 0
    bool zero_ul_perturbation = false; ///< force N = 0
};

/// One draw of the pilot loop-back: pilot matrix, channels, perturbations and
/// the derived signals, with Y_tilde = Y * Phi computed exactly as written.
struct ChannelRealization {
    ComplexMatrix phi_pilot; ///< tau x M, orthonormal columns
    ComplexVector h;         ///< DL channel, CN(0, beta) entries
    ComplexVector g;         ///< UL channel, CN(0, beta) entries
    ComplexVector w;         ///< DL perturbation at the repeater, CN(0, 1)
    ComplexMatrix N;         ///< UL perturbation at the array, M x tau, CN(0, 1)
    double alpha;            ///< repeater power scaling
    ComplexVector x;         ///< repeater receive signal, tau x 1
    ComplexMatrix Y;         ///< UL receive signal, M x tau
    ComplexMatrix Y_tilde;   ///< reverse-modulated observation, M x M
};

/// Draw order is fixed (Phi, h, g, w, N) so that a (seed, stream) pair pins
/// the whole realization.
inline ChannelRealization generate_realization(const ScenarioConfig& c, RngStream& rng,
                                               const RealizationOptions& opt = {}) {
    c.validate();
    ChannelRealization r;
    r.phi_pilot = sample_unitary_pilot(rng, c.tau, c.M);
    r.h         = sample_complex_gaussian_vector(rng, c.M, c.beta);
    r.g         = sample_complex_gaussian_vector(rng, c.M, c.beta);
    r.w         = sample_complex_gaussian_vector(rng, c.tau, 1.0);
    r.N         = sample_complex_gaussian_matrix(rng, c.M, c.tau, 1.0);
    if (opt.zero_dl_perturbation) r.w.setZero();
    if (opt.zero_ul_perturbation) r.N.setZero();
    r.alpha = genie_alpha(c);

    const double pilot_gain = std::sqrt(static_cast<double>(c.tau) * c.P / c.M);
    r.x       = pilot_gain * (r.phi_pilot * r.h) + r.w;
    r.Y       = std::sqrt(r.alpha) * (r.g * r.x.adjoint()) + r.N;
    r.Y_tilde = r.Y * r.phi_pilot;
    return r;
}

} // namespace pilotloop
