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

#include <stdexcept>
#include <utility>

#include "pilotloop/channel.hpp"

namespace pilotloop {

/// Parameters of the inverse Fisher information metric for one-dimensional
/// subspace estimation: M antennas, T i.i.d. observation vectors, effective
/// SINR gamma (linear).
struct FimParams {
    int M;
    int T;
    double gamma;
};

/// Intrinsic Cramer-Rao bound on the squared subspace distance, in rad^2:
/// (M-1)(1+gamma) / (T*gamma^2).
inline double inverse_fim(const FimParams& p) {
    if (p.M < 2) throw std::invalid_argument("inverse_fim: M must be >= 2");
    if (p.T < 1) throw std::invalid_argument("inverse_fim: T must be >= 1");
    if (!(p.gamma > 0.0)) throw std::invalid_argument("inverse_fim: gamma must be > 0");
    return (p.M - 1) * (1.0 + p.gamma) / (p.T * p.gamma * p.gamma);
}

/// UL and DL bounds in rad^2 with the DL decomposition into its DL- and
/// UL-perturbation components (they sum exactly), plus validity flags.
struct CrbReport {
    double ul_crb;
    double dl_crb;
    double dl_component_dl;
    double dl_component_ul;
    bool ul_valid;
    bool dl_valid;
};

/// The bounds omit manifold curvature terms, so they hold as lower bounds only
/// for small errors: rho_U above 0 dB, and for the DL additionally
/// rho_D above 10*lg(M) dB.
inline std::pair<bool, bool> crb_validity(const ScenarioConfig& c, const SinrSet& s) {
    const bool ul = s.rho_u > 1.0;
    const bool dl = ul && s.rho_d > static_cast<double>(c.M);
    return {ul, dl};
}

/// Averaged UL bound: I^{-1}(M, M, M * rho_u_post), using E[||g||^2] = beta*M
/// through Jensen's inequality.
inline double ul_crb(const ScenarioConfig& c, const SinrSet& s) {
    return inverse_fim({c.M, c.M, c.M * s.rho_u_post});
}

/// Per-realization UL bound at a fixed channel gain zeta = ||g||^2, i.e.
/// I^{-1}(M, M, zeta/beta * rho_u_post). Internal helper; the averaged bound
/// above is what the summaries report.
inline double ul_crb_fixed_gain(const ScenarioConfig& c, const SinrSet& s, double zeta) {
    if (!(zeta > 0.0)) throw std::invalid_argument("ul_crb_fixed_gain: zeta must be > 0");
    return inverse_fim({c.M, c.M, zeta / c.beta * s.rho_u_post});
}

/// DL bound: a single-observation term at the post-processing DL SINR plus the
/// UL term, which is identical to ul_crb.
inline CrbReport dl_crb(const ScenarioConfig& c, const SinrSet& s) {
    CrbReport r{};
    r.dl_component_dl = inverse_fim({c.M, 1, c.M * s.rho_d_post});
    r.dl_component_ul = ul_crb(c, s);
    r.ul_crb          = r.dl_component_ul;
    r.dl_crb          = r.dl_component_dl + r.dl_component_ul;
    const auto valid  = crb_validity(c, s);
    r.ul_valid        = valid.first;
    r.dl_valid        = valid.second;
    return r;
}

} // namespace pilotloop
