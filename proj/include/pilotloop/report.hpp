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

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pilotloop/harness.hpp"

namespace pilotloop {

/// Flat key/value view of one RunSummary row. Doubles are serialized with 17
/// significant digits so parsing an emitted file recovers them exactly.
struct OutputRow {
    std::vector<std::pair<std::string, double>> fields;
};

namespace detail {

inline std::string format_field(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

} // namespace detail

inline OutputRow to_output_row(const RunSummary& s) {
    const ScenarioConfig& c = s.config;
    OutputRow row;
    row.fields = {
        {"M", static_cast<double>(c.M)},
        {"tau", static_cast<double>(c.tau)},
        {"P", c.P},
        {"beta", c.beta},
        {"rho_u_db", linear_to_db(c.rho_u_target)},
        {"rho_d_db", linear_to_db(c.beta * c.P)},
        {"delta", c.delta},
        {"trials", static_cast<double>(c.trials)},
        {"seed", static_cast<double>(c.seed)},
        {"alpha", s.alpha},
        {"q_eff", s.sinrs.Q_eff},
        {"rho_u_post", s.sinrs.rho_u_post},
        {"rho_d_post", s.sinrs.rho_d_post},
        {"rmse_ul_svd", s.rmse_ul_svd},
        {"rmse_ul_svd_se", s.rmse_ul_svd_se},
        {"rmse_dl_svd", s.rmse_dl_svd},
        {"rmse_dl_svd_se", s.rmse_dl_svd_se},
        {"rmse_ul_pi", s.rmse_ul_pi},
        {"rmse_ul_pi_se", s.rmse_ul_pi_se},
        {"rmse_dl_pi", s.rmse_dl_pi},
        {"rmse_dl_pi_se", s.rmse_dl_pi_se},
        {"crb_ul_sqrt", s.crb_ul_sqrt},
        {"crb_dl_sqrt", s.crb_dl_sqrt},
        {"crb_ul_valid", s.crb_ul_valid ? 1.0 : 0.0},
        {"crb_dl_valid", s.crb_dl_valid ? 1.0 : 0.0},
        {"iter_mean", s.iter_mean},
        {"iter_p5", s.iter_p5},
        {"iter_p95", s.iter_p95},
        {"gain_rel_bias_ml", s.gain_rel_bias_ml},
        {"gain_rel_bias_scm", s.gain_rel_bias_scm},
        {"gain_rel_var_ml", s.gain_rel_var_ml},
        {"gain_rel_var_scm", s.gain_rel_var_scm},
        {"trials_failed", static_cast<double>(s.trials_failed)},
        {"scenario_error", s.scenario_error ? 1.0 : 0.0},
    };
    return row;
}

/// Comma-separated, LF line endings, header first. The column set is fixed, so
/// every row of a sweep shares it.
inline void write_csv(std::ostream& os, const std::vector<RunSummary>& summaries) {
    const std::vector<RunSummary> empty;
    bool first = true;
    std::string header;
    for (const RunSummary& s : summaries) {
        const OutputRow row = to_output_row(s);
        if (first) {
            for (std::size_t i = 0; i < row.fields.size(); ++i) {
                if (i) header += ',';
                header += row.fields[i].first;
            }
            os << header << '\n';
            first = false;
        }
        std::string line;
        for (std::size_t i = 0; i < row.fields.size(); ++i) {
            if (i) line += ',';
            line += detail::format_field(row.fields[i].second);
        }
        os << line << '\n';
    }
    if (first) {
        // header even for an empty sweep
        const RunSummary blank{};
        const OutputRow row = to_output_row(blank);
        for (std::size_t i = 0; i < row.fields.size(); ++i) {
            if (i) os << ',';
            os << row.fields[i].first;
        }
        os << '\n';
    }
}

inline void write_json(std::ostream& os, const std::vector<RunSummary>& summaries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RunSummary& s : summaries) {
        nlohmann::json obj;
        for (const auto& [key, value] : to_output_row(s).fields) {
            if (std::isnan(value))
                obj[key] = nullptr;
            else
                obj[key] = value;
        }
        arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << '\n';
}

} // namespace pilotloop
