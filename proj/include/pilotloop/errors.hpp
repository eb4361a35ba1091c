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
#include <string>

namespace pilotloop {

/// Thrown when the two largest eigenvalues (or singular values) of an input
/// coincide within tolerance, so the dominant eigenvector is not unique.
/// Harness code treats this as a per-trial soft failure, not a run abort.
struct DegenerateSpectrum : std::runtime_error {
    explicit DegenerateSpectrum(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pilotloop
