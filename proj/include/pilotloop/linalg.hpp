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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pilotloop/errors.hpp"

namespace pilotloop {

using Complex       = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector    = Eigen::VectorXd;

/// Seedable random stream with independent substreams. Two streams built from
/// the same (seed, stream_id) produce bitwise-identical draw sequences; each
/// Monte Carlo trial owns its own substream so results do not depend on the
/// scheduling of trials across threads.
///
/// Gaussian variates are produced by an explicit polar Box-Muller transform on
/// the raw 64-bit engine output, so the sequence is fixed by this class alone
/// and not by the standard library's distribution implementations.
class RngStream {
 public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Uniform draw in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
    Complex complex_gaussian(double variance) {
        const double u1 = 1.0 - uniform01(); // (0, 1]
        const double u2 = uniform01();
        const double r  = std::sqrt(-variance * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        return Complex(r * std::cos(th), r * std::sin(th));
    }

 private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

/// Vector of i.i.d. CN(0, variance_per_entry) entries. A zero variance yields
/// the zero vector (the draws are still consumed, keeping streams aligned).
inline ComplexVector sample_complex_gaussian_vector(RngStream& rng, Eigen::Index len,
                                                    double variance_per_entry) {
    if (len < 1) throw std::invalid_argument("sample_complex_gaussian_vector: len must be >= 1");
    if (variance_per_entry < 0.0)
        throw std::invalid_argument("sample_complex_gaussian_vector: variance must be >= 0");
    ComplexVector v(len);
    for (Eigen::Index i = 0; i < len; ++i) v(i) = rng.complex_gaussian(variance_per_entry);
    return v;
}

/// Matrix of i.i.d. CN(0, variance_per_entry) entries, filled column-major.
inline ComplexMatrix sample_complex_gaussian_matrix(RngStream& rng, Eigen::Index rows,
                                                    Eigen::Index cols,
                                                    double variance_per_entry) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("sample_complex_gaussian_matrix: dimensions must be >= 1");
    if (variance_per_entry < 0.0)
        throw std::invalid_argument("sample_complex_gaussian_matrix: variance must be >= 0");
    ComplexMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_gaussian(variance_per_entry);
    return m;
}

/// Haar-distributed tau x M matrix with orthonormal columns (tau >= M).
/// QR of a complex Gaussian matrix alone is not Haar; the Q columns are
/// rotated by the phases of R's diagonal so that the triangular factor has a
/// real-positive diagonal, which restores the uniform distribution.
inline ComplexMatrix sample_unitary_pilot(RngStream& rng, Eigen::Index tau, Eigen::Index M) {
    if (M < 1) throw std::invalid_argument("sample_unitary_pilot: M must be >= 1");
    if (tau < M) throw std::invalid_argument("sample_unitary_pilot: requires tau >= M");
    const ComplexMatrix G = sample_complex_gaussian_matrix(rng, tau, M, 1.0);
    Eigen::HouseholderQR<ComplexMatrix> qr(G);
    ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(tau, M);
    for (Eigen::Index j = 0; j < M; ++j) {
        const Complex rjj = qr.matrixQR()(j, j);
        const double mag  = std::abs(rjj);
        if (mag > 0.0) Q.col(j) *= rjj / mag;
    }
    return Q;
}

/// Thin SVD A = U * diag(sigma) * V^H with sigma sorted descending.
struct SvdResult {
    ComplexMatrix U;
    RealVector sigma;
    ComplexMatrix V;
};

inline SvdResult full_svd(const ComplexMatrix& A) {
    if (A.rows() < 1 || A.cols() < 1) throw std::invalid_argument("full_svd: empty matrix");
    Eigen::BDCSVD<ComplexMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return SvdResult{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

namespace detail {

/// Rotates v so its largest-magnitude entry (lowest index on ties) becomes
/// real-positive. Subspaces are phase-invariant; tests need a deterministic
/// representative.
inline void canonicalize_phase(ComplexVector& v) {
    Eigen::Index best = 0;
    double best_mag   = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double m = std::abs(v(i));
        if (m > best_mag) {
            best_mag = m;
            best     = i;
        }
    }
    if (best_mag > 0.0) v *= std::conj(v(best)) / best_mag;
}

} // namespace detail

/// Unit-norm eigenvector for the largest eigenvalue of a Hermitian PSD matrix.
/// The input is symmetrized as (A + A^H)/2 first; floating-point products such
/// as Y*Y^H are Hermitian only up to rounding. Throws DegenerateSpectrum when
/// the top two eigenvalues coincide within 1e-12 relative.
inline ComplexVector dominant_eigvec_psd(const ComplexMatrix& A) {
    if (A.rows() != A.cols() || A.rows() < 1)
        throw std::invalid_argument("dominant_eigvec_psd: square matrix required");
    const Eigen::Index n = A.rows();
    const ComplexMatrix H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dominant_eigvec_psd: eigendecomposition failed");
    const double lmax = es.eigenvalues()(n - 1);
    if (n >= 2) {
        const double l2 = es.eigenvalues()(n - 2);
        if (lmax - l2 <= 1e-12 * std::abs(lmax))
            throw DegenerateSpectrum("dominant_eigvec_psd: top eigenvalues coincide");
    }
    ComplexVector v = es.eigenvectors().col(n - 1);
    v.normalize();
    detail::canonicalize_phase(v);
    return v;
}

} // namespace pilotloop
