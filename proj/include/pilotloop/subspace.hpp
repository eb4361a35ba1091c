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
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pilotloop/errors.hpp"
#include "pilotloop/linalg.hpp"

namespace pilotloop {

namespace detail {

/// Principal angle between the spans of two (near-)unit vectors, in [0, pi/2].
/// Uses atan2 of the projection residual against the inner-product magnitude:
/// equal to arccos(|u^H v|) exactly, but keeps full relative accuracy for tiny
/// angles, where arccos of a rounded inner product cannot certify anything
/// below ~1e-8. The two residuals are averaged so the result is symmetric in
/// its arguments down to the last bit.
inline double unit_vector_angle(const ComplexVector& u, const ComplexVector& v) {
    const Complex z = u.dot(v); // conjugates u
    const double s  = 0.5 * ((v - u * z).norm() + (u - v * std::conj(z)).norm());
    return std::atan2(s, std::abs(z));
}

/// Relative gap check shared by the SVD-backed estimators.
inline void require_separated_top_singular_values(const RealVector& sigma) {
    if (sigma.size() >= 2 && sigma(0) - sigma(1) <= 1e-12 * sigma(0))
        throw DegenerateSpectrum("top singular values coincide; dominant subspace not unique");
}

} // namespace detail

/// One-dimensional subspace of C^M, held as a unit-norm representative with a
/// canonical phase. Equality of subspaces is always judged through
/// subspace_distance, never entrywise.
class SubspacePoint {
 public:
    static SubspacePoint from_vector(const ComplexVector& v) {
        if (v.size() < 1) throw std::invalid_argument("SubspacePoint: empty vector");
        const double n = v.norm();
        if (!(n > 0.0)) throw std::invalid_argument("SubspacePoint: zero vector has no span");
        ComplexVector rep = v / n;
        detail::canonicalize_phase(rep);
        return SubspacePoint(std::move(rep));
    }

    const ComplexVector& rep() const { return rep_; }
    Eigen::Index dim() const { return rep_.size(); }

 private:
    explicit SubspacePoint(ComplexVector rep) : rep_(std::move(rep)) {}
    ComplexVector rep_;
};

/// d_ss(a, b) = arccos(|a^H b|) in [0, pi/2], phase-invariant.
inline double subspace_distance(const SubspacePoint& a, const SubspacePoint& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("subspace_distance: dimension mismatch");
    return detail::unit_vector_angle(a.rep(), b.rep());
}

/// ML UL subspace estimate: dominant left-singular vector of the observation,
/// equivalently the dominant eigenvector of Y_tilde * Y_tilde^H.
inline SubspacePoint ml_ul_subspace_svd(const ComplexMatrix& Y_tilde) {
    const SvdResult svd = full_svd(Y_tilde);
    detail::require_separated_top_singular_values(svd.sigma);
    return SubspacePoint::from_vector(svd.U.col(0));
}

/// ML DL subspace estimate: dominant right-singular vector.
inline SubspacePoint ml_dl_subspace_svd(const ComplexMatrix& Y_tilde) {
    const SvdResult svd = full_svd(Y_tilde);
    detail::require_separated_top_singular_values(svd.sigma);
    return SubspacePoint::from_vector(svd.V.col(0));
}

/// Result of the rank-1 power iteration: both subspace estimates, the dominant
/// singular value, and the pass count.
struct PowerIterResult {
    SubspacePoint g_hat;  ///< UL estimate (left-singular direction)
    SubspacePoint h_hat;  ///< DL estimate (right-singular direction)
    double sigma1_hat;    ///< |g_hat^H * Y_tilde * h_hat|
    int iterations;
    bool converged;
};

inline int default_power_iteration_cap(Eigen::Index cols) {
    return static_cast<int>(10 * cols + 100);
}

/// Rank-1 SVD by alternating power iterations.
///
/// g_0 is the highest-norm column of the input, normalized (lowest index on
/// ties); h_0 is the constant vector 1/sqrt(cols). Each pass applies
/// h_i = Y^H g_{i-1} / ||.||, g_i = Y h_i / ||.|| and stops once
/// max{d_ss(g_{i-1}, g_i), d_ss(h_{i-1}, h_i)} <= delta. The first pass
/// compares h_1 against the constant initializer, so a generic input needs at
/// least two passes; a g increment at machine level (<= min(delta, 1e-12),
/// i.e. an exact fixed point such as a noise-free rank-1 input) terminates
/// immediately since further passes cannot move any iterate.
///
/// The two-step update is used as written; Y * Y^H is never formed, keeping
/// the per-pass cost quadratic.
inline PowerIterResult power_iteration_rank1(const ComplexMatrix& Y_tilde, double delta,
                                             int max_iters,
                                             std::vector<double>* rayleigh_trace = nullptr) {
    if (!(delta > 0.0)) throw std::invalid_argument("power_iteration_rank1: delta must be > 0");
    if (max_iters < 1) throw std::invalid_argument("power_iteration_rank1: max_iters must be >= 1");
    const Eigen::Index rows = Y_tilde.rows();
    const Eigen::Index cols = Y_tilde.cols();
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("power_iteration_rank1: empty matrix");

    Eigen::Index best_col = 0;
    double best_norm2     = -1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double n2 = Y_tilde.col(j).squaredNorm();
        if (n2 > best_norm2) {
            best_norm2 = n2;
            best_col   = j;
        }
    }
    if (!(best_norm2 > 0.0))
        throw std::invalid_argument("power_iteration_rank1: all-zero input matrix");

    const double fixed_point_tol = std::min(delta, 1e-12);

    ComplexVector g = Y_tilde.col(best_col) / std::sqrt(best_norm2);
    ComplexVector h = ComplexVector::Constant(cols, Complex(1.0 / std::sqrt(double(cols)), 0.0));

    int it         = 0;
    bool converged = false;
    while (it < max_iters) {
        ++it;
        ComplexVector hn = Y_tilde.adjoint() * g;
        const double nh  = hn.norm();
        if (!(nh > 0.0)) throw DegenerateSpectrum("power_iteration_rank1: iterate annihilated");
        if (rayleigh_trace) rayleigh_trace->push_back(nh);
        hn /= nh;
        ComplexVector gn = Y_tilde * hn;
        const double ng  = gn.norm();
        if (!(ng > 0.0)) throw DegenerateSpectrum("power_iteration_rank1: iterate annihilated");
        gn /= ng;

        const double dg = detail::unit_vector_angle(g, gn);
        const double dh = detail::unit_vector_angle(h, hn);
        g = std::move(gn);
        h = std::move(hn);
        if (std::max(dg, dh) <= delta || dg <= fixed_point_tol) {
            converged = true;
            break;
        }
    }

    const double sigma1 = std::abs(g.dot(Y_tilde * h));
    return PowerIterResult{SubspacePoint::from_vector(g), SubspacePoint::from_vector(h), sigma1,
                           it, converged};
}

/// UL shortcut for tau = M: the left-singular vectors of Y and of Y*Phi span
/// the same subspaces, so the reverse modulation can be skipped entirely.
inline SubspacePoint ml_ul_subspace_noreverse(const ComplexMatrix& Y) {
    if (Y.rows() != Y.cols())
        throw std::invalid_argument("ml_ul_subspace_noreverse: requires tau == M (square Y)");
    return ml_ul_subspace_svd(Y);
}

/// DL shortcut for tau = M: take the dominant right-singular vector of the raw
/// Y and reverse-modulate that single vector, h_hat ~ Phi^H v1(Y).
inline SubspacePoint ml_dl_subspace_swapped(const ComplexMatrix& Y, const ComplexMatrix& Phi) {
    if (Y.rows() != Y.cols())
        throw std::invalid_argument("ml_dl_subspace_swapped: requires tau == M (square Y)");
    if (Phi.rows() != Y.cols() || Phi.cols() != Y.rows())
        throw std::invalid_argument("ml_dl_subspace_swapped: pilot dimensions do not match Y");
    const SvdResult svd = full_svd(Y);
    detail::require_separated_top_singular_values(svd.sigma);
    return SubspacePoint::from_vector(Phi.adjoint() * svd.V.col(0));
}

/// Hermitian positive-definite noise covariance with cached square-root
/// factors, for the whitened estimator.
class NoiseCovariance {
 public:
    explicit NoiseCovariance(const ComplexMatrix& R) {
        if (R.rows() != R.cols() || R.rows() < 1)
            throw std::invalid_argument("NoiseCovariance: square matrix required");
        R_ = 0.5 * (R + R.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(R_);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("NoiseCovariance: eigendecomposition failed");
        if (!(es.eigenvalues()(0) > 0.0))
            throw std::invalid_argument("NoiseCovariance: matrix is not positive definite");
        const RealVector root = es.eigenvalues().cwiseSqrt();
        R_sqrt_     = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
        R_inv_sqrt_ = es.eigenvectors() * root.cwiseInverse().asDiagonal() *
                      es.eigenvectors().adjoint();
    }

    const ComplexMatrix& R() const { return R_; }
    const ComplexMatrix& R_sqrt() const { return R_sqrt_; }
    const ComplexMatrix& R_inv_sqrt() const { return R_inv_sqrt_; }

 private:
    ComplexMatrix R_;
    ComplexMatrix R_sqrt_;
    ComplexMatrix R_inv_sqrt_;
};

/// Whitened UL estimator for known spatially correlated noise (tau = M):
/// u1 from the SVD of R^{-1/2} * Y_tilde, mapped back through R^{1/2}.
inline SubspacePoint ml_ul_subspace_whitened(const ComplexMatrix& Y_tilde,
                                             const NoiseCovariance& noise) {
    if (Y_tilde.rows() != Y_tilde.cols())
        throw std::invalid_argument("ml_ul_subspace_whitened: requires tau == M (square input)");
    if (noise.R().rows() != Y_tilde.rows())
        throw std::invalid_argument("ml_ul_subspace_whitened: covariance dimension mismatch");
    const SvdResult svd = full_svd(noise.R_inv_sqrt() * Y_tilde);
    detail::require_separated_top_singular_values(svd.sigma);
    return SubspacePoint::from_vector(noise.R_sqrt() * svd.U.col(0));
}

/// Concentration parameter and subspace basis of a complex Bingham prior.
struct BinghamPrior {
    double kappa;      ///< >= 0; larger means more concentrated around Pi
    ComplexMatrix Pi;  ///< M x p with orthonormal columns

    BinghamPrior(double kappa_, ComplexMatrix Pi_) : kappa(kappa_), Pi(std::move(Pi_)) {
        if (!(kappa >= 0.0)) throw std::invalid_argument("BinghamPrior: kappa must be >= 0");
        if (Pi.rows() < 1 || Pi.cols() < 1)
            throw std::invalid_argument("BinghamPrior: empty basis");
        const ComplexMatrix G = Pi.adjoint() * Pi;
        const double err =
            (G - ComplexMatrix::Identity(Pi.cols(), Pi.cols())).cwiseAbs().maxCoeff();
        if (err > 1e-12)
            throw std::invalid_argument("BinghamPrior: basis columns are not orthonormal");
    }
};

/// Bayesian minimum mean-square-distance estimator for the UL subspace under a
/// Bingham prior (tau = M): dominant eigenvector of kappa*Pi*Pi^H + Y*Y^H.
/// With kappa = 0 this is the ML estimator on the raw observation.
inline SubspacePoint mmsd_ul_subspace(const ComplexMatrix& Y, const BinghamPrior& prior) {
    if (Y.rows() != Y.cols())
        throw std::invalid_argument("mmsd_ul_subspace: requires tau == M (square Y)");
    if (prior.Pi.rows() != Y.rows())
        throw std::invalid_argument("mmsd_ul_subspace: prior dimension mismatch");
    const ComplexMatrix A =
        prior.kappa * (prior.Pi * prior.Pi.adjoint()) + Y * Y.adjoint();
    return SubspacePoint::from_vector(dominant_eigvec_psd(A));
}

} // namespace pilotloop
