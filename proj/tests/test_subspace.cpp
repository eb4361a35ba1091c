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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "pilotloop/channel.hpp"
#include "pilotloop/subspace.hpp"

using namespace pilotloop;

namespace {

ScenarioConfig scenario(int M, int tau, double rho_u_db, double rho_d_db = 10.0) {
    ScenarioConfig c;
    c.M            = M;
    c.tau          = tau;
    c.beta         = 1.0;
    c.P            = db_to_linear(rho_d_db);
    c.rho_u_target = db_to_linear(rho_u_db);
    return c;
}

SubspacePoint basis_point(int dim, int k) {
    ComplexVector e = ComplexVector::Zero(dim);
    e(k)            = Complex(1.0, 0.0);
    return SubspacePoint::from_vector(e);
}

} // namespace

TEST_CASE("subspace_distance: phase invariance, orthogonality, diagonal") {
    const SubspacePoint e1 = basis_point(2, 0);
    const SubspacePoint e2 = basis_point(2, 1);

    ComplexVector e1_rot = ComplexVector::Zero(2);
    e1_rot(0)            = std::polar(1.0, 1.234);
    CHECK(subspace_distance(e1, SubspacePoint::from_vector(e1_rot)) <= 1e-12);

    CHECK(subspace_distance(e1, e2) == Catch::Approx(std::numbers::pi / 2).epsilon(1e-12));

    ComplexVector mix = ComplexVector::Zero(2);
    mix(0)            = 1.0;
    mix(1)            = 1.0;
    CHECK(subspace_distance(e1, SubspacePoint::from_vector(mix)) ==
          Catch::Approx(std::numbers::pi / 4).epsilon(1e-12));

    CHECK_THROWS_AS(subspace_distance(e1, basis_point(3, 0)), std::invalid_argument);
}

TEST_CASE("subspace_distance: metric axioms on random triples") {
    RngStream rng(404, 0);
    double worst_triangle = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const SubspacePoint a =
            SubspacePoint::from_vector(sample_complex_gaussian_vector(rng, 6, 1.0));
        const SubspacePoint b =
            SubspacePoint::from_vector(sample_complex_gaussian_vector(rng, 6, 1.0));
        const SubspacePoint c =
            SubspacePoint::from_vector(sample_complex_gaussian_vector(rng, 6, 1.0));
        const double ab = subspace_distance(a, b);
        const double ba = subspace_distance(b, a);
        const double bc = subspace_distance(b, c);
        const double ac = subspace_distance(a, c);
        REQUIRE(ab == ba); // symmetric by construction
        REQUIRE(ab >= 0.0);
        REQUIRE(ab <= std::numbers::pi / 2 + 1e-15);
        worst_triangle = std::max(worst_triangle, ac - ab - bc);
        if (k < 100) REQUIRE(subspace_distance(a, a) <= 1e-14);
    }
    CHECK(worst_triangle <= 1e-9);
}

TEST_CASE("ml estimators: exact recovery in the noise-free limit") {
    ScenarioConfig c = scenario(8, 8, 10.0);
    RngStream rng(5, 0);
    RealizationOptions noise_free{true, true};
    const ChannelRealization r = generate_realization(c, rng, noise_free);

    const SubspacePoint g_true = SubspacePoint::from_vector(r.g);
    const SubspacePoint h_true = SubspacePoint::from_vector(r.h);
    CHECK(subspace_distance(ml_ul_subspace_svd(r.Y_tilde), g_true) <= 1e-10);
    CHECK(subspace_distance(ml_dl_subspace_svd(r.Y_tilde), h_true) <= 1e-10);
}

TEST_CASE("ml estimators: conjugate-transpose duality") {
    ScenarioConfig c = scenario(8, 8, 10.0);
    RngStream rng(6, 0);
    const ChannelRealization r = generate_realization(c, rng);
    const SubspacePoint dl     = ml_dl_subspace_svd(r.Y_tilde);
    const SubspacePoint ul_of_adj = ml_ul_subspace_svd(r.Y_tilde.adjoint());
    CHECK(subspace_distance(dl, ul_of_adj) <= 1e-12);
}

TEST_CASE("ml estimators: degenerate spectrum is rejected") {
    CHECK_THROWS_AS(ml_ul_subspace_svd(ComplexMatrix::Identity(4, 4)), DegenerateSpectrum);
    CHECK_THROWS_AS(ml_dl_subspace_svd(ComplexMatrix::Identity(4, 4)), DegenerateSpectrum);
}

TEST_CASE("power iteration: rank-1 input converges in one pass") {
    RngStream rng(9, 0);
    ComplexVector a = sample_complex_gaussian_vector(rng, 6, 1.0);
    ComplexVector b = sample_complex_gaussian_vector(rng, 6, 1.0);
    const ComplexMatrix Y    = a * b.adjoint();
    const PowerIterResult pi = power_iteration_rank1(Y, 0.1, 100);
    CHECK(pi.iterations == 1);
    CHECK(pi.converged);
    const double want = a.norm() * b.norm();
    CHECK(std::abs(pi.sigma1_hat - want) <= 1e-12 * want);
    CHECK(subspace_distance(pi.g_hat, SubspacePoint::from_vector(a)) <= 1e-12);
    CHECK(subspace_distance(pi.h_hat, SubspacePoint::from_vector(b)) <= 1e-12);
}

TEST_CASE("power iteration: rejects an all-zero matrix, honors the cap") {
    CHECK_THROWS_AS(power_iteration_rank1(ComplexMatrix::Zero(3, 3), 0.1, 10),
                    std::invalid_argument);

    // nearly degenerate spectrum cannot reach delta = 1e-10 in 5 passes
    ComplexMatrix D = ComplexMatrix::Zero(2, 2);
    D(0, 0)         = 1.0;
    D(1, 1)         = 0.999999;
    RngStream rng(10, 0);
    const ComplexMatrix Q = sample_unitary_pilot(rng, 2, 2);
    const ComplexMatrix Y = Q * D * Q.adjoint();
    const PowerIterResult pi = power_iteration_rank1(Y, 1e-10, 5);
    CHECK_FALSE(pi.converged);
    CHECK(pi.iterations == 5);
}

TEST_CASE("power iteration: agrees with the dense SVD oracle") {
    int inst = 0;
    for (int k = 0; k < 100; ++k) {
        const int M      = 4 + (k % 29);
        ScenarioConfig c = scenario(M, M, 10.0);
        c.seed           = 1000 + static_cast<std::uint64_t>(k);
        RngStream rng(c.seed, 0);
        const ChannelRealization r = generate_realization(c, rng);
        const SvdResult svd        = full_svd(r.Y_tilde);
        const PowerIterResult pi   = power_iteration_rank1(r.Y_tilde, 1e-8, 100000);
        REQUIRE(pi.converged);
        CHECK(subspace_distance(pi.g_hat, SubspacePoint::from_vector(svd.U.col(0))) <= 1e-6);
        CHECK(subspace_distance(pi.h_hat, SubspacePoint::from_vector(svd.V.col(0))) <= 1e-6);
        ++inst;
    }
    CHECK(inst == 100);
}

TEST_CASE("power iteration: Rayleigh quotient ascends monotonically") {
    for (int k = 0; k < 20; ++k) {
        ScenarioConfig c = scenario(12, 12, 0.0);
        c.seed           = 50 + static_cast<std::uint64_t>(k);
        RngStream rng(c.seed, 0);
        const ChannelRealization r = generate_realization(c, rng);
        std::vector<double> trace;
        power_iteration_rank1(r.Y_tilde, 1e-9, 5000, &trace);
        for (std::size_t i = 1; i < trace.size(); ++i)
            CHECK(trace[i] >= trace[i - 1] * (1.0 - 1e-12));
    }
}

TEST_CASE("shortcuts: omit and swap the reverse modulation at tau = M") {
    for (int M : {8, 16}) {
        double worst_ul = 0.0, worst_dl = 0.0;
        const int trials = (M == 16) ? 100 : 10;
        for (int t = 0; t < trials; ++t) {
            ScenarioConfig c = scenario(M, M, 10.0);
            c.seed           = 300 + static_cast<std::uint64_t>(t);
            RngStream rng(c.seed, 0);
            const ChannelRealization r = generate_realization(c, rng);

            const double dul = subspace_distance(ml_ul_subspace_noreverse(r.Y),
                                                 ml_ul_subspace_svd(r.Y_tilde));
            const double ddl = subspace_distance(ml_dl_subspace_swapped(r.Y, r.phi_pilot),
                                                 ml_dl_subspace_svd(r.Y_tilde));
            worst_ul = std::max(worst_ul, dul);
            worst_dl = std::max(worst_dl, ddl);
        }
        CHECK(worst_ul <= 1e-10);
        CHECK(worst_dl <= 1e-10);
    }
}

TEST_CASE("shortcuts: noise-free inputs recover the exact subspaces") {
    ScenarioConfig c = scenario(8, 8, 10.0);
    RngStream rng(71, 0);
    const ChannelRealization r = generate_realization(c, rng, {true, true});
    CHECK(subspace_distance(ml_ul_subspace_noreverse(r.Y),
                            SubspacePoint::from_vector(r.g)) <= 1e-10);
    CHECK(subspace_distance(ml_dl_subspace_swapped(r.Y, r.phi_pilot),
                            SubspacePoint::from_vector(r.h)) <= 1e-10);
}

TEST_CASE("shortcuts: reject tau != M") {
    ScenarioConfig c = scenario(4, 8, 10.0);
    RngStream rng(72, 0);
    const ChannelRealization r = generate_realization(c, rng);
    CHECK_THROWS_AS(ml_ul_subspace_noreverse(r.Y), std::invalid_argument);
    CHECK_THROWS_AS(ml_dl_subspace_swapped(r.Y, r.phi_pilot), std::invalid_argument);
}

TEST_CASE("whitened estimator: reduces to the plain one for scaled identity noise") {
    ScenarioConfig c = scenario(6, 6, 10.0);
    RngStream rng(81, 0);
    const ChannelRealization r = generate_realization(c, rng);
    const SubspacePoint plain  = ml_ul_subspace_svd(r.Y_tilde);

    const NoiseCovariance white(ComplexMatrix::Identity(6, 6));
    CHECK(subspace_distance(ml_ul_subspace_whitened(r.Y_tilde, white), plain) <= 1e-12);

    const NoiseCovariance scaled(3.7 * ComplexMatrix::Identity(6, 6));
    CHECK(subspace_distance(ml_ul_subspace_whitened(r.Y_tilde, scaled), plain) <= 1e-12);
}

TEST_CASE("whitened estimator: exact recovery from a noise-free observation") {
    ScenarioConfig c = scenario(6, 6, 10.0);
    RngStream rng(82, 0);
    const ChannelRealization r = generate_realization(c, rng, {true, true});

    ComplexMatrix B = sample_complex_gaussian_matrix(rng, 6, 6, 1.0);
    const NoiseCovariance noise(B * B.adjoint() + 0.5 * ComplexMatrix::Identity(6, 6));
    CHECK(subspace_distance(ml_ul_subspace_whitened(r.Y_tilde, noise),
                            SubspacePoint::from_vector(r.g)) <= 1e-10);
}

TEST_CASE("whitened estimator: rejects indefinite covariance") {
    ComplexMatrix R = ComplexMatrix::Identity(3, 3);
    R(2, 2)         = -1.0;
    CHECK_THROWS_AS(NoiseCovariance(R), std::invalid_argument);
}

TEST_CASE("mmsd estimator: collapses to ML for a flat prior") {
    ScenarioConfig c = scenario(8, 8, 0.0);
    RngStream rng(91, 0);
    const ChannelRealization r = generate_realization(c, rng);
    const BinghamPrior flat(0.0, sample_unitary_pilot(rng, 8, 2));
    CHECK(subspace_distance(mmsd_ul_subspace(r.Y, flat), ml_ul_subspace_noreverse(r.Y)) <= 1e-12);
}

TEST_CASE("mmsd estimator: a dominant prior pins the estimate") {
    ScenarioConfig c = scenario(8, 8, 0.0);
    RngStream rng(92, 0);
    const ChannelRealization r = generate_realization(c, rng);
    const ComplexMatrix pi0    = sample_unitary_pilot(rng, 8, 1);
    const double kappa         = 1e12 * r.Y.squaredNorm();
    const BinghamPrior strong(kappa, pi0);
    CHECK(subspace_distance(mmsd_ul_subspace(r.Y, strong),
                            SubspacePoint::from_vector(pi0.col(0))) <= 1e-3);
}

TEST_CASE("mmsd estimator: zero observation returns the prior column") {
    RngStream rng(93, 0);
    const ComplexMatrix pi0 = sample_unitary_pilot(rng, 5, 1);
    const BinghamPrior prior(1.0, pi0);
    CHECK(subspace_distance(mmsd_ul_subspace(ComplexMatrix::Zero(5, 5), prior),
                            SubspacePoint::from_vector(pi0.col(0))) <= 1e-12);
}

TEST_CASE("bingham prior: validation") {
    RngStream rng(94, 0);
    CHECK_THROWS_AS(BinghamPrior(-1.0, sample_unitary_pilot(rng, 4, 1)), std::invalid_argument);
    ComplexMatrix bad = ComplexMatrix::Ones(4, 2);
    CHECK_THROWS_AS(BinghamPrior(1.0, bad), std::invalid_argument);
}

TEST_CASE("all estimators are invariant under complex rescaling of the input") {
    ScenarioConfig c = scenario(8, 8, 10.0);
    RngStream rng(95, 0);
    const ChannelRealization r = generate_realization(c, rng);
    const Complex scale        = std::polar(3.7, 2.1);
    const ComplexMatrix Yt2    = scale * r.Y_tilde;
    const ComplexMatrix Y2     = scale * r.Y;

    CHECK(subspace_distance(ml_ul_subspace_svd(r.Y_tilde), ml_ul_subspace_svd(Yt2)) <= 1e-12);
    CHECK(subspace_distance(ml_dl_subspace_svd(r.Y_tilde), ml_dl_subspace_svd(Yt2)) <= 1e-12);

    const PowerIterResult p1 = power_iteration_rank1(r.Y_tilde, c.delta, 1000);
    const PowerIterResult p2 = power_iteration_rank1(Yt2, c.delta, 1000);
    CHECK(p1.iterations == p2.iterations);
    CHECK(subspace_distance(p1.g_hat, p2.g_hat) <= 1e-12);
    CHECK(subspace_distance(p1.h_hat, p2.h_hat) <= 1e-12);

    CHECK(subspace_distance(ml_ul_subspace_noreverse(r.Y), ml_ul_subspace_noreverse(Y2)) <=
          1e-12);
    CHECK(subspace_distance(ml_dl_subspace_swapped(r.Y, r.phi_pilot),
                            ml_dl_subspace_swapped(Y2, r.phi_pilot)) <= 1e-12);

    ComplexMatrix B = sample_complex_gaussian_matrix(rng, 8, 8, 1.0);
    const NoiseCovariance noise(B * B.adjoint() + ComplexMatrix::Identity(8, 8));
    CHECK(subspace_distance(ml_ul_subspace_whitened(r.Y_tilde, noise),
                            ml_ul_subspace_whitened(Yt2, noise)) <= 1e-12);

    const BinghamPrior prior(2.0, sample_unitary_pilot(rng, 8, 1));
    // the MMSD objective scales the data term; invariance holds only for pure
    // phase factors there
    const ComplexMatrix Yp = std::polar(1.0, 0.9) * r.Y;
    CHECK(subspace_distance(mmsd_ul_subspace(r.Y, prior), mmsd_ul_subspace(Yp, prior)) <= 1e-12);
}
