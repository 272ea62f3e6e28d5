#pragma once

// Symmetric circulant coupling operators on a discrete action ring and their
// exact real-Fourier eigenstructure.
//
// The ring has K sectors at angles theta_j = 2*pi*j/K. A coupling kernel is a
// symmetric profile phi(d) over ring distance d, and the induced operator is
// A_{jk} = phi((j-k) mod K). Such an A is diagonalized by the real discrete
// Fourier basis
//     phi_k[j] = cos(k theta_j),  psi_k[j] = sin(k theta_j),
// with eigenvalues lambda_k = sum_d phi(d) cos(k theta_d), each plane stored
// once for k = 0..floor(K/2). Modes k = 0 and k = K/2 (K even) are
// one-dimensional. All inner products here are the ring inner product
// <u,v> = (1/K) sum_j u_j v_j, under which <phi_k,phi_k> = 1/2 for planar k.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodring/errors.hpp"

namespace nodring {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// <u,v> = (1/K) sum_j u_j v_j
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar ring_dot(const Eigen::MatrixBase<DerivedA>& u,
                                   const Eigen::MatrixBase<DerivedB>& v) {
    return u.dot(v) / static_cast<typename DerivedA::Scalar>(u.size());
}

template <typename Derived>
typename Derived::Scalar ring_norm(const Eigen::MatrixBase<Derived>& u) {
    using std::sqrt;
    return sqrt(ring_dot(u, u));
}

template <typename Scalar = double>
struct ActionRing {
    int K = 0;
    VectorX<Scalar> theta;  // theta[j] = 2*pi*j/K

    static ActionRing make(int K) {
        if (K < 3) throw InvalidParameter("ActionRing requires K >= 3, got K=" + std::to_string(K));
        ActionRing ring;
        ring.K = K;
        ring.theta.resize(K);
        const Scalar two_pi = Scalar(2) * Scalar(EIGEN_PI);
        for (int j = 0; j < K; ++j) ring.theta[j] = two_pi * Scalar(j) / Scalar(K);
        return ring;
    }
};

template <typename Scalar = double>
struct CouplingKernel {
    VectorX<Scalar> profile;  // phi(d), d = 0..K-1, phi(d) == phi(K-d)

    int size() const { return static_cast<int>(profile.size()); }
};

template <typename Scalar>
void validate_kernel(const CouplingKernel<Scalar>& kernel, const ActionRing<Scalar>& ring,
                     Scalar tol = Scalar(1e-12)) {
    const int K = ring.K;
    if (kernel.size() != K)
        throw BadLength("kernel profile has length " + std::to_string(kernel.size()) +
                        ", ring has K=" + std::to_string(K));
    if (!kernel.profile.allFinite()) throw InvalidParameter("kernel profile has non-finite entries");
    for (int d = 1; d < K; ++d) {
        using std::abs;
        if (abs(kernel.profile[d] - kernel.profile[K - d]) > tol)
            throw AsymmetricKernel("phi(" + std::to_string(d) + ") != phi(" + std::to_string(K - d) + ")");
    }
}

template <typename Scalar = double>
struct FourierMode {
    int index = 0;
    Scalar eigenvalue = 0;
    VectorX<Scalar> cosine;  // phi_k
    VectorX<Scalar> sine;    // psi_k; empty for k = 0 and k = K/2
    bool planar = false;     // true iff the eigenplane is two-dimensional
};

template <typename Scalar = double>
struct DominantMode {
    int k_star = 0;
    Scalar lambda = 0;
    Scalar gap = 0;
};

template <typename Scalar = double>
struct CirculantOperator {
    ActionRing<Scalar> ring;
    MatrixX<Scalar> A;
    std::vector<FourierMode<Scalar>> modes;  // k = 0..floor(K/2)

    int K() const { return ring.K; }
    int mode_count() const { return static_cast<int>(modes.size()); }
    const FourierMode<Scalar>& mode(int k) const { return modes.at(static_cast<size_t>(k)); }
};

// Eigenvalues come from the real DFT of the profile; the circulant structure
// makes this exact, so no dense eigensolver is involved.
template <typename Scalar>
CirculantOperator<Scalar> build_circulant(const CouplingKernel<Scalar>& kernel,
                                          const ActionRing<Scalar>& ring) {
    validate_kernel(kernel, ring);
    const int K = ring.K;

    CirculantOperator<Scalar> op;
    op.ring = ring;
    op.A.resize(K, K);
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k) op.A(j, k) = kernel.profile[((j - k) % K + K) % K];

    const int half = K / 2;
    op.modes.reserve(static_cast<size_t>(half) + 1);
    for (int k = 0; k <= half; ++k) {
        FourierMode<Scalar> mode;
        mode.index = k;
        mode.planar = (k != 0) && !(K % 2 == 0 && k == half);
        Scalar lambda = 0;
        for (int d = 0; d < K; ++d) lambda += kernel.profile[d] * std::cos(Scalar(k) * ring.theta[d]);
        mode.eigenvalue = lambda;
        mode.cosine.resize(K);
        for (int j = 0; j < K; ++j) mode.cosine[j] = std::cos(Scalar(k) * ring.theta[j]);
        if (mode.planar) {
            mode.sine.resize(K);
            for (int j = 0; j < K; ++j) mode.sine[j] = std::sin(Scalar(k) * ring.theta[j]);
        }
        op.modes.push_back(std::move(mode));
    }
    return op;
}

// Local excitation of (cosine-tapered) gain excite_gain out to ring distance
// excite_width, a zero crossing at distance excite_width+1, and a flat
// inhibitory surround of depth inhibit_gain. With normalize_dominant the
// profile and spectrum are rescaled so lambda_{k_star} == 1 exactly, making
// alpha_c = d_z.
template <typename Scalar>
CouplingKernel<Scalar> mexican_hat_kernel(const ActionRing<Scalar>& ring, Scalar excite_width,
                                          Scalar excite_gain, Scalar inhibit_gain,
                                          bool normalize_dominant = true) {
    const int K = ring.K;
    if (excite_gain <= Scalar(0) || inhibit_gain <= Scalar(0))
        throw InvalidParameter("mexican_hat_kernel gains must be positive");
    if (!(excite_width < Scalar(K) / Scalar(2)))
        throw InvalidParameter("mexican_hat_kernel requires excite_width < K/2");

    CouplingKernel<Scalar> kernel;
    kernel.profile.resize(K);
    const Scalar crossing = excite_width + Scalar(1);
    for (int d = 0; d < K; ++d) {
        const Scalar rho = Scalar(std::min(d, K - d));
        if (rho < crossing)
            kernel.profile[d] = excite_gain * std::cos(Scalar(EIGEN_PI) / Scalar(2) * rho / crossing);
        else if (rho == crossing)
            kernel.profile[d] = Scalar(0);
        else
            kernel.profile[d] = -inhibit_gain;
    }

    auto op = build_circulant(kernel, ring);
    int k_best = 0;
    for (int k = 1; k < op.mode_count(); ++k)
        if (op.mode(k).eigenvalue > op.mode(k_best).eigenvalue) k_best = k;
    Scalar runner_up = -std::numeric_limits<Scalar>::infinity();
    for (int k = 0; k < op.mode_count(); ++k)
        if (k != k_best) runner_up = std::max(runner_up, op.mode(k).eigenvalue);

    if (k_best == 0)
        throw DegenerateKernel("dominant mode is k=0 (excitation spans the ring)");
    if (op.mode(k_best).eigenvalue - runner_up < Scalar(1e-9))
        throw DegenerateKernel("dominant mode is not unique");
    if (normalize_dominant) {
        const Scalar lambda_star = op.mode(k_best).eigenvalue;
        if (lambda_star <= Scalar(0))
            throw DegenerateKernel("cannot normalize: dominant eigenvalue is nonpositive");
        kernel.profile /= lambda_star;
    }
    return kernel;
}

template <typename Scalar>
DominantMode<Scalar> dominant_mode(const CirculantOperator<Scalar>& op) {
    int k_best = 0;
    for (int k = 1; k < op.mode_count(); ++k)
        if (op.mode(k).eigenvalue > op.mode(k_best).eigenvalue) k_best = k;
    Scalar runner_up = -std::numeric_limits<Scalar>::infinity();
    for (int k = 0; k < op.mode_count(); ++k)
        if (k != k_best) runner_up = std::max(runner_up, op.mode(k).eigenvalue);

    const Scalar gap = op.mode(k_best).eigenvalue - runner_up;
    if (gap < Scalar(1e-9))
        throw NoUniqueDominantMode("top eigenvalues tie within 1e-9 (gap=" + std::to_string(double(gap)) + ")");
    if (!op.mode(k_best).planar)
        throw DominantModeNotPlanar("dominant mode k=" + std::to_string(k_best) +
                                    " has a one-dimensional eigenspace");
    return DominantMode<Scalar>{k_best, op.mode(k_best).eigenvalue, gap};
}

// Real Fourier coefficients of an evidence vector:
//   b_j = a_0 + sum_m (a_m cos(m theta_j) + beta_m sin(m theta_j)),
// amplitude A_m = sqrt(a_m^2 + beta_m^2), phase theta_m = atan2(beta_m, a_m).
// A vanishing amplitude leaves the phase undefined rather than fabricated.
template <typename Scalar = double>
struct EvidenceSpectrum {
    int K = 0;
    VectorX<Scalar> a;       // a[m], m = 0..floor(K/2); a[0] is the mean
    VectorX<Scalar> beta;    // beta[m]; zero for one-dimensional modes
    VectorX<Scalar> amplitude;
    VectorX<Scalar> phase;
    std::vector<bool> phase_defined;

    int mode_count() const { return static_cast<int>(a.size()); }

    VectorX<Scalar> reconstruct(const ActionRing<Scalar>& ring) const {
        VectorX<Scalar> b = VectorX<Scalar>::Constant(ring.K, a[0]);
        for (int m = 1; m < mode_count(); ++m)
            for (int j = 0; j < ring.K; ++j)
                b[j] += a[m] * std::cos(Scalar(m) * ring.theta[j]) +
                        beta[m] * std::sin(Scalar(m) * ring.theta[j]);
        return b;
    }
};

template <typename Scalar, typename Derived>
EvidenceSpectrum<Scalar> mode_coefficients(const Eigen::MatrixBase<Derived>& b,
                                           const ActionRing<Scalar>& ring) {
    const int K = ring.K;
    if (b.size() != K)
        throw BadLength("evidence has length " + std::to_string(b.size()) + ", ring has K=" + std::to_string(K));

    const int half = K / 2;
    EvidenceSpectrum<Scalar> spec;
    spec.K = K;
    spec.a = VectorX<Scalar>::Zero(half + 1);
    spec.beta = VectorX<Scalar>::Zero(half + 1);
    spec.amplitude = VectorX<Scalar>::Zero(half + 1);
    spec.phase = VectorX<Scalar>::Zero(half + 1);
    spec.phase_defined.assign(static_cast<size_t>(half) + 1, false);

    for (int m = 0; m <= half; ++m) {
        const bool planar = (m != 0) && !(K % 2 == 0 && m == half);
        const Scalar norm = planar ? Scalar(2) / Scalar(K) : Scalar(1) / Scalar(K);
        Scalar am = 0, bm = 0;
        for (int j = 0; j < K; ++j) {
            am += b[j] * std::cos(Scalar(m) * ring.theta[j]);
            if (planar) bm += b[j] * std::sin(Scalar(m) * ring.theta[j]);
        }
        spec.a[m] = norm * am;
        spec.beta[m] = norm * bm;
        spec.amplitude[m] = std::hypot(spec.a[m], spec.beta[m]);
        if (spec.amplitude[m] > Scalar(0)) {
            spec.phase[m] = std::atan2(spec.beta[m], spec.a[m]);
            spec.phase_defined[static_cast<size_t>(m)] = true;
        }
    }
    return spec;
}

// Psi_A: orthogonal projection onto the critical plane E_c = span{phi_k*, psi_k*}.
template <typename Scalar, typename Derived>
VectorX<Scalar> project_evidence(const Eigen::MatrixBase<Derived>& b,
                                 const CirculantOperator<Scalar>& op) {
    const auto dom = dominant_mode(op);
    const auto& mode = op.mode(dom.k_star);
    if (b.size() != op.K()) throw BadLength("evidence length does not match ring");
    const Scalar a = Scalar(2) * ring_dot(b.derived(), mode.cosine);
    const Scalar beta = Scalar(2) * ring_dot(b.derived(), mode.sine);
    return a * mode.cosine + beta * mode.sine;
}

// Psi_A^perp: complement projection; project_evidence + project_complement == b.
template <typename Scalar, typename Derived>
VectorX<Scalar> project_complement(const Eigen::MatrixBase<Derived>& b,
                                   const CirculantOperator<Scalar>& op) {
    return b.derived() - project_evidence(b, op);
}

// e_theta = sqrt(2)(cos(theta) phi_k* + sin(theta) psi_k*); <e_theta,e_theta> = 1.
template <typename Scalar>
VectorX<Scalar> critical_frame(const CirculantOperator<Scalar>& op, Scalar theta) {
    const auto dom = dominant_mode(op);
    const auto& mode = op.mode(dom.k_star);
    const Scalar rt2 = std::sqrt(Scalar(2));
    return rt2 * (std::cos(theta) * mode.cosine + std::sin(theta) * mode.sine);
}

using ActionRingd = ActionRing<double>;
using CouplingKerneld = CouplingKernel<double>;
using CirculantOperatord = CirculantOperator<double>;
using EvidenceSpectrumd = EvidenceSpectrum<double>;

}  // namespace nodring
