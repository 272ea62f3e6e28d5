#pragma once

// Polar reduced equations on the critical plane and the branch/threshold
// quantities derived from them.
//
// Supercritical (plain gain), up to cubic order:
//   g_r = mu r + Gamma r^3 + (A_k/sqrt2) cos(theta - theta_k)
//         + (eta r^2/sqrt2) [3 A_k cos(theta - theta_k) + A_3k cos(3 theta - theta_3k)]
//   g_th = 1(b != 0) [ (A_k/sqrt2) sin(theta_k - theta)
//         + (eta r^2/sqrt2) (3 A_k sin(theta_k - theta) + A_3k sin(theta_3k - 3 theta)) ]
// with Gamma = (s3/4) alpha_c^3 lambda^3 and eta = (s3/4) alpha_c^2 lambda^2.
//
// Subcritical (state-dependent gain alpha = alpha0 + kappa <z,z>):
//   g_r = mu0 r + Gamma_tilde r^3 + Delta r^5 + (A_k/sqrt2) cos(theta - theta_k),
// Gamma_tilde = Gamma + kappa lambda > 0, Delta < 0; the unforced saddle-node
// sits at mu_SN = Gamma_tilde^2 / (4 Delta) < 0.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nodring/dynamics.hpp"
#include "nodring/errors.hpp"
#include "nodring/spectral.hpp"

namespace nodring {

template <typename Scalar = double>
struct ReducedModel {
    Scalar mu = 0;           // -d_z + alpha0 * lambda_k*
    Scalar mu0 = 0;          // same base distance; mu(r) = mu0 + kappa*lambda*r^2 when kappa > 0
    Scalar Gamma = 0;
    Scalar eta = 0;
    Scalar Gamma_tilde = 0;
    Scalar Delta = 0;
    Scalar mu_SN = 0;
    Scalar alpha_c = 0;
    Scalar kappa = 0;
    Scalar lambda_star = 0;
    int k_star = 0;

    bool subcritical_form() const { return kappa > Scalar(0); }
};

template <typename Scalar>
ReducedModel<Scalar> reduced_coefficients(const NodParams<Scalar>& params,
                                          const CirculantOperator<Scalar>& op,
                                          std::optional<Scalar> delta_override = std::nullopt) {
    const auto dom = dominant_mode(op);  // DominantModeNotPlanar propagates
    const auto c = sigmoid_coeffs(params);
    if (c.s3 == Scalar(0)) throw ZeroCubicCoefficient("sigmoid has S'''(0) = 0");

    const Scalar lambda = dom.lambda;
    ReducedModel<Scalar> m;
    m.k_star = dom.k_star;
    m.lambda_star = lambda;
    m.kappa = params.kappa;
    m.alpha_c = params.d_z / lambda;
    m.mu0 = -params.d_z + params.alpha0 * lambda;
    m.mu = m.mu0;

    const Scalar al = m.alpha_c * lambda;
    m.Gamma = (c.s3 / Scalar(4)) * al * al * al;
    m.eta = (c.s3 / Scalar(4)) * al * al;
    m.Gamma_tilde = m.Gamma + params.kappa * lambda;

    if (delta_override) {
        m.Delta = *delta_override;
    } else {
        // Heuristic default; the theory only pins the sign.
        using std::abs;
        m.Delta = -(abs(c.s5) / Scalar(16)) * al * al * al * al * al;
    }
    if (!(m.Delta < Scalar(0)))
        throw InvalidDelta("Delta must be negative (got " + std::to_string(double(m.Delta)) + ")");
    m.mu_SN = m.Gamma_tilde * m.Gamma_tilde / (Scalar(4) * m.Delta);
    return m;
}

template <typename Scalar = double>
struct PolarForcing {
    Scalar amp_k = 0;
    Scalar phase_k = 0;
    Scalar amp_3k = 0;
    Scalar phase_3k = 0;

    static PolarForcing zero() { return {}; }

    // Reads the k* and 3k* coefficients of an evidence spectrum; the 3k*
    // harmonic is folded modulo K into 0..K/2 with the real-DFT conjugation
    // (sine sign flip) when it lands above K/2.
    static PolarForcing from_spectrum(const EvidenceSpectrum<Scalar>& spec, int k_star) {
        const int K = spec.K;
        const int half = K / 2;
        PolarForcing f;
        f.amp_k = spec.amplitude[k_star];
        f.phase_k = spec.phase[k_star];

        int m3 = (3 * k_star) % K;
        bool conj = false;
        if (m3 > half) {
            m3 = K - m3;
            conj = true;
        }
        if (m3 == k_star)
            throw AliasedHarmonic("3*k_star aliases onto k_star (mod " + std::to_string(K) + ")");
        const Scalar a3 = spec.a[m3];
        const Scalar b3 = conj ? -spec.beta[m3] : spec.beta[m3];
        f.amp_3k = std::hypot(a3, b3);
        f.phase_3k = (f.amp_3k > Scalar(0)) ? std::atan2(b3, a3) : Scalar(0);
        return f;
    }
};

template <typename Scalar = double>
struct PolarRhs {
    Scalar g_r = 0;
    Scalar g_theta = 0;
};

template <typename Scalar>
PolarRhs<Scalar> polar_rhs(Scalar r, Scalar theta, const ReducedModel<Scalar>& model,
                           const PolarForcing<Scalar>& forcing) {
    const Scalar rt2 = std::sqrt(Scalar(2));
    const Scalar ck = std::cos(theta - forcing.phase_k);
    const Scalar sk = std::sin(forcing.phase_k - theta);
    const Scalar c3 = std::cos(Scalar(3) * theta - forcing.phase_3k);
    const Scalar s3 = std::sin(forcing.phase_3k - Scalar(3) * theta);

    PolarRhs<Scalar> g;
    if (model.subcritical_form()) {
        g.g_r = model.mu0 * r + model.Gamma_tilde * r * r * r + model.Delta * std::pow(r, Scalar(5)) +
                forcing.amp_k / rt2 * ck;
    } else {
        g.g_r = model.mu * r + model.Gamma * r * r * r + forcing.amp_k / rt2 * ck +
                (model.eta * r * r / rt2) *
                    (Scalar(3) * forcing.amp_k * ck + forcing.amp_3k * c3);
    }
    const bool has_forcing = forcing.amp_k != Scalar(0) || forcing.amp_3k != Scalar(0);
    if (has_forcing) {
        g.g_theta = forcing.amp_k / rt2 * sk +
                    (model.eta * r * r / rt2) *
                        (Scalar(3) * forcing.amp_k * sk + forcing.amp_3k * s3);
    }
    return g;
}

// r* = sqrt(-mu/Gamma) on the supercritical committed ring.
template <typename Scalar>
Scalar ring_amplitude(const ReducedModel<Scalar>& model) {
    if (!(model.mu >= Scalar(0)) || !(model.Gamma < Scalar(0)))
        throw NotSupercritical("requires mu >= 0 and Gamma < 0");
    return std::sqrt(-model.mu / model.Gamma);
}

namespace detail {

// Real roots of c[0] + c[1] x + ... + c[n] x^n via the companion matrix.
template <typename Scalar>
std::vector<Scalar> real_poly_roots(std::vector<Scalar> c, Scalar imag_tol = Scalar(1e-8)) {
    while (c.size() > 1 && c.back() == Scalar(0)) c.pop_back();
    const int n = static_cast<int>(c.size()) - 1;
    std::vector<Scalar> roots;
    if (n < 1) return roots;
    if (n == 1) {
        roots.push_back(-c[0] / c[1]);
        return roots;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -double(c[i] / c[n]);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
    for (int i = 0; i < n; ++i) {
        const auto ev = solver.eigenvalues()[i];
        if (std::abs(ev.imag()) < double(imag_tol)) roots.push_back(Scalar(ev.real()));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace detail

template <typename Scalar = double>
struct RadialBranch {
    Scalar r = 0;
    bool stable = false;
    Scalar dg_dr = 0;
};

// Nonnegative roots of mu0 r + Gamma_tilde r^3 + Delta r^5 + p = 0, classified
// by the sign of d(g_r)/dr.
template <typename Scalar>
std::vector<RadialBranch<Scalar>> subcritical_branches(const ReducedModel<Scalar>& model,
                                                       Scalar radial_forcing) {
    if (!(model.Gamma_tilde > Scalar(0)) || !(model.Delta < Scalar(0)))
        throw NotSubcritical("requires Gamma_tilde > 0 and Delta < 0");

    std::vector<Scalar> coeffs = {radial_forcing, model.mu0, Scalar(0), model.Gamma_tilde, Scalar(0),
                                  model.Delta};
    auto roots = detail::real_poly_roots(coeffs);

    std::vector<RadialBranch<Scalar>> branches;
    const Scalar zero_tol = Scalar(1e-9);
    for (Scalar r : roots) {
        if (r < -zero_tol) continue;
        r = std::max(r, Scalar(0));
        if (!branches.empty() && std::abs(branches.back().r - r) < zero_tol) continue;
        const Scalar x = r * r;
        const Scalar dg = model.mu0 + Scalar(3) * model.Gamma_tilde * x + Scalar(5) * model.Delta * x * x;
        branches.push_back({r, dg < Scalar(0), dg});
    }
    return branches;
}

namespace detail {

template <typename Scalar>
int positive_root_count(const ReducedModel<Scalar>& model, Scalar forcing) {
    auto roots = real_poly_roots<Scalar>(
        {forcing, model.mu0, Scalar(0), model.Gamma_tilde, Scalar(0), model.Delta});
    int count = 0;
    for (Scalar r : roots)
        if (r > Scalar(1e-9)) ++count;
    return count;
}

}  // namespace detail

// Smallest destabilizing radial forcing magnitude at which the committed
// (outer stable) branch collides with the unstable branch. Bisection on the
// positive-root count of the forced quintic, to 1e-6 in forcing amplitude.
template <typename Scalar>
Scalar evidence_threshold(const ReducedModel<Scalar>& model, Scalar tol = Scalar(1e-6)) {
    if (!(model.Gamma_tilde > Scalar(0)) || !(model.Delta < Scalar(0)) ||
        !(model.mu0 > model.mu_SN) || !(model.mu0 < Scalar(0)))
        throw NotInCoexistence("requires subcritical coefficients with mu0 in (mu_SN, 0)");

    const Scalar r_SN = std::sqrt(-model.Gamma_tilde / (Scalar(2) * model.Delta));
    Scalar hi = Scalar(2) * std::abs(model.mu_SN) * r_SN;
    int guard = 0;
    while (detail::positive_root_count(model, -hi) >= 2 && guard++ < 40) hi *= Scalar(2);
    Scalar lo = Scalar(0);
    while (hi - lo > tol) {
        const Scalar mid = (lo + hi) / Scalar(2);
        if (detail::positive_root_count(model, -mid) >= 2)
            lo = mid;
        else
            hi = mid;
    }
    return (lo + hi) / Scalar(2);
}

// Aligned-side counterpart: the forcing magnitude at which the neutral branch
// is annihilated and the state jumps onto the committed branch.
template <typename Scalar>
Scalar commitment_forcing(const ReducedModel<Scalar>& model) {
    if (!(model.Gamma_tilde > Scalar(0)) || !(model.Delta < Scalar(0)) ||
        !(model.mu0 > model.mu_SN) || !(model.mu0 < Scalar(0)))
        throw NotInCoexistence("requires subcritical coefficients with mu0 in (mu_SN, 0)");
    // Local minimum of the unforced g_r on r > 0: smaller root of g_r' = 0 in x = r^2.
    const Scalar a = Scalar(5) * model.Delta, b = Scalar(3) * model.Gamma_tilde, c = model.mu0;
    const Scalar disc = b * b - Scalar(4) * a * c;
    const Scalar x_min = (-b + std::sqrt(disc)) / (Scalar(2) * a);  // a < 0: this is the smaller root
    const Scalar r = std::sqrt(x_min);
    const Scalar g0 = model.mu0 * r + model.Gamma_tilde * r * r * r + model.Delta * std::pow(r, Scalar(5));
    return std::abs(g0);
}

template <typename Scalar = double>
struct ModeResidual {
    int mode = 0;
    Scalar sigma = 0;                    // -d_z + alpha_c * lambda_m < 0
    Scalar measured_a = 0, measured_b = 0;
    Scalar predicted_a = 0, predicted_b = 0;
    Scalar deviation = 0;                // |measured - predicted| (coefficient pair)
    Scalar predicted_norm = 0;
};

template <typename Scalar = double>
struct SuppressionOptions {
    Scalar t_end = Scalar(400);
    Scalar dt = Scalar(0.02);
    Scalar eq_tol = Scalar(1e-12);
    Scalar polish_threshold = Scalar(1e-6);  // Newton-polish only clearly forced equilibria
};

// Solves the range equation at alpha = alpha_c by relaxing the full ODE from
// z = 0 and compares each noncritical complement coefficient w_m with the
// leading-order prediction -b_m / sigma_m of the reduction map.
template <typename Scalar>
std::vector<ModeResidual<Scalar>> suppression_residual(const VectorX<Scalar>& b,
                                                       const NodParams<Scalar>& params,
                                                       const CirculantOperator<Scalar>& op,
                                                       const SuppressionOptions<Scalar>& opts = {}) {
    const auto dom = dominant_mode(op);
    NodParams<Scalar> at_onset = params;
    at_onset.alpha0 = params.d_z / dom.lambda;  // pin alpha at alpha_c

    DecisionState<Scalar> init{VectorX<Scalar>::Zero(op.K()), Scalar(0)};
    IntegrateOptions<Scalar> iopts;
    iopts.dt = opts.dt;
    iopts.t_end = opts.t_end;
    iopts.eq_tol = opts.eq_tol;
    iopts.sample_stride = 1 << 20;
    auto traj = integrate(init, at_onset, op, b, iopts);
    VectorX<Scalar> z = traj.final_state();

    // At a pure-complement equilibrium the Jacobian is near-singular on E_c,
    // so Newton is applied only when the critical amplitude is clearly nonzero.
    if (phase_readout(z, op).r > opts.polish_threshold)
        z = newton_polish(z, at_onset, op, b);

    const auto spec_z = mode_coefficients(z, op.ring);
    const auto spec_b = mode_coefficients(b, op.ring);

    std::vector<ModeResidual<Scalar>> out;
    for (int m = 0; m < spec_z.mode_count(); ++m) {
        if (m == dom.k_star) continue;
        ModeResidual<Scalar> res;
        res.mode = m;
        res.sigma = -params.d_z + at_onset.alpha0 * op.mode(m).eigenvalue;
        res.measured_a = spec_z.a[m];
        res.measured_b = spec_z.beta[m];
        res.predicted_a = -spec_b.a[m] / res.sigma;
        res.predicted_b = -spec_b.beta[m] / res.sigma;
        res.deviation = std::hypot(res.measured_a - res.predicted_a, res.measured_b - res.predicted_b);
        res.predicted_norm = std::hypot(res.predicted_a, res.predicted_b);
        out.push_back(res);
    }
    return out;
}

using ReducedModeld = ReducedModel<double>;
using PolarForcingd = PolarForcing<double>;

}  // namespace nodring
