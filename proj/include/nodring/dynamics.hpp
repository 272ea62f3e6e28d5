#pragma once

// Nonlinear opinion dynamics over the action ring:
//
//   tau_z * zdot = -d_z z + S(alpha_eff A z + b),   alpha_eff = alpha0 + kappa <z,z>,
//
// with S odd, C^3, S'(0) = 1. kappa = 0 is the plain (supercritical) model;
// kappa > 0 gives the state-dependent gain used for the subcritical regime.
// Integration is fixed-step classical RK4: deterministic and reproducible.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nodring/errors.hpp"
#include "nodring/spectral.hpp"

namespace nodring {

enum class SigmoidKind { Tanh, ScaledTanh };

template <typename Scalar = double>
struct SigmoidCoeffs {
    Scalar s1, s3, s5;  // S(u) = s1 u + (s3/6) u^3 + (s5/120) u^5 + O(u^7)
};

// ScaledTanh(s) is s*tanh(u/s): same unit slope at 0, saturation at +-s.
template <typename Scalar = double>
struct Sigmoid {
    SigmoidKind kind = SigmoidKind::Tanh;
    Scalar saturation = 1;

    static Sigmoid tanh_sigmoid() { return Sigmoid{SigmoidKind::Tanh, Scalar(1)}; }
    static Sigmoid scaled_tanh(Scalar s) {
        if (s <= Scalar(0)) throw InvalidParameter("ScaledTanh saturation must be positive");
        return Sigmoid{SigmoidKind::ScaledTanh, s};
    }

    Scalar operator()(Scalar u) const {
        if (kind == SigmoidKind::Tanh) return std::tanh(u);
        return saturation * std::tanh(u / saturation);
    }

    Scalar derivative(Scalar u) const {
        const Scalar t = std::tanh(kind == SigmoidKind::Tanh ? u : u / saturation);
        return Scalar(1) - t * t;
    }

    Scalar bound() const { return saturation; }  // sup |S|

    SigmoidCoeffs<Scalar> coeffs() const {
        // tanh(u) = u - u^3/3 + 2u^5/15 => s3 = -2, s5 = 16; chain rule for the scaled form.
        const Scalar s2 = saturation * saturation;
        if (kind == SigmoidKind::Tanh) return {Scalar(1), Scalar(-2), Scalar(16)};
        return {Scalar(1), Scalar(-2) / s2, Scalar(16) / (s2 * s2)};
    }
};

template <typename Scalar = double>
struct NodParams {
    Scalar tau_z = 1;
    Scalar d_z = 1;
    Scalar alpha0 = 1;
    Scalar kappa = 0;
    Sigmoid<Scalar> sigmoid = Sigmoid<Scalar>::tanh_sigmoid();

    void validate() const {
        if (tau_z <= Scalar(0)) throw InvalidParameter("tau_z must be positive");
        if (d_z <= Scalar(0)) throw InvalidParameter("d_z must be positive");
        if (alpha0 < Scalar(0)) throw InvalidParameter("alpha0 must be nonnegative");
        if (kappa < Scalar(0)) throw InvalidParameter("kappa must be nonnegative");
    }
};

template <typename Scalar = double>
struct DecisionState {
    VectorX<Scalar> z;
    Scalar t = 0;
};

template <typename Scalar = double>
SigmoidCoeffs<Scalar> sigmoid_coeffs(const NodParams<Scalar>& params) {
    return params.sigmoid.coeffs();
}

// alpha_eff = alpha0 + kappa <z,z> with the ring inner-product norm, under
// which <r e_theta, r e_theta> = r^2 exactly.
template <typename Scalar, typename Derived>
Scalar effective_gain(const NodParams<Scalar>& params, const Eigen::MatrixBase<Derived>& z) {
    if (params.kappa == Scalar(0)) return params.alpha0;
    return params.alpha0 + params.kappa * ring_dot(z.derived(), z.derived());
}

// F(z) = -d_z z + S(alpha_eff A z + b);  zdot = F / tau_z.
template <typename Scalar, typename DerivedZ, typename DerivedB>
VectorX<Scalar> equilibrium_map(const Eigen::MatrixBase<DerivedZ>& z, const NodParams<Scalar>& params,
                                const CirculantOperator<Scalar>& op,
                                const Eigen::MatrixBase<DerivedB>& b) {
    const Scalar alpha = effective_gain(params, z);
    VectorX<Scalar> u = alpha * (op.A * z.derived()) + b.derived();
    for (int j = 0; j < u.size(); ++j) u[j] = params.sigmoid(u[j]);
    return u - params.d_z * z.derived();
}

template <typename Scalar, typename DerivedB>
VectorX<Scalar> nod_rhs(const DecisionState<Scalar>& state, const NodParams<Scalar>& params,
                        const CirculantOperator<Scalar>& op, const Eigen::MatrixBase<DerivedB>& b) {
    return equilibrium_map(state.z, params, op, b) / params.tau_z;
}

enum class TerminalStatus { ConvergedToEquilibrium, MaxTimeReached, Diverged };

inline const char* to_string(TerminalStatus s) {
    switch (s) {
        case TerminalStatus::ConvergedToEquilibrium: return "ConvergedToEquilibrium";
        case TerminalStatus::MaxTimeReached: return "MaxTimeReached";
        case TerminalStatus::Diverged: return "Diverged";
    }
    return "?";
}

template <typename Scalar = double>
struct Trajectory {
    std::vector<Scalar> times;
    std::vector<VectorX<Scalar>> states;
    TerminalStatus status = TerminalStatus::MaxTimeReached;

    const VectorX<Scalar>& final_state() const { return states.back(); }
    Scalar final_time() const { return times.back(); }
};

template <typename Scalar = double>
struct IntegrateOptions {
    Scalar dt = Scalar(0.02);       // default tau_z/50 for tau_z = 1
    Scalar t_end = Scalar(100);
    Scalar eq_tol = Scalar(1e-10);  // on ||F||_inf, held for 10 consecutive steps
    int sample_stride = 1;
    Scalar divergence_bound = Scalar(1e8);
};

namespace detail {
template <typename Scalar>
VectorX<Scalar> rk4_rhs(const VectorX<Scalar>& z, const NodParams<Scalar>& params,
                        const CirculantOperator<Scalar>& op, const VectorX<Scalar>& b) {
    return equilibrium_map(z, params, op, b) / params.tau_z;
}
}  // namespace detail

// Fixed-step RK4 with quasi-static evidence b(t). Convergence is declared when
// ||zdot||_inf * tau_z < eq_tol for 10 consecutive steps.
template <typename Scalar, typename EvidenceFn>
Trajectory<Scalar> integrate(const DecisionState<Scalar>& initial, const NodParams<Scalar>& params,
                             const CirculantOperator<Scalar>& op, EvidenceFn&& evidence,
                             const IntegrateOptions<Scalar>& opts) {
    params.validate();
    if (opts.dt <= Scalar(0)) throw InvalidParameter("dt must be positive");
    if (opts.dt > params.tau_z / Scalar(10))
        throw StepTooLarge("dt=" + std::to_string(double(opts.dt)) + " exceeds tau_z/10");
    if (opts.eq_tol <= Scalar(0)) throw InvalidParameter("eq_tol must be positive");

    Trajectory<Scalar> traj;
    VectorX<Scalar> z = initial.z;
    Scalar t = initial.t;
    traj.times.push_back(t);
    traj.states.push_back(z);

    const long n_steps = static_cast<long>(std::ceil(double((opts.t_end - initial.t) / opts.dt)));
    int quiet_steps = 0;
    for (long step = 0; step < n_steps; ++step) {
        const VectorX<Scalar> b0 = evidence(t);
        const VectorX<Scalar> bh = evidence(t + opts.dt / Scalar(2));
        const VectorX<Scalar> b1 = evidence(t + opts.dt);

        const VectorX<Scalar> k1 = detail::rk4_rhs(z, params, op, b0);
        const VectorX<Scalar> k2 = detail::rk4_rhs<Scalar>(z + (opts.dt / Scalar(2)) * k1, params, op, bh);
        const VectorX<Scalar> k3 = detail::rk4_rhs<Scalar>(z + (opts.dt / Scalar(2)) * k2, params, op, bh);
        const VectorX<Scalar> k4 = detail::rk4_rhs<Scalar>(z + opts.dt * k3, params, op, b1);

        z += (opts.dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
        t = initial.t + Scalar(step + 1) * opts.dt;

        if (!z.allFinite()) throw NonFiniteState("state became non-finite at t=" + std::to_string(double(t)));

        const bool last = (step == n_steps - 1);
        if ((step + 1) % opts.sample_stride == 0 || last) {
            traj.times.push_back(t);
            traj.states.push_back(z);
        }

        if (z.template lpNorm<Eigen::Infinity>() > opts.divergence_bound) {
            traj.status = TerminalStatus::Diverged;
            if (traj.times.back() != t) { traj.times.push_back(t); traj.states.push_back(z); }
            return traj;
        }

        const Scalar residual = params.tau_z * detail::rk4_rhs(z, params, op, b1).template lpNorm<Eigen::Infinity>();
        quiet_steps = (residual < opts.eq_tol) ? quiet_steps + 1 : 0;
        if (quiet_steps >= 10) {
            traj.status = TerminalStatus::ConvergedToEquilibrium;
            if (traj.times.back() != t) { traj.times.push_back(t); traj.states.push_back(z); }
            return traj;
        }
    }
    traj.status = TerminalStatus::MaxTimeReached;
    return traj;
}

template <typename Scalar>
Trajectory<Scalar> integrate(const DecisionState<Scalar>& initial, const NodParams<Scalar>& params,
                             const CirculantOperator<Scalar>& op, const VectorX<Scalar>& b,
                             const IntegrateOptions<Scalar>& opts) {
    return integrate(initial, params, op, [&b](Scalar) -> const VectorX<Scalar>& { return b; }, opts);
}

// Jacobian of F (= tau_z * rhs):
//   J = -d_z I + diag(S'(u)) (alpha_eff A + (2 kappa / K) (A z) z^T),  u = alpha_eff A z + b.
// The rank-one term is the state-dependent-gain correction.
template <typename Scalar>
MatrixX<Scalar> jacobian(const VectorX<Scalar>& z, const NodParams<Scalar>& params,
                         const CirculantOperator<Scalar>& op, const VectorX<Scalar>& b) {
    const int K = op.K();
    const Scalar alpha = effective_gain(params, z);
    const VectorX<Scalar> Az = op.A * z;
    VectorX<Scalar> sprime(K);
    for (int j = 0; j < K; ++j) sprime[j] = params.sigmoid.derivative(alpha * Az[j] + b[j]);

    MatrixX<Scalar> inner = alpha * op.A;
    if (params.kappa > Scalar(0))
        inner += (Scalar(2) * params.kappa / Scalar(K)) * (Az * z.transpose());
    MatrixX<Scalar> J = sprime.asDiagonal() * inner;
    J.diagonal().array() -= params.d_z;
    return J;
}

// Newton iterations on F(z) = 0, used to polish integrator output for branch
// comparisons. Returns the refined state; stops early if no progress is made.
template <typename Scalar>
VectorX<Scalar> newton_polish(const VectorX<Scalar>& z0, const NodParams<Scalar>& params,
                              const CirculantOperator<Scalar>& op, const VectorX<Scalar>& b,
                              Scalar target_residual = Scalar(1e-13), int max_iter = 25) {
    VectorX<Scalar> z = z0;
    Scalar best = equilibrium_map(z, params, op, b).template lpNorm<Eigen::Infinity>();
    VectorX<Scalar> best_z = z;
    for (int it = 0; it < max_iter && best > target_residual; ++it) {
        const VectorX<Scalar> F = equilibrium_map(z, params, op, b);
        const MatrixX<Scalar> J = jacobian(z, params, op, b);
        const VectorX<Scalar> step = J.colPivHouseholderQr().solve(-F);
        if (!step.allFinite()) break;
        z += step;
        const Scalar res = equilibrium_map(z, params, op, b).template lpNorm<Eigen::Infinity>();
        if (res < best) {
            best = res;
            best_z = z;
        } else {
            break;
        }
    }
    return best_z;
}

// Spectrum of the Jacobian of F at an equilibrium; stable iff all real parts < 0.
template <typename Scalar>
Eigen::VectorXcd linearize(const VectorX<Scalar>& z_eq, const NodParams<Scalar>& params,
                           const CirculantOperator<Scalar>& op, const VectorX<Scalar>& b,
                           Scalar eq_tol = Scalar(1e-8)) {
    const Scalar residual = equilibrium_map(z_eq, params, op, b).template lpNorm<Eigen::Infinity>();
    if (residual >= eq_tol)
        throw NotAnEquilibrium("||F||_inf = " + std::to_string(double(residual)) +
                               " exceeds eq_tol = " + std::to_string(double(eq_tol)));
    Eigen::EigenSolver<Eigen::MatrixXd> solver(jacobian(z_eq, params, op, b).template cast<double>());
    return solver.eigenvalues();
}

template <typename Scalar = double>
struct PolarState {
    Scalar r = 0;
    Scalar theta = 0;
    bool theta_defined = false;
};

// Polar coordinates of Psi_A(z) in the e_theta frame: Psi_A(z) = r * e_theta,
// theta in [0, 2*pi). Below r = 1e-12 the angle is reported undefined.
template <typename Scalar, typename Derived>
PolarState<Scalar> phase_readout(const Eigen::MatrixBase<Derived>& z, const CirculantOperator<Scalar>& op) {
    const auto dom = dominant_mode(op);
    const auto& mode = op.mode(dom.k_star);
    const Scalar a = Scalar(2) * ring_dot(z.derived(), mode.cosine);
    const Scalar beta = Scalar(2) * ring_dot(z.derived(), mode.sine);
    PolarState<Scalar> polar;
    polar.r = std::sqrt((a * a + beta * beta) / Scalar(2));
    if (polar.r >= Scalar(1e-12)) {
        polar.theta = std::atan2(beta, a);
        if (polar.theta < Scalar(0)) polar.theta += Scalar(2) * Scalar(EIGEN_PI);
        polar.theta_defined = true;
    }
    return polar;
}

using NodParamsd = NodParams<double>;
using DecisionStated = DecisionState<double>;
using Trajectoryd = Trajectory<double>;
using IntegrateOptionsd = IntegrateOptions<double>;
using PolarStated = PolarState<double>;

}  // namespace nodring
