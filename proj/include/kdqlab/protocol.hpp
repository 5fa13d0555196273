#pragma once

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <array>
#include <string>

#include "kdqlab/qmath.hpp"

namespace kdqlab {

/// Drive of the two-level work protocol: Rabi frequency Ω and detuning δ
/// (rad per time unit). ω = √(Ω²+δ²) is the level splitting.
class DriveParams {
  public:
    DriveParams(double omega_rabi, double delta) : omega_rabi_(omega_rabi), delta_(delta) {
        if (!std::isfinite(omega_rabi) || !std::isfinite(delta))
            throw Error(ErrorKind::NonFinite, "drive parameters must be finite");
        if (!(omega_rabi > 0.0))
            throw Error(ErrorKind::InvalidParameter, "omega_rabi must be positive");
        omega_ = std::hypot(omega_rabi, delta);
    }

    /// Ω = 1, δ = √3 Ω. Times are measured in 1/Ω.
    static DriveParams dimensionless() { return {1.0, std::sqrt(3.0)}; }

    /// Ω = 2π·875/39 rad/µs, δ = √3 Ω. Times are in µs.
    static DriveParams paper() {
        const double omega = 2.0 * pi * 875.0 / 39.0;
        return {omega, std::sqrt(3.0) * omega};
    }

    [[nodiscard]] double omega_rabi() const { return omega_rabi_; }
    [[nodiscard]] double delta() const { return delta_; }
    [[nodiscard]] double omega() const { return omega_; }
    /// Polar angle of H(0) on the Bloch sphere, arctan(Ω/δ).
    [[nodiscard]] double theta() const { return std::atan2(omega_rabi_, delta_); }

  private:
    double omega_rabi_;
    double delta_;
    double omega_;
};

/// H(t) = ½[Ω(cos δt σx + sin δt σy) + δ σz].
inline Observable<2> h_of_t(const DriveParams &p, double t) {
    if (!std::isfinite(t)) throw Error(ErrorKind::NonFinite, "time is not finite");
    const double om = p.omega_rabi();
    const double d = p.delta();
    const Mat2 h = 0.5 * (om * std::cos(d * t) * pauli::x + om * std::sin(d * t) * pauli::y +
                          d * pauli::z);
    return Observable<2>(h);
}

/// U(t) = e^{-itδσz/2} e^{-itΩσx/2}, the exact time-ordered propagator of h_of_t.
inline Mat2 propagator_closed_form(const DriveParams &p, double t) {
    if (!std::isfinite(t)) throw Error(ErrorKind::NonFinite, "time is not finite");
    return rotation_z(p.delta() * t) * rotation_x(p.omega_rabi() * t);
}

/// Rotating-frame propagator e^{-itΩσx/2}; U(t) = e^{-itδσz/2}·U_B(t).
inline Mat2 propagator_rotating_frame(const DriveParams &p, double t) {
    if (!std::isfinite(t)) throw Error(ErrorKind::NonFinite, "time is not finite");
    return rotation_x(p.omega_rabi() * t);
}

/// Midpoint product rule Π_k e^{-iΔt H(t_k + Δt/2)}, later steps on the left.
template <std::size_t N, class HFn>
Matrix<N> propagator_generic(HFn &&h_fn, double t, std::size_t n_steps) {
    if (!std::isfinite(t)) throw Error(ErrorKind::NonFinite, "time is not finite");
    if (n_steps < 1) throw Error(ErrorKind::InvalidParameter, "n_steps must be at least 1");
    const double dt = t / static_cast<double>(n_steps);
    Matrix<N> u = Matrix<N>::identity();
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double mid = (static_cast<double>(k) + 0.5) * dt;
        const Observable<N> h = h_fn(mid);
        u = h.evolution(dt) * u;
    }
    return u;
}

/// Default step count: 1024 steps per unit of Ωt, at least one.
inline std::size_t default_steps(const DriveParams &p, double t) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1024.0 * std::abs(p.omega_rabi() * t))));
}

/// One work process: initial and final Hamiltonians plus the evolution between them.
template <std::size_t N> struct WorkProtocol {
    Observable<N> h0;
    Observable<N> ht;
    Matrix<N> u_t;
    double time = 0.0;

    /// Heisenberg-picture final Hamiltonian U†H(t)U.
    [[nodiscard]] Matrix<N> ht_heisenberg() const { return u_t.adjoint() * ht.matrix() * u_t; }
};

inline constexpr double unitarity_tolerance = 1e-12;

template <std::size_t N>
WorkProtocol<N> make_work_protocol(Observable<N> h0, Observable<N> ht, const Matrix<N> &u, double time) {
    detail::require_finite(u, "evolution operator");
    const double drift = unitarity_error(u);
    if (drift > unitarity_tolerance * static_cast<double>(N))
        throw Error(ErrorKind::InvariantViolation,
                    "evolution operator is not unitary (‖U†U−I‖ = " + std::to_string(drift) + ")");
    return WorkProtocol<N>{std::move(h0), std::move(ht), u, time};
}

/// The driven-qubit protocol up to time t, with the closed-form propagator.
inline WorkProtocol<2> driven_protocol(const DriveParams &p, double t) {
    return make_work_protocol(h_of_t(p, 0.0), h_of_t(p, t), propagator_closed_form(p, t), t);
}

enum class StateLabel { plus, minus, mixture, custom };

inline std::string to_string(StateLabel l) {
    switch (l) {
    case StateLabel::plus: return "plus";
    case StateLabel::minus: return "minus";
    case StateLabel::mixture: return "mixture";
    case StateLabel::custom: return "custom";
    }
    return "custom";
}

template <std::size_t N> struct InitialState {
    Matrix<N> rho;
    StateLabel label = StateLabel::custom;
    /// Weight of |+⟩ for mixtures; 1 for plus, 0 for minus.
    double p = 0.0;
};

inline constexpr double state_tolerance = 1e-12;

/// Validates and wraps an arbitrary density operator.
template <std::size_t N> InitialState<N> make_custom_state(const Matrix<N> &rho) {
    detail::require_hermitian(rho);
    const cplx tr = rho.trace();
    if (std::abs(tr - cplx{1.0, 0.0}) > state_tolerance)
        throw Error(ErrorKind::InvalidParameter, "density operator trace differs from 1");
    const auto spec = eig_hermitian(rho);
    if (spec.raw_eigenvalues.front() < -state_tolerance)
        throw Error(ErrorKind::InvalidParameter, "density operator has a negative eigenvalue");
    return InitialState<N>{0.5 * (rho + rho.adjoint()), StateLabel::custom, 0.0};
}

/// |±⟩ = (|E₀⟩ ± |E₁⟩)/√2 from the phase-fixed eigenvectors of a two-level Hamiltonian.
inline std::array<cplx, 2> coherent_ket(const Observable<2> &h0, bool plus) {
    const auto &spec = h0.spectrum();
    const double sign = plus ? 1.0 : -1.0;
    const double norm = 1.0 / std::sqrt(2.0);
    return {norm * (spec.eigenvectors[0][0] + sign * spec.eigenvectors[1][0]),
            norm * (spec.eigenvectors[0][1] + sign * spec.eigenvectors[1][1])};
}

inline std::array<cplx, 2> coherent_ket(const DriveParams &p, bool plus) { return coherent_ket(h_of_t(p, 0.0), plus); }

inline Mat2 ket_projector(const std::array<cplx, 2> &k) {
    Mat2 m;
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) m(r, c) = k[r] * std::conj(k[c]);
    return m;
}

/// ρ_p = p|+⟩⟨+| + (1−p)|−⟩⟨−| in the eigenbasis of h0; plus and minus are the p = 1 and p = 0 ends.
inline InitialState<2> make_initial_state(const Observable<2> &h0, StateLabel label, double p = 1.0) {
    switch (label) {
    case StateLabel::plus: return {ket_projector(coherent_ket(h0, true)), label, 1.0};
    case StateLabel::minus: return {ket_projector(coherent_ket(h0, false)), label, 0.0};
    case StateLabel::mixture: {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidP, "mixture weight must lie in [0,1]");
        const Mat2 rho = p * ket_projector(coherent_ket(h0, true)) +
                         (1.0 - p) * ket_projector(coherent_ket(h0, false));
        return {rho, label, p};
    }
    case StateLabel::custom: break;
    }
    throw Error(ErrorKind::InvalidParameter, "custom states need an explicit density operator");
}

inline InitialState<2> make_initial_state(const DriveParams &params, StateLabel label, double p = 1.0) {
    return make_initial_state(h_of_t(params, 0.0), label, p);
}

} // namespace kdqlab
