#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "kdqlab/interferometer.hpp"
#include "kdqlab/protocol.hpp"
#include "kdqlab/qmath.hpp"

/// Electron–nuclear spin model of the NV centre, ordered electron ⊗ nuclear.
/// Electron qubit: |0⟩ = m_S=0, |1⟩ = m_S=−1. Nuclear qubit: |0⟩ = m_I=0,
/// |1⟩ = m_I=+1. The circuit ancilla |0⟩_A is the nuclear |1⟩.

namespace kdqlab {

/// Hyperfine constant relative to Ω in the reference experiment (2.16 MHz against 875/39 MHz).
inline constexpr double reference_hyperfine_ratio = -2.16 * 39.0 / 875.0;
inline constexpr double selectivity_limit = 0.05;

class NvParams {
  public:
    /// rabi_e defaults to Ω, rabi_n to |A|/24 (so a nuclear π/2 pulse lasts 6·2π/|A|).
    explicit NvParams(const DriveParams &drive, std::optional<double> hyperfine = std::nullopt,
                      std::optional<double> rabi_n = std::nullopt, std::optional<double> rabi_e = std::nullopt)
        : drive_(drive) {
        hyperfine_ = hyperfine.value_or(reference_hyperfine_ratio * drive.omega_rabi());
        rabi_n_ = rabi_n.value_or(std::abs(hyperfine_) / 24.0);
        rabi_e_ = rabi_e.value_or(drive.omega_rabi());
        if (!std::isfinite(hyperfine_) || !std::isfinite(rabi_n_) || !std::isfinite(rabi_e_))
            throw Error(ErrorKind::NonFinite, "NV parameters must be finite");
        if (hyperfine_ == 0.0) throw Error(ErrorKind::InvalidParameter, "hyperfine coupling must be nonzero");
        if (!(rabi_n_ > 0.0) || !(rabi_e_ > 0.0))
            throw Error(ErrorKind::InvalidParameter, "Rabi frequencies must be positive");
        if (rabi_n_ / std::abs(hyperfine_) > selectivity_limit) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "nuclear Rabi frequency is %.3g of |A|; selective pulses assume <= %.2g",
                          rabi_n_ / std::abs(hyperfine_), selectivity_limit);
            warnings_.emplace_back(buf);
        }
    }

    [[nodiscard]] const DriveParams &drive() const { return drive_; }
    [[nodiscard]] double hyperfine() const { return hyperfine_; }
    [[nodiscard]] double rabi_e() const { return rabi_e_; }
    [[nodiscard]] double rabi_n() const { return rabi_n_; }
    [[nodiscard]] double theta() const { return drive_.theta(); }
    [[nodiscard]] double theta2() const { return drive_.theta() + pi; }
    /// 2π/|A|.
    [[nodiscard]] double hyperfine_period() const { return 2.0 * pi / std::abs(hyperfine_); }
    [[nodiscard]] const std::vector<std::string> &warnings() const { return warnings_; }

  private:
    DriveParams drive_;
    double hyperfine_;
    double rabi_n_;
    double rabi_e_;
    std::vector<std::string> warnings_;
};

/// (A/4)(σ_z⊗𝕀 + 𝕀⊗σ_z − σ_z⊗σ_z).
inline Mat4 h_interaction(double a) {
    return (a / 4.0) * (kron(pauli::z, pauli::id) + kron(pauli::id, pauli::z) - kron(pauli::z, pauli::z));
}

/// e^{-iτH_I}, exact because H_I is diagonal.
inline Mat4 free_unitary(double tau, double a) {
    const Mat4 h = h_interaction(a);
    std::array<cplx, 4> d{};
    for (std::size_t k = 0; k < 4; ++k) d[k] = std::exp(cplx{0.0, -tau * h(k, k).real()});
    return Mat4::diagonal(d);
}

enum class PulseTarget { electron, nuclear, free };

inline std::string to_string(PulseTarget t) {
    switch (t) {
    case PulseTarget::electron: return "electron";
    case PulseTarget::nuclear: return "nuclear";
    case PulseTarget::free: return "free";
    }
    return "free";
}

struct Pulse {
    PulseTarget target = PulseTarget::free;
    double axis = 0.0;
    double angle = 0.0;
    double duration = 0.0;
    bool selective = false;
};

inline double wrap_phase(double phi) {
    double r = std::remainder(phi, 2.0 * pi);
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

inline Pulse free_pulse(double duration) { return {PulseTarget::free, 0.0, 0.0, duration, false}; }

/// Rotation about axis phase φ; negative angles become positive rotations about φ+π.
inline Pulse electron_pulse(double axis, double angle, const NvParams &params) {
    if (angle < 0.0) return electron_pulse(axis + pi, -angle, params);
    return {PulseTarget::electron, wrap_phase(axis), angle, angle / params.rabi_e(), false};
}

inline Pulse nuclear_selective_pulse(double axis, double angle, const NvParams &params) {
    if (angle < 0.0) return nuclear_selective_pulse(axis + pi, -angle, params);
    return {PulseTarget::nuclear, wrap_phase(axis), angle, angle / params.rabi_n(), true};
}

enum class ElectronPulseMode {
    /// Rotation only, hyperfine coupling ignored during the pulse.
    instantaneous,
    /// exp(-i·duration·(H_drive + H_I)).
    finite
};

namespace detail {

inline void validate_pulse(const Pulse &p) {
    if (!std::isfinite(p.axis) || !std::isfinite(p.angle) || !std::isfinite(p.duration))
        throw Error(ErrorKind::InvalidPulse, "pulse fields must be finite");
    if (p.duration < 0.0) throw Error(ErrorKind::InvalidPulse, "pulse duration must be nonnegative");
    switch (p.target) {
    case PulseTarget::free:
        if (p.angle != 0.0 || p.selective) throw Error(ErrorKind::InvalidPulse, "free evolution has no rotation");
        break;
    case PulseTarget::electron:
        if (p.selective) throw Error(ErrorKind::InvalidPulse, "selective electron pulses are not modelled");
        break;
    case PulseTarget::nuclear:
        if (!p.selective)
            throw Error(ErrorKind::InvalidPulse, "nuclear pulses must be selective; use the π-sandwich instead");
        break;
    }
}

} // namespace detail

/// |0⟩⟨0|_e ⊗ R + |1⟩⟨1|_e ⊗ 𝕀: the nuclear rotation inside the m_S=0 manifold only.
inline Mat4 ideal_selective_rotation(double axis, double angle) {
    return kron(basis_projector(0), rotation_xy(axis, angle)) + kron(basis_projector(1), pauli::id);
}

inline Mat4 pulse_unitary(const Pulse &p, const NvParams &params,
                          ElectronPulseMode mode = ElectronPulseMode::instantaneous) {
    detail::validate_pulse(p);
    const double a = params.hyperfine();
    switch (p.target) {
    case PulseTarget::free: return free_unitary(p.duration, a);
    case PulseTarget::electron: {
        if (mode == ElectronPulseMode::instantaneous) return kron(rotation_xy(p.axis, p.angle), pauli::id);
        if (p.angle == 0.0) return free_unitary(p.duration, a);
        const double rabi = p.angle / p.duration;
        const Mat2 drive = (rabi / 2.0) * (std::cos(p.axis) * pauli::x + std::sin(p.axis) * pauli::y);
        return Observable<4>(kron(drive, pauli::id) + h_interaction(a)).evolution(p.duration);
    }
    case PulseTarget::nuclear: return free_unitary(p.duration, a) * ideal_selective_rotation(p.axis, p.angle);
    }
    throw Error(ErrorKind::InvalidPulse, "unknown pulse target");
}

/// Distance (up to global phase) between a selective nuclear pulse and its ideal rotation.
/// Zero when duration·A is a multiple of 2π.
inline double selective_pulse_residual(const Pulse &p, const NvParams &params) {
    return frobenius_distance_up_to_phase(pulse_unitary(p, params),
                                          ideal_selective_rotation(p.axis, p.angle));
}

/// Free-evolution length τ realising the conditional gate for parameter u: τA ≡ uω,
/// reduced to [0, 2π/|A|) since e^{-iτH_I} is periodic there up to a global phase.
inline double free_duration(double u, const NvParams &params) {
    const double period = params.hyperfine_period();
    double tau = std::fmod(u * params.drive().omega() / params.hyperfine(), period);
    if (tau < 0.0) tau += period;
    return tau;
}

namespace detail {

inline void require_u(double u) {
    if (!std::isfinite(u)) throw Error(ErrorKind::NonFinite, "u is not finite");
    if (u < 0.0) throw Error(ErrorKind::InvalidParameter, "u must be nonnegative");
}

inline Mat4 on_electron(const Mat2 &m) { return kron(m, pauli::id); }
inline Mat4 on_nuclear(const Mat2 &m) { return kron(pauli::id, m); }

/// Gates of the ideal circuit with the ancilla labels exchanged (nuclear |1⟩ = ancilla |0⟩).
inline Mat4 g1_nuclear_frame(double u, const NvParams &params) {
    return kron(h_of_t(params.drive(), 0.0).evolution(u), basis_projector(1)) + kron(pauli::id, basis_projector(0));
}

inline Mat4 gB_nuclear_frame(double u, const NvParams &params) {
    return kron(pauli::id, basis_projector(1)) + kron(h_of_t(params.drive(), 0.0).evolution(u), basis_projector(0));
}

/// R_y^e(θ₂)·R_z^e(−uω)·R_z^n(−uω/2)·e^{-iτH_I}·R_y^e(−θ₂), optionally without the leading electron gates.
inline Mat4 gB_decomposed(double u, const NvParams &params, double theta2, bool drop_electron_tail) {
    const double phase = u * params.drive().omega();
    Mat4 core = on_nuclear(rotation_z(-phase / 2.0)) * free_unitary(free_duration(u, params), params.hyperfine()) *
                on_electron(rotation_y(-theta2));
    if (drop_electron_tail) return core;
    return on_electron(rotation_y(theta2)) * on_electron(rotation_z(-phase)) * core;
}

} // namespace detail

/// ‖G₁(u) − R_y^e(θ)·R_z^n(−uω/2)·e^{-iτH_I}·R_y^e(−θ)‖ up to global phase, in the nuclear-label frame.
inline double verify_g1_decomposition(double u, const NvParams &params) {
    detail::require_u(u);
    const double phase = u * params.drive().omega();
    const Mat4 decomposed = detail::on_electron(rotation_y(params.theta())) *
                            detail::on_nuclear(rotation_z(-phase / 2.0)) *
                            free_unitary(free_duration(u, params), params.hyperfine()) *
                            detail::on_electron(rotation_y(-params.theta()));
    return frobenius_distance_up_to_phase(decomposed, detail::g1_nuclear_frame(u, params));
}

/// Distance of the G_B decomposition for an arbitrary second angle (θ₂ in the sequence).
inline double gB_decomposition_distance(double u, const NvParams &params, double theta2) {
    detail::require_u(u);
    return frobenius_distance_up_to_phase(detail::gB_decomposed(u, params, theta2, false),
                                          detail::gB_nuclear_frame(u, params));
}

struct GbCheck {
    /// Full decomposition against G_B(u), up to global phase.
    double full_distance = 0.0;
    /// Nuclear reduced state with and without the trailing electron-only gates.
    double reduced_state_distance = 0.0;
};

inline GbCheck verify_gB_decomposition(double u, const NvParams &params, double t = 0.0) {
    GbCheck check;
    check.full_distance = gB_decomposition_distance(u, params, params.theta2());

    // State entering G_B in the ideal circuit, for |+⟩ on the electron.
    const Mat2 plus = ket_projector(coherent_ket(params.drive(), true));
    const Mat2 nuclear_x = 0.5 * (pauli::id + pauli::x);
    Mat4 rho = kron(plus, nuclear_x);
    rho = conjugate_by(detail::g1_nuclear_frame(u, params), rho);
    rho = conjugate_by(detail::on_electron(propagator_rotating_frame(params.drive(), t)), rho);

    const Mat2 full = partial_trace_first(conjugate_by(detail::gB_decomposed(u, params, params.theta2(), false), rho));
    const Mat2 dropped = partial_trace_first(conjugate_by(detail::gB_decomposed(u, params, params.theta2(), true), rho));
    check.reduced_state_distance = (full - dropped).frobenius_norm();
    return check;
}

struct SequenceOptions {
    ReadoutAxis axis = ReadoutAxis::x;
    /// Electron prepared in |+⟩ (true) or |−⟩ (false).
    bool plus = true;
    /// Add the nuclear phase uω to the readout pulses.
    bool compensate = true;
};

/// Readout axis phase of the final nuclear π/2 pulses, before compensation.
inline double nuclear_readout_phase(ReadoutAxis axis) { return axis == ReadoutAxis::x ? -pi / 2.0 : 0.0; }

/// Pulse list realising one measurement setting of the circuit at (u, t).
inline std::vector<Pulse> compile_sequence(double u, double t, const NvParams &params, SequenceOptions opts = {}) {
    detail::require_u(u);
    if (!std::isfinite(t)) throw Error(ErrorKind::NonFinite, "t is not finite");
    if (t < 0.0) throw Error(ErrorKind::InvalidParameter, "t must be nonnegative");

    const double tau = free_duration(u, params);
    // Preparation R_y(θ ∓ π/2) merged with the opening R_y(−θ) of G₁.
    const double prep = opts.plus ? -pi / 2.0 : pi / 2.0;
    const double phi = opts.compensate ? u * params.drive().omega() : 0.0;
    const double readout = nuclear_readout_phase(opts.axis) + phi;

    return {
        nuclear_selective_pulse(-pi / 2.0, pi / 2.0, params),
        electron_pulse(pi / 2.0, prep, params),
        free_pulse(tau),
        electron_pulse(pi / 2.0, params.theta(), params),
        electron_pulse(0.0, params.drive().omega_rabi() * t, params),
        electron_pulse(pi / 2.0, -params.theta2(), params),
        free_pulse(tau),
        nuclear_selective_pulse(readout, pi / 2.0, params),
        electron_pulse(0.0, pi, params),
        nuclear_selective_pulse(readout, pi / 2.0, params),
    };
}

/// |m_S=0, m_I=+1⟩⟨·|.
inline Mat4 nv_initial_state() {
    Mat4 rho;
    rho(1, 1) = 1.0;
    return rho;
}

inline Mat4 sequence_unitary(const std::vector<Pulse> &pulses, const NvParams &params,
                             ElectronPulseMode mode = ElectronPulseMode::instantaneous) {
    Mat4 u = Mat4::identity();
    for (const auto &p : pulses) u = pulse_unitary(p, params, mode) * u;
    return u;
}

inline Mat4 evolve_sequence(const std::vector<Pulse> &pulses, const Mat4 &rho0, const NvParams &params,
                            ElectronPulseMode mode = ElectronPulseMode::instantaneous) {
    Mat4 rho = rho0;
    for (const auto &p : pulses) {
        rho = conjugate_by(pulse_unitary(p, params, mode), rho);
        if (std::abs(rho.trace() - rho0.trace()) > 1e-12)
            throw Error(ErrorKind::InvariantViolation, "trace drift during pulse sequence");
    }
    return rho;
}

/// Nuclear ⟨σ_x⟩, ⟨σ_y⟩ after the sequence.
inline AncillaReadout simulate_sequence(const std::vector<Pulse> &pulses, const Mat4 &rho0, const NvParams &params,
                                        ElectronPulseMode mode = ElectronPulseMode::instantaneous) {
    const Mat2 nuclear = partial_trace_first(evolve_sequence(pulses, rho0, params, mode));
    return {expectation(nuclear, pauli::x).real(), expectation(nuclear, pauli::y).real()};
}

/// Nuclear ⟨σ_z⟩, the population contrast read out optically.
inline double nuclear_contrast(const Mat4 &rho) { return expectation(partial_trace_first(rho), pauli::z).real(); }

struct PulseReadoutOptions {
    bool compensate = true;
    ElectronPulseMode mode = ElectronPulseMode::instantaneous;
};

/// Both measurement settings for an electron prepared in ρ_p.
inline AncillaReadout pulse_readout(double u, double t, StateLabel label, double p, const NvParams &params,
                                    PulseReadoutOptions opts = {}) {
    double weight_plus = 1.0;
    switch (label) {
    case StateLabel::plus: weight_plus = 1.0; break;
    case StateLabel::minus: weight_plus = 0.0; break;
    case StateLabel::mixture:
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidP, "mixture weight must lie in [0,1]");
        weight_plus = p;
        break;
    case StateLabel::custom:
        throw Error(ErrorKind::InvalidParameter, "the pulse model prepares only |+⟩, |−⟩ and their mixtures");
    }
    auto contrast = [&](ReadoutAxis axis, bool plus) {
        const auto seq = compile_sequence(u, t, params, {axis, plus, opts.compensate});
        return nuclear_contrast(evolve_sequence(seq, nv_initial_state(), params, opts.mode));
    };
    AncillaReadout r;
    for (bool plus : {true, false}) {
        const double w = plus ? weight_plus : 1.0 - weight_plus;
        if (w == 0.0) continue;
        r.sx += w * contrast(ReadoutAxis::x, plus);
        r.sy += w * contrast(ReadoutAxis::y, plus);
    }
    return r;
}

/// One pulse per line: target,axis,angle,duration,selective.
inline std::string pulse_table(const std::vector<Pulse> &pulses) {
    std::string out = "target,axis,angle,duration,selective\n";
    char buf[160];
    for (const auto &p : pulses) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%d\n", to_string(p.target).c_str(), p.axis, p.angle,
                      p.duration, p.selective ? 1 : 0);
        out += buf;
    }
    return out;
}

} // namespace kdqlab
