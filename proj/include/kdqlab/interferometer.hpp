#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "kdqlab/protocol.hpp"
#include "kdqlab/qmath.hpp"
#include "kdqlab/trace.hpp"

/// Gate-level model of the ancilla-assisted Ramsey circuit. Two-qubit
/// operators are ordered system ⊗ ancilla.

namespace kdqlab {

enum class CircuitVariant { g2_full, gB_simplified };

/// e^{-iuH₀} ⊗ |0⟩⟨0|_A + 𝕀 ⊗ |1⟩⟨1|_A.
inline Mat4 gate_g1(double u, const Observable<2> &h0) {
    return kron(h0.evolution(u), basis_projector(0)) + kron(pauli::id, basis_projector(1));
}

/// 𝕀 ⊗ |0⟩⟨0|_A + e^{-iuH_t} ⊗ |1⟩⟨1|_A.
inline Mat4 gate_g2(double u, const Observable<2> &ht) {
    return kron(pauli::id, basis_projector(0)) + kron(ht.evolution(u), basis_projector(1));
}

/// 𝕀 ⊗ |0⟩⟨0|_A + e^{-iuH₀} ⊗ |1⟩⟨1|_A, used together with the rotating-frame propagator.
inline Mat4 gate_gB(double u, const Observable<2> &h0) { return gate_g2(u, h0); }

inline const Mat2 hadamard{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};

struct AncillaReadout {
    double sx = 0.0;
    double sy = 0.0;
    [[nodiscard]] cplx as_complex() const { return {sx, sy}; }
};

struct CircuitSpec {
    double u = 0.0;
    WorkProtocol<2> proto;
    CircuitVariant variant = CircuitVariant::g2_full;
    InitialState<2> rho_system;
    /// Required by gB_simplified: the drive whose rotating frame is used.
    std::optional<DriveParams> drive;
};

enum class ReadoutAxis { x, y };

/// Axis phase of the ancilla π/2 rotation that precedes a σ_z measurement.
/// After R(a, π/2) the σ_z outcome equals cos a·⟨σ_y⟩ − sin a·⟨σ_x⟩ of the
/// pre-rotation state. The y setting uses a = π, so it reports Im 𝒢(u); this is
/// the textbook ⟨σ_y⟩ with the ancilla's two labels exchanged.
inline double readout_phase(ReadoutAxis axis) { return axis == ReadoutAxis::x ? -pi / 2.0 : pi; }

namespace detail {

inline void check_state(const Mat4 &rho, const char *stage) {
    if (std::abs(rho.trace() - cplx{1.0, 0.0}) > 1e-12)
        throw Error(ErrorKind::InvariantViolation, std::string("trace drift after ") + stage);
}

inline Mat2 rotating_frame_propagator(const CircuitSpec &spec) {
    if (!spec.drive)
        throw Error(ErrorKind::InvalidVariant, "gB_simplified needs the drive parameters of the protocol");
    const DriveParams &p = *spec.drive;
    const Mat2 u_b = propagator_rotating_frame(p, spec.proto.time);
    const Mat2 frame = rotation_z(p.delta() * spec.proto.time);
    if (frobenius_distance_up_to_phase(Mat2(frame * u_b), spec.proto.u_t) > 1e-9)
        throw Error(ErrorKind::InvalidVariant, "protocol is not generated by the given drive");
    if (frobenius_distance_up_to_phase(spec.proto.h0.matrix(), h_of_t(p, 0.0).matrix()) > 1e-9)
        throw Error(ErrorKind::InvalidVariant, "protocol H(0) does not match the given drive");
    return u_b;
}

} // namespace detail

/// Joint state after each stage: input, Hadamard, G₁, evolution, final gate.
inline std::vector<Mat4> circuit_stages(const CircuitSpec &spec) {
    if (!std::isfinite(spec.u)) throw Error(ErrorKind::NonFinite, "u is not finite");
    if (spec.u < 0.0) throw Error(ErrorKind::InvalidParameter, "u must be nonnegative");

    Mat2 evolution;
    Mat4 second;
    switch (spec.variant) {
    case CircuitVariant::g2_full:
        evolution = spec.proto.u_t;
        second = gate_g2(spec.u, spec.proto.ht);
        break;
    case CircuitVariant::gB_simplified:
        evolution = detail::rotating_frame_propagator(spec);
        second = gate_gB(spec.u, spec.proto.h0);
        break;
    default: throw Error(ErrorKind::InvalidVariant, "unknown circuit variant");
    }

    const Mat4 ops[] = {kron(pauli::id, hadamard), gate_g1(spec.u, spec.proto.h0), kron(evolution, pauli::id), second};
    const char *names[] = {"hadamard", "G1", "evolution", "final gate"};
    std::vector<Mat4> stages;
    Mat4 rho = kron(spec.rho_system.rho, basis_projector(0));
    stages.push_back(rho);
    for (std::size_t k = 0; k < 4; ++k) {
        rho = conjugate_by(ops[k], rho);
        detail::check_state(rho, names[k]);
        stages.push_back(rho);
    }
    return stages;
}

/// ⟨σ_z⟩_A after an ancilla π/2 rotation with the given axis phase.
inline double measure_setting(const Mat4 &joint, double axis_phase) {
    const Mat4 rotated = conjugate_by(kron(pauli::id, rotation_xy(axis_phase, pi / 2.0)), joint);
    return expectation(partial_trace_first(rotated), pauli::z).real();
}

/// (Re 𝒢(u), Im 𝒢(u)) from two measurement settings on the ancilla.
inline AncillaReadout run_circuit(const CircuitSpec &spec) {
    const Mat4 final_state = circuit_stages(spec).back();
    return {measure_setting(final_state, readout_phase(ReadoutAxis::x)),
            measure_setting(final_state, readout_phase(ReadoutAxis::y))};
}

/// Circuit trace averaged over the |+⟩ and |−⟩ preparations of H(0).
inline CharFnTrace tpm_via_mixture(const WorkProtocol<2> &proto, const UGrid &grid) {
    const InitialState<2> plus = make_initial_state(proto.h0, StateLabel::plus);
    const InitialState<2> minus = make_initial_state(proto.h0, StateLabel::minus);
    return sample_on_grid(grid, TraceSource::circuit, [&](double u) {
        const cplx a = run_circuit({u, proto, CircuitVariant::g2_full, plus, std::nullopt}).as_complex();
        const cplx b = run_circuit({u, proto, CircuitVariant::g2_full, minus, std::nullopt}).as_complex();
        return 0.5 * (a + b);
    });
}

} // namespace kdqlab
