#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace kdqlab;
using namespace testing_support;

namespace {

const DriveParams drive = DriveParams::dimensionless();

CircuitSpec spec_at(double u, double omega_t, const InitialState<2> &rho,
                    CircuitVariant variant = CircuitVariant::g2_full) {
    return {u, driven_protocol(drive, omega_t), variant, rho,
            variant == CircuitVariant::gB_simplified ? std::optional<DriveParams>(drive) : std::nullopt};
}

} // namespace

TEST(Gates, IdentityAtZeroParameter) {
    const Observable<2> h0 = h_of_t(drive, 0.0);
    EXPECT_LT(max_abs_diff(gate_g1(0.0, h0), Mat4::identity()), 1e-15);
    EXPECT_LT(max_abs_diff(gate_g2(0.0, h0), Mat4::identity()), 1e-15);
}

TEST(Gates, FirstGateActsOnlyWhenAncillaIsZero) {
    const Observable<2> h0 = h_of_t(drive, 0.0);
    const Mat4 g = gate_g1(0.7, h0);
    // Ancilla |1⟩ block (rows/cols 1 and 3) is the identity.
    EXPECT_EQ(g(1, 1), cplx(1.0));
    EXPECT_EQ(g(3, 3), cplx(1.0));
    EXPECT_EQ(g(1, 3), cplx(0.0));
    EXPECT_EQ(g(3, 1), cplx(0.0));
    const Mat2 block{g(0, 0), g(0, 2), g(2, 0), g(2, 2)};
    EXPECT_LT(max_abs_diff(to_oracle(block), oracle::evolve(to_oracle(h0.matrix()), 0.7)), 1e-12);
}

TEST(Gates, HalfPeriodOfFirstGateMatchesSpectralOracle) {
    const Observable<2> h0 = h_of_t(drive, 0.0);
    const double u = pi / drive.omega();
    const auto sp = oracle::spectrum(to_oracle(h0.matrix()));
    oracle::M2 expect{};
    for (int k = 0; k < 2; ++k) expect = oracle::add(expect, oracle::scale(std::exp(cplx(0, -u * sp.e[k])), sp.p[k]));
    const Mat4 g = gate_g1(u, h0);
    const Mat2 block{g(0, 0), g(0, 2), g(2, 0), g(2, 2)};
    EXPECT_LT(max_abs_diff(to_oracle(block), expect), 1e-12);
}

TEST(Gates, AllGatesAreUnitary) {
    const auto proto = driven_protocol(drive, 1.3);
    for (double u : {0.0, 0.4, 3.0, 17.0}) {
        EXPECT_LT(unitarity_error(gate_g1(u, proto.h0)), 1e-12);
        EXPECT_LT(unitarity_error(gate_g2(u, proto.ht)), 1e-12);
        EXPECT_LT(unitarity_error(gate_gB(u, proto.h0)), 1e-12);
    }
}

TEST(Gates, SecondGateAtTimeZeroEqualsSimplifiedGate) {
    const auto proto = driven_protocol(drive, 0.0);
    EXPECT_LT(max_abs_diff(gate_g2(2.1, proto.ht), gate_gB(2.1, proto.h0)), 1e-15);
}

TEST(Circuit, OriginReadsOne) {
    const auto r = run_circuit(spec_at(0.0, frozen::t_ref, plus_state()));
    EXPECT_NEAR(r.sx, 1.0, 1e-12);
    EXPECT_NEAR(r.sy, 0.0, 1e-12);
}

TEST(Circuit, ReadoutEqualsCharacteristicFunctionOverLattice) {
    const auto rho = plus_state();
    const UGrid grid = UGrid::default_for(drive.omega());
    for (double wt : lattice()) {
        const auto proto = driven_protocol(drive, wt);
        const auto table = kdq_table(rho, proto);
        for (double u : grid.points()) {
            const cplx g = run_circuit({u, proto, CircuitVariant::g2_full, rho, std::nullopt}).as_complex();
            EXPECT_LT(std::abs(g - char_function_analytic(table, u)), 1e-12);
        }
    }
}

TEST(Circuit, SimplifiedVariantAgrees) {
    const auto rho = plus_state();
    EXPECT_LT(std::abs(run_circuit(spec_at(3.0 / drive.omega(), frozen::t_ref, rho)).as_complex() -
                       run_circuit(spec_at(3.0 / drive.omega(), frozen::t_ref, rho, CircuitVariant::gB_simplified))
                           .as_complex()),
              1e-12);
}

TEST(Circuit, StagesKeepAValidDensityOperator) {
    const auto stages = circuit_stages(spec_at(2.5, 1.9, plus_state()));
    ASSERT_EQ(stages.size(), 5u);
    for (const auto &rho : stages) {
        EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
        EXPECT_LT(hermiticity_error(rho), 1e-12);
        EXPECT_GT(eig_hermitian(rho).raw_eigenvalues.front(), -1e-12);
    }
}

TEST(Circuit, ReadoutIsLinearInTheInputState) {
    const auto plus = make_initial_state(drive, StateLabel::plus);
    const auto minus = make_initial_state(drive, StateLabel::minus);
    const auto mix = make_initial_state(drive, StateLabel::mixture, 0.3);
    for (double u : {0.5, 2.0, 7.0}) {
        const cplx a = run_circuit(spec_at(u, 2.0, plus)).as_complex();
        const cplx b = run_circuit(spec_at(u, 2.0, minus)).as_complex();
        const cplx m = run_circuit(spec_at(u, 2.0, mix)).as_complex();
        EXPECT_LT(std::abs(m - (0.3 * a + 0.7 * b)), 1e-12);
    }
}

TEST(Circuit, ReadoutMagnitudeBounded) {
    std::mt19937_64 g(50);
    std::uniform_real_distribution<double> uu(0.0, 30.0), tt(0.0, 2.0 * pi);
    for (int n = 0; n < 300; ++n) {
        const auto rho = random_state<2>(g);
        EXPECT_LE(std::abs(run_circuit(spec_at(uu(g), tt(g), rho)).as_complex()), 1.0 + 1e-12);
    }
}

TEST(Circuit, MeasurementSettingFormula) {
    std::mt19937_64 g(51);
    std::uniform_real_distribution<double> a(-pi, pi);
    for (int n = 0; n < 200; ++n) {
        const Mat4 joint = random_density<4>(g);
        const double phase = a(g);
        const Mat2 anc = partial_trace_first(joint);
        const double expect = std::cos(phase) * expectation(anc, pauli::y).real() -
                              std::sin(phase) * expectation(anc, pauli::x).real();
        EXPECT_NEAR(measure_setting(joint, phase), expect, 1e-12);
    }
}

TEST(Circuit, SimplifiedVariantNeedsDrive) {
    CircuitSpec s = spec_at(1.0, 1.0, plus_state(), CircuitVariant::gB_simplified);
    s.drive.reset();
    EXPECT_ERROR_KIND(run_circuit(s), ErrorKind::InvalidVariant);
}

TEST(Circuit, SimplifiedVariantRejectsForeignProtocol) {
    CircuitSpec s = spec_at(1.0, 1.0, plus_state(), CircuitVariant::gB_simplified);
    s.drive = DriveParams(1.0, 0.5);
    EXPECT_ERROR_KIND(run_circuit(s), ErrorKind::InvalidVariant);
}

TEST(Circuit, RejectsNegativeAndNonFiniteParameter) {
    EXPECT_ERROR_KIND(run_circuit(spec_at(-1.0, 1.0, plus_state())), ErrorKind::InvalidParameter);
    EXPECT_ERROR_KIND(run_circuit(spec_at(std::nan(""), 1.0, plus_state())), ErrorKind::NonFinite);
}

TEST(Mixture, AveragedPreparationsGiveTheTwoPointTrace) {
    const auto proto = driven_protocol(drive, frozen::t_ref);
    const UGrid grid{64, 12.0};
    const CharFnTrace trace = tpm_via_mixture(proto, grid);
    const auto tp = tpm_table(make_initial_state(drive, StateLabel::mixture, 0.5), proto);
    EXPECT_LT(std::abs(trace.values.front() - 1.0), 1e-12);
    for (std::size_t k = 0; k < trace.size(); ++k)
        EXPECT_LT(std::abs(trace.values[k] - char_function_analytic(tp, trace.u_values[k])), 1e-12);
    const auto m = work_moments(tp);
    EXPECT_NEAR(m.mean.imag(), 0.0, 1e-12);
    EXPECT_NEAR(m.second_moment.imag(), 0.0, 1e-12);
}
