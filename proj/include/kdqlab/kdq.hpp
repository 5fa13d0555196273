#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "kdqlab/protocol.hpp"
#include "kdqlab/qmath.hpp"

/// @file kdq.hpp
/// Exact quasiprobability tables and everything derived from them.

namespace kdqlab {

/// Complex joint weights q_if over (initial level i, final level f).
struct QuasiprobTable {
    std::vector<double> energies_initial;
    std::vector<double> energies_final;
    /// Row-major, entries[i * final_levels() + f].
    std::vector<cplx> entries;

    [[nodiscard]] std::size_t initial_levels() const { return energies_initial.size(); }
    [[nodiscard]] std::size_t final_levels() const { return energies_final.size(); }

    [[nodiscard]] cplx q(std::size_t i, std::size_t f) const { return entries[i * final_levels() + f]; }
    [[nodiscard]] double work(std::size_t i, std::size_t f) const {
        return energies_final[f] - energies_initial[i];
    }

    [[nodiscard]] cplx total() const {
        cplx s{};
        for (const auto &z : entries) s += z;
        return s;
    }

    /// Σ_f q_if.
    [[nodiscard]] cplx initial_marginal(std::size_t i) const {
        cplx s{};
        for (std::size_t f = 0; f < final_levels(); ++f) s += q(i, f);
        return s;
    }
    /// Σ_i q_if.
    [[nodiscard]] cplx final_marginal(std::size_t f) const {
        cplx s{};
        for (std::size_t i = 0; i < initial_levels(); ++i) s += q(i, f);
        return s;
    }

    /// Largest transition-energy magnitude scale, used for relative tolerances.
    [[nodiscard]] double energy_scale() const {
        double lo = 0.0, hi = 0.0;
        for (double e : energies_initial) lo = std::max(lo, std::abs(e));
        for (double e : energies_final) hi = std::max(hi, std::abs(e));
        return std::max(lo + hi, 1e-300);
    }
};

namespace detail {

template <std::size_t N, class Weight>
QuasiprobTable build_table(const WorkProtocol<N> &proto, Weight &&weight) {
    QuasiprobTable table;
    table.energies_initial = proto.h0.eigenvalues();
    table.energies_final = proto.ht.eigenvalues();
    const auto &pi0 = proto.h0.projectors();
    const auto &pit = proto.ht.projectors();
    for (std::size_t i = 0; i < pi0.size(); ++i)
        for (std::size_t f = 0; f < pit.size(); ++f) {
            const Matrix<N> evolved = proto.u_t.adjoint() * pit[f] * proto.u_t;
            table.entries.push_back(weight(pi0[i], evolved));
        }
    return table;
}

} // namespace detail

/// q_if = Tr(U†Π_f(t)U · Π_i(0) · ρ).
template <std::size_t N> QuasiprobTable kdq_table(const InitialState<N> &state, const WorkProtocol<N> &proto) {
    return detail::build_table(proto, [&](const Matrix<N> &pi_i, const Matrix<N> &evolved_f) {
        return (evolved_f * pi_i * state.rho).trace();
    });
}

/// Two-point-measurement joint probabilities Tr(Π_iρ)·Tr(U†Π_fU·Π_i).
template <std::size_t N> QuasiprobTable tpm_table(const InitialState<N> &state, const WorkProtocol<N> &proto) {
    return detail::build_table(proto, [&](const Matrix<N> &pi_i, const Matrix<N> &evolved_f) {
        const double p_i = expectation(state.rho, pi_i).real();
        const double p_f_given_i = (evolved_f * pi_i).trace().real();
        return cplx{p_i * p_f_given_i, 0.0};
    });
}

/// 𝒢(u) = Σ_if q_if e^{iuW_if}.
inline cplx char_function_analytic(const QuasiprobTable &table, double u) {
    if (!std::isfinite(u)) throw Error(ErrorKind::NonFinite, "u is not finite");
    cplx g{};
    for (std::size_t i = 0; i < table.initial_levels(); ++i)
        for (std::size_t f = 0; f < table.final_levels(); ++f)
            g += table.q(i, f) * std::exp(cplx{0.0, u * table.work(i, f)});
    return g;
}

/// 𝒢(u) = Tr[e^{-iuH(0)} ρ U† e^{iuH(t)} U], computed without the table.
template <std::size_t N>
cplx char_function_trace(const InitialState<N> &state, const WorkProtocol<N> &proto, double u) {
    if (!std::isfinite(u)) throw Error(ErrorKind::NonFinite, "u is not finite");
    const Matrix<N> lhs = proto.h0.evolution(u);
    const Matrix<N> rhs = proto.u_t.adjoint() * proto.ht.evolution(-u) * proto.u_t;
    return (lhs * state.rho * rhs).trace();
}

struct WorkAtom {
    double w = 0.0;
    cplx weight{};
};

struct WorkDistributionOptions {
    /// Merge atoms whose W agree within merge_tolerance · energy scale.
    bool merge = true;
    double merge_tolerance = 1e-9;
    /// Atoms with |weight| at or below this are dropped; negative keeps every atom.
    double drop_tolerance = 1e-12;
};

/// Dirac-comb form of P(W), sorted by W.
inline std::vector<WorkAtom> work_distribution(const QuasiprobTable &table,
                                               WorkDistributionOptions opts = {}) {
    std::vector<WorkAtom> atoms;
    for (std::size_t i = 0; i < table.initial_levels(); ++i)
        for (std::size_t f = 0; f < table.final_levels(); ++f)
            atoms.push_back({table.work(i, f), table.q(i, f)});
    std::stable_sort(atoms.begin(), atoms.end(), [](const WorkAtom &a, const WorkAtom &b) { return a.w < b.w; });
    std::vector<WorkAtom> merged;
    if (opts.merge) {
        const double tol = opts.merge_tolerance * table.energy_scale();
        for (const auto &a : atoms) {
            if (!merged.empty() && a.w - merged.back().w < tol) {
                merged.back().weight += a.weight;
            } else {
                merged.push_back(a);
            }
        }
    } else {
        merged = std::move(atoms);
    }
    if (opts.drop_tolerance >= 0.0)
        std::erase_if(merged, [&](const WorkAtom &a) { return std::abs(a.weight) <= opts.drop_tolerance; });
    return merged;
}

struct WorkMoments {
    cplx mean{};
    cplx second_moment{};
    cplx variance{};
    [[nodiscard]] double v_r() const { return variance.real(); }
    [[nodiscard]] double v_i() const { return variance.imag(); }
};

/// Σ_if q_if W_if^m.
inline cplx kd_work_moment(const QuasiprobTable &table, int m) {
    cplx s{};
    for (std::size_t i = 0; i < table.initial_levels(); ++i)
        for (std::size_t f = 0; f < table.final_levels(); ++f)
            s += table.q(i, f) * std::pow(table.work(i, f), m);
    return s;
}

inline WorkMoments work_moments(const QuasiprobTable &table) {
    WorkMoments m;
    m.mean = kd_work_moment(table, 1);
    m.second_moment = kd_work_moment(table, 2);
    m.variance = m.second_moment - m.mean * m.mean;
    return m;
}

struct CorrelationReport {
    /// ⟨H̃(t)H(0)⟩ = Tr(H̃(t) H(0) ρ).
    cplx corr{};
    double covariance = 0.0;
    /// Tr(iρ[H(0), H̃(t)]).
    double commutator_expect = 0.0;
    double var_h0 = 0.0;
    double var_ht = 0.0;
    double mean_h0 = 0.0;
    double mean_ht = 0.0;
};

template <std::size_t N> double variance_of(const Matrix<N> &rho, const Matrix<N> &a) {
    const double m1 = expectation(rho, a).real();
    return expectation(rho, Matrix<N>(a * a)).real() - m1 * m1;
}

template <std::size_t N>
CorrelationReport correlation_report(const InitialState<N> &state, const WorkProtocol<N> &proto) {
    const Matrix<N> &h0 = proto.h0.matrix();
    const Matrix<N> ht = proto.ht_heisenberg();
    const Matrix<N> &rho = state.rho;

    CorrelationReport r;
    r.corr = (ht * h0 * rho).trace();
    r.mean_h0 = expectation(rho, h0).real();
    r.mean_ht = expectation(rho, ht).real();
    const Matrix<N> id = Matrix<N>::identity();
    const Matrix<N> dh0 = h0 - r.mean_h0 * id;
    const Matrix<N> dht = ht - r.mean_ht * id;
    r.covariance = 0.5 * expectation(rho, anticommutator(dh0, dht)).real();
    r.commutator_expect = (I_unit * expectation(rho, commutator(h0, ht))).real();
    r.var_h0 = variance_of(rho, h0);
    r.var_ht = variance_of(rho, ht);
    return r;
}

/// Correlation matrix [[Var H0, Tr(ρΔH0ΔH̃)], [Tr(ρΔH̃ΔH0), Var H̃]].
template <std::size_t N> Mat2 correlation_matrix(const InitialState<N> &state, const WorkProtocol<N> &proto) {
    const Matrix<N> &rho = state.rho;
    const Matrix<N> id = Matrix<N>::identity();
    const Matrix<N> h0 = proto.h0.matrix();
    const Matrix<N> ht = proto.ht_heisenberg();
    const Matrix<N> dh0 = h0 - expectation(rho, h0).real() * id;
    const Matrix<N> dht = ht - expectation(rho, ht).real() * id;
    return Mat2{expectation(rho, Matrix<N>(dh0 * dh0)), expectation(rho, Matrix<N>(dh0 * dht)),
                expectation(rho, Matrix<N>(dht * dh0)), expectation(rho, Matrix<N>(dht * dht))};
}

struct WorkOperatorReport {
    double first = 0.0;
    double second = 0.0;
    double dispersion = 0.0;
};

/// 𝒲 = H̃(t) − H(0).
template <std::size_t N> Matrix<N> work_operator(const WorkProtocol<N> &proto) {
    return proto.ht_heisenberg() - proto.h0.matrix();
}

template <std::size_t N> double work_operator_moment(const InitialState<N> &state, const WorkProtocol<N> &proto, int m) {
    const Matrix<N> w = work_operator(proto);
    Matrix<N> power = Matrix<N>::identity();
    for (int k = 0; k < m; ++k) power = power * w;
    return expectation(state.rho, power).real();
}

template <std::size_t N>
WorkOperatorReport work_operator_report(const InitialState<N> &state, const WorkProtocol<N> &proto) {
    WorkOperatorReport r;
    r.first = work_operator_moment(state, proto, 1);
    r.second = work_operator_moment(state, proto, 2);
    r.dispersion = r.second - r.first * r.first;
    return r;
}

struct RsurSides {
    /// Var[H(0)]·Var[H̃(t)].
    double lhs = 0.0;
    /// Cov² + (Im⟨H̃(t)H(0)⟩)².
    double rhs = 0.0;
    /// (‖H(0)‖_F ‖H(t)‖_F)², the natural size of both sides.
    double scale = 1.0;
};

template <std::size_t N> RsurSides rsur_sides(const InitialState<N> &state, const WorkProtocol<N> &proto) {
    const CorrelationReport c = correlation_report(state, proto);
    RsurSides s;
    s.lhs = c.var_h0 * c.var_ht;
    s.rhs = c.covariance * c.covariance + c.corr.imag() * c.corr.imag();
    const double n = proto.h0.matrix().frobenius_norm() * proto.ht.matrix().frobenius_norm();
    s.scale = std::max(n * n, 1e-300);
    return s;
}

/// Σ_i Π_i ρ Π_i in the eigenbasis of H(0).
template <std::size_t N> Matrix<N> dephase(const Matrix<N> &rho, const Observable<N> &h0) {
    Matrix<N> out;
    for (const auto &p : h0.projectors()) out += p * rho * p;
    return out;
}

/// Tr(UχU†H(t)) with χ = ρ − dephase(ρ): the part of the mean work carried by coherence.
template <std::size_t N> double coherence_work(const InitialState<N> &state, const WorkProtocol<N> &proto) {
    const Matrix<N> chi = state.rho - dephase(state.rho, proto.h0);
    return expectation(conjugate_by(proto.u_t, chi), proto.ht.matrix()).real();
}

} // namespace kdqlab
