#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "kdqlab/kdqlab.hpp"
#include "oracle.hpp"

/// Asserts that `stmt` throws kdqlab::Error of the given kind.
#define EXPECT_ERROR_KIND(stmt, expected_kind)                                                                     \
    do {                                                                                                           \
        try {                                                                                                      \
            stmt;                                                                                                  \
            ADD_FAILURE() << "no exception from " #stmt;                                                          \
        } catch (const kdqlab::Error &kdq_err_) {                                                                  \
            EXPECT_EQ(kdq_err_.kind(), expected_kind) << kdq_err_.what();                                          \
        }                                                                                                          \
    } while (0)

namespace testing_support {

using kdqlab::cplx;
using kdqlab::Mat2;
using kdqlab::Mat4;

inline oracle::M2 to_oracle(const Mat2 &m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }
inline Mat2 from_oracle(const oracle::M2 &m) { return Mat2{m[0], m[1], m[2], m[3]}; }

template <std::size_t N> double max_abs_diff(const kdqlab::Matrix<N> &a, const kdqlab::Matrix<N> &b) {
    double d = 0.0;
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t c = 0; c < N; ++c) d = std::max(d, std::abs(a(r, c) - b(r, c)));
    return d;
}

inline double max_abs_diff(const oracle::M2 &a, const oracle::M2 &b) {
    double d = 0.0;
    for (std::size_t k = 0; k < 4; ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

template <std::size_t N> kdqlab::Matrix<N> random_hermitian(std::mt19937_64 &g, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    kdqlab::Matrix<N> m;
    for (std::size_t r = 0; r < N; ++r) {
        m(r, r) = n(g);
        for (std::size_t c = r + 1; c < N; ++c) {
            m(r, c) = cplx(n(g), n(g));
            m(c, r) = std::conj(m(r, c));
        }
    }
    return m;
}

template <std::size_t N> kdqlab::Matrix<N> random_density(std::mt19937_64 &g) {
    std::normal_distribution<double> n(0.0, 1.0);
    kdqlab::Matrix<N> a;
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t c = 0; c < N; ++c) a(r, c) = cplx(n(g), n(g));
    kdqlab::Matrix<N> rho = a * a.adjoint();
    return (1.0 / rho.trace().real()) * rho;
}

template <std::size_t N> kdqlab::Matrix<N> random_unitary(std::mt19937_64 &g) {
    return kdqlab::unitary_from_hamiltonian(random_hermitian<N>(g, 2.0), 1.0);
}

template <std::size_t N> kdqlab::WorkProtocol<N> random_protocol(std::mt19937_64 &g) {
    return kdqlab::make_work_protocol(kdqlab::Observable<N>(random_hermitian<N>(g)),
                                      kdqlab::Observable<N>(random_hermitian<N>(g)), random_unitary<N>(g), 1.0);
}

template <std::size_t N> kdqlab::InitialState<N> random_state(std::mt19937_64 &g) {
    return kdqlab::make_custom_state(random_density<N>(g));
}

/// ρ diagonal in the eigenbasis of h0 with random populations.
template <std::size_t N>
kdqlab::InitialState<N> random_diagonal_state(std::mt19937_64 &g, const kdqlab::Observable<N> &h0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    kdqlab::Matrix<N> rho;
    double total = 0.0;
    std::vector<double> w;
    for (std::size_t j = 0; j < h0.levels(); ++j) {
        w.push_back(u(g));
        total += w.back();
    }
    for (std::size_t j = 0; j < h0.levels(); ++j) rho += (w[j] / total) * h0.projectors()[j];
    return kdqlab::make_custom_state(rho);
}

inline std::filesystem::path fresh_dir(const std::string &name) {
    const auto dir = std::filesystem::temp_directory_path() / ("kdqlab_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline kdqlab::InitialState<2> plus_state() {
    return kdqlab::make_initial_state(kdqlab::DriveParams::dimensionless(), kdqlab::StateLabel::plus);
}

inline std::vector<double> lattice() {
    std::vector<double> v;
    for (int k = 0; k <= 12; ++k) v.push_back(k * kdqlab::pi / 6.0);
    return v;
}

} // namespace testing_support
