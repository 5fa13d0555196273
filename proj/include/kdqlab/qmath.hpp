#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "kdqlab/error.hpp"

/// @file qmath.hpp
/// Dense complex linear algebra for the two operator sizes the library uses:
/// a single qubit (2) and qubit plus ancilla (4).

namespace kdqlab {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr cplx I_unit{0.0, 1.0};

template <std::size_t N>
concept SupportedDim = (N == 2 || N == 4);

/// Row-major square complex matrix of fixed size.
template <std::size_t N>
    requires SupportedDim<N>
class Matrix {
  public:
    static constexpr std::size_t dim = N;

    constexpr Matrix() { data_.fill(cplx{0.0, 0.0}); }

    constexpr Matrix(std::initializer_list<cplx> row_major) {
        data_.fill(cplx{0.0, 0.0});
        std::copy_n(row_major.begin(), std::min(row_major.size(), N * N),
                    data_.begin());
    }

    static constexpr Matrix identity() {
        Matrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    static constexpr Matrix diagonal(const std::array<cplx, N> &d) {
        Matrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
        return m;
    }

    constexpr cplx &operator()(std::size_t r, std::size_t c) { return data_[r * N + c]; }
    constexpr const cplx &operator()(std::size_t r, std::size_t c) const {
        return data_[r * N + c];
    }

    [[nodiscard]] std::span<const cplx, N * N> entries() const { return data_; }

    [[nodiscard]] Matrix adjoint() const {
        Matrix out;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    [[nodiscard]] cplx trace() const {
        cplx s{};
        for (std::size_t i = 0; i < N; ++i) s += (*this)(i, i);
        return s;
    }

    [[nodiscard]] double frobenius_norm() const {
        double s = 0.0;
        for (const auto &z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

    [[nodiscard]] bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](const cplx &z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
    }

    Matrix &operator+=(const Matrix &o) {
        for (std::size_t k = 0; k < N * N; ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix &operator-=(const Matrix &o) {
        for (std::size_t k = 0; k < N * N; ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Matrix &operator*=(cplx s) {
        for (auto &z : data_) z *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
    friend Matrix operator*(Matrix a, cplx s) { return a *= s; }
    friend Matrix operator*(cplx s, Matrix a) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= cplx{s, 0.0}; }
    friend Matrix operator*(Matrix a, double s) { return a *= cplx{s, 0.0}; }

    friend Matrix operator*(const Matrix &a, const Matrix &b) {
        Matrix out;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t k = 0; k < N; ++k) {
                const cplx ark = a(r, k);
                if (ark == cplx{}) continue;
                for (std::size_t c = 0; c < N; ++c) out(r, c) += ark * b(k, c);
            }
        return out;
    }

    friend bool operator==(const Matrix &, const Matrix &) = default;

  private:
    std::array<cplx, N * N> data_;
};

using Mat2 = Matrix<2>;
using Mat4 = Matrix<4>;

namespace pauli {
inline const Mat2 id{1.0, 0.0, 0.0, 1.0};
inline const Mat2 x{0.0, 1.0, 1.0, 0.0};
inline const Mat2 y{0.0, -I_unit, I_unit, 0.0};
inline const Mat2 z{1.0, 0.0, 0.0, -1.0};
} // namespace pauli

/// |k><k| on one qubit.
inline Mat2 basis_projector(std::size_t k) {
    Mat2 m;
    m(k, k) = 1.0;
    return m;
}

/// Tensor product a ⊗ b with `a` as the leading (row-block) factor.
inline Mat4 kron(const Mat2 &a, const Mat2 &b) {
    Mat4 out;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
    return out;
}

/// Trace over the second tensor factor of a two-qubit operator.
inline Mat2 partial_trace_second(const Mat4 &m) {
    Mat2 out;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            out(i, j) = m(2 * i, 2 * j) + m(2 * i + 1, 2 * j + 1);
    return out;
}

/// Trace over the first tensor factor of a two-qubit operator.
inline Mat2 partial_trace_first(const Mat4 &m) {
    Mat2 out;
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) out(k, l) = m(k, l) + m(2 + k, 2 + l);
    return out;
}

template <std::size_t N> Matrix<N> commutator(const Matrix<N> &a, const Matrix<N> &b) {
    return a * b - b * a;
}

template <std::size_t N> Matrix<N> anticommutator(const Matrix<N> &a, const Matrix<N> &b) {
    return a * b + b * a;
}

/// Tr(rho A).
template <std::size_t N> cplx expectation(const Matrix<N> &rho, const Matrix<N> &a) {
    cplx s{};
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t c = 0; c < N; ++c) s += rho(r, c) * a(c, r);
    return s;
}

/// U A U†.
template <std::size_t N> Matrix<N> conjugate_by(const Matrix<N> &u, const Matrix<N> &a) {
    return u * a * u.adjoint();
}

template <std::size_t N> double unitarity_error(const Matrix<N> &u) {
    return (u.adjoint() * u - Matrix<N>::identity()).frobenius_norm();
}

template <std::size_t N> double hermiticity_error(const Matrix<N> &h) {
    return (h - h.adjoint()).frobenius_norm();
}

/// Eigen-decomposition of a Hermitian matrix, grouped into distinct levels.
template <std::size_t N> struct SpectralDecomposition {
    /// Distinct eigenvalues in ascending order.
    std::vector<double> eigenvalues;
    /// One projector per distinct eigenvalue.
    std::vector<Matrix<N>> projectors;
    /// All N eigenvalues (ascending, with repetition).
    std::array<double, N> raw_eigenvalues{};
    /// Phase-fixed eigenvectors matching raw_eigenvalues.
    std::array<std::array<cplx, N>, N> eigenvectors{};

    [[nodiscard]] std::size_t levels() const { return eigenvalues.size(); }

    [[nodiscard]] Matrix<N> reconstruct() const {
        Matrix<N> h;
        for (std::size_t j = 0; j < levels(); ++j) h += eigenvalues[j] * projectors[j];
        return h;
    }
};

namespace detail {

inline constexpr double hermitian_tolerance = 1e-10;
inline constexpr double degeneracy_tolerance = 1e-9;

template <std::size_t N> void require_finite(const Matrix<N> &m, const char *what) {
    if (!m.all_finite()) throw Error(ErrorKind::NonFinite, std::string(what) + " has non-finite entries");
}

template <std::size_t N> void require_hermitian(const Matrix<N> &h) {
    require_finite(h, "matrix");
    const double scale = std::max(1.0, h.frobenius_norm());
    if (hermiticity_error(h) > hermitian_tolerance * scale)
        throw Error(ErrorKind::NotHermitian, "matrix deviates from its adjoint by " +
                                                 std::to_string(hermiticity_error(h)));
}

/// Cyclic complex Jacobi sweeps. Returns eigenvalues (unsorted) and the
/// accumulated unitary whose columns are eigenvectors.
template <std::size_t N>
std::pair<std::array<double, N>, Matrix<N>> jacobi_eigen(Matrix<N> a) {
    Matrix<N> v = Matrix<N>::identity();
    const double scale = std::max(a.frobenius_norm(), 1e-300);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) <= 1e-17 * scale) break;

        for (std::size_t p = 0; p < N; ++p) {
            for (std::size_t q = p + 1; q < N; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag <= 1e-300) continue;
                // Phase rotation makes a(p,q) real positive, then a real Givens
                // rotation annihilates it.
                const cplx phase = a(p, q) / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                Matrix<N> rot = Matrix<N>::identity();
                rot(p, p) = c * phase;
                rot(p, q) = s * phase;
                rot(q, p) = -s;
                rot(q, q) = c;
                a = rot.adjoint() * a * rot;
                v = v * rot;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
        }
    }
    std::array<double, N> evals{};
    for (std::size_t i = 0; i < N; ++i) evals[i] = a(i, i).real();
    return {evals, v};
}

template <std::size_t N> void fix_phase(std::array<cplx, N> &vec) {
    for (std::size_t i = 0; i < N; ++i) {
        const double mag = std::abs(vec[i]);
        if (mag > 1e-12) {
            const cplx phase = std::conj(vec[i]) / mag;
            for (auto &w : vec) w *= phase;
            vec[i] = cplx{mag, 0.0};
            return;
        }
    }
}

} // namespace detail

/// Spectral decomposition of a Hermitian matrix. Eigenvalues ascend; each
/// eigenvector has its first nonzero component real positive; eigenvalues
/// closer than 1e-9·‖H‖_F share one projector.
template <std::size_t N> SpectralDecomposition<N> eig_hermitian(const Matrix<N> &h) {
    detail::require_hermitian(h);
    // Symmetrize so round-off in the input never leaks into the result.
    const Matrix<N> hs = 0.5 * (h + h.adjoint());
    auto [evals, vecs] = detail::jacobi_eigen(hs);

    std::array<std::size_t, N> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return evals[a] < evals[b]; });

    SpectralDecomposition<N> out;
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t col = order[k];
        out.raw_eigenvalues[k] = evals[col];
        for (std::size_t r = 0; r < N; ++r) out.eigenvectors[k][r] = vecs(r, col);
        detail::fix_phase(out.eigenvectors[k]);
    }

    const double gap_tol = detail::degeneracy_tolerance * std::max(h.frobenius_norm(), 1e-300);
    std::size_t k = 0;
    while (k < N) {
        std::size_t end = k + 1;
        while (end < N && out.raw_eigenvalues[end] - out.raw_eigenvalues[end - 1] < gap_tol) ++end;
        double mean = 0.0;
        Matrix<N> proj;
        for (std::size_t j = k; j < end; ++j) {
            mean += out.raw_eigenvalues[j];
            const auto &vec = out.eigenvectors[j];
            for (std::size_t r = 0; r < N; ++r)
                for (std::size_t c = 0; c < N; ++c) proj(r, c) += vec[r] * std::conj(vec[c]);
        }
        out.eigenvalues.push_back(mean / static_cast<double>(end - k));
        out.projectors.push_back(proj);
        k = end;
    }
    return out;
}

/// Hermitian operator with its spectral decomposition cached at construction.
template <std::size_t N> class Observable {
  public:
    explicit Observable(const Matrix<N> &h) : matrix_(0.5 * (h + h.adjoint())), spectrum_(eig_hermitian(h)) {}

    [[nodiscard]] const Matrix<N> &matrix() const { return matrix_; }
    [[nodiscard]] const SpectralDecomposition<N> &spectrum() const { return spectrum_; }
    [[nodiscard]] const std::vector<double> &eigenvalues() const { return spectrum_.eigenvalues; }
    [[nodiscard]] const std::vector<Matrix<N>> &projectors() const { return spectrum_.projectors; }
    [[nodiscard]] std::size_t levels() const { return spectrum_.levels(); }

    /// f(H) = Σ_j f(E_j) Π_j for a scalar function f.
    template <class F> [[nodiscard]] Matrix<N> apply(F &&f) const {
        Matrix<N> out;
        for (std::size_t j = 0; j < levels(); ++j)
            out += cplx(f(spectrum_.eigenvalues[j])) * spectrum_.projectors[j];
        return out;
    }

    /// e^{-i s H}.
    [[nodiscard]] Matrix<N> evolution(double s) const {
        if (!std::isfinite(s)) throw Error(ErrorKind::NonFinite, "duration is not finite");
        // I + Σ (e^{-isE}−1) P keeps short steps unitary to rounding instead of to eigenvector accuracy.
        return Matrix<N>::identity() + apply([s](double e) {
                   const double half = std::sin(s * e / 2.0);
                   return cplx{-2.0 * half * half, -std::sin(s * e)};
               });
    }

  private:
    Matrix<N> matrix_;
    SpectralDecomposition<N> spectrum_;
};

/// e^{-i s H} from the spectral decomposition of H.
template <std::size_t N> Matrix<N> unitary_from_hamiltonian(const Matrix<N> &h, double s) {
    if (!std::isfinite(s)) throw Error(ErrorKind::NonFinite, "duration is not finite");
    return Observable<N>(h).evolution(s);
}

/// min_φ ‖A − e^{iφ}B‖_F, attained at φ = arg Tr(B†A).
template <std::size_t N>
double frobenius_distance_up_to_phase(const Matrix<N> &a, const Matrix<N> &b) {
    const cplx overlap = (b.adjoint() * a).trace();
    const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx{1.0, 0.0};
    return (a - phase * b).frobenius_norm();
}

/// Rotation by `angle` about the Bloch-sphere axis (cos φ, sin φ, 0):
/// exp(-i angle/2 (cos φ σx + sin φ σy)).
inline Mat2 rotation_xy(double axis_phase, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    const cplx n = std::exp(cplx{0.0, axis_phase}); // cos φ + i sin φ
    return Mat2{c, -I_unit * s * std::conj(n), -I_unit * s * n, c};
}

/// exp(-i angle/2 σy).
inline Mat2 rotation_y(double angle) { return rotation_xy(pi / 2.0, angle); }
/// exp(-i angle/2 σx).
inline Mat2 rotation_x(double angle) { return rotation_xy(0.0, angle); }
/// exp(-i angle/2 σz).
inline Mat2 rotation_z(double angle) {
    return Mat2::diagonal({std::exp(cplx{0.0, -angle / 2.0}), std::exp(cplx{0.0, angle / 2.0})});
}

} // namespace kdqlab
