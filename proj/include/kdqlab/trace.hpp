#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kdqlab/error.hpp"
#include "kdqlab/qmath.hpp"

namespace kdqlab {

enum class TraceSource { analytic, circuit, pulse, file };

inline std::string to_string(TraceSource s) {
    switch (s) {
    case TraceSource::analytic: return "analytic";
    case TraceSource::circuit: return "circuit";
    case TraceSource::pulse: return "pulse";
    case TraceSource::file: return "file";
    }
    return "file";
}

inline constexpr std::size_t min_trace_points = 8;

/// Uniform sampling grid u_k = k·u_max/n, k = 0..n−1; u_max itself is not sampled.
struct UGrid {
    std::size_t n = 128;
    double u_max = 0.0;

    /// n = 128 points up to u_max = 16π/ω.
    static UGrid default_for(double omega) { return {128, 16.0 * pi / omega}; }

    void validate() const {
        if (n < min_trace_points)
            throw Error(ErrorKind::GridTooSmall, "grid needs at least 8 points, got " + std::to_string(n));
        if (!std::isfinite(u_max)) throw Error(ErrorKind::NonFinite, "u_max is not finite");
        if (!(u_max > 0.0)) throw Error(ErrorKind::InvalidParameter, "u_max must be positive");
    }

    [[nodiscard]] double spacing() const { return u_max / static_cast<double>(n); }

    [[nodiscard]] std::vector<double> points() const {
        validate();
        std::vector<double> u(n);
        const double du = spacing();
        for (std::size_t k = 0; k < n; ++k) u[k] = static_cast<double>(k) * du;
        return u;
    }
};

/// Samples of 𝒢(u) on a uniform grid.
struct CharFnTrace {
    std::vector<double> u_values;
    std::vector<cplx> values;
    TraceSource source = TraceSource::analytic;

    [[nodiscard]] std::size_t size() const { return values.size(); }

    /// Checks length, size and uniformity; returns the spacing Δu.
    [[nodiscard]] double validated_spacing() const {
        if (u_values.size() != values.size())
            throw Error(ErrorKind::LengthMismatch, "u grid and samples differ in length");
        if (size() < min_trace_points)
            throw Error(ErrorKind::GridTooSmall, "trace needs at least 8 samples, got " + std::to_string(size()));
        for (double u : u_values)
            if (!std::isfinite(u)) throw Error(ErrorKind::NonFinite, "non-finite u value");
        for (const auto &g : values)
            if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
                throw Error(ErrorKind::NonFinite, "non-finite trace sample");
        const double du = (u_values.back() - u_values.front()) / static_cast<double>(size() - 1);
        if (!(du > 0.0)) throw Error(ErrorKind::NonUniformGrid, "u grid must be increasing");
        const double tol = 1e-12 * std::max({std::abs(u_values.front()), std::abs(u_values.back()), du});
        for (std::size_t k = 1; k < size(); ++k)
            if (std::abs((u_values[k] - u_values[k - 1]) - du) > tol)
                throw Error(ErrorKind::NonUniformGrid, "u grid spacing is not uniform at index " + std::to_string(k));
        return du;
    }
};

/// Evaluates `g(u)` over the grid.
template <class Fn> CharFnTrace sample_on_grid(const UGrid &grid, TraceSource source, Fn &&g) {
    CharFnTrace trace;
    trace.source = source;
    trace.u_values = grid.points();
    trace.values.reserve(grid.n);
    for (double u : trace.u_values) trace.values.push_back(g(u));
    return trace;
}

} // namespace kdqlab
