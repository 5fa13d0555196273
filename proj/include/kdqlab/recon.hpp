#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "kdqlab/interferometer.hpp"
#include "kdqlab/kdq.hpp"
#include "kdqlab/nvmodel.hpp"
#include "kdqlab/trace.hpp"

/// Finite-grid reconstruction of P(W) from sampled characteristic functions.

namespace kdqlab {

/// Complex P(W) on the grid W_m = m·ΔW, m = −⌊N/2⌋ … N−1−⌊N/2⌋.
struct WorkSpectrum {
    std::vector<double> w_values;
    std::vector<cplx> weights;
    double resolution = 0.0;
    /// Index of the W = 0 bin.
    std::size_t zero_index = 0;
};

enum class Taper {
    none,
    /// w_k = ½(1 + cos(πk/(N−1))): one-sided Hann roll-off toward u_max.
    half_hann
};

namespace detail {

inline std::vector<cplx> forward_dft(const std::vector<cplx> &x) {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.fwd(out, x);
    return out;
}

} // namespace detail

/// P_m = (1/N) Σ_k G(u_k) e^{−i u_k W_m}, with ΔW = 2π/(N·Δu).
inline WorkSpectrum transform_to_work(const CharFnTrace &trace, Taper taper = Taper::none) {
    const double du = trace.validated_spacing();
    const std::size_t n = trace.size();
    std::vector<cplx> samples = trace.values;
    if (taper == Taper::half_hann)
        for (std::size_t k = 0; k < n; ++k)
            samples[k] *= 0.5 * (1.0 + std::cos(pi * static_cast<double>(k) / static_cast<double>(n - 1)));

    const std::vector<cplx> raw = detail::forward_dft(samples);
    WorkSpectrum spec;
    spec.resolution = 2.0 * pi / (static_cast<double>(n) * du);
    spec.zero_index = n / 2;
    const double u0 = trace.u_values.front();
    for (std::size_t j = 0; j < n; ++j) {
        const long m = static_cast<long>(j) - static_cast<long>(spec.zero_index);
        const std::size_t bin = static_cast<std::size_t>((m + static_cast<long>(n)) % static_cast<long>(n));
        const double w = static_cast<double>(m) * spec.resolution;
        spec.w_values.push_back(w);
        spec.weights.push_back(raw[bin] * std::exp(cplx{0.0, -u0 * w}) / static_cast<double>(n));
    }
    return spec;
}

/// Σ_m P_m e^{+iuW_m}: the discrete inverse of transform_to_work (untapered).
inline cplx resynthesize(const WorkSpectrum &spec, double u) {
    cplx g{};
    for (std::size_t j = 0; j < spec.weights.size(); ++j) g += spec.weights[j] * std::exp(cplx{0.0, u * spec.w_values[j]});
    return g;
}

struct RecoveredPeak {
    double w_target = 0.0;
    cplx q{};
    std::size_t window = 7;
};

/// Sum of `window` spectrum weights centred on the bin nearest each target.
inline std::vector<RecoveredPeak> integrate_peaks(const WorkSpectrum &spec, const std::vector<double> &expected_w,
                                                  std::size_t window = 7) {
    if (window == 0 || window % 2 == 0)
        throw Error(ErrorKind::InvalidWindow, "window must be odd and at least 1, got " + std::to_string(window));
    const long half = static_cast<long>(window / 2);
    const long lo = -static_cast<long>(spec.zero_index);
    const long hi = static_cast<long>(spec.weights.size()) - 1 - static_cast<long>(spec.zero_index);
    std::vector<RecoveredPeak> out;
    for (double w : expected_w) {
        if (!std::isfinite(w)) throw Error(ErrorKind::NonFinite, "target W is not finite");
        const long centre = std::lround(w / spec.resolution);
        if (centre - half < lo || centre + half > hi)
            throw Error(ErrorKind::WOutOfRange, "window around W=" + std::to_string(w) + " leaves the spectrum");
        cplx sum{};
        for (long m = centre - half; m <= centre + half; ++m)
            sum += spec.weights[static_cast<std::size_t>(m + static_cast<long>(spec.zero_index))];
        out.push_back({w, sum, window});
    }
    return out;
}

/// Normalisation-error model of the readout plus optional shot noise.
struct NoiseModel {
    double amplitude_min = 0.95;
    double amplitude_max = 1.05;
    double offset_bound = 0.05;
    double shot_sigma = 0.0;
    std::uint64_t seed = 0;

    static NoiseModel none() { return {1.0, 1.0, 0.0, 0.0, 0}; }

    void validate() const {
        for (double v : {amplitude_min, amplitude_max, offset_bound, shot_sigma})
            if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "noise parameters must be finite");
        if (!(amplitude_min > 0.0 && amplitude_min <= amplitude_max && amplitude_max < 2.0))
            throw Error(ErrorKind::InvalidParameter, "amplitude range must satisfy 0 < min <= max < 2");
        if (!(offset_bound >= 0.0 && offset_bound < 1.0))
            throw Error(ErrorKind::InvalidParameter, "offset bound must lie in [0,1)");
        if (!(shot_sigma >= 0.0)) throw Error(ErrorKind::InvalidParameter, "shot sigma must be nonnegative");
    }
};

/// Each channel (Re, Im) gets one amplitude factor and one offset per trace, then
/// independent Gaussian shot noise per point.
inline CharFnTrace inject_noise(const CharFnTrace &trace, const NoiseModel &model) {
    model.validate();
    std::mt19937_64 gen(model.seed);
    std::uniform_real_distribution<double> amplitude(model.amplitude_min, model.amplitude_max);
    std::uniform_real_distribution<double> offset(-model.offset_bound, model.offset_bound);
    const double amp_re = amplitude(gen);
    const double amp_im = amplitude(gen);
    const double off_re = offset(gen);
    const double off_im = offset(gen);

    CharFnTrace out = trace;
    std::normal_distribution<double> shot(0.0, model.shot_sigma > 0.0 ? model.shot_sigma : 1.0);
    for (auto &g : out.values) {
        double re = amp_re * g.real() + off_re;
        double im = amp_im * g.imag() + off_im;
        if (model.shot_sigma > 0.0) {
            re += shot(gen);
            im += shot(gen);
        }
        g = {re, im};
    }
    return out;
}

/// χ²_n = (1/n) Σ (x_i − s_i)² / σ_i².
inline double reduced_chi_squared(const std::vector<double> &data, const std::vector<double> &sim,
                                  const std::vector<double> &sigma) {
    if (data.size() != sim.size() || data.size() != sigma.size())
        throw Error(ErrorKind::LengthMismatch, "data, simulation and sigma must have equal lengths");
    if (data.empty()) throw Error(ErrorKind::LengthMismatch, "no data points");
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw Error(ErrorKind::NonPositiveSigma, "sigma must be positive at index " + std::to_string(i));
        const double r = (data[i] - sim[i]) / sigma[i];
        acc += r * r;
    }
    return acc / static_cast<double>(data.size());
}

/// Per-bin standard deviation of P(W) from per-sample deviations of 𝒢(u),
/// √(Σ_k σ_k²)/N. Correlations between bins are ignored.
inline double propagate_sigma(const std::vector<double> &sigma_u) {
    if (sigma_u.empty()) throw Error(ErrorKind::LengthMismatch, "no sigma values");
    double acc = 0.0;
    for (double s : sigma_u) {
        if (!(s >= 0.0)) throw Error(ErrorKind::NonPositiveSigma, "sigma must be nonnegative");
        acc += s * s;
    }
    return std::sqrt(acc) / static_cast<double>(sigma_u.size());
}

/// Pulse-model context for TraceSource::pulse.
struct PulseSourceContext {
    NvParams params;
    PulseReadoutOptions options{};
};

inline CharFnTrace sample_trace(TraceSource source, const WorkProtocol<2> &proto, const InitialState<2> &rho,
                                const UGrid &grid, const std::optional<PulseSourceContext> &pulse = std::nullopt) {
    grid.validate();
    switch (source) {
    case TraceSource::analytic: {
        const QuasiprobTable table = kdq_table(rho, proto);
        return sample_on_grid(grid, source, [&](double u) { return char_function_analytic(table, u); });
    }
    case TraceSource::circuit:
        return sample_on_grid(grid, source, [&](double u) {
            return run_circuit({u, proto, CircuitVariant::g2_full, rho, std::nullopt}).as_complex();
        });
    case TraceSource::pulse: {
        if (!pulse) throw Error(ErrorKind::InvalidParameter, "pulse source needs NV parameters");
        const DriveParams &drive = pulse->params.drive();
        if (frobenius_distance_up_to_phase(propagator_closed_form(drive, proto.time), proto.u_t) > 1e-9)
            throw Error(ErrorKind::InvalidParameter, "protocol is not the driven qubit of the NV parameters");
        return sample_on_grid(grid, source, [&](double u) {
            return pulse_readout(u, proto.time, rho.label, rho.p, pulse->params, pulse->options).as_complex();
        });
    }
    case TraceSource::file: break;
    }
    throw Error(ErrorKind::InvalidParameter, "file traces are loaded, not sampled");
}

struct PeakComparison {
    double w_target = 0.0;
    cplx oracle{};
    cplx recovered{};
    [[nodiscard]] double error() const { return std::abs(recovered - oracle); }
};

struct SelfConsistencyReport {
    std::vector<PeakComparison> peaks;
    double max_error = 0.0;
};

/// Merged oracle atoms and their transition energies, zero-weight atoms included.
inline std::vector<WorkAtom> oracle_atoms(const InitialState<2> &rho, const WorkProtocol<2> &proto) {
    WorkDistributionOptions opts;
    opts.drop_tolerance = -1.0;
    return work_distribution(kdq_table(rho, proto), opts);
}

inline SelfConsistencyReport compare_peaks(const std::vector<WorkAtom> &atoms, const std::vector<RecoveredPeak> &rec) {
    SelfConsistencyReport r;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        r.peaks.push_back({atoms[k].w, atoms[k].weight, rec[k].q});
        r.max_error = std::max(r.max_error, r.peaks.back().error());
    }
    return r;
}

inline std::vector<double> atom_energies(const std::vector<WorkAtom> &atoms) {
    std::vector<double> w;
    for (const auto &a : atoms) w.push_back(a.w);
    return w;
}

/// Oracle q against a noiseless analytic trace pushed through the pipeline.
inline SelfConsistencyReport self_consistency_report(const WorkProtocol<2> &proto, const InitialState<2> &rho,
                                                     const UGrid &grid, std::size_t window = 7) {
    const auto atoms = oracle_atoms(rho, proto);
    const WorkSpectrum spec = transform_to_work(sample_trace(TraceSource::analytic, proto, rho, grid));
    return compare_peaks(atoms, integrate_peaks(spec, atom_energies(atoms), window));
}

/// Largest self-consistency error over a set of protocol times: the pipeline constant τ_pipe.
inline double pipeline_constant(const DriveParams &drive, const InitialState<2> &rho, const std::vector<double> &times,
                                const UGrid &grid, std::size_t window = 7) {
    double tau = 0.0;
    for (double t : times) tau = std::max(tau, self_consistency_report(driven_protocol(drive, t), rho, grid, window).max_error);
    return tau;
}

struct MomentStats {
    double mean = 0.0;
    double stddev = 0.0;
};

inline MomentStats mean_and_std(const std::vector<double> &x) {
    MomentStats s;
    if (x.empty()) return s;
    for (double v : x) s.mean += v;
    s.mean /= static_cast<double>(x.size());
    double acc = 0.0;
    for (double v : x) acc += (v - s.mean) * (v - s.mean);
    s.stddev = x.size() > 1 ? std::sqrt(acc / static_cast<double>(x.size() - 1)) : 0.0;
    return s;
}

struct NoiseStudy {
    std::vector<double> targets;
    /// Noiseless pipeline values per target.
    std::vector<cplx> clean;
    /// recovered[seed][target].
    std::vector<std::vector<cplx>> recovered;
    /// Spread of Re q per target across seeds.
    std::vector<MomentStats> re_stats;
    /// Fraction of spectrum points (Re and Im, all bins, all seeds) within two
    /// ensemble standard deviations of the noiseless spectrum.
    double fraction_within_2sd = 0.0;
    /// Same fraction over the recovered peak values (Re and Im, all targets and seeds).
    double peak_fraction_within_2sd = 0.0;
};

/// Seeds base.seed, base.seed+1, … each get an independent generator.
inline NoiseStudy noise_study(const CharFnTrace &clean_trace, const std::vector<double> &targets,
                              const NoiseModel &base, std::size_t seeds, std::size_t window = 7) {
    base.validate();
    NoiseStudy study;
    study.targets = targets;
    const WorkSpectrum clean_spec = transform_to_work(clean_trace);
    for (const auto &p : integrate_peaks(clean_spec, targets, window)) study.clean.push_back(p.q);

    std::vector<WorkSpectrum> spectra;
    for (std::size_t s = 0; s < seeds; ++s) {
        NoiseModel m = base;
        m.seed = base.seed + s;
        spectra.push_back(transform_to_work(inject_noise(clean_trace, m)));
        std::vector<cplx> row;
        for (const auto &p : integrate_peaks(spectra.back(), targets, window)) row.push_back(p.q);
        study.recovered.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < targets.size(); ++k) {
        std::vector<double> re;
        for (const auto &row : study.recovered) re.push_back(row[k].real());
        study.re_stats.push_back(mean_and_std(re));
    }

    std::size_t peaks_inside = 0, peaks_total = 0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        for (int part = 0; part < 2; ++part) {
            auto pick = [part](cplx z) { return part == 0 ? z.real() : z.imag(); };
            std::vector<double> xs;
            for (const auto &row : study.recovered) xs.push_back(pick(row[k]));
            const double sd = mean_and_std(xs).stddev;
            for (double x : xs) {
                ++peaks_total;
                if (std::abs(x - pick(study.clean[k])) <= 2.0 * sd) ++peaks_inside;
            }
        }
    }
    study.peak_fraction_within_2sd =
        peaks_total ? static_cast<double>(peaks_inside) / static_cast<double>(peaks_total) : 0.0;

    std::size_t inside = 0, total = 0;
    for (std::size_t j = 0; j < clean_spec.weights.size(); ++j) {
        for (int part = 0; part < 2; ++part) {
            auto pick = [part](cplx z) { return part == 0 ? z.real() : z.imag(); };
            std::vector<double> xs;
            for (const auto &sp : spectra) xs.push_back(pick(sp.weights[j]));
            const double sd = mean_and_std(xs).stddev;
            const double ref = pick(clean_spec.weights[j]);
            for (double x : xs) {
                ++total;
                if (std::abs(x - ref) <= 2.0 * sd) ++inside;
            }
        }
    }
    study.fraction_within_2sd = total ? static_cast<double>(inside) / static_cast<double>(total) : 0.0;
    return study;
}

/// Shot noise with the same standard deviation as the uniform offset.
inline double matched_shot_sigma(const NoiseModel &m) { return m.offset_bound / std::sqrt(3.0); }

} // namespace kdqlab
