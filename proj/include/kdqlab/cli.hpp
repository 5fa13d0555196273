#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "kdqlab/config.hpp"
#include "kdqlab/interferometer.hpp"
#include "kdqlab/io.hpp"
#include "kdqlab/kdq.hpp"
#include "kdqlab/nvmodel.hpp"
#include "kdqlab/recon.hpp"

namespace kdqlab {

inline constexpr const char *tool_version = "1.0.0";

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config_error = 2;
inline constexpr int invariant_violation = 3;
} // namespace exit_code

inline int exit_code_for(const Error &e) {
    switch (e.kind()) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError: return exit_code::config_error;
    case ErrorKind::InvariantViolation: return exit_code::invariant_violation;
    default: return exit_code::failure;
    }
}

/// Output directory plus the list of files written by one run.
class RunOutput {
  public:
    explicit RunOutput(const std::filesystem::path &dir) : dir_(dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_))
            throw Error(ErrorKind::Io, "cannot create output directory " + dir_.string());
    }

    void write(const std::string &name, const std::string &content) {
        const auto path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        os << content;
        if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
        files_.push_back(name);
    }

    [[nodiscard]] const std::vector<std::string> &files() const { return files_; }
    [[nodiscard]] const std::filesystem::path &dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

namespace detail {

inline std::string indexed(const std::string &stem, std::size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_t%02zu.csv", k);
    return stem + buf;
}

inline void require_invariant(bool ok, const std::string &what) {
    if (!ok) throw Error(ErrorKind::InvariantViolation, what);
}

inline CharFnTrace config_trace(const RunConfig &cfg, const WorkProtocol<2> &proto, std::size_t k) {
    std::optional<PulseSourceContext> pulse;
    if (cfg.source == TraceSource::pulse) pulse = PulseSourceContext{cfg.nv_params()};
    CharFnTrace trace = sample_trace(cfg.source, proto, cfg.initial_state(), cfg.grid(), pulse);
    if (cfg.noise) {
        NoiseModel m = cfg.noise_model;
        m.seed = cfg.seed + k;
        trace = inject_noise(trace, m);
    }
    return trace;
}

inline void check_table(const QuasiprobTable &table) {
    require_invariant(std::abs(table.total() - cplx{1.0, 0.0}) <= 1e-12, "quasiprobabilities do not sum to 1");
}

inline std::string table_rows(double t, const QuasiprobTable &table) {
    std::string s;
    for (std::size_t i = 0; i < table.initial_levels(); ++i)
        for (std::size_t f = 0; f < table.final_levels(); ++f)
            s += (CsvRow{} << t << i << f << table.work(i, f) << table.q(i, f).real() << table.q(i, f).imag()).str();
    return s;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    return v;
}

using Runner = std::function<void(const RunConfig &, RunOutput &, std::ostream &)>;

inline void run_charfn(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    const auto times = cfg.times();
    std::string index = "k,t,omega_t\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto trace = config_trace(cfg, driven_protocol(cfg.drive(), times[k]), k);
        std::ostringstream os;
        write_trace_csv(os, trace);
        out.write(indexed("charfn", k), os.str());
        index += (CsvRow{} << k << times[k] << cfg.omega_t_list[k]).str();
    }
    out.write("times.csv", index);
    log << "charfn: " << times.size() << " traces of " << cfg.grid_n << " points (" << to_string(cfg.source) << ")\n";
}

inline void run_spectrum(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    const auto times = cfg.times();
    std::string index = "k,t,omega_t\n";
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto proto = driven_protocol(cfg.drive(), times[k]);
        const auto spec = transform_to_work(config_trace(cfg, proto, k), cfg.taper);
        const auto atoms = oracle_atoms(cfg.initial_state(), proto);
        const auto peaks = integrate_peaks(spec, atom_energies(atoms), cfg.window);
        worst = std::max(worst, compare_peaks(atoms, peaks).max_error);
        std::ostringstream s1, s2;
        write_spectrum_csv(s1, spec);
        write_peaks_csv(s2, peaks);
        out.write(indexed("spectrum", k), s1.str());
        out.write(indexed("peaks", k), s2.str());
        index += (CsvRow{} << k << times[k] << cfg.omega_t_list[k]).str();
    }
    out.write("times.csv", index);
    log << "spectrum: max |q_recovered - q_exact| = " << format_double(worst) << "\n";
}

inline void run_kdq(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    std::string kd = "t,i,f,w,re_q,im_q\n", tpm = kd;
    for (double t : cfg.times()) {
        const auto proto = driven_protocol(cfg.drive(), t);
        const auto table = kdq_table(cfg.initial_state(), proto);
        const auto ttable = tpm_table(cfg.initial_state(), proto);
        check_table(table);
        check_table(ttable);
        kd += table_rows(t, table);
        tpm += table_rows(t, ttable);
    }
    out.write("kdq_table.csv", kd);
    out.write("tpm_table.csv", tpm);
    log << "kdq: " << cfg.times().size() << " tables\n";
}

inline void run_moments(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    std::string s = "t,scheme,re_mean,im_mean,re_second,im_second,re_var,im_var\n";
    for (double t : cfg.times()) {
        const auto proto = driven_protocol(cfg.drive(), t);
        const std::pair<const char *, QuasiprobTable> tables[] = {{"kdq", kdq_table(cfg.initial_state(), proto)},
                                                                  {"tpm", tpm_table(cfg.initial_state(), proto)}};
        for (const auto &[name, table] : tables) {
            const auto m = work_moments(table);
            s += (CsvRow{} << t << name << m.mean.real() << m.mean.imag() << m.second_moment.real()
                           << m.second_moment.imag() << m.variance.real() << m.variance.imag())
                     .str();
        }
    }
    out.write("moments.csv", s);
    log << "moments: " << cfg.times().size() << " times\n";
}

inline void run_correlation(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    std::string s = "t,re_corr,im_corr,covariance,commutator,var_h0,var_ht\n";
    for (double t : cfg.times()) {
        const auto c = correlation_report(cfg.initial_state(), driven_protocol(cfg.drive(), t));
        s += (CsvRow{} << t << c.corr.real() << c.corr.imag() << c.covariance << c.commutator_expect << c.var_h0
                       << c.var_ht)
                 .str();
    }
    out.write("correlation.csv", s);
    log << "correlation: " << cfg.times().size() << " times\n";
}

inline void run_rsur(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    const double t = cfg.rsur_omega_t / cfg.omega_rabi;
    const auto proto = driven_protocol(cfg.drive(), t);
    std::string s = "p,mean_work,lhs,rhs,gap,scale\n";
    double min_gap = 1e300;
    for (double p : cfg.p_list) {
        const auto rho = make_initial_state(cfg.drive(), StateLabel::mixture, p);
        const auto sides = rsur_sides(rho, proto);
        const double mean = work_moments(kdq_table(rho, proto)).mean.real();
        require_invariant(sides.lhs >= sides.rhs - 1e-10 * sides.scale, "uncertainty relation violated");
        min_gap = std::min(min_gap, sides.lhs - sides.rhs);
        s += (CsvRow{} << p << mean << sides.lhs << sides.rhs << sides.lhs - sides.rhs << sides.scale).str();
    }
    out.write("rsur.csv", s);
    log << "rsur: Omega t = " << format_double(cfg.rsur_omega_t) << ", min(lhs - rhs) = " << format_double(min_gap)
        << "\n";
}

inline void run_tpm_compare(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    const auto dephased = make_initial_state(cfg.drive(), StateLabel::mixture, 0.5);
    std::string s = "t,kd_mean,tpm_mean,coherence_work,kd_minus_tpm,dephased_kd_mean,mixture_trace_error\n";
    double worst = 0.0;
    for (double t : cfg.times()) {
        const auto proto = driven_protocol(cfg.drive(), t);
        const double kd = work_moments(kdq_table(cfg.initial_state(), proto)).mean.real();
        const double tpm = work_moments(tpm_table(cfg.initial_state(), proto)).mean.real();
        const double coh = coherence_work(cfg.initial_state(), proto);
        const auto dtable = kdq_table(dephased, proto);
        const auto mix = tpm_via_mixture(proto, cfg.grid());
        double err = 0.0;
        for (std::size_t k = 0; k < mix.size(); ++k)
            err = std::max(err, std::abs(mix.values[k] - char_function_analytic(dtable, mix.u_values[k])));
        worst = std::max(worst, err);
        require_invariant(err <= 1e-12, "mixture circuit trace differs from the dephased characteristic function");
        s += (CsvRow{} << t << kd << tpm << coh << kd - tpm << work_moments(dtable).mean.real() << err).str();
    }
    out.write("tpm_compare.csv", s);
    log << "tpm-compare: max mixture trace error = " << format_double(worst) << "\n";
}

inline void run_nv_verify(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    const NvParams nv = cfg.nv_params();
    for (const auto &w : nv.warnings()) log << "warning: " << w << "\n";
    const double omega = cfg.drive().omega();

    std::string dec = "u,g1_distance,gB_distance,gB_reduced_distance,swapped_theta_distance\n";
    double g1 = 0.0, gb = 0.0, red = 0.0;
    for (double u : linspace(0.0, 4.0 * pi / omega, cfg.sweep_points)) {
        const double d1 = verify_g1_decomposition(u, nv);
        const GbCheck b = verify_gB_decomposition(u, nv);
        const double swapped = gB_decomposition_distance(u, nv, nv.theta());
        g1 = std::max(g1, d1);
        gb = std::max(gb, b.full_distance);
        red = std::max(red, b.reduced_state_distance);
        dec += (CsvRow{} << u << d1 << b.full_distance << b.reduced_state_distance << swapped).str();
    }
    out.write("nv_decomposition.csv", dec);

    std::string ro = "t,u,re_ideal,im_ideal,re_pulse,im_pulse,error\n";
    double worst = 0.0;
    const auto rho = cfg.initial_state();
    for (double t : cfg.times()) {
        const auto proto = driven_protocol(cfg.drive(), t);
        for (double u : cfg.grid().points()) {
            const cplx ideal = run_circuit({u, proto, CircuitVariant::g2_full, rho, std::nullopt}).as_complex();
            const cplx pulse = pulse_readout(u, t, rho.label, rho.p, nv).as_complex();
            const double err = std::abs(pulse - ideal);
            worst = std::max(worst, err);
            ro += (CsvRow{} << t << u << ideal.real() << ideal.imag() << pulse.real() << pulse.imag() << err).str();
        }
    }
    out.write("nv_readout.csv", ro);

    const auto seq = compile_sequence(3.0 / omega, 7.0 * pi / 6.0 / cfg.omega_rabi, nv);
    out.write("pulse_sequence.csv", pulse_table(seq));
    const double residual = selective_pulse_residual(nuclear_selective_pulse(0.0, pi / 2.0, nv), nv);

    log << "nv-verify: max G1 distance " << format_double(g1) << ", max GB distance " << format_double(gb)
        << ", max reduced-state distance " << format_double(red) << "\n";
    log << "nv-verify: max pulse/circuit readout error " << format_double(worst) << ", selective pulse residual "
        << format_double(residual) << "\n";
    require_invariant(g1 <= 1e-10 && gb <= 1e-10, "gate decomposition distance exceeds 1e-10");
    require_invariant(red <= 1e-12, "dropping electron-only gates changed the nuclear state");
    require_invariant(worst <= 1e-6, "pulse model departs from the ideal circuit by more than 1e-6");
}

inline void run_noise_study(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    std::string rec = "t,seed,w_target,re_q,im_q\n";
    std::string sum = "t,w_target,clean_re,clean_im,mean_re,sd_re,fraction_within_2sd,peak_fraction_within_2sd\n";
    const auto rho = cfg.initial_state();
    for (double t : cfg.times()) {
        const auto proto = driven_protocol(cfg.drive(), t);
        const auto atoms = oracle_atoms(rho, proto);
        const auto targets = atom_energies(atoms);
        const auto clean = sample_trace(TraceSource::analytic, proto, rho, cfg.grid());
        const NoiseStudy study = noise_study(clean, targets, cfg.noise_model, cfg.noise_seeds, cfg.window);
        for (std::size_t s = 0; s < study.recovered.size(); ++s)
            for (std::size_t k = 0; k < targets.size(); ++k)
                rec += (CsvRow{} << t << std::to_string(cfg.noise_model.seed + s) << targets[k]
                                 << study.recovered[s][k].real() << study.recovered[s][k].imag())
                           .str();
        for (std::size_t k = 0; k < targets.size(); ++k)
            sum += (CsvRow{} << t << targets[k] << study.clean[k].real() << study.clean[k].imag()
                             << study.re_stats[k].mean << study.re_stats[k].stddev << study.fraction_within_2sd
                             << study.peak_fraction_within_2sd)
                       .str();
    }
    out.write("noise_recovered.csv", rec);
    out.write("noise_summary.csv", sum);
    log << "noise-study: " << cfg.noise_seeds << " seeds per time\n";
}

inline void run_figures(const RunConfig &cfg, RunOutput &out, std::ostream &log) {
    const DriveParams drive = cfg.drive();
    const double omega = drive.omega();
    const auto rho = cfg.initial_state();

    {
        const auto proto = driven_protocol(drive, 7.0 * pi / 6.0 / drive.omega_rabi());
        const auto trace = sample_trace(TraceSource::analytic, proto, rho, cfg.grid());
        std::ostringstream s1, s2;
        write_trace_csv(s1, trace);
        write_spectrum_csv(s2, transform_to_work(trace, cfg.taper));
        out.write("fig3_charfn.csv", s1.str());
        out.write("fig3_spectrum.csv", s2.str());
    }
    {
        std::string s = "omega_t,w,re_p,im_p\n";
        std::string r = "omega_t,w_target,re_exact,im_exact,re_recovered,im_recovered\n";
        for (double wt : cfg.omega_t_list) {
            const auto proto = driven_protocol(drive, wt / drive.omega_rabi());
            const auto spec = transform_to_work(sample_trace(TraceSource::analytic, proto, rho, cfg.grid()), cfg.taper);
            for (std::size_t j = 0; j < spec.weights.size(); ++j)
                s += (CsvRow{} << wt << spec.w_values[j] << spec.weights[j].real() << spec.weights[j].imag()).str();
            const auto atoms = oracle_atoms(rho, proto);
            const auto rep = compare_peaks(atoms, integrate_peaks(spec, atom_energies(atoms), cfg.window));
            for (const auto &pk : rep.peaks)
                r += (CsvRow{} << wt << pk.w_target << pk.oracle.real() << pk.oracle.imag() << pk.recovered.real()
                               << pk.recovered.imag())
                         .str();
        }
        out.write("fig4_spectra.csv", s);
        out.write("fig5_recovered.csv", r);
    }
    std::string f5 = "omega_t,re_q00,im_q00,re_q01,im_q01,re_q10,im_q10,re_q11,im_q11\n";
    std::string f6 = "omega_t,re_corr,im_corr\n";
    std::string f7 = "omega_t,kd_mean,tpm_mean,re_kd_second,im_kd_second,tpm_second,re_kd_var,im_kd_var,tpm_var\n";
    for (double wt : linspace(0.0, 2.0 * pi, cfg.sweep_points)) {
        const auto proto = driven_protocol(drive, wt / drive.omega_rabi());
        const auto table = kdq_table(rho, proto);
        CsvRow row;
        row << wt;
        for (const auto &q : table.entries) row << q.real() << q.imag();
        f5 += row.str();
        const auto c = correlation_report(rho, proto);
        f6 += (CsvRow{} << wt << c.corr.real() << c.corr.imag()).str();
        const auto kd = work_moments(table);
        const auto tp = work_moments(tpm_table(rho, proto));
        f7 += (CsvRow{} << wt << kd.mean.real() << tp.mean.real() << kd.second_moment.real() << kd.second_moment.imag()
                        << tp.second_moment.real() << kd.variance.real() << kd.variance.imag() << tp.variance.real())
                  .str();
    }
    out.write("fig5_kdq.csv", f5);
    out.write("fig6_correlation.csv", f6);
    out.write("fig7_moments.csv", f7);

    const auto proto8 = driven_protocol(drive, cfg.rsur_omega_t / drive.omega_rabi());
    const double e4 = std::pow(omega / 2.0, 4);
    std::string f8 = "p,mean_work_over_omega,lhs_norm,rhs_norm\n";
    for (double p : linspace(0.0, 1.0, cfg.sweep_points)) {
        const auto r = make_initial_state(drive, StateLabel::mixture, p);
        const auto sides = rsur_sides(r, proto8);
        f8 += (CsvRow{} << p << work_moments(kdq_table(r, proto8)).mean.real() / omega << sides.lhs / e4
                        << sides.rhs / e4)
                  .str();
    }
    out.write("fig8_rsur.csv", f8);
    log << "figures: wrote " << out.files().size() << " files\n";
}

inline const std::map<std::string, Runner> &runners() {
    static const std::map<std::string, Runner> table = {
        {"charfn", run_charfn},           {"spectrum", run_spectrum},       {"kdq", run_kdq},
        {"moments", run_moments},         {"correlation", run_correlation}, {"rsur", run_rsur},
        {"tpm-compare", run_tpm_compare}, {"nv-verify", run_nv_verify},     {"noise-study", run_noise_study},
        {"figures", run_figures},
    };
    return table;
}

} // namespace detail

inline std::vector<std::string> subcommand_names() {
    std::vector<std::string> names;
    for (const auto &[name, fn] : detail::runners()) names.push_back(name);
    return names;
}

/// Runs one subcommand, writing its CSV files and `<name>.manifest.json` under cfg.out.
/// Module errors propagate as exceptions; use exit_code_for to map them.
inline int run_subcommand(const std::string &name, const RunConfig &cfg, std::ostream &log) {
    const auto it = detail::runners().find(name);
    if (it == detail::runners().end()) throw Error(ErrorKind::ValidationError, "unknown subcommand '" + name + "'");

    const auto start = std::chrono::steady_clock::now();
    RunOutput out(cfg.out);
    it->second(cfg, out, log);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    nlohmann::ordered_json manifest;
    manifest["tool"] = "kdqlab";
    manifest["version"] = tool_version;
    manifest["subcommand"] = name;
    manifest["seed"] = cfg.seed;
    manifest["config"] = config_to_text(cfg);
    manifest["files"] = out.files();
    manifest["warnings"] = cfg.nv_params().warnings();
    manifest["wall_time_s"] = wall;
    manifest["compiler"] = __VERSION__;
    manifest["libraries"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
    };
    const std::string manifest_name = name + ".manifest.json";
    std::ofstream os(out.dir() / manifest_name);
    os << manifest.dump(2) << "\n";
    if (!os) throw Error(ErrorKind::Io, "cannot write manifest");
    return exit_code::ok;
}

} // namespace kdqlab
