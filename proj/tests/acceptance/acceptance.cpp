#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "kdqlab/cli.hpp"

using namespace kdqlab;
using namespace testing_support;

namespace {

const DriveParams drive = DriveParams::dimensionless();

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

CircuitSpec circuit_for(double u, double wt, const InitialState<2> &rho, CircuitVariant variant) {
    return {u, driven_protocol(drive, wt), variant, rho, drive};
}

Outcome oracle_vs_circuit() {
    const auto start = std::chrono::steady_clock::now();
    const UGrid grid = UGrid::default_for(drive.omega());
    double worst = 0.0;
    for (double wt : lattice()) {
        const auto proto = driven_protocol(drive, wt);
        const auto table = kdq_table(plus_state(), proto);
        for (double u : grid.points()) {
            const cplx circuit = run_circuit({u, proto, CircuitVariant::g2_full, plus_state(), std::nullopt}).as_complex();
            worst = std::max(worst, std::abs(circuit - char_function_analytic(table, u)));
        }
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-12 && elapsed < 1.0, fmt("max |circuit - analytic| = %.3e, runtime %.3f s", worst, elapsed)};
}

Outcome gB_equivalence() {
    double worst = 0.0;
    for (double wt : lattice())
        for (double u : UGrid::default_for(drive.omega()).points()) {
            const cplx full = run_circuit(circuit_for(u, wt, plus_state(), CircuitVariant::g2_full)).as_complex();
            const cplx simple = run_circuit(circuit_for(u, wt, plus_state(), CircuitVariant::gB_simplified)).as_complex();
            worst = std::max(worst, std::abs(full - simple));
        }
    return {worst <= 1e-12, fmt("max |g2 - gB| = %.3e", worst)};
}

Outcome mean_work_closed_form() {
    const auto dephased = make_custom_state(Mat2(0.5 * pauli::id));
    double kd_worst = 0.0, tpm_worst = 0.0;
    for (double wt : lattice()) {
        const auto proto = driven_protocol(drive, wt);
        const double s = std::sin(drive.omega_rabi() * wt / 2.0);
        const double closed = -drive.delta() * drive.omega_rabi() / drive.omega() * s * s;
        kd_worst = std::max(kd_worst, std::abs(work_moments(kdq_table(plus_state(), proto)).mean - closed));
        tpm_worst = std::max(tpm_worst, std::abs(work_moments(tpm_table(dephased, proto)).mean));
    }
    return {kd_worst <= 1e-12 && tpm_worst <= 1e-12,
            fmt("KD mean vs closed form %.3e, TPM mean for I/2 %.3e", kd_worst, tpm_worst)};
}

Outcome pipeline_self_consistency() {
    const UGrid coarse = UGrid::default_for(drive.omega());
    const UGrid refined{4 * coarse.n, 2.0 * coarse.u_max};
    const auto times = lattice();
    const double tau = pipeline_constant(drive, plus_state(), times, coarse);
    const double tau_refined = pipeline_constant(drive, plus_state(), times, refined);

    bool within = true;
    for (double wt : times)
        for (const auto &peak : self_consistency_report(driven_protocol(drive, wt), plus_state(), coarse).peaks)
            within = within && peak.error() <= tau;
    const double ratio = tau_refined > 0.0 ? tau / tau_refined : INFINITY;
    return {within && ratio >= 2.0,
            fmt("tau_pipe = %.3e at N=%zu, %.3e at N=%zu; shrink factor %.3f (needs >= 2)", tau, coarse.n, tau_refined,
                refined.n, ratio)};
}

Outcome moment_identities() {
    double v_r = 0.0, v_i_literal = 0.0, v_i_derived = 0.0, op1 = 0.0, op2 = 0.0, opvar = 0.0, third_gap = 0.0;
    std::mt19937_64 g(5);
    std::vector<std::pair<InitialState<2>, WorkProtocol<2>>> cases;
    for (double wt : lattice()) cases.emplace_back(plus_state(), driven_protocol(drive, wt));
    for (int k = 0; k < 100; ++k) cases.emplace_back(random_state<2>(g), random_protocol<2>(g));

    for (const auto &[rho, proto] : cases) {
        const auto m = work_moments(kdq_table(rho, proto));
        const auto c = correlation_report(rho, proto);
        const auto w = work_operator_report(rho, proto);
        const double v_r_expected = c.var_h0 + c.var_ht - 2.0 * c.covariance;
        v_r = std::max(v_r, std::abs(m.v_r() - v_r_expected));
        v_i_literal = std::max(v_i_literal, std::abs(m.v_i() - c.commutator_expect));
        v_i_derived = std::max(v_i_derived, std::abs(m.v_i() + c.commutator_expect));
        op1 = std::max(op1, std::abs(w.first - m.mean.real()));
        op2 = std::max(op2, std::abs(w.second - m.second_moment.real()));
        opvar = std::max(opvar, std::abs(w.dispersion - m.v_r()));
    }
    for (double wt : lattice()) {
        const auto proto = driven_protocol(drive, wt);
        const double gap = std::abs(work_operator_moment(plus_state(), proto, 3) -
                                    kd_work_moment(kdq_table(plus_state(), proto), 3).real());
        third_gap = std::max(third_gap, gap);
    }
    const double omega3 = std::pow(drive.omega(), 3);
    const bool pass = v_r <= 1e-12 && v_i_literal <= 1e-12 && op1 <= 1e-12 && op2 <= 1e-12 && opvar <= 1e-12 &&
                      third_gap > 1e-3 * omega3;
    return {pass, fmt("V_R %.2e; V_I vs +Tr(i rho[H0,Ht]) %.2e (vs minus sign %.2e); work operator %.2e/%.2e/%.2e; "
                      "third-moment gap %.3e omega^3",
                      v_r, v_i_literal, v_i_derived, op1, op2, opvar, third_gap / omega3)};
}

Outcome correlation_zeros() {
    double worst = 0.0;
    for (double wt : {0.0, pi, 2.0 * pi})
        worst = std::max(worst, std::abs(correlation_report(plus_state(), driven_protocol(drive, wt)).corr.imag()));
    const double commutator_at_pi =
        (commutator(h_of_t(drive, 0.0).matrix(), driven_protocol(drive, pi).ht_heisenberg())).frobenius_norm();
    return {worst <= 1e-12 && commutator_at_pi > 1e-6,
            fmt("max |Im corr| = %.3e; ||[H0, Ht]|| at pi = %.3f", worst, commutator_at_pi)};
}

Outcome rsur() {
    std::mt19937_64 g(7);
    double worst_gap = INFINITY, worst_det = INFINITY;
    for (int k = 0; k < 1000; ++k) {
        const auto rho = random_state<2>(g);
        const auto proto = random_protocol<2>(g);
        const auto s = rsur_sides(rho, proto);
        worst_gap = std::min(worst_gap, (s.lhs - s.rhs) / s.scale);
        const Mat2 c = correlation_matrix(rho, proto);
        const double norm2 = std::max(c.frobenius_norm() * c.frobenius_norm(), 1e-300);
        worst_det = std::min(worst_det, (c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0)).real() / norm2);
    }
    const auto proto = driven_protocol(drive, 11.0 * pi / 15.0);
    double saturation = 0.0;
    for (double p : {0.0, 1.0}) {
        const auto s = rsur_sides(make_initial_state(drive, StateLabel::mixture, p), proto);
        saturation = std::max(saturation, std::abs(s.lhs - s.rhs) / s.scale);
    }
    return {worst_gap >= -1e-10 && saturation <= 1e-9 && worst_det >= -1e-12,
            fmt("min (lhs-rhs)/scale %.3e; saturation at p=0,1 %.3e; min det/norm^2 %.3e", worst_gap, saturation,
                worst_det)};
}

Outcome commuting_limit() {
    std::mt19937_64 g(11);
    double worst = 0.0, most_negative = INFINITY, largest_imag = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto proto = random_protocol<2>(g);
        const auto rho = random_diagonal_state<2>(g, proto.h0);
        const auto kd = kdq_table(rho, proto);
        const auto tpm = tpm_table(rho, proto);
        for (std::size_t j = 0; j < kd.entries.size(); ++j) {
            worst = std::max(worst, std::abs(kd.entries[j] - tpm.entries[j]));
            most_negative = std::min(most_negative, kd.entries[j].real());
            largest_imag = std::max(largest_imag, std::abs(kd.entries[j].imag()));
        }
    }
    return {worst <= 1e-12 && most_negative >= -1e-12 && largest_imag <= 1e-12,
            fmt("max |KD - TPM| %.3e; min entry %.3e; max |Im| %.3e", worst, most_negative, largest_imag)};
}

Outcome pulse_fidelity() {
    const NvParams nv(drive);
    double readout = 0.0;
    std::size_t points = 0;
    for (double wt : lattice()) {
        const auto proto = driven_protocol(drive, wt);
        for (double u : UGrid::default_for(drive.omega()).points()) {
            const cplx ideal = run_circuit({u, proto, CircuitVariant::g2_full, plus_state(), std::nullopt}).as_complex();
            readout = std::max(readout, std::abs(pulse_readout(u, wt, StateLabel::plus, 1.0, nv).as_complex() - ideal));
            ++points;
        }
    }
    double g1 = 0.0, gB = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const double u = 4.0 * pi / drive.omega() * k / 400.0;
        g1 = std::max(g1, verify_g1_decomposition(u, nv));
        gB = std::max(gB, verify_gB_decomposition(u, nv).full_distance);
    }
    double residual = 0.0, period_offset = 0.0;
    for (const auto &pulse : compile_sequence(3.0 / drive.omega(), frozen::t_ref, nv)) {
        if (pulse.target != PulseTarget::nuclear) continue;
        const double periods = pulse.duration / nv.hyperfine_period();
        period_offset = std::max(period_offset, std::abs(periods / 2.0 - std::round(periods / 2.0)));
        residual = std::max(residual, selective_pulse_residual(pulse, nv));
    }
    const bool pass = readout <= 1e-6 && g1 <= 1e-10 && gB <= 1e-10 && residual <= 1e-12 && period_offset <= 1e-12;
    return {pass, fmt("pulse vs circuit %.3e over %zu points; G1 %.3e, GB %.3e; selective residual %.3e", readout,
                      points, g1, gB, residual)};
}

Outcome noise_ensemble() {
    const auto proto = driven_protocol(drive, frozen::t_ref);
    const auto trace = sample_trace(TraceSource::analytic, proto, plus_state(), UGrid::default_for(drive.omega()));
    const auto targets = atom_energies(oracle_atoms(plus_state(), proto));
    const NoiseStudy spread = noise_study(trace, targets, NoiseModel{}, 200);
    NoiseModel shot;
    shot.shot_sigma = matched_shot_sigma(shot);
    const NoiseStudy matched = noise_study(trace, targets, shot, 200);
    const double sd_minus = spread.re_stats[0].stddev, sd_zero = spread.re_stats[1].stddev,
                 sd_plus = spread.re_stats[2].stddev;
    const bool pass = sd_zero > sd_minus && sd_zero > sd_plus && matched.peak_fraction_within_2sd >= 0.85 &&
                      matched.fraction_within_2sd >= 0.85;
    return {pass, fmt("sd Re q at W=-w,0,+w: %.4f, %.4f, %.4f; within 2 sd: peaks %.3f, spectrum %.3f", sd_minus,
                      sd_zero, sd_plus, matched.peak_fraction_within_2sd, matched.fraction_within_2sd)};
}

Outcome chi_squared() {
    const double identical = reduced_chi_squared({1.0, -2.0, 0.5}, {1.0, -2.0, 0.5}, {0.1, 0.2, 0.3});
    const double one_sigma = reduced_chi_squared({1.1, 2.2, 3.3}, {1.0, 2.0, 3.0}, {0.1, 0.2, 0.3});
    const double hand = reduced_chi_squared({1.0, 2.0}, {0.0, 0.0}, {1.0, 2.0});
    return {identical == 0.0 && std::abs(one_sigma - 1.0) <= 1e-15 && hand == 1.0,
            fmt("data=sim %.17g; one sigma %.17g; hand case %.17g", identical, one_sigma, hand)};
}

Outcome figure_presets() {
    const auto start = std::chrono::steady_clock::now();
    const std::filesystem::path golden = KDQLAB_GOLDEN_DIR;
    const RunConfig cfg = parse_config("out = " + fresh_dir("acceptance_figures").string() + "\n");
    std::ostringstream log;
    if (run_subcommand("figures", cfg, log) != exit_code::ok) return {false, "figures subcommand failed"};
    double worst = 0.0;
    std::size_t files = 0;
    for (const auto &entry : std::filesystem::directory_iterator(golden)) {
        if (entry.path().extension() != ".csv") continue;
        const auto produced = std::filesystem::path(cfg.out) / entry.path().filename();
        if (!std::filesystem::exists(produced)) return {false, "missing " + produced.filename().string()};
        std::istringstream a(slurp(produced)), b(slurp(entry.path()));
        std::string la, lb;
        bool header = true;
        while (true) {
            const bool more_a = static_cast<bool>(std::getline(a, la));
            const bool more_b = static_cast<bool>(std::getline(b, lb));
            if (more_a != more_b) return {false, "row count differs in " + entry.path().filename().string()};
            if (!more_a) break;
            if (header) {
                if (la != lb) return {false, "header differs in " + entry.path().filename().string()};
                header = false;
                continue;
            }
            std::stringstream ca(la), cb(lb);
            for (std::string x, y; std::getline(ca, x, ',') && std::getline(cb, y, ',');) {
                const double vx = std::stod(x), vy = std::stod(y);
                worst = std::max(worst, std::abs(vx - vy) / (1.0 + std::abs(vy)));
            }
        }
        ++files;
    }
    return {files == 8 && worst <= 1e-10,
            fmt("%zu golden files, max relative difference %.3e, %.2f s", files, worst, seconds_since(start))};
}

struct Criterion {
    const char *name;
    std::function<Outcome()> run;
};

const Criterion criteria[] = {
    {"oracle-circuit equality", oracle_vs_circuit},
    {"GB circuit equivalence", gB_equivalence},
    {"mean-work closed form", mean_work_closed_form},
    {"pipeline self-consistency", pipeline_self_consistency},
    {"moment identities", moment_identities},
    {"correlation zeros", correlation_zeros},
    {"uncertainty relation", rsur},
    {"commuting limit", commuting_limit},
    {"pulse-model fidelity", pulse_fidelity},
    {"noise study", noise_ensemble},
    {"reduced chi-squared", chi_squared},
    {"figure presets", figure_presets},
};

bool report(int number) {
    const Criterion &c = criteria[number - 1];
    Outcome o;
    try {
        o = c.run();
    } catch (const std::exception &e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s %s: %s\n", number, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    return o.pass;
}

} // namespace

int main(int argc, char **argv) {
    constexpr int count = static_cast<int>(std::size(criteria));
    if (argc > 2) {
        std::fprintf(stderr, "usage: %s [criterion 1-%d]\n", argv[0], count);
        return 2;
    }
    if (argc == 2) {
        const int n = std::atoi(argv[1]);
        if (n < 1 || n > count) {
            std::fprintf(stderr, "criterion must be 1-%d\n", count);
            return 2;
        }
        return report(n) ? 0 : 1;
    }
    int failed = 0;
    for (int n = 1; n <= count; ++n) failed += report(n) ? 0 : 1;
    return failed == 0 ? 0 : 1;
}
