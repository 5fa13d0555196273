#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "kdqlab/cli.hpp"
#include "kdqlab/io.hpp"

using namespace kdqlab;
using namespace testing_support;

namespace {

const DriveParams drive = DriveParams::dimensionless();

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST(Pipeline, PulseSequenceTraceReconstructsLikeTheAnalyticTrace) {
    const auto proto = driven_protocol(drive, frozen::t_ref);
    const UGrid grid = UGrid::default_for(drive.omega());
    const auto analytic = transform_to_work(sample_trace(TraceSource::analytic, proto, plus_state(), grid));
    const auto pulse =
        transform_to_work(sample_trace(TraceSource::pulse, proto, plus_state(), grid, PulseSourceContext{NvParams(drive)}));
    const auto targets = atom_energies(oracle_atoms(plus_state(), proto));
    const auto pa = integrate_peaks(analytic, targets);
    const auto pp = integrate_peaks(pulse, targets);
    for (std::size_t k = 0; k < targets.size(); ++k) EXPECT_LT(std::abs(pa[k].q - pp[k].q), 1e-6);
}

TEST(Pipeline, TraceFileFeedsTheSameSpectrum) {
    const auto proto = driven_protocol(drive, 2.0);
    const auto trace = sample_trace(TraceSource::circuit, proto, plus_state(), UGrid::default_for(drive.omega()));
    const auto path = fresh_dir("trace_file") / "trace.csv";
    {
        std::ofstream os(path);
        write_trace_csv(os, trace);
    }
    std::ifstream is(path);
    const auto loaded = read_trace_csv(is);
    const auto a = transform_to_work(trace);
    const auto b = transform_to_work(loaded);
    ASSERT_EQ(a.weights.size(), b.weights.size());
    for (std::size_t k = 0; k < a.weights.size(); ++k) EXPECT_EQ(a.weights[k], b.weights[k]);
}

TEST(Pipeline, FigureTablesAgreeWithLibrary) {
    const RunConfig cfg = parse_config("out = " + fresh_dir("fig_consistency").string() + "\nsweep_points = 13\n");
    std::ostringstream log;
    ASSERT_EQ(run_subcommand("figures", cfg, log), exit_code::ok);
    const auto rows = read_csv(std::filesystem::path(cfg.out) / "fig5_kdq.csv");
    ASSERT_EQ(rows.size(), 14u);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double wt = std::stod(rows[r][0]);
        const auto table = kdq_table(plus_state(), driven_protocol(drive, wt));
        for (std::size_t k = 0; k < 4; ++k) {
            EXPECT_DOUBLE_EQ(std::stod(rows[r][1 + 2 * k]), table.entries[k].real());
            EXPECT_DOUBLE_EQ(std::stod(rows[r][2 + 2 * k]), table.entries[k].imag());
        }
    }
    const auto rsur = read_csv(std::filesystem::path(cfg.out) / "fig8_rsur.csv");
    EXPECT_EQ(rsur.front(), (std::vector<std::string>{"p", "mean_work_over_omega", "lhs_norm", "rhs_norm"}));
    for (std::size_t r = 1; r < rsur.size(); ++r) EXPECT_GE(std::stod(rsur[r][2]) - std::stod(rsur[r][3]), -1e-10);
}

TEST(Pipeline, NoisySpectrumRunProducesRecoveredPeaksNearClean) {
    const std::string base = "omega_t_list = 7pi/6\nwindow = 7\n";
    const RunConfig clean = parse_config("out = " + fresh_dir("clean").string() + "\n" + base);
    const RunConfig noisy = parse_config("out = " + fresh_dir("noisy").string() + "\n" + base + "noise = on\nseed = 5\n");
    std::ostringstream log;
    ASSERT_EQ(run_subcommand("spectrum", clean, log), exit_code::ok);
    ASSERT_EQ(run_subcommand("spectrum", noisy, log), exit_code::ok);
    const auto a = read_csv(std::filesystem::path(clean.out) / "peaks_t00.csv");
    const auto b = read_csv(std::filesystem::path(noisy.out) / "peaks_t00.csv");
    ASSERT_EQ(a.size(), 4u);
    ASSERT_EQ(b.size(), 4u);
    for (std::size_t r = 1; r < a.size(); ++r) {
        const double d = std::stod(a[r][1]) - std::stod(b[r][1]);
        EXPECT_GT(std::abs(d), 0.0);
        EXPECT_LT(std::abs(d), 0.1);
    }
}
