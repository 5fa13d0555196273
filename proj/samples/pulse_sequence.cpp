// Prints the NV pulse list for one (u, t) point and compares its readout with the ideal circuit.
#include <cstdio>
#include <optional>

#include "kdqlab/kdqlab.hpp"

int main() {
    using namespace kdqlab;
    const DriveParams drive = DriveParams::dimensionless();
    const NvParams nv(drive);
    const double u = 3.0 / drive.omega();
    const double t = 7.0 * pi / 6.0;

    std::printf("%s\n", pulse_table(compile_sequence(u, t, nv)).c_str());

    const auto rho = make_initial_state(drive, StateLabel::plus);
    const AncillaReadout ideal = run_circuit({u, driven_protocol(drive, t), CircuitVariant::g2_full, rho, std::nullopt});
    const AncillaReadout pulse = pulse_readout(u, t, StateLabel::plus, 1.0, nv);
    std::printf("ideal circuit: (%+.12f, %+.12f)\n", ideal.sx, ideal.sy);
    std::printf("pulse model:   (%+.12f, %+.12f)\n", pulse.sx, pulse.sy);
    return 0;
}
