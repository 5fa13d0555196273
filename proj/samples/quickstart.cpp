// KDQ table, moments and correlation function of the driven qubit at Ωt = 7π/6.
#include <cstdio>

#include "kdqlab/kdqlab.hpp"

int main() {
    using namespace kdqlab;
    const DriveParams drive = DriveParams::dimensionless();
    const auto proto = driven_protocol(drive, 7.0 * pi / 6.0);
    const auto rho = make_initial_state(drive, StateLabel::plus);

    const QuasiprobTable table = kdq_table(rho, proto);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t f = 0; f < 2; ++f)
            std::printf("q_%zu%zu = %+.6f %+.6fi   (W = %+.3f)\n", i, f, table.q(i, f).real(), table.q(i, f).imag(),
                        table.work(i, f));

    const WorkMoments m = work_moments(table);
    std::printf("<W>   = %+.6f\n", m.mean.real());
    std::printf("var W = %+.6f %+.6fi\n", m.variance.real(), m.variance.imag());

    const CorrelationReport c = correlation_report(rho, proto);
    std::printf("<H~(t)H(0)> = %+.6f %+.6fi\n", c.corr.real(), c.corr.imag());
    return 0;
}
