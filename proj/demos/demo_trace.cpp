// Minimal library usage: one quantum-jump trajectory through a resonant
// drive window, printed as (t, pop_e) pairs with its jump record.

#include <cstdio>

#include "qjw/model.hpp"
#include "qjw/rng.hpp"
#include "qjw/trajectory.hpp"

int main() {
    using namespace qjw;

    const auto params = ModelParams::with_detailed_balance(0.1, 1.0);
    DriveProtocol proto;
    proto.lambda0 = 0.1;
    proto.omega = 1.0;
    proto.n_cycles = 8.0;

    TrajectoryOptions opt;
    opt.dt = proto.period() / 1000.0;
    opt.sample_stride = 500;

    RngStream rng(/*seed=*/7, /*stream=*/0);
    const auto traj = run_trajectory(Eigenstate::Ground, 0.0, proto.duration(), params, proto,
                                     opt, rng);

    for (const auto& s : traj.samples) std::printf("%8.3f  %.6f\n", s.t, s.pop_e);
    for (const auto& j : traj.jumps) {
        std::printf("jump at t = %.3f: %s\n", j.time, jump_kind_name(j.kind));
    }
    return 0;
}
