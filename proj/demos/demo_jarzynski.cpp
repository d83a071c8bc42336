// Two-measurement work statistics for a pi pulse: runs a small ensemble,
// prints the work histogram and the Jarzynski average.

#include <cstdio>

#include "qjw/model.hpp"
#include "qjw/stats.hpp"
#include "qjw/work.hpp"

int main() {
    using namespace qjw;

    const auto params = ModelParams::with_detailed_balance(0.01, 1.0);
    const auto proto = DriveProtocol::pi_pulse(0.05);  // 10 cycles at lambda0 = 0.05

    EnsembleOptions opt;
    opt.n_trajectories = 20000;
    opt.seed = 11;
    opt.dt = proto.period() / 500.0;

    const auto res = run_protocol_ensemble(params, proto, opt);
    const auto hist = histogram(res.records);
    for (int32_t w = hist.w_min; w <= hist.w_max(); ++w) {
        std::printf("W = %+d hw0 : %8.5f\n", w, hist.probability(w));
    }

    RngStream boot(11, 1u << 20);
    const auto summary = summarize(res.records, params.beta_hbar_omega0, 500, boot);
    std::printf("<e^{-beta W}> = %.4f +- %.4f (expect 1)\n", summary.jarzynski.value,
                summary.jarzynski.se);
    return 0;
}
