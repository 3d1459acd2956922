// Compares the serial replicate loop against the OpenMP one on a simulated
// survival analysis and verifies that both produce byte-identical reports.

#include <chrono>
#include <cstdio>
#include <string>

#include "oobvimp/report.hpp"
#include "oobvimp/resample.hpp"
#include "oobvimp/simulate.hpp"

using namespace oobvimp;

namespace {

double run_ms(const Design& design, VimpOptions opts, std::string& report_json) {
    const auto t0 = std::chrono::steady_clock::now();
    const VimpReport report = vimp_analysis(design, opts);
    const auto t1 = std::chrono::steady_clock::now();
    report_json = render_report(report, OutputFormat::json);
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CoxSimParams params;
    params.n = argc > 1 ? std::atoi(argv[1]) : 1000;
    const int B = argc > 2 ? std::atoi(argv[2]) : 200;

    const Dataset data = simulate_cox_data(params, 20240501);
    const Design design = simulation_design(data, SimVariant::linear_only, 5);

    VimpOptions opts;
    opts.bootstrap = B;
    opts.seed = 7;

    std::printf("n=%d  B=%d  groups=%zu\n", params.n, B, design.groups.size());

    opts.jobs = 1;
    std::string serial_json;
    const double serial_ms = run_ms(design, opts, serial_json);
    std::printf("serial          %10.1f ms\n", serial_ms);

    const int threads = effective_jobs(0);
    opts.jobs = threads;
    std::string parallel_json;
    const double parallel_ms = run_ms(design, opts, parallel_json);
    std::printf("openmp (%2d)     %10.1f ms   speedup %.2fx\n", threads, parallel_ms,
                serial_ms / parallel_ms);

    if (serial_json != parallel_json) {
        std::printf("FAIL: serial and parallel reports differ\n");
        return 1;
    }
    std::printf("reports byte-identical\n");
    return 0;
}
