#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "oobvimp/errors.hpp"
#include "oobvimp/rng.hpp"

namespace oobvimp {

// One bootstrap draw: per-row multiplicities summing to n, the zero-multiplicity
// rows as the out-of-bag set, and a derived seed for any randomness consumed
// while analysing this replicate (e.g. permutation noising).
struct BootstrapReplicate {
    int index_b = 0;  // 1-based
    std::vector<std::uint32_t> multiplicity;
    std::vector<int> oob_rows;
    std::uint64_t seed = 0;
};

// B with-replacement draws of n rows. Replicate b uses an independent
// generator seeded by split_seed(master_seed, b), so the list is identical on
// every platform and independent of evaluation order.
std::vector<BootstrapReplicate> make_replicates(int n, int B, std::uint64_t master_seed);

inline int effective_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs <= 0) return omp_get_max_threads();
    return jobs;
#else
    (void)jobs;
    return 1;
#endif
}

// Runs body(i) for i in [0, count). jobs <= 1 runs the plain serial loop, the
// reference semantics; jobs > 1 runs the same bodies under OpenMP. Failures
// are collected and the one with the lowest index is rethrown, so both paths
// raise the same error. Thread count never changes results: bodies write only
// to their own index.
template <typename F>
void parallel_indexed(int count, int jobs, F&& body) {
    jobs = effective_jobs(jobs);
#ifdef _OPENMP
    if (jobs > 1 && count > 1) {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
        for (int i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
        for (int i = 0; i < count; ++i)
            if (errors[static_cast<std::size_t>(i)])
                std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
        return;
    }
#endif
    for (int i = 0; i < count; ++i) body(i);
}

// Per-replicate map. Tasks may run in any order and in parallel; results come
// back indexed by replicate, so a reduction over the returned vector is
// bit-identical to a serial run. A task error is rethrown as a ReplicateError
// for the lowest failing replicate index.
template <typename F>
auto run_replicates(const std::vector<BootstrapReplicate>& replicates, int jobs, F&& task)
    -> std::vector<std::invoke_result_t<F, const BootstrapReplicate&>> {
    using Result = std::invoke_result_t<F, const BootstrapReplicate&>;
    std::vector<Result> results(replicates.size());
    parallel_indexed(static_cast<int>(replicates.size()), jobs, [&](int i) {
        const auto& rep = replicates[static_cast<std::size_t>(i)];
        try {
            results[static_cast<std::size_t>(i)] = task(rep);
        } catch (const std::exception& e) {
            throw ReplicateError(rep.index_b, e.what());
        }
    });
    return results;
}

}  // namespace oobvimp
