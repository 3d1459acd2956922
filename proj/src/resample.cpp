#include "oobvimp/resample.hpp"

namespace oobvimp {

std::vector<BootstrapReplicate> make_replicates(int n, int B, std::uint64_t master_seed) {
    if (n < 2) throw ConfigError("bootstrap needs at least 2 rows");
    if (B < 1) throw ConfigError("bootstrap count must be >= 1");

    std::vector<BootstrapReplicate> replicates(static_cast<std::size_t>(B));
    for (int b = 1; b <= B; ++b) {
        auto& rep = replicates[static_cast<std::size_t>(b - 1)];
        rep.index_b = b;
        rep.seed = split_seed(master_seed, static_cast<std::uint64_t>(b));
        rep.multiplicity.assign(static_cast<std::size_t>(n), 0);

        Xoshiro256pp rng(rep.seed);
        for (int draw = 0; draw < n; ++draw) {
            const auto row = uniform_below(rng, static_cast<std::uint64_t>(n));
            ++rep.multiplicity[static_cast<std::size_t>(row)];
        }
        for (int i = 0; i < n; ++i)
            if (rep.multiplicity[static_cast<std::size_t>(i)] == 0) rep.oob_rows.push_back(i);
    }
    return replicates;
}

}  // namespace oobvimp
