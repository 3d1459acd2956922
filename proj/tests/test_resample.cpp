#include <numeric>
#include <set>

#include "doctest.h"
#include "oobvimp/errors.hpp"
#include "oobvimp/resample.hpp"

using namespace oobvimp;

TEST_SUITE("resample") {

TEST_CASE("generators are deterministic and seed-sensitive") {
    Xoshiro256pp a(12345), b(12345), c(54321);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next();
        all_equal &= (va == b.next());
        any_equal_c |= (va == c.next());
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);

    CHECK(split_seed(1, 1) != split_seed(1, 2));
    CHECK(split_seed(1, 1) != split_seed(2, 1));
    CHECK(split_seed(7, 3) == split_seed(7, 3));
}

TEST_CASE("uniform_below stays in range and covers it") {
    Xoshiro256pp rng(2);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 3000; ++i) {
        const auto v = uniform_below(rng, 7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("shuffle produces a permutation") {
    Xoshiro256pp rng(8);
    std::vector<int> v(20);
    std::iota(v.begin(), v.end(), 0);
    shuffle(rng, v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("replicate preconditions") {
    CHECK_THROWS_AS(make_replicates(1, 10, 0), ConfigError);
    CHECK_THROWS_AS(make_replicates(10, 0, 0), ConfigError);
}

TEST_CASE("replicates are reproducible and well-formed") {
    const auto a = make_replicates(50, 20, 99);
    const auto b = make_replicates(50, 20, 99);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].index_b == static_cast<int>(i) + 1);
        CHECK(a[i].multiplicity == b[i].multiplicity);
        CHECK(a[i].oob_rows == b[i].oob_rows);
        CHECK(a[i].seed == b[i].seed);

        std::uint32_t total = 0;
        std::vector<int> zeros;
        for (int r = 0; r < 50; ++r) {
            total += a[i].multiplicity[static_cast<std::size_t>(r)];
            if (a[i].multiplicity[static_cast<std::size_t>(r)] == 0) zeros.push_back(r);
        }
        CHECK(total == 50);
        CHECK(zeros == a[i].oob_rows);
    }
    const auto other = make_replicates(50, 20, 100);
    CHECK(other.front().multiplicity != a.front().multiplicity);
}

TEST_CASE("oob fraction approaches 1 - 1/e") {
    const auto reps = make_replicates(2231, 1000, 7);
    double oob = 0.0;
    for (const auto& rep : reps) oob += static_cast<double>(rep.oob_rows.size()) / 2231.0;
    oob /= static_cast<double>(reps.size());
    CHECK(oob == doctest::Approx(0.368).epsilon(0.01 / 0.368));
}

TEST_CASE("distinct inbag fraction approaches 0.632") {
    const auto reps = make_replicates(10000, 200, 3);
    double distinct = 0.0;
    for (const auto& rep : reps)
        distinct += 1.0 - static_cast<double>(rep.oob_rows.size()) / 10000.0;
    distinct /= static_cast<double>(reps.size());
    CHECK(std::abs(distinct - 0.632) < 0.005);
}

TEST_CASE("map over replicates reduces in index order") {
    const auto reps = make_replicates(10, 4, 1);
    for (int jobs : {1, 4}) {
        const auto vals = run_replicates(reps, jobs, [](const BootstrapReplicate& rep) {
            return static_cast<double>(rep.index_b);
        });
        const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / 4.0;
        CHECK(mean == 2.5);
    }
}

TEST_CASE("task failure names the lowest failing replicate") {
    const auto reps = make_replicates(10, 12, 1);
    auto task = [](const BootstrapReplicate& rep) -> int {
        if (rep.index_b >= 7) throw std::runtime_error("boom");
        return rep.index_b;
    };
    for (int jobs : {1, 4}) {
        try {
            run_replicates(reps, jobs, task);
            FAIL("expected ReplicateError");
        } catch (const ReplicateError& e) {
            CHECK(e.index() == 7);
            CHECK(std::string(e.what()).find("replicate 7") != std::string::npos);
        }
    }
}

TEST_CASE("parallel and serial maps agree bit for bit") {
    const auto reps = make_replicates(123, 64, 5);
    auto task = [](const BootstrapReplicate& rep) {
        // order-sensitive floating point: any scheduling leak would show up
        double acc = 0.0;
        Xoshiro256pp rng(rep.seed);
        for (int i = 0; i < 100; ++i) acc += uniform_real(rng) / (1.0 + i);
        return acc;
    };
    const auto serial = run_replicates(reps, 1, task);
    const auto parallel = run_replicates(reps, 4, task);
    double sum_serial = 0.0, sum_parallel = 0.0;
    for (std::size_t i = 0; i < serial.size(); ++i) {
        sum_serial += serial[i];
        sum_parallel += parallel[i];
    }
    CHECK(sum_serial == sum_parallel);
}

}  // TEST_SUITE
