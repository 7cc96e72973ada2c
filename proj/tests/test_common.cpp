#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>

#include "echobeam/common.hpp"
#include "helpers.hpp"

using namespace echobeam;

TEST_CASE("rng is deterministic per seed") {
    Rng a(42), b(42), c(43);
    bool all_equal = true;
    bool any_differ = false;
    for (int n = 0; n < 1000; ++n) {
        std::uint64_t va = a.next_u64();
        std::uint64_t vb = b.next_u64();
        if (va != vb) all_equal = false;
        if (va != c.next_u64()) any_differ = true;
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("rng uniform stays in range and fills it") {
    Rng rng(7);
    double lo = 1.0, hi = 0.0;
    for (int n = 0; n < 10000; ++n) {
        double x = rng.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);

    Rng rng2(8);
    for (int n = 0; n < 1000; ++n) {
        double x = rng2.uniform(-3.0, 5.0);
        REQUIRE(x >= -3.0);
        REQUIRE(x < 5.0);
    }
}

TEST_CASE("rng normal has roughly standard moments") {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
        double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("rng uniform_index covers [0, n)") {
    Rng rng(3);
    std::set<std::uint64_t> seen;
    for (int k = 0; k < 1000; ++k) {
        std::uint64_t i = rng.uniform_index(7);
        REQUIRE(i < 7);
        seen.insert(i);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("rng poisson matches its mean") {
    Rng rng(5);
    const int n = 20000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += static_cast<double>(rng.poisson(12.5));
    CHECK(sum / n == doctest::Approx(12.5).epsilon(0.02));
    Rng zero(6);
    CHECK(zero.poisson(0.0) == 0);
}

TEST_CASE("hash_draw decorrelates counters and repeats per input") {
    CHECK(hash_draw(1, 0) == hash_draw(1, 0));
    CHECK(hash_draw(1, 0) != hash_draw(1, 1));
    CHECK(hash_draw(1, 0) != hash_draw(2, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t n = 0; n < 512; ++n) seen.insert(hash_draw(99, n));
    CHECK(seen.size() == 512);
}

TEST_CASE("fnv1a is stable and order-sensitive") {
    CHECK(fnv1a("") == fnv1a(""));
    CHECK(fnv1a("abc") == fnv1a("abc"));
    CHECK(fnv1a("abc") != fnv1a("acb"));
    CHECK(fnv1a("abc") != fnv1a("abcd"));
}

TEST_CASE("parallel_for covers the range once regardless of thread count") {
    const std::size_t n = 1017;
    for (int threads : {1, 2, 4}) {
        std::vector<std::atomic<int>> hits(n);
        for (auto& h : hits) h.store(0);
        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) hits[k].fetch_add(1);
        });
        bool ok = true;
        for (auto& h : hits)
            if (h.load() != 1) ok = false;
        CHECK(ok);
    }
    bool empty_ok = true;
    parallel_for(0, 4, [&](std::size_t, std::size_t) { empty_ok = false; });
    CHECK(empty_ok);
}

TEST_CASE("file round trip preserves bytes and missing files throw") {
    testutil::ScratchDir dir("common_io");
    std::string payload("binary\0payload\xff\x01", 16);
    write_file_bytes(dir.file("blob.bin"), payload);
    CHECK(read_file_bytes(dir.file("blob.bin")) == payload);
    CHECK_THROWS_AS((void)read_file_bytes(dir.file("missing.bin")), FormatError);
}
