// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdlib>

#include <doctest.h>

#include "cwrnn/numerics.hpp"
#include "cwrnn/rng.hpp"

using namespace cwrnn;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("matvec identity and hand-computed products") {
    Matrix eye(2, 2);
    eye(0, 0) = 1.0;
    eye(1, 1) = 1.0;
    const Vector v{3.0, -1.0};
    CHECK(matvec(eye, v) == Vector{3.0, -1.0});

    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = 2.0;
    m(1, 0) = 3.0;
    m(1, 1) = 4.0;
    CHECK(matvec(m, Vector{1.0, 1.0}) == Vector{3.0, 7.0});
    CHECK(matvec(m, Vector{0.0, 0.0}) == Vector{0.0, 0.0});
}

TEST_CASE("matvec rejects dimension mismatches") {
    Matrix m(2, 3);
    CHECK_THROWS_AS(matvec(m, Vector{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(matvec_transposed(m, Vector{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("matvec distributes over vector addition") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t rows = 1 + rng.uniform_below(6);
        const std::size_t cols = 1 + rng.uniform_below(6);
        Matrix m(rows, cols);
        for (double& w : m.values()) {
            w = rng.gaussian(0.0, 1.0);
        }
        Vector a(cols), b(cols), sum(cols);
        for (std::size_t j = 0; j < cols; ++j) {
            a[j] = rng.gaussian(0.0, 1.0);
            b[j] = rng.gaussian(0.0, 1.0);
            sum[j] = a[j] + b[j];
        }
        const Vector lhs = matvec(m, sum);
        const Vector ra = matvec(m, a);
        const Vector rb = matvec(m, b);
        for (std::size_t i = 0; i < rows; ++i) {
            CHECK(lhs[i] == doctest::Approx(ra[i] + rb[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("row_dot counts multiply-accumulates") {
    Matrix m(3, 5);
    Vector v(5, 1.0);
    std::uint64_t macs = 0;
    row_dot(m, 1, v, 2, 5, &macs);
    CHECK(macs == 3);
    matvec(m, v, &macs);
    CHECK(macs == 3 + 15);
}

TEST_CASE("tanh_vec is odd and zero at the origin") {
    CHECK(tanh_vec(Vector{0.0}) == Vector{0.0});
    const Vector out = tanh_vec(Vector{0.7, -0.7});
    CHECK(out[0] == doctest::Approx(-out[1]));
    CHECK(out[0] == doctest::Approx(std::tanh(0.7)));
}

TEST_CASE("softmax of equal entries is uniform") {
    const Vector p = softmax_vec(Vector{4.2, 4.2, 4.2});
    for (double x : p) {
        CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("softmax closed form and shift invariance") {
    const Vector p = softmax_vec(Vector{0.0, std::log(3.0)});
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-14));

    const Vector q = softmax_vec(Vector{1000.0, 1000.0 + std::log(3.0)});
    CHECK(q[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("softmax entries lie in (0,1) and sum to 1") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Vector z(1 + rng.uniform_below(8));
        for (double& x : z) {
            x = rng.gaussian(0.0, 5.0);
        }
        const Vector p = softmax_vec(z);
        double sum = 0.0;
        for (double x : p) {
            CHECK(x > 0.0);
            CHECK(x < 1.0);
            sum += x;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("rng stream is frozen for a fixed seed") {
    Rng rng(42);
    CHECK(rng.next_u64() == 6990951692964543102ULL);
    CHECK(rng.next_u64() == 1546998764402558742ULL);

    Rng again(42);
    CHECK(again.uniform01() == doctest::Approx(0.37898025066266861).epsilon(1e-16));
}

TEST_CASE("gaussian golden values at seed 42") {
    Rng rng(42);
    CHECK(rng.gaussian(0.0, 1.0) == doctest::Approx(1.3438117634372806).epsilon(1e-15));
    CHECK(rng.gaussian(0.0, 1.0) == doctest::Approx(-0.30326306467873798).epsilon(1e-15));
}

TEST_CASE("gaussian degenerate and invalid spreads") {
    Rng rng(1);
    CHECK(rng.gaussian(2.5, 0.0) == 2.5);
    CHECK_THROWS_AS(rng.gaussian(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("gaussian sample statistics") {
    Rng rng(123);
    const int draws = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double x = rng.gaussian(0.0, 0.1);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / draws;
    const double std = std::sqrt(sq / draws - mean * mean);
    CHECK(std > 0.095);
    CHECK(std < 0.105);
}

TEST_CASE("identical seeds give identical streams") {
    Rng a(977), b(977);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("format_real round-trips doubles exactly") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.gaussian(0.0, 10.0);
        CHECK(std::strtod(format_real(x).c_str(), nullptr) == x);
    }
}

TEST_SUITE_END();
