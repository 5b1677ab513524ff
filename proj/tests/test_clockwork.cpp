// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <doctest.h>

#include "cwrnn/clockwork.hpp"
#include "cwrnn/gradcheck.hpp"

using namespace cwrnn;

namespace {

CwRnnParams random_params(const ClockSpec& spec, std::size_t m, std::size_t o,
                          std::uint64_t seed) {
    Rng rng(seed);
    return init_cwrnn_params(spec, m, o, rng, 0.4);
}

std::vector<Vector> random_inputs(std::size_t steps, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vector> inputs(steps, Vector(m));
    for (auto& x : inputs) {
        for (double& v : x) {
            v = rng.gaussian(0.0, 1.0);
        }
    }
    return inputs;
}

}  // namespace

TEST_SUITE_BEGIN("clockwork");

TEST_CASE("clock spec validates its invariants") {
    CHECK_THROWS_AS(ClockSpec({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(ClockSpec({2, 0}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(ClockSpec({2, 2}, {2, 2}), std::invalid_argument);  // not increasing
    CHECK_THROWS_AS(ClockSpec({2, 2}, {4, 2}), std::invalid_argument);
    CHECK_THROWS_AS(ClockSpec({2}, {0}), std::invalid_argument);

    const ClockSpec spec({2, 3, 1}, {1, 2, 4});
    CHECK(spec.total_size() == 6);
    CHECK(spec.offset(0) == 0);
    CHECK(spec.offset(1) == 2);
    CHECK(spec.offset(2) == 5);
}

TEST_CASE("exponential specs spread the remainder from the fastest module") {
    const ClockSpec spec = ClockSpec::exponential(40, 9);
    CHECK(spec.sizes() == std::vector<std::size_t>{5, 5, 5, 5, 4, 4, 4, 4, 4});
    CHECK(spec.periods() ==
          std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32, 64, 128, 256});

    const ClockSpec small = ClockSpec::exponential(11, 9);
    CHECK(small.sizes() == std::vector<std::size_t>{2, 2, 1, 1, 1, 1, 1, 1, 1});

    CHECK_THROWS_AS(ClockSpec::exponential(4, 9), std::invalid_argument);
    CHECK_THROWS_AS(ClockSpec::exponential(0, 0), std::invalid_argument);
}

TEST_CASE("active modules by direct mod arithmetic") {
    const ClockSpec spec = ClockSpec::exponential(6, 3);  // periods 1,2,4
    using Ids = std::vector<std::size_t>;
    const std::vector<Ids> expected{{1},       {1, 2}, {1},       {1, 2, 3},
                                    {1},       {1, 2}, {1},       {1, 2, 3}};
    for (std::uint64_t t = 1; t <= 8; ++t) {
        CHECK(active_modules(spec, t) == expected[t - 1]);
    }
    CHECK_THROWS_AS(active_modules(spec, 0), std::invalid_argument);
}

TEST_CASE("step six of the nine-module exponential schedule runs modules 1 and 2") {
    const ClockSpec spec = ClockSpec::exponential(40, 9);  // periods 1..256
    CHECK(active_modules(spec, 6) == std::vector<std::size_t>{1, 2});
    CHECK(active_modules(spec, 1) == std::vector<std::size_t>{1});
}

TEST_CASE("active set size is one plus the trailing twos of t, capped at g") {
    for (std::size_t g : {1u, 2u, 4u, 6u}) {
        const ClockSpec spec = ClockSpec::exponential(2 * g, g);
        for (std::uint64_t t = 1; t <= 64; ++t) {
            std::size_t twos = 0;
            std::uint64_t x = t;
            while (x % 2 == 0) {
                ++twos;
                x /= 2;
            }
            const auto active = active_modules(spec, t);
            CHECK(active.size() == std::min<std::size_t>(1 + twos, g));
            const bool slowest_active =
                std::find(active.begin(), active.end(), g) != active.end();
            CHECK(slowest_active == (t % (std::uint64_t{1} << (g - 1)) == 0));
        }
    }
}

TEST_CASE("zero network stays at zero") {
    const ClockSpec spec = ClockSpec::exponential(5, 2);
    CwRnn net(spec, 2, 1, OutputActivation::Identity);
    const auto outputs = net.forward(random_inputs(6, 2, 9));
    for (const auto& y : outputs) {
        CHECK(y == Vector{0.0});
    }
}

TEST_CASE("idle modules retain their outputs bit for bit") {
    const ClockSpec spec({2, 2, 2}, {1, 3, 7});
    const CwRnnParams params = random_params(spec, 2, 1, 21);
    const auto inputs = random_inputs(21, 2, 22);
    CwRnnTape tape;
    cwrnn_forward(params, inputs, OutputActivation::Identity, &tape);
    for (std::size_t s = 0; s < tape.steps(); ++s) {
        const Vector& prev = s > 0 ? tape.hidden[s - 1] : tape.initial_hidden;
        for (std::size_t g = 0; g < spec.group_count(); ++g) {
            if ((s + 1) % spec.period(g) != 0) {
                for (std::size_t u = spec.offset(g); u < spec.offset(g) + spec.size(g); ++u) {
                    CHECK(tape.hidden[s][u] == prev[u]);
                }
            }
        }
    }
}

TEST_CASE("tape masks match the schedule") {
    const ClockSpec spec = ClockSpec::exponential(8, 4);
    const CwRnnParams params = random_params(spec, 0, 2, 5);
    const std::vector<Vector> inputs(13, Vector{});
    CwRnnTape tape;
    cwrnn_forward(params, inputs, OutputActivation::Identity, &tape);
    REQUIRE(tape.steps() == 13);
    for (std::size_t s = 0; s < 13; ++s) {
        CHECK(tape.executed[s] == active_modules(spec, s + 1));
    }
}

TEST_CASE("two-module network matches a hand-unrolled computation") {
    const ClockSpec spec({1, 1}, {1, 2});
    CwRnnParams p{spec, Matrix(2, 1), Matrix(2, 2), Matrix(1, 2), Vector(2, 0.0),
                  Vector(1, 0.0)};
    const double a = 0.5, b = -0.3, d = 0.8;       // recurrent weights
    const double wp = 0.9, wq = -0.6;              // input weights
    const double r = 0.1, s = -0.2;                // hidden biases
    const double u = 1.2, v = -0.7, w_out = 0.05;  // output layer
    p.w_rec(0, 0) = a;
    p.w_rec(0, 1) = b;
    p.w_rec(1, 1) = d;  // row 1 may only read module 2
    p.w_in(0, 0) = wp;
    p.w_in(1, 0) = wq;
    p.b_h = {r, s};
    p.w_out(0, 0) = u;
    p.w_out(0, 1) = v;
    p.b_out = {w_out};

    const double x1 = 0.4, x2 = -1.1, x3 = 0.7;
    const std::vector<Vector> inputs{{x1}, {x2}, {x3}};
    const auto outputs = cwrnn_forward(p, inputs, OutputActivation::Identity);

    // t=1: only module 1 fires.
    const double y1_0 = std::tanh(a * 0.0 + b * 0.0 + wp * x1 + r);
    const double y1_1 = 0.0;
    // t=2: both modules fire, reading the t=1 state.
    const double y2_0 = std::tanh(a * y1_0 + b * y1_1 + wp * x2 + r);
    const double y2_1 = std::tanh(d * y1_1 + wq * x2 + s);
    // t=3: module 2 idles and keeps y2_1.
    const double y3_0 = std::tanh(a * y2_0 + b * y2_1 + wp * x3 + r);
    const double y3_1 = y2_1;

    CHECK(outputs[0][0] == doctest::Approx(u * y1_0 + v * y1_1 + w_out).epsilon(1e-14));
    CHECK(outputs[1][0] == doctest::Approx(u * y2_0 + v * y2_1 + w_out).epsilon(1e-14));
    CHECK(outputs[2][0] == doctest::Approx(u * y3_0 + v * y3_1 + w_out).epsilon(1e-14));
}

TEST_CASE("forward_sequence composes forward_step") {
    const ClockSpec spec = ClockSpec::exponential(6, 2);
    const CwRnnParams params = random_params(spec, 3, 2, 31);

    const std::vector<Vector> empty;
    CHECK(cwrnn_forward(params, empty, OutputActivation::Identity).empty());

    const auto inputs = random_inputs(1, 3, 32);
    NetState state(spec.total_size());
    const Vector direct =
        cwrnn_forward_step(params, state, inputs[0], OutputActivation::Identity);
    const auto via_sequence = cwrnn_forward(params, inputs, OutputActivation::Identity);
    CHECK(via_sequence.size() == 1);
    CHECK(via_sequence[0] == direct);
    CHECK(state.t == 2);
}

TEST_CASE("forward rejects mismatched inputs") {
    const ClockSpec spec = ClockSpec::exponential(4, 2);
    const CwRnnParams params = random_params(spec, 3, 1, 77);
    NetState state(4);
    CHECK_THROWS_AS(cwrnn_forward_step(params, state, Vector{1.0}, OutputActivation::Identity),
                    std::invalid_argument);
}

TEST_CASE("initialization is structured, spread and reproducible") {
    const ClockSpec spec = ClockSpec::exponential(40, 9);
    Rng rng_a(7);
    const CwRnnParams a = init_cwrnn_params(spec, 8, 4, rng_a, 0.1);
    CHECK(zero_blocks_intact(a));

    // Sample spread over all drawn weights (>= 1000 of them).
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    auto tally = [&](double w) {
        sum += w;
        sq += w * w;
        ++count;
    };
    for (std::size_t g = 0; g < spec.group_count(); ++g) {
        for (std::size_t u = spec.offset(g); u < spec.offset(g) + spec.size(g); ++u) {
            for (std::size_t v = spec.offset(g); v < spec.total_size(); ++v) {
                tally(a.w_rec(u, v));
            }
        }
    }
    for (double w : a.w_in.values()) {
        tally(w);
    }
    for (double w : a.w_out.values()) {
        tally(w);
    }
    REQUIRE(count >= 1000);
    const double mean = sum / count;
    const double std = std::sqrt(sq / count - mean * mean);
    CHECK(std > 0.08);
    CHECK(std < 0.12);

    for (double bias : a.b_h) {
        CHECK(bias == 0.0);
    }

    Rng rng_b(7);
    const CwRnnParams b = init_cwrnn_params(spec, 8, 4, rng_b, 0.1);
    CHECK(a.w_rec.values().size() == b.w_rec.values().size());
    for (std::size_t i = 0; i < a.w_rec.values().size(); ++i) {
        CHECK(a.w_rec.values()[i] == b.w_rec.values()[i]);
    }
    CHECK_THROWS_AS(init_cwrnn_params(spec, 8, 4, rng_b, 0.0), std::invalid_argument);
}

TEST_CASE("single-step gradients touch only the fired module's rows") {
    const ClockSpec spec({2, 2}, {1, 2});
    const CwRnnParams params = random_params(spec, 2, 1, 13);
    const auto inputs = random_inputs(1, 2, 14);
    CwRnnTape tape;
    cwrnn_forward(params, inputs, OutputActivation::Identity, &tape);

    CwRnnParams grads{spec, Matrix(4, 2), Matrix(4, 4), Matrix(1, 4), Vector(4, 0.0),
                      Vector(1, 0.0)};
    const std::vector<Vector> output_grads{{1.0}};
    cwrnn_backward(params, tape, output_grads, grads);

    for (std::size_t u = 2; u < 4; ++u) {  // module 2 never fired at t=1
        CHECK(grads.b_h[u] == 0.0);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(grads.w_rec(u, j) == 0.0);
        }
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(grads.w_in(u, j) == 0.0);
        }
    }
    bool module1_touched = false;
    for (std::size_t u = 0; u < 2; ++u) {
        module1_touched = module1_touched || grads.b_h[u] != 0.0;
    }
    CHECK(module1_touched);
}

TEST_CASE("zero output gradients give zero parameter gradients") {
    const ClockSpec spec = ClockSpec::exponential(6, 3);
    CwRnn net(CwRnnParams(random_params(spec, 2, 2, 55)), OutputActivation::Identity);
    const auto inputs = random_inputs(9, 2, 56);
    auto tape = net.make_tape();
    net.forward(inputs, tape.get());
    auto grads = net.zeros_like();
    const std::vector<Vector> zeros(9, Vector(2, 0.0));
    net.accumulate_grads(*tape, zeros, *grads);
    for (const auto& block : grads->param_blocks()) {
        for (double g : block.data) {
            CHECK(g == 0.0);
        }
    }
}

TEST_CASE("analytic gradients match finite differences") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const ClockSpec spec({2, 3, 2, 1}, {1, 2, 4, 8});
        CwRnn net(random_params(spec, 3, 2, 100 + seed), OutputActivation::Identity);
        Rng rng(200 + seed);
        GradCheckOptions opts;
        opts.steps = 9;
        const auto report = gradcheck(net, rng, opts);
        CHECK(report.max_rel_err < 1e-6);
    }
}

TEST_CASE("softmax-output gradients match finite differences") {
    const ClockSpec spec = ClockSpec::exponential(7, 3);
    CwRnn net(random_params(spec, 2, 4, 300), OutputActivation::Softmax);
    Rng rng(301);
    GradCheckOptions opts;
    opts.steps = 6;
    const auto report = gradcheck(net, rng, opts);
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("gradcheck corruption hook is detected") {
    const ClockSpec spec = ClockSpec::exponential(4, 2);
    CwRnn net(random_params(spec, 2, 1, 400), OutputActivation::Identity);
    Rng rng(401);
    GradCheckOptions opts;
    opts.corruption = 1e-3;
    const auto report = gradcheck(net, rng, opts);
    CHECK_FALSE(report.passed(1e-6));
}

TEST_SUITE_END();
