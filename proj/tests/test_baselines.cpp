// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <doctest.h>

#include "cwrnn/baselines.hpp"
#include "cwrnn/gradcheck.hpp"

using namespace cwrnn;

namespace {

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

TEST_SUITE_BEGIN("baselines");

TEST_CASE("zero-weight SRN outputs zeros") {
    Srn net(5, 2, 3, OutputActivation::Identity);
    for (const auto& y : net.forward(random_inputs(4, 2, 1))) {
        CHECK(y == Vector(3, 0.0));
    }
}

TEST_CASE("one-module period-1 clockwork net is bit-identical to the SRN") {
    Rng rng(909);
    SrnParams srn_params = init_srn_params(6, 3, 2, rng, 0.3);
    const Srn srn(srn_params, OutputActivation::Identity);

    CwRnnParams cw_params{ClockSpec({6}, {1}),       srn_params.w_in, srn_params.w_rec,
                          srn_params.w_out,          srn_params.b_h,  srn_params.b_out};
    const CwRnn cw(std::move(cw_params), OutputActivation::Identity);

    const auto inputs = random_inputs(50, 3, 910);
    const auto srn_out = srn.forward(inputs);
    const auto cw_out = cw.forward(inputs);
    REQUIRE(srn_out.size() == cw_out.size());
    for (std::size_t t = 0; t < srn_out.size(); ++t) {
        CHECK(srn_out[t] == cw_out[t]);  // exact, not approximate
    }
}

TEST_CASE("srn gradients match finite differences") {
    for (std::uint64_t seed : {1, 2, 3}) {
        Rng rng(seed);
        Srn net(init_srn_params(7, 2, 2, rng, 0.4), OutputActivation::Identity);
        Rng check_rng(50 + seed);
        GradCheckOptions opts;
        opts.steps = 9;
        CHECK(gradcheck(net, check_rng, opts).max_rel_err < 1e-6);
    }
}

TEST_CASE("lstm forget bias initialisation opens the carousel") {
    Rng rng(4);
    const LstmParams p = init_lstm_params(3, 2, 1, rng, 0.1, 5.0);
    for (double b : p.b_f) {
        CHECK(b == 5.0);
    }
    CHECK(sigmoid(5.0) == doctest::Approx(0.9933071490757153).epsilon(1e-12));
    for (double b : p.b_i) {
        CHECK(b == 0.0);
    }
}

TEST_CASE("saturated gates freeze the cell state") {
    // Forget gate pinned at 1, input gate pinned at 0: the cell is a pure
    // carousel and must hold its value exactly.
    Lstm net(2, 1, 1, OutputActivation::Identity);
    auto& p = net.params();
    for (std::size_t u = 0; u < 2; ++u) {
        p.b_f[u] = 1000.0;   // sigmoid underflows to exactly 1
        p.b_i[u] = -1000.0;  // sigmoid underflows to exactly 0
    }
    LstmState state(2);
    state.c = {0.7, -0.3};
    const Vector carried = state.c;
    for (int t = 0; t < 6; ++t) {
        lstm_forward_step(p, state, Vector{0.5}, OutputActivation::Identity);
        CHECK(state.c == carried);
    }
}

TEST_CASE("lstm gradients match finite differences") {
    for (std::uint64_t seed : {1, 2, 3}) {
        Rng rng(seed);
        Lstm net(init_lstm_params(5, 3, 2, rng, 0.4, 1.0), OutputActivation::Identity);
        Rng check_rng(80 + seed);
        GradCheckOptions opts;
        opts.steps = 8;
        CHECK(gradcheck(net, check_rng, opts).max_rel_err < 1e-6);
    }
}

TEST_CASE("input-free lstm gradients match finite differences") {
    Rng rng(17);
    Lstm net(init_lstm_params(4, 0, 1, rng, 0.4, 5.0), OutputActivation::Identity);
    Rng check_rng(18);
    GradCheckOptions opts;
    opts.steps = 10;
    CHECK(gradcheck(net, check_rng, opts).max_rel_err < 1e-6);
}

TEST_CASE("softmax srn gradients match finite differences") {
    Rng rng(33);
    Srn net(init_srn_params(6, 3, 4, rng, 0.4), OutputActivation::Softmax);
    Rng check_rng(34);
    CHECK(gradcheck(net, check_rng).max_rel_err < 1e-6);
}

TEST_CASE("parameter counts reproduce the budget-table sizes") {
    // 1000-parameter generation budget: no inputs, one linear output.
    CHECK(param_count_srn(0, 31, 1) == 1024);
    CHECK(param_count_lstm(0, 15, 1) == 976);
    CHECK(param_count_cwrnn(ClockSpec::exponential(40, 9), 0, 1) == 980);
    CHECK(param_count_srn(0, 9, 1) == 100);

    // 10k classification budget: 13 inputs, 25 softmax outputs.
    CHECK(param_count_srn(13, 84, 25) == 10357);
    CHECK(param_count_lstm(13, 41, 25) == 10070);
    CHECK(param_count_cwrnn(ClockSpec::exponential(102, 7), 13, 25) == 9956);

    const auto within = [](std::size_t count, std::size_t budget) {
        const double rel =
            std::abs(static_cast<double>(count) - static_cast<double>(budget)) / budget;
        return rel <= 0.05;
    };
    CHECK(within(param_count_srn(0, 31, 1), 1000));
    CHECK(within(param_count_lstm(0, 15, 1), 1000));
    CHECK(within(param_count_cwrnn(ClockSpec::exponential(40, 9), 0, 1), 1000));
    CHECK(within(param_count_srn(13, 84, 25), 10000));
    CHECK(within(param_count_lstm(13, 41, 25), 10000));
    CHECK(within(param_count_cwrnn(ClockSpec::exponential(102, 7), 13, 25), 10000));
}

TEST_CASE("model param_count methods agree with the free functions") {
    CHECK(Srn(31, 0, 1, OutputActivation::Identity).param_count() == 1024);
    CHECK(Lstm(15, 0, 1, OutputActivation::Identity).param_count() == 976);
    CHECK(CwRnn(ClockSpec::exponential(40, 9), 0, 1, OutputActivation::Identity).param_count() ==
          980);
}

TEST_SUITE_END();
