#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "mgrnet/tensor.hpp"

using namespace mgrnet;

namespace {

// Direct quadruple-nested-loop convolution, independent of the conv2d
// implementation path.
Tensor64 conv_loop_oracle(const Tensor64& in, const Tensor64& ker, const Tensor64& bias,
                          Padding pad) {
    const std::size_t cin = in.shape[0], h = in.shape[1], w = in.shape[2];
    const std::size_t cout = ker.shape[0], k = ker.shape[2];
    const std::ptrdiff_t p = pad == Padding::Same ? static_cast<std::ptrdiff_t>(k / 2) : 0;
    const std::size_t oh = pad == Padding::Same ? h : h - k + 1;
    const std::size_t ow = pad == Padding::Same ? w : w - k + 1;
    Tensor64 out(Shape{cout, oh, ow});
    for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x) {
                double acc = bias.data[o];
                for (std::size_t c = 0; c < cin; ++c)
                    for (std::size_t dy = 0; dy < k; ++dy)
                        for (std::size_t dx = 0; dx < k; ++dx) {
                            const std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(y + dy) - p;
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(x + dx) - p;
                            if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(h) ||
                                ix >= static_cast<std::ptrdiff_t>(w))
                                continue;
                            acc += in.data[(c * h + static_cast<std::size_t>(iy)) * w +
                                           static_cast<std::size_t>(ix)] *
                                   ker.data[((o * cin + c) * k + dy) * k + dx];
                        }
                out.data[(o * oh + y) * ow + x] = acc;
            }
    return out;
}

}  // namespace

TEST_CASE("conv2d: 1x1 identity kernel preserves the input") {
    Rng rng(1);
    Tensor64 in = testing::random_tensor(Shape{3, 4, 5}, rng);
    Tensor64 ker(Shape{3, 3, 1, 1});
    for (std::size_t o = 0; o < 3; ++o) ker.data[o * 3 + o] = 1.0;
    Tensor64 bias(Shape{3});
    Tensor64 out = conv2d(in, ker, bias, Padding::Same);
    REQUIRE(out.shape == in.shape);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.data[i] == doctest::Approx(in.data[i]));
}

TEST_CASE("conv2d: 3x3 ones kernel on 3x3 ones input, valid padding -> 9") {
    Tensor64 in(Shape{1, 3, 3}, std::vector<double>(9, 1.0));
    Tensor64 ker(Shape{1, 1, 3, 3}, std::vector<double>(9, 1.0));
    Tensor64 bias(Shape{1});
    Tensor64 out = conv2d(in, ker, bias, Padding::Valid);
    REQUIRE(out.shape == Shape{1, 1, 1});
    CHECK(out.data[0] == doctest::Approx(9.0));
}

TEST_CASE("conv2d matches the quadruple-loop oracle") {
    Rng rng(2);
    Tensor64 in = testing::random_tensor(Shape{1, 5, 5}, rng);
    Tensor64 ker = testing::random_tensor(Shape{2, 1, 3, 3}, rng);
    Tensor64 bias = testing::random_tensor(Shape{2}, rng);
    for (Padding pad : {Padding::Same, Padding::Valid}) {
        Tensor64 got = conv2d(in, ker, bias, pad);
        Tensor64 want = conv_loop_oracle(in, ker, bias, pad);
        REQUIRE(got.shape == want.shape);
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d shape contract: same preserves extents, valid shrinks") {
    Rng rng(3);
    Tensor64 in = testing::random_tensor(Shape{2, 7, 9}, rng);
    Tensor64 ker = testing::random_tensor(Shape{4, 2, 5, 5}, rng);
    Tensor64 bias(Shape{4});
    CHECK(conv2d(in, ker, bias, Padding::Same).shape == Shape{4, 7, 9});
    CHECK(conv2d(in, ker, bias, Padding::Valid).shape == Shape{4, 3, 5});
}

TEST_CASE("conv2d error paths") {
    Tensor64 in(Shape{2, 4, 4});
    Tensor64 bias(Shape{1});
    CHECK_THROWS_AS(conv2d(in, Tensor64(Shape{1, 3, 3, 3}), bias, Padding::Same), Error);
    CHECK_THROWS_AS(conv2d(in, Tensor64(Shape{1, 2, 2, 2}), bias, Padding::Same), Error);
    CHECK_THROWS_AS(conv2d(in, Tensor64(Shape{1, 2, 5, 5}), bias, Padding::Valid), Error);
}

TEST_CASE("relu examples") {
    Tensor64 x(Shape{3}, {-1.0, 0.0, 2.0});
    Tensor64 y = relu(x);
    CHECK(y.data == std::vector<double>{0.0, 0.0, 2.0});

    Tensor64 pos(Shape{4}, {0.5, 1.0, 2.0, 3.0});
    CHECK(relu(pos).data == pos.data);
}

TEST_CASE("relu gradient: zero below and at the kink") {
    Tape64 tape;
    Tensor64 x(Shape{2}, {-1.0, 2.0});
    tape.watch(x);
    Tensor64 loss = sum_all(relu(x));  // upstream [1, 1]
    tape.backward(loss);
    CHECK(tape.grad(x) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("softmax: uniform on constants, sums to one") {
    for (double c : {-3.0, 0.0, 41.5}) {
        Tensor64 x(Shape{4}, std::vector<double>(4, c));
        Tensor64 y = softmax(x);
        double total = 0;
        for (double v : y.data) {
            CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
            total += v;
        }
        CHECK(std::abs(total - 1.0) < 1e-6);
    }
}

TEST_CASE("softmax: shift invariance") {
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        Tensor64 x = testing::random_tensor(Shape{6}, rng, -5.0, 5.0);
        const double c = rng.uniform(-100.0, 100.0);
        Tensor64 shifted = x;
        for (auto& v : shifted.data) v += c;
        Tensor64 a = softmax(x), b = softmax(shifted);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(std::abs(a.data[i] - b.data[i]) < 1e-6);
    }
}

TEST_CASE("softmax: [0, ln 3] -> [0.25, 0.75]") {
    Tensor64 x(Shape{2}, {0.0, std::log(3.0)});
    Tensor64 y = softmax(x);
    CHECK(y.data[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(y.data[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("softmax: large magnitudes stay finite") {
    Tensor64 x(Shape{3}, {1000.0, 900.0, 1000.0});
    Tensor64 y = softmax(x);
    for (double v : y.data) CHECK(std::isfinite(v));
    CHECK(y.data[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("adaptive_avg_pool: identity when sizes match") {
    Rng rng(5);
    Tensor64 in = testing::random_tensor(Shape{2, 4, 4}, rng);
    Tensor64 out = adaptive_avg_pool(in, 4);
    CHECK(out.data == in.data);
}

TEST_CASE("adaptive_avg_pool: divisible case gives block means") {
    Tensor64 in(Shape{1, 8, 8});
    for (std::size_t i = 0; i < 64; ++i) in.data[i] = static_cast<double>(i);
    Tensor64 out = adaptive_avg_pool(in, 4);
    REQUIRE(out.shape == Shape{1, 4, 4});
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const double want = (in.data[(2 * i) * 8 + 2 * j] + in.data[(2 * i) * 8 + 2 * j + 1] +
                                 in.data[(2 * i + 1) * 8 + 2 * j] +
                                 in.data[(2 * i + 1) * 8 + 2 * j + 1]) /
                                4.0;
            CHECK(out.data[i * 4 + j] == doctest::Approx(want).epsilon(1e-12));
        }
    // Global mean preserved when windows tile exactly.
    double mean_in = 0, mean_out = 0;
    for (double v : in.data) mean_in += v / 64.0;
    for (double v : out.data) mean_out += v / 16.0;
    CHECK(mean_in == doctest::Approx(mean_out).epsilon(1e-12));
}

TEST_CASE("adaptive_avg_pool: 6 -> 4 windows follow the floor/ceil rule") {
    // Values constant along rows: window means reduce to the 1-d case
    // [0,1,2,3,4,5] -> [0.5, 1.5, 3.5, 4.5].
    Tensor64 in(Shape{1, 6, 6});
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 6; ++x) in.data[y * 6 + x] = static_cast<double>(x);
    Tensor64 out = adaptive_avg_pool(in, 4);
    const double want[4] = {0.5, 1.5, 3.5, 4.5};
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(out.data[j] == doctest::Approx(want[j]).epsilon(1e-12));
}

TEST_CASE("adaptive_avg_pool rejects upsampling") {
    CHECK_THROWS_AS(adaptive_avg_pool(Tensor64(Shape{1, 3, 3}), 4), Error);
}

TEST_CASE("concat_channels basics") {
    Rng rng(6);
    Tensor64 a = testing::random_tensor(Shape{2, 4, 4}, rng);
    Tensor64 b = testing::random_tensor(Shape{3, 4, 4}, rng);

    const std::vector<Tensor64> single{a};
    CHECK(concat_channels(std::span<const Tensor64>(single)).data == a.data);

    const std::vector<Tensor64> both{a, b};
    Tensor64 out = concat_channels(std::span<const Tensor64>(both));
    REQUIRE(out.shape == Shape{5, 4, 4});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(out.data[i] == a.data[i]);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(out.data[a.size() + i] == b.data[i]);

    Tensor64 c(Shape{1, 3, 3});
    const std::vector<Tensor64> bad{a, c};
    CHECK_THROWS_AS(concat_channels(std::span<const Tensor64>(bad)), Error);
}

TEST_CASE("backward: sum(W * x) gives grad(W) == x") {
    Rng rng(7);
    Tensor64 w = testing::random_tensor(Shape{3, 4}, rng);
    Tensor64 x = testing::random_tensor(Shape{3, 4}, rng);
    Tape64 tape;
    tape.watch(w);
    Tensor64 loss = sum_all(mul(w, x));
    tape.backward(loss);
    CHECK(tape.grad(w) == x.data);
}

TEST_CASE("backward: dead ReLU region gives zero grads") {
    Tensor64 x(Shape{3}, {0.5, 1.0, 2.0});
    Tape64 tape;
    tape.watch(x);
    Tensor64 negabs = scale(relu(x), -1.0);  // -|x| for positive x
    Tensor64 loss = sum_all(relu(negabs));
    tape.backward(loss);
    for (double g : tape.grad(x)) CHECK(g == 0.0);
}

TEST_CASE("backward: repeated calls accumulate, zero_grad resets") {
    Tensor64 x(Shape{2}, {1.0, 2.0});
    Tape64 tape;
    tape.watch(x);
    Tensor64 loss = sum_all(mul(x, x));  // d/dx = 2x
    tape.backward(loss);
    CHECK(tape.grad(x) == std::vector<double>{2.0, 4.0});
    tape.backward(loss);
    CHECK(tape.grad(x) == std::vector<double>{4.0, 8.0});
    tape.zero_grad();
    tape.backward(loss);
    CHECK(tape.grad(x) == std::vector<double>{2.0, 4.0});
}

TEST_CASE("backward: determinism is bit-exact") {
    auto run = [] {
        Rng rng(8);
        Tensor64 in = testing::random_tensor(Shape{2, 6, 6}, rng);
        Tensor64 ker = testing::random_tensor(Shape{3, 2, 3, 3}, rng);
        Tensor64 bias = testing::random_tensor(Shape{3}, rng);
        Tape64 tape;
        tape.watch(ker);
        tape.watch(bias);
        Tensor64 loss = sum_all(relu(conv2d(in, ker, bias, Padding::Same)));
        tape.backward(loss);
        std::vector<double> all = tape.grad(ker);
        const auto& gb = tape.grad(bias);
        all.insert(all.end(), gb.begin(), gb.end());
        return all;
    };
    CHECK(run() == run());
}

TEST_CASE("backward error paths") {
    Tensor64 x(Shape{2}, {1.0, 2.0});
    Tape64 tape;
    tape.watch(x);
    Tensor64 vec = mul(x, x);
    CHECK_THROWS_AS(tape.backward(vec), Error);  // not scalar

    Tensor64 off(Shape{1}, {3.0});
    CHECK_THROWS_AS(tape.backward(off), Error);  // off-tape

    Tape64 other;
    Tensor64 y(Shape{2}, {1.0, 1.0});
    other.watch(y);
    CHECK_THROWS_AS(mul(x, y), Error);  // two tapes
}

TEST_CASE("tensor invariants") {
    CHECK_THROWS_AS(Tensor64(Shape{2, 3}, std::vector<double>(5, 0.0)), Error);
    Tensor64 t(Shape{2, 3});
    CHECK(t.size() == 6);
    CHECK_FALSE(t.on_tape());
}
