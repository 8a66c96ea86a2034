#include <doctest.h>

#include "oracles.hpp"

#include "ridlab/errors.hpp"
#include "ridlab/io.hpp"
#include "ridlab/net/checkpoint.hpp"
#include "ridlab/net/optim.hpp"
#include "ridlab/net/pretrain.hpp"

#include <filesystem>

using namespace ridlab;
using namespace ridlab::net;

namespace {

GeneratorConfig toy_gen(int size) {
    GeneratorConfig c;
    c.input_size = size;
    c.channels = {3, 4};
    c.residual_blocks = 1;
    c.lora_rank = 2;
    return c;
}

DiscriminatorConfig toy_disc(int size) {
    DiscriminatorConfig c;
    c.input_size = size;
    c.channels = {2, 3, 3, 4};
    return c;
}

// Direct zero-padded strided convolution, out[o](y, x) = b[o] + sum w[o][c][ky][kx] in[c](ys, xs).
Tensor naive_conv(const Tensor& x, const MatD& w, const Eigen::VectorXd& b, int k, int stride) {
    const int p = k / 2;
    const int oh = (x.height + 2 * p - k) / stride + 1, ow = (x.width + 2 * p - k) / stride + 1;
    Tensor y(static_cast<int>(w.rows()), oh, ow);
    for (int o = 0; o < w.rows(); ++o)
        for (int yy = 0; yy < oh; ++yy)
            for (int xx = 0; xx < ow; ++xx) {
                double acc = b[o];
                for (int c = 0; c < x.channels; ++c)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int iy = yy * stride + ky - p, ix = xx * stride + kx - p;
                            if (iy < 0 || ix < 0 || iy >= x.height || ix >= x.width) continue;
                            acc += w(o, (c * k + ky) * k + kx) * x.at(c, iy, ix);
                        }
                y.at(o, yy, xx) = acc;
            }
    return y;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("LoRA forward equals the dense merged weight") {
    ParameterStore store;
    Rng rng(1);
    LoraLinear layer(store, "l", 5, 7, 2, 0.5, 0.01, rng);
    std::mt19937_64 g(2);
    oracle::randomize(layer.base().weight(), 1.0, g);
    oracle::randomize(layer.base().bias(), 1.0, g);
    oracle::randomize(layer.lora_a(), 1.0, g);
    oracle::randomize(layer.lora_b(), 1.0, g);
    const MatD w0 = layer.base().weight().matrix().cast<double>();
    const MatD a = layer.lora_a().matrix().cast<double>();
    const MatD b = layer.lora_b().matrix().cast<double>();
    const Eigen::VectorXd bias = Eigen::Map<const Eigen::VectorXf>(layer.base().bias().value.data(), 5).cast<double>();
    const MatD x = MatD::Random(7, 3);
    MatD want = (w0 + 0.5 * b * a) * x;
    want.colwise() += bias;
    CHECK((layer.forward(x, nullptr) - want).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(layer.rank() == 2);
    CHECK(store.get("l.lora_b").shape == std::vector<int>{5, 2});
}

TEST_CASE("LoRA B starts at zero so the adapted layer equals its base") {
    ParameterStore store;
    Rng rng(3);
    LoraLinear layer(store, "l", 4, 6, 3, 1.0, 0.01, rng);
    for (float v : layer.lora_b().value) CHECK(v == 0.0f);
    double sq = 0.0;
    for (float v : layer.lora_a().value) sq += double(v) * v;
    CHECK(std::sqrt(sq / layer.lora_a().size()) == doctest::Approx(0.01).epsilon(0.5));
    const MatD x = MatD::Random(6, 4);
    CHECK((layer.forward(x, nullptr) - layer.forward_base(x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convolutions match a direct nested-loop convolution") {
    ParameterStore store;
    Rng rng(4);
    std::mt19937_64 g(5);
    for (int stride : {1, 2}) {
        Conv2d conv(store, "c" + std::to_string(stride), 2, 3, 3, stride, ParamGroup::Base);
        oracle::randomize(conv.core().weight(), 1.0, g);
        oracle::randomize(conv.core().bias(), 1.0, g);
        const Tensor x = oracle::random_tensor(2, 7, 6, g, -1, 1);
        const Tensor y = conv.forward(x, nullptr);
        const MatD w = conv.core().weight().matrix().cast<double>();
        const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXf>(conv.core().bias().value.data(), 3).cast<double>();
        const Tensor want = naive_conv(x, w, b, 3, stride);
        REQUIRE(y.same_shape(want));
        for (std::size_t i = 0; i < y.data.size(); ++i) CHECK(y.data[i] == doctest::Approx(want.data[i]).epsilon(1e-9));
    }
}

TEST_CASE("im2col/col2im and nearest resize are adjoint pairs") {
    std::mt19937_64 g(6);
    const ConvShape s{2, 5, 6, 3, 2};
    const Tensor x = oracle::random_tensor(2, 5, 6, g);
    const MatD cols = im2col(x, s);
    const MatD c = MatD::Random(cols.rows(), cols.cols());
    const Tensor back = col2im(c, s);
    CHECK((cols.array() * c.array()).sum() == doctest::Approx(dot(x, back)).epsilon(1e-12));

    const Tensor a = oracle::random_tensor(3, 3, 5, g);
    const Tensor big = oracle::random_tensor(3, 7, 9, g);
    CHECK(dot(resize_nearest(a, 7, 9), big) == doctest::Approx(dot(a, resize_nearest_backward(big, 3, 5))).epsilon(1e-12));
}

TEST_CASE("zero convs output exactly zero at initialization") {
    ParameterStore store;
    ZeroConv z(store, "z", 3, 3);
    std::mt19937_64 g(7);
    const Tensor y = z.forward(oracle::random_tensor(3, 4, 4, g));
    for (double v : y.data) CHECK(v == 0.0);
    CHECK(store.get("z.weight").trainable);
}

TEST_CASE("fresh generator reproduces its frozen base exactly") {
    ParameterStore store;
    Generator gen(store, toy_gen(16), 9);
    std::mt19937_64 g(10);
    for (int k = 0; k < 5; ++k) {
        const Tensor x = oracle::random_tensor(1, 16, 16, g);
        const Tensor a = gen.forward(x), b = gen.forward_base(x);
        for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(std::abs(a.data[i] - b.data[i]) <= 1e-12);
    }
    CHECK_THROWS_AS(gen.forward(Tensor(1, 8, 8)), PreconditionError);
}

TEST_CASE("generator objective gradients match central differences") {
    ParameterStore store;
    Generator gen(store, toy_gen(8), 12);
    Discriminator disc(store, toy_disc(8), 13);
    std::mt19937_64 g(14);
    for (auto* p : store.trainable()) oracle::randomize(*p, 0.2, g);  // move off the zero init
    const Tensor s = oracle::random_tensor(1, 8, 8, g);
    const Tensor q = oracle::random_tensor(1, 8, 8, g);
    const double beta = 0.5;
    auto loss = [&] {
        const Tensor out = gen.forward(s);
        return oracle::generator_objective({out}, {q}, {disc.forward(out).prob}, beta, 1e-6);
    };
    store.zero_grad();
    GeneratorTape tape;
    const Tensor out = gen.forward(s, &tape);
    DiscriminatorTape dt;
    const auto d = disc.forward(out, &dt);
    Tensor grad = disc.backward(dt, -beta * d.prob);
    for (std::size_t i = 0; i < grad.data.size(); ++i) grad.data[i] += 2.0 * (out.data[i] - q.data[i]);
    gen.backward(tape, grad);
    const auto result = oracle::finite_difference(store.trainable("gen"), loss, 1e-4, 1e-4, 1e-4);
    CHECK(result.checked > 100);
    CHECK(result.failed == 0);
}

TEST_CASE("parameter partition and sealing") {
    ParameterStore store;
    Generator gen(store, GeneratorConfig{}, 1);
    Discriminator disc(store, DiscriminatorConfig{}, 2);
    const auto part = store.partition();
    const double ratio = double(part.trainable_count) / double(part.trainable_count + part.frozen_count);
    CHECK(ratio < 0.05);
    std::size_t head = 0;
    for (auto* p : store.trainable("disc")) head += p->size();
    CHECK(head == static_cast<std::size_t>(DiscriminatorConfig{}.feature_dim() + 1));
    for (const auto& p : store.all()) CHECK(p->trainable == (p->group != ParamGroup::Base));

    const auto digest = store.frozen_digest();
    store.seal();
    CHECK_THROWS_AS(store.set_trainable(store.get("gen.enc1.weight"), true), PreconditionError);
    CHECK(store.frozen_digest() == digest);
    store.get("gen.enc1.weight").value[0] += 1.0f;
    CHECK(store.frozen_digest() != digest);
}

TEST_CASE("discriminator starts undecided and back-propagates into its head only") {
    ParameterStore store;
    Discriminator disc(store, toy_disc(16), 3);
    std::mt19937_64 g(4);
    const auto out = disc.forward(oracle::random_tensor(1, 16, 16, g));
    CHECK(out.prob == doctest::Approx(0.5));
    CHECK(out.logit == 0.0);
    DiscriminatorTape tape;
    disc.forward(oracle::random_tensor(1, 16, 16, g), &tape);
    CHECK(disc.backward(tape, 1.0, false).size() == 0);
    CHECK(store.get("disc.head.bias").grad[0] == doctest::Approx(1.0));
}

TEST_CASE("AdamW closed-form steps") {
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    std::vector<float> p{1.0f, -2.0f, 0.5f};
    AdamWMoments st;
    adamw_step(p, {0.0, 0.0, 0.0}, st, 1, cfg);
    CHECK(p == std::vector<float>{1.0f, -2.0f, 0.5f});

    cfg.learning_rate = 0.1;
    AdamWMoments st2;
    adamw_step(p, {1.0, 1.0, 1.0}, st2, 1, cfg);
    CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(-2.1).epsilon(1e-6));

    cfg.weight_decay = 0.5;
    std::vector<float> q{2.0f, -4.0f};
    AdamWMoments st3;
    adamw_step(q, {0.0, 0.0}, st3, 1, cfg);
    CHECK(q[0] == doctest::Approx(2.0 * (1 - 0.1 * 0.5)));
    CHECK(q[1] == doctest::Approx(-4.0 * (1 - 0.1 * 0.5)));

    // second step against a hand-rolled recurrence
    cfg = AdamWConfig{};
    cfg.learning_rate = 0.01;
    std::vector<float> r{0.3f};
    AdamWMoments st4;
    adamw_step(r, {0.5}, st4, 1, cfg);
    adamw_step(r, {-0.2}, st4, 2, cfg);
    double x = 0.3, m = 0.0, v = 0.0;
    const double gs[2] = {0.5, -0.2};
    for (int t = 1; t <= 2; ++t) {
        x = static_cast<float>(x * (1 - cfg.learning_rate * cfg.weight_decay));
        m = 0.9 * m + 0.1 * gs[t - 1];
        v = 0.999 * v + 0.001 * gs[t - 1] * gs[t - 1];
        const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
        x = static_cast<float>(x - cfg.learning_rate * mh / (std::sqrt(vh) + 1e-8));
    }
    CHECK(r[0] == doctest::Approx(x).epsilon(1e-6));
    CHECK_THROWS_AS(adamw_step(r, {1.0, 2.0}, st4, 3, cfg), PreconditionError);

    ParameterStore store;
    auto& frozen = store.add("w", {2}, ParamGroup::Base);
    CHECK_THROWS_AS(AdamW({&frozen}, cfg), PreconditionError);
}

TEST_CASE("checkpoints round-trip and reject mismatched networks") {
    ParameterStore a;
    Generator gen(a, toy_gen(8), 5);
    std::mt19937_64 g(6);
    for (const auto& p : a.all()) oracle::randomize(*p, 1.0, g);
    const std::string bytes = encode_checkpoint(a);
    CHECK(bytes.substr(0, 4) == "LSDW");

    ParameterStore b;
    Generator other(b, toy_gen(8), 99);
    apply_checkpoint(decode_checkpoint(bytes), b);
    CHECK(encode_checkpoint(b) == bytes);

    ParameterStore c;
    auto wide = toy_gen(8);
    wide.channels = {3, 5};
    Generator mismatch(c, wide, 1);
    CHECK_THROWS_AS(apply_checkpoint(decode_checkpoint(bytes), c), PreconditionError);
    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), MissingInputError);

    const auto path = std::filesystem::temp_directory_path() / "ridlab_ckpt_test.lsdw";
    save_checkpoint(path, a);
    CHECK(io::read_file(path) == bytes);
    ParameterStore d;
    Generator again(d, toy_gen(8), 7);
    load_checkpoint(path, d, "gen.");
    CHECK(encode_checkpoint(d) == bytes);
    std::filesystem::remove(path);
}

TEST_CASE("generic corpus is seeded and pretraining fits the base only") {
    CorpusConfig cc;
    cc.size = 16;
    cc.count = 12;
    const auto c1 = make_generic_corpus(cc, 3);
    const auto c2 = make_generic_corpus(cc, 3);
    REQUIRE(c1.size() == 12);
    CHECK(c1[5].input.data == c2[5].input.data);
    for (const auto& p : c1) {
        CHECK(*std::max_element(p.input.data.begin(), p.input.data.end()) == doctest::Approx(1.0));
        CHECK(*std::max_element(p.target.data.begin(), p.target.data.end()) == doctest::Approx(1.0));
    }

    ParameterStore store;
    Generator gen(store, toy_gen(16), 4);
    Discriminator disc(store, toy_disc(16), 5);
    const std::string adapters = encode_checkpoint(store, "gen.enc1.lora");
    PretrainConfig pc;
    pc.epochs = 3;
    pc.learning_rate = 2e-3;
    const double before = base_l2(gen, c1);
    const auto report = pretrain_base(gen, store, c1, pc, 6);
    pretrain_discriminator(disc, store, c1, pc, 7);
    CHECK(base_l2(gen, c1) < before);
    CHECK(std::isfinite(report.final_val_l2));
    CHECK(encode_checkpoint(store, "gen.enc1.lora") == adapters);
    for (const auto& p : store.all()) {
        CHECK(p->trainable == (p->group != ParamGroup::Base));
        if (p->name.starts_with("disc.head")) {
            for (float v : p->value) CHECK(v == 0.0f);
        }
    }
    store.seal();
    CHECK_THROWS_AS(pretrain_base(gen, store, c1, pc, 6), PreconditionError);
}

}
