#include "ridlab/net/pretrain.hpp"

#include "ridlab/errors.hpp"
#include "ridlab/net/optim.hpp"
#include "ridlab/tfa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ridlab::net {

namespace {

constexpr double kTwoPi = 6.283185307179586;

Tensor to_tensor(const tfa::TimeFrequencyGrid& g) {
    Tensor t(1, static_cast<int>(g.rows()), static_cast<int>(g.cols()));
    t.data = g.values();
    return t;
}

std::vector<tfa::IdealCurve> random_curves(int n, int max_curves, Rng& rng) {
    std::uniform_int_distribution<int> count(1, max_curves);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<tfa::IdealCurve> curves(count(rng));
    for (auto& c : curves) {
        const double centre = n * unit(rng);
        c.weight = 0.5 + 0.5 * unit(rng);
        c.frequency.resize(n);
        if (unit(rng) < 0.6) {
            const double amp = 0.45 * n * unit(rng);
            const double cycles = 0.3 + 2.5 * unit(rng);
            const double phase = kTwoPi * unit(rng);
            for (int t = 0; t < n; ++t)
                c.frequency[t] = centre + amp * std::sin(kTwoPi * cycles * t / n + phase);
        } else {
            const double slope = (unit(rng) - 0.5) * 1.5;
            const double curv = (unit(rng) - 0.5) * 3.0 / n;
            for (int t = 0; t < n; ++t) {
                const double u = t - 0.5 * n;
                c.frequency[t] = centre + slope * u + curv * u * u;
            }
        }
    }
    return curves;
}

void backward_l2(Generator& gen, const CorpusPair& pair, double weight) {
    GeneratorTape tape;
    const Tensor out = gen.forward(pair.input, &tape);
    Tensor grad = out;
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad.data[i] = 2.0 * weight * (out.data[i] - pair.target.data[i]);
    gen.backward(tape, grad);
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

double bce(double logit, bool positive) {
    // -log sigmoid(+-logit), evaluated stably
    const double z = positive ? logit : -logit;
    return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

}  // namespace

std::vector<CorpusPair> make_generic_corpus(const CorpusConfig& config, std::uint64_t seed) {
    require(config.size >= 4 && config.count >= 1 && config.max_curves >= 1,
            "corpus needs size >= 4, count >= 1 and at least one curve");
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    const int n = config.size;
    const tfa::Axis axis{0.0, 1.0};
    std::vector<CorpusPair> corpus;
    corpus.reserve(config.count);
    for (int k = 0; k < config.count; ++k) {
        const auto curves = random_curves(n, config.max_curves, rng);
        const double blur = config.blur_min + (config.blur_max - config.blur_min) * unit(rng);
        auto sharp = tfa::rasterize_ideal_tfr(curves, n, axis, axis, config.sharp_spread, true).grid;
        auto soft = tfa::rasterize_ideal_tfr(curves, n, axis, axis, blur, true).grid;
        // smoothed exponential background, the texture of a noise-only spectrogram
        std::vector<double> noise(static_cast<std::size_t>(n) * n);
        for (double& v : noise) v = expo(rng);
        const double level = config.noise_max * unit(rng);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double acc = 0.0;
                for (int dc = -1; dc <= 1; ++dc)
                    acc += noise[static_cast<std::size_t>(r) * n + (c + dc + n) % n];
                soft.at(r, c) += level * acc / 3.0;
            }
        corpus.push_back({to_tensor(tfa::normalize_unit_max(soft)), to_tensor(sharp)});
    }
    return corpus;
}

double base_l2(const Generator& gen, const std::vector<CorpusPair>& pairs) {
    require(!pairs.empty(), "empty corpus");
    double total = 0.0;
    for (const auto& p : pairs) {
        const Tensor out = gen.forward_base(p.input);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = out.data[i] - p.target.data[i];
            total += d * d;
        }
    }
    return total / static_cast<double>(pairs.size());
}

PretrainReport pretrain_base(Generator& gen, ParameterStore& store,
                             const std::vector<CorpusPair>& corpus, const PretrainConfig& config,
                             std::uint64_t seed) {
    require(!corpus.empty(), "pretraining corpus is empty");
    require(!store.sealed(), "pretraining requires an unsealed store");
    require(config.batch_size >= 1 && config.epochs >= 0, "invalid pretraining schedule");
    const std::size_t n_val = std::min(corpus.size() - 1,
                                       static_cast<std::size_t>(config.validation_fraction * corpus.size()));
    const std::vector<CorpusPair> val(corpus.end() - static_cast<std::ptrdiff_t>(n_val), corpus.end());
    const std::vector<CorpusPair> train(corpus.begin(), corpus.end() - static_cast<std::ptrdiff_t>(n_val));

    PretrainReport report;
    const auto& monitor = val.empty() ? train : val;
    report.initial_val_l2 = base_l2(gen, monitor);

    const std::string& prefix = gen.prefix();
    store.set_group_trainable(prefix, ParamGroup::Adapter, false);
    store.set_group_trainable(prefix, ParamGroup::Base, true);
    AdamW opt(store.trainable(prefix), AdamWConfig{config.learning_rate, 0.9, 0.999, 1e-8, 0.0});
    Rng rng(seed);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = shuffled(train.size(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            opt.zero_grad();
            for (std::size_t i = start; i < stop; ++i)
                backward_l2(gen, train[order[i]], 1.0 / static_cast<double>(stop - start));
            opt.step();
        }
    }
    store.set_group_trainable(prefix, ParamGroup::Base, false);
    store.set_group_trainable(prefix, ParamGroup::Adapter, true);
    report.final_val_l2 = base_l2(gen, monitor);
    return report;
}

void pretrain_discriminator(Discriminator& disc, ParameterStore& store,
                            const std::vector<CorpusPair>& corpus, const PretrainConfig& config,
                            std::uint64_t seed, PretrainReport* report) {
    require(!corpus.empty(), "pretraining corpus is empty");
    require(!store.sealed(), "pretraining requires an unsealed store");
    const std::string& prefix = disc.prefix();
    ParameterStore scratch;
    Linear probe(scratch, "probe", 1, disc.config().feature_dim(), ParamGroup::Head);
    Rng rng(seed);
    fill_normal(probe.weight(), 0.01, rng);

    store.set_group_trainable(prefix, ParamGroup::Base, true);
    std::vector<Parameter*> params = store.trainable(prefix);
    params.erase(std::remove_if(params.begin(), params.end(),
                                [](const Parameter* p) { return p->group != ParamGroup::Base; }),
                 params.end());
    params.push_back(&probe.weight());
    params.push_back(&probe.bias());
    AdamW opt(params, AdamWConfig{config.disc_learning_rate, 0.9, 0.999, 1e-8, 0.0});

    auto sample = [&](std::size_t idx) -> std::pair<const Tensor*, bool> {
        const auto& p = corpus[idx / 2];
        return idx % 2 == 0 ? std::pair{&p.target, true} : std::pair{&p.input, false};
    };
    auto evaluate = [&](double* accuracy) {
        double loss = 0.0;
        int correct = 0;
        for (std::size_t i = 0; i < 2 * corpus.size(); ++i) {
            const auto [x, positive] = sample(i);
            const double logit = probe.forward(disc.features(*x))(0, 0);
            loss += bce(logit, positive);
            correct += (logit > 0.0) == positive;
        }
        if (accuracy) *accuracy = correct / (2.0 * corpus.size());
        return loss / (2.0 * corpus.size());
    };
    const double initial = evaluate(nullptr);
    for (int epoch = 0; epoch < config.disc_epochs; ++epoch) {
        const auto order = shuffled(2 * corpus.size(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            opt.zero_grad();
            for (std::size_t i = start; i < stop; ++i) {
                const auto [x, positive] = sample(order[i]);
                DiscriminatorTape tape;
                const MatD feature = disc.features(*x, &tape);
                const double logit = probe.forward(feature)(0, 0);
                // d bce / d logit = sigmoid(logit) - label
                MatD dy(1, 1);
                dy(0, 0) = (sigmoid(logit) - (positive ? 1.0 : 0.0)) / static_cast<double>(stop - start);
                disc.backward_features(tape, probe.backward(feature, dy));
            }
            opt.step();
        }
    }
    store.set_group_trainable(prefix, ParamGroup::Base, false);
    if (report) {
        report->disc_initial_loss = initial;
        report->disc_final_loss = evaluate(&report->disc_accuracy);
    }
}

}  // namespace ridlab::net
