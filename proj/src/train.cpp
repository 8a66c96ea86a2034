#include "ridlab/train.hpp"

#include "ridlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

namespace ridlab::train {

namespace {

double pixel_l2(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw PreconditionError("output and target shapes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s;
}

void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw NumericalError("non-finite " + what);
}

net::AdamWConfig optimizer_config(const TrainConfig& c) {
    net::AdamWConfig o;
    o.learning_rate = c.learning_rate;
    o.weight_decay = c.weight_decay;
    return o;
}

// d/dlogit of log(clamp(sigmoid(logit))); zero where the clamp is active.
double dlog_p(double p, double eps) { return (p < eps || p > 1.0 - eps) ? 0.0 : 1.0 - p; }
double dlog_one_minus_p(double p, double eps) { return (p < eps || p > 1.0 - eps) ? 0.0 : -p; }

}  // namespace

void TrainConfig::validate() const {
    require(alpha >= 0.0 && beta >= 0.0, "alpha and beta must be non-negative");
    require(clamp_eps > 0.0 && clamp_eps < 0.5, "clamp_eps must lie in (0, 0.5)");
    require(learning_rate > 0.0, "learning rate must be positive");
    require(weight_decay >= 0.0, "weight decay must be non-negative");
    require(epochs >= 0, "epochs must be non-negative");
    require(batch_size >= 1, "batch size must be at least 1");
}

TrainConfig TrainConfig::desk() {
    TrainConfig c;
    c.learning_rate = 1e-4;
    return c;
}

Split split_dataset(std::size_t n, std::uint64_t seed) {
    require(n >= 5, "dataset split needs at least 5 pairs");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = (8 * n) / 10;
    Split s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return s;
}

double clamp_probability(double p, double eps) { return std::clamp(p, eps, 1.0 - eps); }

LossTerms generator_loss(const std::vector<Tensor>& outputs, const std::vector<Tensor>& targets,
                         const std::vector<double>& disc_fake, const TrainConfig& config) {
    require(!outputs.empty() && outputs.size() == targets.size() && outputs.size() == disc_fake.size(),
            "generator loss needs matching non-empty batches");
    LossTerms t;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        t.l2 += pixel_l2(outputs[i], targets[i]);
        t.adv += std::log(1.0 - clamp_probability(disc_fake[i], config.clamp_eps));
    }
    const double n = static_cast<double>(outputs.size());
    t.l2 /= n;
    t.adv *= config.beta / n;
    require_finite(t.total(), "generator loss");
    return t;
}

double discriminator_loss(const std::vector<double>& disc_real, const std::vector<double>& disc_fake,
                          const TrainConfig& config) {
    require(!disc_real.empty() && !disc_fake.empty(), "discriminator loss needs non-empty batches");
    double real = 0.0, fake = 0.0;
    for (double p : disc_real) real += std::log(clamp_probability(p, config.clamp_eps));
    for (double p : disc_fake) fake += std::log(1.0 - clamp_probability(p, config.clamp_eps));
    const double v = config.alpha * real / static_cast<double>(disc_real.size()) +
                     config.beta * fake / static_cast<double>(disc_fake.size());
    require_finite(v, "discriminator loss");
    return v;
}

std::vector<net::MatD> target_features(const net::Discriminator& disc,
                                       const std::vector<TrainingPair>& pairs) {
    std::vector<net::MatD> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(disc.features(p.q));
    return out;
}

EpochEval evaluate(const net::Generator& gen, const net::Discriminator& disc,
                   const std::vector<TrainingPair>& pairs, const std::vector<std::size_t>& indices,
                   const TrainConfig& config, const std::vector<net::MatD>* real_features) {
    require(!indices.empty(), "nothing to evaluate");
    require(!real_features || real_features->size() == pairs.size(),
            "feature cache does not match the pair list");
    std::vector<Tensor> outputs, targets;
    std::vector<double> real, fake;
    for (std::size_t i : indices) {
        outputs.push_back(gen.forward(pairs.at(i).s));
        targets.push_back(pairs[i].q);
        fake.push_back(disc.forward(outputs.back()).prob);
        real.push_back(real_features ? disc.classify((*real_features)[i]).prob
                                     : disc.forward(pairs[i].q).prob);
    }
    EpochEval e;
    e.gen = generator_loss(outputs, targets, fake, config);
    e.disc = discriminator_loss(real, fake, config);
    return e;
}

Trainer::Trainer(net::Generator& gen, net::Discriminator& disc, net::ParameterStore& store,
                 const TrainConfig& config)
    : gen_(gen), disc_(disc), config_(config),
      gen_opt_(store.trainable(gen.prefix()), optimizer_config(config)),
      disc_opt_(store.trainable(disc.prefix()), optimizer_config(config)) {
    config_.validate();
    require(store.sealed(), "training requires a sealed (pretrained) base");
}

LossTerms Trainer::step(const std::vector<const TrainingPair*>& batch) {
    return run_step(batch, {});
}

LossTerms Trainer::run_step(const std::vector<const TrainingPair*>& batch,
                            const std::vector<const net::MatD*>& real_features) {
    require(!batch.empty(), "empty batch");
    const double n = static_cast<double>(batch.size());
    const double eps = config_.clamp_eps;

    // generator descent on ||G(S) - Q||^2 + beta log(1 - D(G(S)))
    gen_opt_.zero_grad();
    std::vector<Tensor> outputs, targets;
    std::vector<double> fake;
    std::vector<net::DiscriminatorTape> fake_tapes(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const TrainingPair* p = batch[k];
        net::GeneratorTape gtape;
        Tensor out = gen_.forward(p->s, &gtape);
        net::DiscriminatorTape& dtape = fake_tapes[k];
        const double prob = disc_.forward(out, &dtape).prob;
        Tensor grad = config_.beta > 0.0
                          ? disc_.backward(dtape, config_.beta * dlog_one_minus_p(prob, eps) / n)
                          : Tensor(out.channels, out.height, out.width);
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad.data[i] += 2.0 * (out.data[i] - p->q.data[i]) / n;
        gen_.backward(gtape, grad);
        outputs.push_back(std::move(out));
        targets.push_back(p->q);
        fake.push_back(prob);
    }
    const LossTerms before = generator_loss(outputs, targets, fake, config_);
    gen_opt_.step();

    // discriminator ascent on alpha log D(Q) + beta log(1 - D(G(S))), G(S) held fixed;
    // D is unchanged since the generator pass, so its tapes on G(S) are still exact
    disc_opt_.zero_grad();
    const bool cached = !real_features.empty() && disc_.backbone_frozen();
    for (std::size_t k = 0; k < batch.size(); ++k) {
        net::DiscriminatorTape tape;
        const double pr = cached ? disc_.classify(*real_features[k], &tape).prob
                                 : disc_.forward(batch[k]->q, &tape).prob;
        disc_.backward(tape, -config_.alpha * dlog_p(pr, eps) / n, false);
        disc_.backward(fake_tapes[k], -config_.beta * dlog_one_minus_p(fake[k], eps) / n, false);
    }
    disc_opt_.step();
    return before;
}

std::vector<HistoryRow> Trainer::fit(const std::vector<TrainingPair>& pairs, const Split& split,
                                     const std::function<void(const HistoryRow&)>& on_epoch) {
    require(!pairs.empty() && !split.train.empty(), "training set is empty");
    std::mt19937_64 rng(config_.seed);
    std::vector<HistoryRow> history;
    std::vector<net::MatD> features;
    if (disc_.backbone_frozen()) features = target_features(disc_, pairs);
    const auto* cache = features.empty() ? nullptr : &features;
    auto record = [&](int epoch) {
        const EpochEval tr = evaluate(gen_, disc_, pairs, split.train, config_, cache);
        HistoryRow row{epoch, tr.gen.l2, tr.gen.adv, tr.disc, 0.0};
        if (!split.test.empty())
            row.test_l2 = evaluate(gen_, disc_, pairs, split.test, config_, cache).gen.l2;
        history.push_back(row);
        if (on_epoch) on_epoch(row);
    };
    record(0);
    std::vector<std::size_t> order = split.train;
    for (int epoch = 1; epoch <= config_.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config_.batch_size));
            std::vector<const TrainingPair*> batch;
            std::vector<const net::MatD*> real;
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(&pairs.at(order[i]));
                if (cache) real.push_back(&features[order[i]]);
            }
            run_step(batch, real);
        }
        record(epoch);
    }
    return history;
}

std::string history_csv(const std::vector<HistoryRow>& history) {
    std::ostringstream out;
    out << "epoch,gen_l2,gen_adv,disc_loss,test_l2\n";
    char line[256];
    for (const auto& r : history) {
        std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.gen_l2, r.gen_adv,
                      r.disc_loss, r.test_l2);
        out << line;
    }
    return out.str();
}

}  // namespace ridlab::train
