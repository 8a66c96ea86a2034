#pragma once

#include "ridlab/net/discriminator.hpp"
#include "ridlab/net/generator.hpp"
#include "ridlab/net/optim.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ridlab::train {

using net::Tensor;

struct TrainConfig {
    double alpha = 0.5;
    double beta = 0.5;
    double learning_rate = 5e-6;
    double weight_decay = 0.01;
    int epochs = 100;
    int batch_size = 2;
    std::uint64_t seed = 0;
    double clamp_eps = 1e-6;

    void validate() const;
    /// Defaults with the learning rate raised to 1e-4 for the small surrogate network.
    static TrainConfig desk();
};

struct TrainingPair {
    Tensor s;  // low-resolution input raster, 1 x H x W
    Tensor q;  // high-resolution target raster
    std::string scenario_id;
    double snr_db = 0.0;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// floor(0.8 n) training indices and the remainder for testing, from a seeded permutation.
/// Throws PreconditionError for fewer than 5 pairs.
Split split_dataset(std::size_t n, std::uint64_t seed);

struct LossTerms {
    double l2 = 0.0;   // mean over the batch of the pixel-summed squared error
    double adv = 0.0;  // beta * mean log(1 - D(G(S)))
    double total() const { return l2 + adv; }
};

double clamp_probability(double p, double eps);

/// Generator objective on a batch: ||G(S) - Q||^2 (sum over pixels, mean over batch)
/// + beta * log(1 - D(G(S))). Outputs are given; nothing is differentiated.
LossTerms generator_loss(const std::vector<Tensor>& outputs, const std::vector<Tensor>& targets,
                         const std::vector<double>& disc_fake, const TrainConfig& config);

/// alpha * mean log D(Q) + beta * mean log(1 - D(G(S))), to be maximized.
double discriminator_loss(const std::vector<double>& disc_real, const std::vector<double>& disc_fake,
                          const TrainConfig& config);

struct HistoryRow {
    int epoch = 0;
    double gen_l2 = 0.0;
    double gen_adv = 0.0;
    double disc_loss = 0.0;
    double test_l2 = 0.0;
};

struct EpochEval {
    LossTerms gen;
    double disc = 0.0;
};

/// Pooled discriminator features of every target Q, indexed like `pairs`.
std::vector<net::MatD> target_features(const net::Discriminator& disc,
                                       const std::vector<TrainingPair>& pairs);

/// Evaluates both objectives over `indices` without updating anything. `real_features`, when
/// given, replaces the backbone pass on Q and is only valid while the backbone is frozen.
EpochEval evaluate(const net::Generator& gen, const net::Discriminator& disc,
                   const std::vector<TrainingPair>& pairs, const std::vector<std::size_t>& indices,
                   const TrainConfig& config,
                   const std::vector<net::MatD>* real_features = nullptr);

/// Alternating optimization: per batch one generator descent step on the adapter parameters,
/// then one discriminator ascent step on the head. History row 0 describes the initial state.
class Trainer {
  public:
    Trainer(net::Generator& gen, net::Discriminator& disc, net::ParameterStore& store,
            const TrainConfig& config);

    /// Runs one batch; returns the generator loss terms measured before the update.
    LossTerms step(const std::vector<const TrainingPair*>& batch);
    std::vector<HistoryRow> fit(const std::vector<TrainingPair>& pairs, const Split& split,
                                const std::function<void(const HistoryRow&)>& on_epoch = {});

  private:
    LossTerms run_step(const std::vector<const TrainingPair*>& batch,
                       const std::vector<const net::MatD*>& real_features);

    net::Generator& gen_;
    net::Discriminator& disc_;
    TrainConfig config_;
    net::AdamW gen_opt_;
    net::AdamW disc_opt_;
};

std::string history_csv(const std::vector<HistoryRow>& history);

}  // namespace ridlab::train
