#pragma once

#include "ridlab/net/discriminator.hpp"
#include "ridlab/net/generator.hpp"

#include <cstdint>
#include <vector>

namespace ridlab::net {

/// Generic curve corpus: random sinusoidal and polynomial tracks, unrelated to any radar
/// scenario. The input is the blurred, noise-corrupted raster and the target the sharp one.
struct CorpusConfig {
    int size = 128;
    int count = 160;
    int max_curves = 3;
    double sharp_spread = 1.0;         // target Gaussian width, rows
    double blur_min = 2.0;             // input Gaussian width range, rows
    double blur_max = 5.0;
    double noise_max = 0.6;            // background level relative to the curve peak
};

struct CorpusPair {
    Tensor input;
    Tensor target;
};

std::vector<CorpusPair> make_generic_corpus(const CorpusConfig& config, std::uint64_t seed);

struct PretrainConfig {
    int epochs = 10;
    int batch_size = 4;
    double learning_rate = 5e-4;
    int disc_epochs = 3;
    double disc_learning_rate = 1e-3;
    double validation_fraction = 0.2;
};

struct PretrainReport {
    double initial_val_l2 = 0.0;  // mean over samples of the pixel-summed squared error
    double final_val_l2 = 0.0;
    double disc_initial_loss = 0.0;
    double disc_final_loss = 0.0;
    double disc_accuracy = 0.0;
};

/// Mean over pairs of sum((forward_base(input) - target)^2).
double base_l2(const Generator& gen, const std::vector<CorpusPair>& pairs);

/// Fits the generator's Base group to the corpus with adapters excluded, then freezes it.
/// The adapter parameters keep their initial values. Throws PreconditionError on an empty
/// corpus or a sealed store.
PretrainReport pretrain_base(Generator& gen, ParameterStore& store,
                             const std::vector<CorpusPair>& corpus, const PretrainConfig& config,
                             std::uint64_t seed);

/// Fits the discriminator backbone as a sharp-versus-blurred classifier through a temporary
/// head, then freezes the backbone. The real head is left untouched (zero).
void pretrain_discriminator(Discriminator& disc, ParameterStore& store,
                            const std::vector<CorpusPair>& corpus, const PretrainConfig& config,
                            std::uint64_t seed, PretrainReport* report = nullptr);

}  // namespace ridlab::net
