#pragma once

#include <cstdint>
#include <string_view>

#include "probec/model.hpp"

namespace probec {

enum class NoiseLevel { Smooth, Intermediate, Strong };

const char* to_string(NoiseLevel level);
// "smooth", "intermediate" or "strong"; InvalidArgument otherwise.
NoiseLevel parse_noise_level(std::string_view name);

struct NoiseConfig {
  NoiseLevel level = NoiseLevel::Smooth;
  double gamma_mean = 1.0;
  // Share of walking frames that receive a spurious walker (strong only).
  double spurious_fraction = 0.5;
  std::uint64_t seed = 0;
};

// Replaces fact probabilities with noisy ones. Each affected fact gets
// p = exp(-x) with x ~ Gamma(shape 2, scale gamma_mean / 2).
//
//   smooth        STA facts
//   intermediate  STA facts, plus independent draws for coord and
//                 orientation facts
//   strong        intermediate, plus spurious walkers: at a uniformly chosen
//                 share of the frames holding a walking STA, a fresh entity
//                 ghostN walks near the first walker, with probability 1 - p
//                 where p is that walker's noisy probability
//
// Tracker events and initially facts keep their probabilities. The random
// stream of each fact does not depend on gamma_mean, so a larger mean
// lowers every probability for the same seed.
Narrative inject(const Narrative& n, const NoiseConfig& cfg);

// Keeps facts with probability above `threshold`, made certain.
Narrative filter_for_crisp(const Narrative& n, double threshold);

// Entities introduced by inject() are named ghost0, ghost1, ...
bool is_spurious_entity(Symbol entity);
bool is_spurious(const ProbFact& f);

// Seed of an independent stream derived from `master` and `stream`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace probec
