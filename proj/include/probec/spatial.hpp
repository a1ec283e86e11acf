#pragma once

#include <cstdint>

#include "probec/model.hpp"

namespace probec {

double distance(Coord a, Coord b);

// Probability that close(a, b, threshold) = true at frame t: the sum over
// coord-fact pairs (one for each entity) lying strictly closer than
// `threshold` of the product of their probabilities. Zero when either
// entity has no coord fact at t.
double close_prob(const Narrative& n, Symbol a, Symbol b, double threshold, Frame t);

// Literal |o1 - o2|, without wrap-around (10 and 350 differ by 340).
std::int64_t orientation_diff(std::int64_t o1, std::int64_t o2);

// Coord facts of `entity` at frame t.
std::vector<FactId> coord_facts(const Narrative& n, Symbol entity, Frame t);

}  // namespace probec
