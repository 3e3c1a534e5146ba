#pragma once

#include <cstdint>
#include <string>

#include "condlaw/model.hpp"

namespace condlaw {

/// Y as a function of X (or independent of it). Parsed from
///   empty                      1{X = 0}
///   excess                     (X - 1)_+
///   identity                   X
///   constant                   0
///   equals:K                   1{X = K}
///   displacement               total displacement of X - 1 balls in X cells
///   independent-bernoulli:q    Bernoulli(q) independent of X
/// Throws DomainError on anything else.
PairModel attach_mark(IntegerLaw x_law, const std::string& mark);

/// Poisson(lambda) urn counts, Y = 1{X = 0}: empty urns among N when k balls
/// are thrown uniformly.
PairModel occupancy_model(double lambda);

/// Borel(lambda) block lengths, Y = in-block displacement of linear probing.
/// Exact y-laws are available for X <= 9.
PairModel hashing_model(double lambda);

/// Borel(lambda) tree sizes, Y = 1{X = K}: trees of size K in a random forest.
PairModel forest_model(double lambda, std::int64_t tree_size);

/// Family name (poisson, borel, geometric, occupancy, hashing, forest) plus
/// parameter and mark. The named applications fix their mark.
PairModel make_model(const std::string& family, double parameter, const std::string& mark);

}  // namespace condlaw
