#include "condlaw/models.hpp"

#include <string>

#include "condlaw/errors.hpp"
#include "condlaw/hashing.hpp"

namespace condlaw {

namespace {

YAtoms point(std::int64_t value) { return {{value}, {1.0}}; }

std::int64_t parse_suffix_int(const std::string& mark, std::size_t colon) {
  try {
    std::size_t used = 0;
    const auto value = std::stoll(mark.substr(colon + 1), &used);
    if (used + colon + 1 != mark.size()) throw std::invalid_argument(mark);
    return value;
  } catch (const std::exception&) {
    throw DomainError("mark '" + mark + "': expected an integer after ':'");
  }
}

}  // namespace

PairModel attach_mark(IntegerLaw x_law, const std::string& mark) {
  PairModel model;
  model.x_law = std::move(x_law);
  model.label = model.x_law.describe() + " / " + mark;

  auto deterministic = [&model](auto fn) {
    model.y_exact = [fn](std::int64_t x) { return point(fn(x)); };
    model.y_sample = [fn](std::int64_t x, Rng&) { return fn(x); };
    model.y_mean = [fn](std::int64_t x) { return static_cast<double>(fn(x)); };
  };

  if (mark == "empty") {
    deterministic([](std::int64_t x) -> std::int64_t { return x == 0 ? 1 : 0; });
  } else if (mark == "excess") {
    deterministic([](std::int64_t x) -> std::int64_t { return x > 1 ? x - 1 : 0; });
  } else if (mark == "identity") {
    deterministic([](std::int64_t x) { return x; });
  } else if (mark == "constant") {
    deterministic([](std::int64_t) -> std::int64_t { return 0; });
  } else if (mark.rfind("equals:", 0) == 0) {
    const std::int64_t k = parse_suffix_int(mark, 6);
    deterministic([k](std::int64_t x) -> std::int64_t { return x == k ? 1 : 0; });
  } else if (mark == "displacement") {
    model.exact_limit = 9;
    model.y_exact = [](std::int64_t x) {
      if (x <= 1) return point(0);
      const auto& law = hashing::displacement_law(x - 1);
      YAtoms atoms;
      for (std::size_t d = 0; d < law.counts.size(); ++d) {
        if (law.counts[d] == 0) continue;
        atoms.numerators.push_back(static_cast<std::int64_t>(d));
        atoms.probs.push_back(law.probability(static_cast<std::int64_t>(d)));
      }
      return atoms;
    };
    model.y_sample = [](std::int64_t x, Rng& rng) {
      return x <= 1 ? std::int64_t{0} : hashing::sample_full_table_displacement(x - 1, rng);
    };
    model.y_mean = [](std::int64_t x) {
      return x <= 1 ? 0.0 : hashing::expected_full_table_displacement(x - 1);
    };
  } else if (mark.rfind("independent-bernoulli:", 0) == 0) {
    double q = 0.0;
    try {
      q = std::stod(mark.substr(22));
    } catch (const std::exception&) {
      throw DomainError("mark '" + mark + "': expected a probability after ':'");
    }
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("mark '" + mark + "': q must lie in [0, 1]");
    model.y_exact = [q](std::int64_t) { return YAtoms{{0, 1}, {1.0 - q, q}}; };
    model.y_sample = [q](std::int64_t, Rng& rng) -> std::int64_t { return rng.uniform() < q ? 1 : 0; };
    model.y_mean = [q](std::int64_t) { return q; };
  } else {
    throw DomainError("unknown mark '" + mark + "'");
  }
  return model;
}

PairModel occupancy_model(double lambda) {
  PairModel m = attach_mark(IntegerLaw::poisson(lambda), "empty");
  m.label = "occupancy";
  return m;
}

PairModel hashing_model(double lambda) {
  PairModel m = attach_mark(IntegerLaw::borel(lambda), "displacement");
  m.label = "hashing";
  return m;
}

PairModel forest_model(double lambda, std::int64_t tree_size) {
  PairModel m = attach_mark(IntegerLaw::borel(lambda), "equals:" + std::to_string(tree_size));
  m.label = "forest";
  return m;
}

PairModel make_model(const std::string& family, double parameter, const std::string& mark) {
  if (family == "occupancy") return occupancy_model(parameter);
  if (family == "hashing") return hashing_model(parameter);
  if (family == "forest") {
    return attach_mark(IntegerLaw::borel(parameter), mark.empty() ? "equals:1" : mark);
  }
  const std::string m = mark.empty() ? "empty" : mark;
  if (family == "poisson") return attach_mark(IntegerLaw::poisson(parameter), m);
  if (family == "borel") return attach_mark(IntegerLaw::borel(parameter), m);
  if (family == "geometric") return attach_mark(IntegerLaw::geometric(parameter), m);
  throw DomainError("unknown model family '" + family + "'");
}

}  // namespace condlaw
