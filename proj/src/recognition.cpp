#include "facegraph/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "facegraph/error.hpp"

namespace facegraph {
namespace {

constexpr double kIndexTolerance = 1e-9;
// 2^0 … 2^51 sum exactly in a double mantissa
constexpr std::size_t kExactIndexModels = 52;

bool near(double a, double b) { return std::fabs(a - b) <= kIndexTolerance * std::max({1.0, std::fabs(a), std::fabs(b)}); }

std::vector<std::size_t> ascending_order(std::span<const double> weights) {
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return weights[a] < weights[b]; });
  return order;
}

// Distinct powers of two are superincreasing by construction; checked separately because
// the running sum stops being exact past 2^53.
bool distinct_powers_of_two(std::span<const double> weights) {
  std::vector<int> exponents;
  for (double w : weights) {
    int e = 0;
    if (!(w > 0.0) || std::frexp(w, &e) != 0.5) return false;
    exponents.push_back(e);
  }
  std::sort(exponents.begin(), exponents.end());
  return std::adjacent_find(exponents.begin(), exponents.end()) == exponents.end();
}

bool superincreasing(std::span<const double> weights) {
  if (distinct_powers_of_two(weights)) return true;
  double below = 0.0;
  for (auto i : ascending_order(weights)) {
    if (!(weights[i] > below)) return false;
    below += weights[i];
  }
  return true;
}

Decision decision_from_subset(std::vector<int> persons) {
  std::sort(persons.begin(), persons.end());
  Decision d;
  d.kind = persons.empty() ? DecisionKind::NoMatch
                           : (persons.size() == 1 ? DecisionKind::Match : DecisionKind::OverRecognition);
  d.persons = std::move(persons);
  return d;
}

}  // namespace

const char* decision_name(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::NoMatch: return "NoMatch";
    case DecisionKind::Match: return "Match";
    case DecisionKind::OverRecognition: return "OverRecognition";
  }
  return "?";
}

std::vector<double> default_weights(std::size_t count) {
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) w[i] = std::ldexp(1.0, static_cast<int>(i));
  return w;
}

void validate_weights(std::span<const double> weights) {
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidConfig, "recognition weights must be positive");
  }
  if (superincreasing(weights)) return;
  if (weights.size() > 20) {
    throw Error(ErrorCode::InvalidConfig, "more than 20 weights must be superincreasing to decode uniquely");
  }
  const std::size_t n = weights.size();
  std::vector<double> sums;
  sums.reserve(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) s += weights[i];
    }
    sums.push_back(s);
  }
  std::sort(sums.begin(), sums.end());
  for (std::size_t i = 1; i < sums.size(); ++i) {
    if (near(sums[i], sums[i - 1])) throw Error(ErrorCode::InvalidConfig, "recognition weights have colliding subset sums");
  }
}

std::vector<int> threshold_outputs(std::span<const double> similarities, double threshold) {
  std::vector<int> out(similarities.size());
  std::transform(similarities.begin(), similarities.end(), out.begin(),
                 [threshold](double s) { return s >= threshold ? 1 : 0; });
  return out;
}

double recognition_index(std::span<const int> outputs, std::span<const double> weights) {
  if (outputs.size() != weights.size()) {
    throw Error(ErrorCode::InvalidInput, "outputs and weights differ in length");
  }
  double r = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) r += outputs[i] * weights[i];
  return r;
}

Decision classify(double index, std::span<const double> weights) {
  if (near(index, 0.0)) return {};
  if (superincreasing(weights)) {
    // greedy from the largest weight decodes superincreasing sets exactly
    std::vector<int> persons;
    double remaining = index;
    const auto order = ascending_order(weights);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (weights[*it] <= remaining || near(weights[*it], remaining)) {
        remaining -= weights[*it];
        persons.push_back(static_cast<int>(*it));
      }
    }
    if (!near(remaining, 0.0)) throw Error(ErrorCode::InternalError, "recognition index is not a subset sum");
    return decision_from_subset(std::move(persons));
  }
  if (weights.size() > 20) throw Error(ErrorCode::InvalidConfig, "too many weights to decode");
  for (std::size_t mask = 1; mask < (std::size_t{1} << weights.size()); ++mask) {
    double s = 0.0;
    std::vector<int> persons;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (mask & (std::size_t{1} << i)) {
        s += weights[i];
        persons.push_back(static_cast<int>(i));
      }
    }
    if (near(s, index)) return decision_from_subset(std::move(persons));
  }
  throw Error(ErrorCode::InternalError, "recognition index is not a subset sum");
}

RecognitionOutcome recognize(const RasterImage& face, std::span<const FaceBunchGraph> models,
                             const GaborBank& bank, const RecognitionConfig& config) {
  if (models.empty()) throw Error(ErrorCode::InvalidInput, "recognition needs at least one model");
  const std::vector<double> weights = config.weights.empty() ? default_weights(models.size()) : config.weights;
  if (weights.size() != models.size()) {
    throw Error(ErrorCode::InvalidConfig, "weight count does not match model count");
  }
  validate_weights(weights);

  RecognitionOutcome outcome;
  JetField field(face, bank);
  for (const FaceBunchGraph& model : models) {
    outcome.person_ids.push_back(model.person_id);
    double score = -1.0;
    try {
      const FaceGraph fitted = localize_nodes(field, model, config.window);
      score = graph_similarity(fitted, model, bank, config.lambda).value;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateJet) throw;
      outcome.diagnostics.push_back(model.person_id + ": " + e.what());
    }
    outcome.similarities.push_back(score);
  }
  outcome.outputs = threshold_outputs(outcome.similarities, config.threshold);
  outcome.index = recognition_index(outcome.outputs, weights);
  if (models.size() <= kExactIndexModels) {
    outcome.decision = classify(outcome.index, weights);
  } else {
    // R is no longer exact in double precision; read the subset off the outputs
    std::vector<int> persons;
    for (std::size_t i = 0; i < outcome.outputs.size(); ++i) {
      if (outcome.outputs[i]) persons.push_back(static_cast<int>(i));
    }
    outcome.decision = decision_from_subset(std::move(persons));
  }
  return outcome;
}

}  // namespace facegraph
