#pragma once

#include <span>
#include <string>
#include <vector>

#include "facegraph/gabor.hpp"
#include "facegraph/graph.hpp"

namespace facegraph {

struct RecognitionConfig {
  double threshold = 0.9984;
  /// Per-model weights W_i; empty selects W_i = 2^(i−1).
  std::vector<double> weights;
  double lambda = 1.0;
  int window = 5;
};

enum class DecisionKind { NoMatch, Match, OverRecognition };

struct Decision {
  DecisionKind kind = DecisionKind::NoMatch;
  std::vector<int> persons;  // model indices, ascending

  friend bool operator==(const Decision&, const Decision&) = default;
};

const char* decision_name(DecisionKind kind);

struct RecognitionOutcome {
  std::vector<std::string> person_ids;
  std::vector<double> similarities;
  std::vector<int> outputs;
  double index = 0.0;
  Decision decision;
  std::vector<std::string> diagnostics;
};

std::vector<double> default_weights(std::size_t count);

/// Throws InvalidConfig unless all weights are positive and every subset
/// sum is distinct (checked exactly for superincreasing weights, by
/// enumeration for up to 20 weights).
void validate_weights(std::span<const double> weights);

/// Thresholding limiter: O_i = 1 iff S_i ≥ threshold.
std::vector<int> threshold_outputs(std::span<const double> similarities, double threshold);

/// R = Σ O_i·W_i.
double recognition_index(std::span<const int> outputs, std::span<const double> weights);

/// Decodes R into the unique subset of weights summing to it.
Decision classify(double index, std::span<const double> weights);

/// Localizes and scores the face against every model, then thresholds,
/// indexes and classifies. A model whose localization hits a textureless
/// face scores −1 and leaves a diagnostic.
RecognitionOutcome recognize(const RasterImage& face, std::span<const FaceBunchGraph> models,
                             const GaborBank& bank, const RecognitionConfig& config);

}  // namespace facegraph
