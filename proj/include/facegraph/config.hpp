#pragma once

#include <filesystem>

#include <json.hpp>

#include "facegraph/gabor.hpp"
#include "facegraph/imaging.hpp"
#include "facegraph/recognition.hpp"
#include "facegraph/segmentation.hpp"

namespace facegraph {

struct SegmentationConfig {
  SkinModelParams skin;
  double band = 2.0;  // acceptance band in deviations
  CleanupParams cleanup;
  AdaptiveThresholdParams adaptive;
};

struct DetectionConfig {
  int template_width = 64;
  int template_height = 64;
  int face_width = 128;
  int face_height = 128;
  double ncc_threshold = 0.5;
  int max_peaks = 16;
  /// Region boxes grow by this fraction per side before matching.
  double region_margin = 0.25;
  /// Template width over the width of the face it frames; sets the scale
  /// at which a skin region is matched.
  double face_frame_factor = 1.25;
};

/// Every tunable of the pipeline, grouped the way the config file is.
struct Config {
  ContrastParams imaging;
  SegmentationConfig segmentation;
  DetectionConfig detection;
  BankParams gabor;
  RecognitionConfig recognition;
};

nlohmann::json to_json(const Config& config);
/// Missing keys keep their defaults; unknown keys are rejected.
Config config_from_json(const nlohmann::json& j);
Config load_config(const std::filesystem::path& path);

nlohmann::json to_json(const BankParams& bank);
BankParams bank_from_json(const nlohmann::json& j);

}  // namespace facegraph
