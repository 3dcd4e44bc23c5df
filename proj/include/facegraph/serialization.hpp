#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "facegraph/detection.hpp"
#include "facegraph/graph.hpp"
#include "facegraph/recognition.hpp"
#include "facegraph/segmentation.hpp"

namespace facegraph {

inline constexpr int kFormatVersion = 1;

/// Writes `j` with sorted keys, two-space indent and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json to_json(const SkinModel& model);
SkinModel skin_model_from_json(const nlohmann::json& j);

/// Template gray levels go to `png_path`, {mean, width, height} to the
/// sidecar with the same stem and a .json extension.
void save_template(const std::filesystem::path& png_path, const FaceTemplate& tmpl);
FaceTemplate load_template(const std::filesystem::path& png_path);

nlohmann::json to_json(const FaceBunchGraph& bunch);
FaceBunchGraph bunch_from_json(const nlohmann::json& j);

nlohmann::json candidates_to_json(std::span<const FaceCandidate> candidates);
nlohmann::json to_json(const RecognitionOutcome& outcome);

}  // namespace facegraph
