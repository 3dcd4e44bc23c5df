#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "facegraph/graph.hpp"

namespace facegraph {

/// Manually marked landmarks in source-image pixel coordinates.
struct FiducialAnnotation {
  std::array<Eigen::Vector2d, kNodeCount> points;
};

struct PersonImages {
  std::string id;
  std::vector<std::filesystem::path> images;
};

/// One person per subdirectory of `root`; optional `fiducials.csv` at the root.
struct Dataset {
  std::filesystem::path root;
  std::vector<PersonImages> persons;
  /// Keyed by the lexically normal image path.
  std::map<std::filesystem::path, FiducialAnnotation> annotations;
  /// Annotated paths that do not exist on disk.
  std::vector<std::filesystem::path> missing_annotated;
  std::vector<std::string> warnings;

  const FiducialAnnotation* annotation_for(const std::filesystem::path& image) const;
  std::size_t image_count() const;
};

/// Parses `image_path,left_iris_x,left_iris_y,…,chin_tip_y` rows (11 fields).
/// Relative paths resolve against `base`. Blank lines, `#` comments and a
/// header row starting with `image_path` are skipped.
std::map<std::filesystem::path, FiducialAnnotation> parse_fiducial_csv(const std::filesystem::path& csv,
                                                                       const std::filesystem::path& base);

/// Throws EmptyDataset when no readable image is found.
Dataset ingest_dataset(const std::filesystem::path& root);

}  // namespace facegraph
