#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "facegraph/config.hpp"
#include "facegraph/dataset.hpp"
#include "facegraph/detection.hpp"
#include "facegraph/graph.hpp"
#include "facegraph/recognition.hpp"
#include "facegraph/segmentation.hpp"

namespace facegraph {

/// Illumination normalization followed by the gray projection.
RasterImage prepare_gray(const RasterImage& img, const Config& config);

/// Skin model from annotated face crops: each annotated image contributes
/// the pixels inside its fiducial bounding box, unannotated images all pixels.
SkinModel train_skin_model(const Dataset& dataset, const Config& config);

/// Normalized face crop of a whole image plus its fiducials mapped into it.
struct NormalizedFace {
  RasterImage face;
  FiducialSet fiducials;
};
NormalizedFace normalize_annotated(const RasterImage& img, const FiducialAnnotation& annotation,
                                   const Config& config);

struct Enrollment {
  std::vector<FaceBunchGraph> bunches;
  FaceTemplate face_template;
  std::vector<std::filesystem::path> images;
};

/// Builds one bunch graph per person from its annotated images. With
/// `per_person` > 0 the first that many images of each person are used and
/// each must be annotated; otherwise every annotated image is used.
/// Missing annotations or annotated files that do not exist abort with the
/// offending paths listed.
Enrollment enroll(const Dataset& dataset, const Config& config, int per_person = 0);

struct DetectionResult {
  RasterImage gray;
  BinaryMask skin;
  BinaryMask cleaned;
  std::vector<Region> regions;
  std::vector<Region> face_regions;
  std::vector<FaceCandidate> candidates;
};

/// Illumination → HSV → skin mask → cleanup → components → Euler filter →
/// template matching inside each surviving region → normalized crops.
DetectionResult detect_faces(const RasterImage& rgb, const SkinModel& skin, const FaceTemplate& tmpl,
                             const Config& config);

/// Copy of `rgb` with candidate boxes drawn in red.
RasterImage draw_candidates(const RasterImage& rgb, std::span<const FaceCandidate> candidates);

/// Loads every bunch graph (*.json except template.json) from `dir`, sorted
/// by file name. Throws BankMismatch if they disagree on the bank.
std::vector<FaceBunchGraph> load_models(const std::filesystem::path& dir);

struct ImageRecognition {
  FaceCandidate candidate;
  RecognitionOutcome outcome;
};

/// Runs detection (unless `pre_cropped`) and recognizes every candidate.
/// Pre-cropped images are treated as one whole-image candidate.
std::vector<ImageRecognition> recognize_image(const RasterImage& rgb, std::span<const FaceBunchGraph> models,
                                              const GaborBank& bank, const Config& config,
                                              const SkinModel* skin, const FaceTemplate* tmpl, bool pre_cropped);

struct PersonTally {
  std::string id;
  int correct = 0;
  int wrong = 0;
  int no_match = 0;
  int over_recognition = 0;
  int total() const { return correct + wrong + no_match + over_recognition; }
};

struct EvaluationReport {
  std::string label;
  bool pre_cropped = false;
  std::vector<PersonTally> persons;
  int total = 0;
  int correct = 0;
  double accuracy = 0.0;
  int model_count = 0;
  int training_images_per_model = 0;  // largest stack height
  nlohmann::json config;
};

struct EvaluationOptions {
  bool pre_cropped = false;
  const SkinModel* skin = nullptr;
  const FaceTemplate* face_template = nullptr;
  int max_persons = 0;        // 0 = all
  int probes_per_person = 0;  // 0 = all
  int threads = 1;
};

/// Recognizes every probe and tallies it against its directory label. A
/// probe is correct when it is matched to its own enrolled person, or, for
/// persons without a model, when nothing matches. Failures count as wrong.
EvaluationReport evaluate(const Dataset& dataset, std::span<const FaceBunchGraph> models, const Config& config,
                          const EvaluationOptions& options);

nlohmann::json to_json(const EvaluationReport& report);

/// Accuracy table with one column per report.
std::string format_accuracy_table(const std::string& dataset_name, std::span<const EvaluationReport> reports);

/// Worker count from FACEGRAPH_THREADS (default: hardware concurrency).
int worker_count();

}  // namespace facegraph
