// facegraph command line: train-skin | detect | enroll | recognize | evaluate

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "facegraph/config.hpp"
#include "facegraph/dataset.hpp"
#include "facegraph/error.hpp"
#include "facegraph/image_io.hpp"
#include "facegraph/pipeline.hpp"
#include "facegraph/serialization.hpp"

namespace fs = std::filesystem;
using namespace facegraph;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kOverRecognition = 2, kDataError = 3 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::FormatMismatch:
      return kUsage;
    default:
      return kDataError;
  }
}

struct Common {
  std::string config_path;
  bool restrict_frequency = false;

  Config load() const {
    Config c = config_path.empty() ? Config{} : load_config(config_path);
    if (restrict_frequency) c.gabor.restrict_frequency = true;
    return c;
  }
};

void print_warnings(const Dataset& ds) {
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
}

void emit(const nlohmann::json& j, const std::string& out_prefix) {
  if (out_prefix.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(out_prefix + ".json", j);
  }
}

std::optional<FaceTemplate> find_template(const std::string& explicit_path, const fs::path& models_dir) {
  if (!explicit_path.empty()) return load_template(explicit_path);
  const fs::path fallback = models_dir / "template.png";
  if (!models_dir.empty() && fs::exists(fallback)) return load_template(fallback);
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skin-segmentation face detection and elastic bunch graph recognition"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);

  std::string dataset_root, image_path, out, skin_path, template_path, models_dir, annotations;
  int per_person = 0, max_persons = 0, probes_per_person = 0;
  bool pre_cropped = false, compare = false;

  auto* train = app.add_subcommand("train-skin", "Build the H/S skin model from annotated face crops");
  train->add_option("dataset", dataset_root, "Dataset root (one directory per person)")->required();
  train->add_option("--out", out, "Output skin model JSON")->required();

  auto* detect = app.add_subcommand("detect", "Find face candidates in an image");
  detect->add_option("image", image_path)->required()->check(CLI::ExistingFile);
  detect->add_option("--skin", skin_path, "Skin model JSON")->required()->check(CLI::ExistingFile);
  detect->add_option("--template", template_path, "Template PNG (JSON sidecar alongside)")->required();
  detect->add_option("--out", out, "Output prefix for <prefix>.json and <prefix>.png")->required();

  auto* enroll_cmd = app.add_subcommand("enroll", "Build one bunch graph per person");
  enroll_cmd->add_option("dataset", dataset_root)->required();
  enroll_cmd->add_option("--out", out, "Models directory")->required();
  enroll_cmd->add_option("--annotations", annotations, "Fiducial CSV (default <dataset>/fiducials.csv)");
  enroll_cmd->add_option("--per-person", per_person, "Use the first N images of each person");
  enroll_cmd->add_flag("--restrict-frequency", common.restrict_frequency, "Keep only the pi/4 frequency band");

  auto* recognize_cmd = app.add_subcommand("recognize", "Detect and recognize faces in an image");
  recognize_cmd->add_option("image", image_path)->required()->check(CLI::ExistingFile);
  recognize_cmd->add_option("--models", models_dir)->required();
  recognize_cmd->add_option("--skin", skin_path)->check(CLI::ExistingFile);
  recognize_cmd->add_option("--template", template_path);
  recognize_cmd->add_option("--out", out, "Output prefix (default: stdout)");
  recognize_cmd->add_flag("--pre-cropped", pre_cropped, "Treat the whole image as one face crop");
  recognize_cmd->add_flag("--restrict-frequency", common.restrict_frequency);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Matching accuracy over a labeled probe set");
  evaluate_cmd->add_option("dataset", dataset_root)->required();
  evaluate_cmd->add_option("--models", models_dir)->required();
  evaluate_cmd->add_option("--skin", skin_path)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--template", template_path);
  evaluate_cmd->add_option("--out", out, "Output prefix for the report JSON");
  evaluate_cmd->add_option("--persons", max_persons, "Only the first N persons");
  evaluate_cmd->add_option("--probes-per-person", probes_per_person, "Only the first N images per person");
  evaluate_cmd->add_flag("--pre-cropped", pre_cropped, "Skip detection; probes are face crops");
  evaluate_cmd->add_flag("--compare", compare, "Report both the pre-cropped and the full-chain configuration");
  evaluate_cmd->add_flag("--restrict-frequency", common.restrict_frequency);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const Config config = common.load();

    if (*train) {
      const Dataset ds = ingest_dataset(dataset_root);
      print_warnings(ds);
      const SkinModel model = train_skin_model(ds, config);
      write_json(out, to_json(model));
      std::cout << "hue peak " << model.hue_mean << " (dev " << model.hue_dev << "), sat peak " << model.sat_mean
                << " (dev " << model.sat_dev << ")\n";
      return kOk;
    }

    if (*detect) {
      const SkinModel skin = skin_model_from_json(read_json(skin_path));
      const FaceTemplate tmpl = load_template(template_path);
      const RasterImage img = read_image(image_path);
      const DetectionResult result = detect_faces(img, skin, tmpl, config);
      write_json(out + ".json", candidates_to_json(result.candidates));
      write_png(out + ".png", draw_candidates(img, result.candidates));
      std::cout << result.candidates.size() << " candidate(s)\n";
      return kOk;
    }

    if (*enroll_cmd) {
      Dataset ds = ingest_dataset(dataset_root);
      print_warnings(ds);
      if (!annotations.empty()) {
        ds.annotations = parse_fiducial_csv(annotations, fs::path(dataset_root));
        ds.missing_annotated.clear();
        for (const auto& [path, a] : ds.annotations) {
          if (!fs::exists(path)) ds.missing_annotated.push_back(path);
        }
      }
      const Enrollment result = enroll(ds, config, per_person);
      fs::create_directories(out);
      for (const auto& bunch : result.bunches) {
        write_json(fs::path(out) / (bunch.person_id + ".json"), to_json(bunch));
        std::cout << bunch.person_id << ": " << bunch.model_count() << " model image(s)\n";
      }
      save_template(fs::path(out) / "template.png", result.face_template);
      return kOk;
    }

    if (*recognize_cmd) {
      const auto models = load_models(models_dir);
      if (common.restrict_frequency && !models.front().bank.restrict_frequency) {
        throw Error(ErrorCode::BankMismatch, "models were enrolled with the full bank");
      }
      const GaborBank bank(models.front().bank);
      std::optional<SkinModel> skin;
      std::optional<FaceTemplate> tmpl;
      if (!pre_cropped) {
        if (skin_path.empty()) throw Error(ErrorCode::InvalidConfig, "--skin is required unless --pre-cropped");
        skin = skin_model_from_json(read_json(skin_path));
        tmpl = find_template(template_path, models_dir);
        if (!tmpl) throw Error(ErrorCode::InvalidConfig, "no --template given and none in the models directory");
      }
      const auto results = recognize_image(read_image(image_path), models, bank, config, skin ? &*skin : nullptr,
                                           tmpl ? &*tmpl : nullptr, pre_cropped);
      nlohmann::json array = nlohmann::json::array();
      bool over = false;
      for (const auto& r : results) {
        nlohmann::json entry = to_json(r.outcome);
        entry["candidate"] = candidates_to_json(std::span(&r.candidate, 1))[0];
        array.push_back(std::move(entry));
        over = over || r.outcome.decision.kind == DecisionKind::OverRecognition;
      }
      emit(array, out);
      return over ? kOverRecognition : kOk;
    }

    if (*evaluate_cmd) {
      const Dataset ds = ingest_dataset(dataset_root);
      print_warnings(ds);
      const auto models = load_models(models_dir);
      EvaluationOptions options;
      options.max_persons = max_persons;
      options.probes_per_person = probes_per_person;
      options.threads = worker_count();
      std::optional<SkinModel> skin;
      std::optional<FaceTemplate> tmpl;
      const bool need_detection = compare || !pre_cropped;
      if (need_detection) {
        if (skin_path.empty()) throw Error(ErrorCode::InvalidConfig, "--skin is required for the full chain");
        skin = skin_model_from_json(read_json(skin_path));
        tmpl = find_template(template_path, models_dir);
        if (!tmpl) throw Error(ErrorCode::InvalidConfig, "no --template given and none in the models directory");
        options.skin = &*skin;
        options.face_template = &*tmpl;
      }
      std::vector<EvaluationReport> reports;
      if (compare || pre_cropped) {
        options.pre_cropped = true;
        reports.push_back(evaluate(ds, models, config, options));
      }
      if (compare || !pre_cropped) {
        options.pre_cropped = false;
        reports.push_back(evaluate(ds, models, config, options));
      }
      std::cout << format_accuracy_table(fs::path(dataset_root).filename().string(), reports);
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : reports) j.push_back(to_json(r));
      if (!out.empty()) write_json(out + ".json", j);
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}
