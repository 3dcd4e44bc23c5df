#include "facegraph/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "facegraph/error.hpp"
#include "facegraph/image_io.hpp"
#include "facegraph/imaging.hpp"
#include "facegraph/serialization.hpp"

namespace facegraph {

namespace fs = std::filesystem;

namespace {

int iround(double v) { return static_cast<int>(std::lround(v)); }

RasterImage as_rgb(const RasterImage& img) {
  if (img.format() == PixelFormat::RGB8) return img;
  if (img.format() == PixelFormat::HSVf) return hsv_to_rgb(img);
  const RasterImage gray = img.format() == PixelFormat::Binary ? mask_to_gray(img) : img;
  RasterImage rgb(gray.width(), gray.height(), PixelFormat::RGB8);
  for (int y = 0; y < gray.height(); ++y) {
    for (int x = 0; x < gray.width(); ++x) {
      for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = gray.at(x, y);
    }
  }
  return rgb;
}

// Template matches inside one skin region, matched at the scale where the
// region's width spans 1/face_frame_factor of the template.
std::vector<FaceCandidate> match_in_region(const RasterImage& gray, const Region& region,
                                           const FaceTemplate& tmpl, const DetectionConfig& cfg, int max_peaks) {
  const double bw = region.bbox.width();
  const double bh = region.bbox.height();
  const double scale = tmpl.width() / (bw * cfg.face_frame_factor);
  const double crop_w = std::max(bw * (1.0 + 2.0 * cfg.region_margin), tmpl.width() / scale);
  const double crop_h = std::max(bh * (1.0 + 2.0 * cfg.region_margin), tmpl.height() / scale);
  const double cx = 0.5 * (region.bbox.x0 + region.bbox.x1);
  const double cy = 0.5 * (region.bbox.y0 + region.bbox.y1);
  BBox box;
  box.x0 = std::max(0, iround(cx - 0.5 * (crop_w - 1.0)));
  box.y0 = std::max(0, iround(cy - 0.5 * (crop_h - 1.0)));
  box.x1 = std::min(gray.width() - 1, iround(cx + 0.5 * (crop_w - 1.0)));
  box.y1 = std::min(gray.height() - 1, iround(cy + 0.5 * (crop_h - 1.0)));

  const RasterImage sub = crop(gray, box);
  const int sw = std::max(tmpl.width(), iround(sub.width() * scale));
  const int sh = std::max(tmpl.height(), iround(sub.height() * scale));
  const RasterImage scaled = resample_bilinear(sub, sw, sh);
  const double sx = static_cast<double>(sw) / sub.width();
  const double sy = static_cast<double>(sh) / sub.height();

  auto candidates = match_template(scaled, tmpl, cfg.ncc_threshold, max_peaks);
  for (FaceCandidate& c : candidates) {
    const int u = c.bbox.x0;
    const int v = c.bbox.y0;
    c.bbox = {box.x0 + iround(u / sx), box.y0 + iround(v / sy), box.x0 + iround((u + tmpl.width()) / sx) - 1,
              box.y0 + iround((v + tmpl.height()) / sy) - 1};
    c.center = {box.x0 + iround((u + tmpl.width() / 2) / sx), box.y0 + iround((v + tmpl.height() / 2) / sy)};
  }
  return candidates;
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("FACEGRAPH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RasterImage prepare_gray(const RasterImage& img, const Config& config) {
  const RasterImage base = (img.format() == PixelFormat::RGB8 || img.format() == PixelFormat::Gray8)
                               ? img
                               : as_rgb(img);
  return to_grayscale(normalize_illumination(base, config.imaging));
}

SkinModel train_skin_model(const Dataset& dataset, const Config& config) {
  std::vector<RasterImage> images;
  std::vector<BinaryMask> masks;
  for (const auto& person : dataset.persons) {
    for (const auto& path : person.images) {
      const RasterImage rgb = normalize_illumination(as_rgb(read_image(path)), config.imaging);
      BinaryMask mask(rgb.width(), rgb.height(), PixelFormat::Binary);
      if (const FiducialAnnotation* a = dataset.annotation_for(path)) {
        double x0 = rgb.width(), y0 = rgb.height(), x1 = 0.0, y1 = 0.0;
        for (const auto& p : a->points) {
          x0 = std::min(x0, p.x());
          y0 = std::min(y0, p.y());
          x1 = std::max(x1, p.x());
          y1 = std::max(y1, p.y());
        }
        for (int y = std::max(0, iround(y0)); y <= std::min(rgb.height() - 1, iround(y1)); ++y) {
          for (int x = std::max(0, iround(x0)); x <= std::min(rgb.width() - 1, iround(x1)); ++x) mask.at(x, y) = 1;
        }
      } else {
        std::fill(mask.bytes().begin(), mask.bytes().end(), 1);
      }
      images.push_back(rgb_to_hsv(rgb));
      masks.push_back(std::move(mask));
    }
  }
  if (images.empty()) throw Error(ErrorCode::EmptyDataset, "no face crops to train the skin model on");
  return build_skin_model(images, masks, config.segmentation.skin);
}

NormalizedFace normalize_annotated(const RasterImage& img, const FiducialAnnotation& annotation,
                                   const Config& config) {
  const RasterImage gray = prepare_gray(img, config);
  const int fw = config.detection.face_width;
  const int fh = config.detection.face_height;
  NormalizedFace out{normalize_face(gray, fw, fh), {}};
  const double sx = static_cast<double>(fw) / gray.width();
  const double sy = static_cast<double>(fh) / gray.height();
  for (int n = 0; n < kNodeCount; ++n) {
    const auto& p = annotation.points[n];
    out.fiducials.points[n] = {std::clamp(iround((p.x() + 0.5) * sx - 0.5), 0, fw - 1),
                               std::clamp(iround((p.y() + 0.5) * sy - 0.5), 0, fh - 1)};
  }
  return out;
}

Enrollment enroll(const Dataset& dataset, const Config& config, int per_person) {
  if (!dataset.missing_annotated.empty()) {
    std::string list;
    for (const auto& p : dataset.missing_annotated) list += "\n  " + p.string();
    throw Error(ErrorCode::InvalidInput, "annotations reference missing images:" + list);
  }
  std::vector<std::pair<const PersonImages*, std::vector<fs::path>>> plan;
  std::vector<fs::path> unannotated;
  for (const auto& person : dataset.persons) {
    std::vector<fs::path> chosen;
    if (per_person > 0) {
      for (std::size_t i = 0; i < person.images.size() && static_cast<int>(i) < per_person; ++i) {
        if (!dataset.annotation_for(person.images[i])) unannotated.push_back(person.images[i]);
        chosen.push_back(person.images[i]);
      }
    } else {
      for (const auto& path : person.images) {
        if (dataset.annotation_for(path)) chosen.push_back(path);
      }
    }
    if (!chosen.empty()) plan.emplace_back(&person, std::move(chosen));
  }
  if (!unannotated.empty()) {
    std::string list;
    for (const auto& p : unannotated) list += "\n  " + p.string();
    throw Error(ErrorCode::InvalidInput, "enrollment images without fiducial annotations:" + list);
  }
  if (plan.empty()) throw Error(ErrorCode::EmptyDataset, "no annotated enrollment images");

  const GaborBank bank(config.gabor);
  Enrollment result;
  std::vector<RasterImage> template_faces;
  for (const auto& [person, paths] : plan) {
    std::vector<FaceGraph> graphs;
    for (const auto& path : paths) {
      const RasterImage img = read_image(path);
      const NormalizedFace nf = normalize_annotated(img, *dataset.annotation_for(path), config);
      graphs.push_back(build_face_graph(nf.face, nf.fiducials, bank));
      template_faces.push_back(prepare_gray(img, config));
      result.images.push_back(path);
    }
    result.bunches.push_back(build_bunch_graph(person->id, graphs));
  }
  result.face_template = build_average_template(template_faces, config.detection.template_width,
                                                config.detection.template_height);
  return result;
}

DetectionResult detect_faces(const RasterImage& rgb_in, const SkinModel& skin, const FaceTemplate& tmpl,
                             const Config& config) {
  const RasterImage rgb = normalize_illumination(as_rgb(rgb_in), config.imaging);
  DetectionResult result;
  result.gray = to_grayscale(rgb);
  result.skin = classify_skin(rgb_to_hsv(rgb), skin, config.segmentation.band);
  result.cleaned = cleanup(result.skin, config.segmentation.cleanup);
  result.regions = connected_components(result.cleaned);
  result.face_regions = filter_face_regions(result.regions, result.gray, config.segmentation.adaptive);

  const int max_peaks = config.detection.max_peaks;
  std::vector<FaceCandidate> candidates;
  for (const Region& region : result.face_regions) {
    if (static_cast<int>(candidates.size()) >= max_peaks) break;
    auto found = match_in_region(result.gray, region, tmpl, config.detection,
                                 max_peaks - static_cast<int>(candidates.size()));
    candidates.insert(candidates.end(), found.begin(), found.end());
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const FaceCandidate& a, const FaceCandidate& b) { return a.score > b.score; });
  result.candidates =
      extract_candidates(result.gray, std::move(candidates), config.detection.face_width, config.detection.face_height);
  return result;
}

RasterImage draw_candidates(const RasterImage& rgb_in, std::span<const FaceCandidate> candidates) {
  RasterImage out = as_rgb(rgb_in);
  auto paint = [&](int x, int y) {
    if (!out.contains(x, y)) return;
    out.at(x, y, 0) = 255;
    out.at(x, y, 1) = 0;
    out.at(x, y, 2) = 0;
  };
  for (const FaceCandidate& c : candidates) {
    for (int t = 0; t < 2; ++t) {
      for (int x = c.bbox.x0; x <= c.bbox.x1; ++x) {
        paint(x, c.bbox.y0 + t);
        paint(x, c.bbox.y1 - t);
      }
      for (int y = c.bbox.y0; y <= c.bbox.y1; ++y) {
        paint(c.bbox.x0 + t, y);
        paint(c.bbox.x1 - t, y);
      }
    }
  }
  return out;
}

std::vector<FaceBunchGraph> load_models(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "models directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != "template.json") files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  std::vector<FaceBunchGraph> models;
  for (const auto& f : files) models.push_back(bunch_from_json(read_json(f)));
  if (models.empty()) throw Error(ErrorCode::EmptyDataset, "no bunch graphs in " + dir.string());
  for (const auto& m : models) {
    if (!(m.bank == models.front().bank)) {
      throw Error(ErrorCode::BankMismatch, m.person_id + " was enrolled with a different filter bank");
    }
  }
  return models;
}

std::vector<ImageRecognition> recognize_image(const RasterImage& rgb, std::span<const FaceBunchGraph> models,
                                              const GaborBank& bank, const Config& config,
                                              const SkinModel* skin, const FaceTemplate* tmpl, bool pre_cropped) {
  std::vector<FaceCandidate> candidates;
  if (pre_cropped) {
    FaceCandidate whole;
    const RasterImage gray = prepare_gray(rgb, config);
    whole.bbox = {0, 0, gray.width() - 1, gray.height() - 1};
    whole.center = {gray.width() / 2, gray.height() / 2};
    whole.score = 1.0;
    whole.face = normalize_face(gray, config.detection.face_width, config.detection.face_height);
    candidates.push_back(std::move(whole));
  } else {
    if (!skin || !tmpl) throw Error(ErrorCode::InvalidConfig, "detection needs a skin model and a face template");
    candidates = detect_faces(rgb, *skin, *tmpl, config).candidates;
  }
  std::vector<ImageRecognition> results;
  for (auto& c : candidates) {
    RecognitionOutcome outcome = recognize(c.face, models, bank, config.recognition);
    results.push_back({std::move(c), std::move(outcome)});
  }
  return results;
}

EvaluationReport evaluate(const Dataset& dataset, std::span<const FaceBunchGraph> models, const Config& config,
                          const EvaluationOptions& options) {
  if (models.empty()) throw Error(ErrorCode::InvalidInput, "evaluation needs enrolled models");
  const GaborBank bank(models.front().bank);
  std::map<std::string, int> model_index;
  for (std::size_t i = 0; i < models.size(); ++i) model_index[models[i].person_id] = static_cast<int>(i);

  struct Probe {
    int person;
    fs::path path;
  };
  std::vector<Probe> probes;
  EvaluationReport report;
  report.pre_cropped = options.pre_cropped;
  report.label = options.pre_cropped ? "EBGM (pre-cropped)" : "Skin segmentation + EBGM";
  for (std::size_t p = 0; p < dataset.persons.size(); ++p) {
    if (options.max_persons > 0 && static_cast<int>(p) >= options.max_persons) break;
    report.persons.push_back({dataset.persons[p].id});
    const auto& images = dataset.persons[p].images;
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (options.probes_per_person > 0 && static_cast<int>(i) >= options.probes_per_person) break;
      probes.push_back({static_cast<int>(report.persons.size()) - 1, images[i]});
    }
  }

  // Decisions land in probe order regardless of worker scheduling.
  enum class Verdict { Correct, Wrong, NoMatch, Over };
  std::vector<Verdict> verdicts(probes.size(), Verdict::Wrong);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < probes.size(); i = next++) {
      const std::string& label = report.persons[probes[i].person].id;
      const auto own = model_index.find(label);
      try {
        const auto results = recognize_image(read_image(probes[i].path), models, bank, config, options.skin,
                                             options.face_template, options.pre_cropped);
        const Decision decision = results.empty() ? Decision{} : results.front().outcome.decision;
        switch (decision.kind) {
          case DecisionKind::NoMatch:
            verdicts[i] = own == model_index.end() ? Verdict::Correct : Verdict::NoMatch;
            break;
          case DecisionKind::Match:
            verdicts[i] = (own != model_index.end() && decision.persons.front() == own->second) ? Verdict::Correct
                                                                                                : Verdict::Wrong;
            break;
          case DecisionKind::OverRecognition:
            verdicts[i] = Verdict::Over;
            break;
        }
      } catch (const std::exception&) {
        verdicts[i] = Verdict::Wrong;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(probes.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < probes.size(); ++i) {
    PersonTally& tally = report.persons[probes[i].person];
    switch (verdicts[i]) {
      case Verdict::Correct: ++tally.correct; break;
      case Verdict::Wrong: ++tally.wrong; break;
      case Verdict::NoMatch: ++tally.no_match; break;
      case Verdict::Over: ++tally.over_recognition; break;
    }
  }
  for (const auto& t : report.persons) {
    report.total += t.total();
    report.correct += t.correct;
  }
  report.accuracy = report.total > 0 ? static_cast<double>(report.correct) / report.total : 0.0;
  report.model_count = static_cast<int>(models.size());
  for (const auto& m : models) report.training_images_per_model = std::max(report.training_images_per_model, m.model_count());
  report.config = to_json(config);
  return report;
}

nlohmann::json to_json(const EvaluationReport& report) {
  nlohmann::json persons = nlohmann::json::object();
  for (const auto& t : report.persons) {
    persons[t.id] = {{"correct", t.correct},
                     {"wrong", t.wrong},
                     {"no_match", t.no_match},
                     {"over_recognition", t.over_recognition}};
  }
  return {{"label", report.label},
          {"pre_cropped", report.pre_cropped},
          {"persons", std::move(persons)},
          {"total", report.total},
          {"correct", report.correct},
          {"accuracy", report.accuracy},
          {"model_count", report.model_count},
          {"training_images_per_model", report.training_images_per_model},
          {"config", report.config}};
}

std::string format_accuracy_table(const std::string& dataset_name, std::span<const EvaluationReport> reports) {
  std::vector<std::string> header{"Matching Accuracy"};
  std::vector<std::string> row{dataset_name};
  for (const auto& r : reports) {
    header.push_back(r.label);
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(1) << 100.0 * r.accuracy << "% (" << r.correct << "/" << r.total << ")";
    row.push_back(cell.str());
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = std::max(header[c].size(), row[c].size());
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) s += " | ";
      s += cells[c] + std::string(width[c] - cells[c].size(), ' ');
    }
    return s + "\n";
  };
  std::string rule;
  for (std::size_t c = 0; c < width.size(); ++c) {
    if (c > 0) rule += "-+-";
    rule += std::string(width[c], '-');
  }
  return line(header) + rule + "\n" + line(row);
}

}  // namespace facegraph
