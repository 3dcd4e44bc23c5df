#include "facegraph/config.hpp"

#include <fstream>
#include <set>

#include "facegraph/error.hpp"

namespace facegraph {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& section) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, section + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown key " + section + "." + key);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad value for ") + key + ": " + e.what());
  }
}

}  // namespace

json to_json(const BankParams& bank) {
  return {{"sigma", bank.sigma},
          {"n_freq", bank.n_freq},
          {"n_orient", bank.n_orient},
          {"radius", bank.radius},
          {"restrict_frequency", bank.restrict_frequency}};
}

BankParams bank_from_json(const json& j) {
  reject_unknown(j, {"sigma", "n_freq", "n_orient", "radius", "restrict_frequency"}, "gabor");
  BankParams bank;
  read(j, "sigma", bank.sigma);
  read(j, "n_freq", bank.n_freq);
  read(j, "n_orient", bank.n_orient);
  read(j, "radius", bank.radius);
  read(j, "restrict_frequency", bank.restrict_frequency);
  return bank;
}

json to_json(const Config& c) {
  json breakpoints = json::array();
  for (const auto& [in, out] : c.imaging.breakpoints) breakpoints.push_back({in, out});
  return {
      {"imaging",
       {{"breakpoints", breakpoints},
        {"variance_cutoff", c.imaging.variance_cutoff},
        {"low_percentile", c.imaging.low_percentile},
        {"high_percentile", c.imaging.high_percentile}}},
      {"segmentation",
       {{"bin_count", c.segmentation.skin.bin_count},
        {"deviation_fraction", c.segmentation.skin.deviation_fraction},
        {"band", c.segmentation.band},
        {"small_window", c.segmentation.cleanup.small_window},
        {"large_window", c.segmentation.cleanup.large_window},
        {"ratio_critical", c.segmentation.adaptive.ratio_critical},
        {"mean_fraction", c.segmentation.adaptive.mean_fraction}}},
      {"detection",
       {{"template_width", c.detection.template_width},
        {"template_height", c.detection.template_height},
        {"face_width", c.detection.face_width},
        {"face_height", c.detection.face_height},
        {"ncc_threshold", c.detection.ncc_threshold},
        {"max_peaks", c.detection.max_peaks},
        {"region_margin", c.detection.region_margin},
        {"face_frame_factor", c.detection.face_frame_factor}}},
      {"gabor", to_json(c.gabor)},
      {"recognition",
       {{"threshold", c.recognition.threshold},
        {"weights", c.recognition.weights},
        {"lambda", c.recognition.lambda},
        {"window", c.recognition.window}}},
  };
}

Config config_from_json(const json& j) {
  reject_unknown(j, {"imaging", "segmentation", "detection", "gabor", "recognition"}, "config");
  Config c;
  if (j.contains("imaging")) {
    const json& s = j["imaging"];
    reject_unknown(s, {"breakpoints", "variance_cutoff", "low_percentile", "high_percentile"}, "imaging");
    if (s.contains("breakpoints")) {
      c.imaging.breakpoints.clear();
      for (const auto& knot : s["breakpoints"]) {
        if (!knot.is_array() || knot.size() != 2) throw Error(ErrorCode::InvalidConfig, "breakpoints are [in, out] pairs");
        c.imaging.breakpoints.emplace_back(knot[0].get<double>(), knot[1].get<double>());
      }
      if (!c.imaging.breakpoints.empty()) validate_breakpoints(c.imaging.breakpoints);
    }
    read(s, "variance_cutoff", c.imaging.variance_cutoff);
    read(s, "low_percentile", c.imaging.low_percentile);
    read(s, "high_percentile", c.imaging.high_percentile);
  }
  if (j.contains("segmentation")) {
    const json& s = j["segmentation"];
    reject_unknown(s, {"bin_count", "deviation_fraction", "band", "small_window", "large_window", "ratio_critical",
                       "mean_fraction"},
                   "segmentation");
    read(s, "bin_count", c.segmentation.skin.bin_count);
    read(s, "deviation_fraction", c.segmentation.skin.deviation_fraction);
    read(s, "band", c.segmentation.band);
    read(s, "small_window", c.segmentation.cleanup.small_window);
    read(s, "large_window", c.segmentation.cleanup.large_window);
    read(s, "ratio_critical", c.segmentation.adaptive.ratio_critical);
    read(s, "mean_fraction", c.segmentation.adaptive.mean_fraction);
  }
  if (j.contains("detection")) {
    const json& s = j["detection"];
    reject_unknown(s, {"template_width", "template_height", "face_width", "face_height", "ncc_threshold", "max_peaks",
                       "region_margin", "face_frame_factor"},
                   "detection");
    read(s, "template_width", c.detection.template_width);
    read(s, "template_height", c.detection.template_height);
    read(s, "face_width", c.detection.face_width);
    read(s, "face_height", c.detection.face_height);
    read(s, "ncc_threshold", c.detection.ncc_threshold);
    read(s, "max_peaks", c.detection.max_peaks);
    read(s, "region_margin", c.detection.region_margin);
    read(s, "face_frame_factor", c.detection.face_frame_factor);
  }
  if (j.contains("gabor")) c.gabor = bank_from_json(j["gabor"]);
  if (j.contains("recognition")) {
    const json& s = j["recognition"];
    reject_unknown(s, {"threshold", "weights", "lambda", "window"}, "recognition");
    read(s, "threshold", c.recognition.threshold);
    read(s, "weights", c.recognition.weights);
    read(s, "lambda", c.recognition.lambda);
    read(s, "window", c.recognition.window);
  }
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace facegraph
