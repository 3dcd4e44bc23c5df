#include "facegraph/serialization.hpp"

#include <fstream>

#include "facegraph/config.hpp"
#include "facegraph/error.hpp"
#include "facegraph/image_io.hpp"

namespace facegraph {

using nlohmann::json;

namespace {

void require_version(const json& j, const char* what) {
  if (!j.contains("version") || j["version"].get<int>() != kFormatVersion) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + ": unsupported or missing format version");
  }
}

int node_index(const std::string& name) {
  for (int n = 0; n < kNodeCount; ++n) {
    if (kFiducialNames[n] == name) return n;
  }
  throw Error(ErrorCode::InvalidInput, "unknown fiducial name " + name);
}

}  // namespace

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
  }
}

json to_json(const SkinModel& m) {
  return {{"bin_count", m.bin_count}, {"hue_hist", m.hue_hist}, {"sat_hist", m.sat_hist},
          {"hue_mean", m.hue_mean},   {"sat_mean", m.sat_mean}, {"hue_dev", m.hue_dev},
          {"sat_dev", m.sat_dev},     {"version", kFormatVersion}};
}

SkinModel skin_model_from_json(const json& j) {
  require_version(j, "skin model");
  SkinModel m;
  try {
    m.bin_count = j.at("bin_count").get<int>();
    m.hue_hist = j.at("hue_hist").get<std::vector<double>>();
    m.sat_hist = j.at("sat_hist").get<std::vector<double>>();
    m.hue_mean = j.at("hue_mean").get<double>();
    m.sat_mean = j.at("sat_mean").get<double>();
    m.hue_dev = j.at("hue_dev").get<double>();
    m.sat_dev = j.at("sat_dev").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("skin model: ") + e.what());
  }
  if (static_cast<int>(m.hue_hist.size()) != m.bin_count || static_cast<int>(m.sat_hist.size()) != m.bin_count ||
      !(m.hue_dev > 0.0) || !(m.sat_dev > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "skin model fields are inconsistent");
  }
  return m;
}

void save_template(const std::filesystem::path& png_path, const FaceTemplate& tmpl) {
  write_png(png_path, tmpl.to_image());
  auto sidecar = png_path;
  sidecar.replace_extension(".json");
  write_json(sidecar, {{"mean", tmpl.mean}, {"width", tmpl.width()}, {"height", tmpl.height()}});
}

FaceTemplate load_template(const std::filesystem::path& png_path) {
  auto sidecar = png_path;
  sidecar.replace_extension(".json");
  const json meta = read_json(sidecar);
  const RasterImage gray = to_grayscale(read_image(png_path));
  if (meta.at("width").get<int>() != gray.width() || meta.at("height").get<int>() != gray.height()) {
    throw Error(ErrorCode::InvalidInput, "template sidecar size does not match " + png_path.string());
  }
  return template_from_image(gray);
}

json to_json(const FaceBunchGraph& bunch) {
  json nodes = json::object();
  for (int n = 0; n < kNodeCount; ++n) {
    json stack = json::array();
    for (const Jet& jet : bunch.node_stacks[n]) {
      json coeffs = json::array();
      for (int j = 0; j < jet.size(); ++j) coeffs.push_back({jet.magnitude[j], jet.phase[j]});
      stack.push_back(std::move(coeffs));
    }
    nodes[std::string(kFiducialNames[n])] = {
        {"mean_pos", {bunch.mean_positions[n].x(), bunch.mean_positions[n].y()}}, {"stack", std::move(stack)}};
  }
  json edges = json::array();
  for (int e = 0; e < kEdgeCount; ++e) {
    const auto [a, b] = edge_pairs()[e];
    edges.push_back({{"pair", {kFiducialNames[a], kFiducialNames[b]}},
                     {"ref", {bunch.edge_refs[e].x(), bunch.edge_refs[e].y()}}});
  }
  return {{"person_id", bunch.person_id},
          {"bank", to_json(bunch.bank)},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"version", kFormatVersion}};
}

FaceBunchGraph bunch_from_json(const json& j) {
  require_version(j, "bunch graph");
  FaceBunchGraph bunch;
  try {
    bunch.person_id = j.at("person_id").get<std::string>();
    bunch.bank = bank_from_json(j.at("bank"));
    const json& nodes = j.at("nodes");
    if (nodes.size() != kNodeCount) throw Error(ErrorCode::InvalidInput, "bunch graph needs exactly five nodes");
    std::size_t height = 0;
    for (const auto& [name, node] : nodes.items()) {
      const int n = node_index(name);
      const auto pos = node.at("mean_pos").get<std::vector<double>>();
      if (pos.size() != 2) throw Error(ErrorCode::InvalidInput, "mean_pos must have two entries");
      bunch.mean_positions[n] = {pos[0], pos[1]};
      const Point rounded{static_cast<int>(std::round(pos[0])), static_cast<int>(std::round(pos[1]))};
      for (const json& coeffs : node.at("stack")) {
        Jet jet;
        jet.position = rounded;
        jet.magnitude.resize(static_cast<Eigen::Index>(coeffs.size()));
        jet.phase.resize(static_cast<Eigen::Index>(coeffs.size()));
        for (std::size_t c = 0; c < coeffs.size(); ++c) {
          jet.magnitude[static_cast<Eigen::Index>(c)] = coeffs[c].at(0).get<double>();
          jet.phase[static_cast<Eigen::Index>(c)] = coeffs[c].at(1).get<double>();
        }
        bunch.node_stacks[n].push_back(std::move(jet));
      }
      if (bunch.node_stacks[n].empty()) throw Error(ErrorCode::InvalidInput, "empty jet stack at " + name);
      if (height == 0) height = bunch.node_stacks[n].size();
      if (bunch.node_stacks[n].size() != height) throw Error(ErrorCode::InvalidInput, "jet stacks differ in height");
    }
    const json& edges = j.at("edges");
    if (edges.size() != kEdgeCount) throw Error(ErrorCode::InvalidInput, "bunch graph needs exactly ten edges");
    for (const json& edge : edges) {
      const auto pair = edge.at("pair").get<std::vector<std::string>>();
      const auto ref = edge.at("ref").get<std::vector<double>>();
      if (pair.size() != 2 || ref.size() != 2) throw Error(ErrorCode::InvalidInput, "malformed edge entry");
      const int a = node_index(pair[0]);
      const int b = node_index(pair[1]);
      int found = -1;
      for (int e = 0; e < kEdgeCount; ++e) {
        if (edge_pairs()[e] == std::make_pair(a, b)) found = e;
      }
      if (found < 0) throw Error(ErrorCode::InvalidInput, "edge pair out of canonical order");
      bunch.edge_refs[found] = {ref[0], ref[1]};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bunch graph: ") + e.what());
  }
  return bunch;
}

json candidates_to_json(std::span<const FaceCandidate> candidates) {
  json out = json::array();
  for (const FaceCandidate& c : candidates) {
    out.push_back({{"bbox", {c.bbox.x0, c.bbox.y0, c.bbox.x1, c.bbox.y1}},
                   {"center", {c.center.x, c.center.y}},
                   {"score", c.score}});
  }
  return out;
}

json to_json(const RecognitionOutcome& outcome) {
  json similarities = json::object();
  json outputs = json::object();
  for (std::size_t i = 0; i < outcome.person_ids.size(); ++i) {
    similarities[outcome.person_ids[i]] = outcome.similarities[i];
    outputs[outcome.person_ids[i]] = outcome.outputs[i];
  }
  json persons = json::array();
  for (int p : outcome.decision.persons) persons.push_back(outcome.person_ids[p]);
  return {{"similarities", std::move(similarities)},
          {"outputs", std::move(outputs)},
          {"index", outcome.index},
          {"decision", {{"type", decision_name(outcome.decision.kind)}, {"persons", std::move(persons)}}}};
}

}  // namespace facegraph
