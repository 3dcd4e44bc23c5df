#include "facegraph/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "facegraph/error.hpp"
#include "facegraph/image_io.hpp"

namespace facegraph {

namespace fs = std::filesystem;

namespace {

fs::path normal_key(const fs::path& p) { return fs::absolute(p).lexically_normal(); }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

}  // namespace

const FiducialAnnotation* Dataset::annotation_for(const fs::path& image) const {
  const auto it = annotations.find(normal_key(image));
  return it == annotations.end() ? nullptr : &it->second;
}

std::size_t Dataset::image_count() const {
  std::size_t n = 0;
  for (const auto& p : persons) n += p.images.size();
  return n;
}

std::map<fs::path, FiducialAnnotation> parse_fiducial_csv(const fs::path& csv, const fs::path& base) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + csv.string());
  std::map<fs::path, FiducialAnnotation> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.rfind("image_path", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    const std::string where = csv.string() + ":" + std::to_string(line_no);
    if (fields.size() != 1 + 2 * kNodeCount) {
      throw Error(ErrorCode::InvalidInput, where + ": expected 11 fields, got " + std::to_string(fields.size()));
    }
    FiducialAnnotation a;
    for (int n = 0; n < kNodeCount; ++n) {
      try {
        std::size_t used_x = 0, used_y = 0;
        const double x = std::stod(fields[1 + 2 * n], &used_x);
        const double y = std::stod(fields[2 + 2 * n], &used_y);
        if (used_x != fields[1 + 2 * n].size() || used_y != fields[2 + 2 * n].size()) throw std::invalid_argument("");
        a.points[n] = {x, y};
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidInput, where + ": non-numeric coordinate for " + std::string(kFiducialNames[n]));
      }
    }
    const fs::path image = fs::path(fields[0]).is_absolute() ? fs::path(fields[0]) : base / fields[0];
    out[normal_key(image)] = a;
  }
  return out;
}

Dataset ingest_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoError, "dataset root " + root.string() + " is not a directory");
  Dataset ds;
  ds.root = root;

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    PersonImages person{dir.filename().string(), {}};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && is_image_path(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        (void)read_image(f);
        person.images.push_back(f);
      } catch (const Error& e) {
        ds.warnings.push_back("skipping unreadable image " + f.string() + ": " + e.what());
      }
    }
    if (person.images.empty()) {
      ds.warnings.push_back("skipping " + dir.string() + ": no readable images");
      continue;
    }
    ds.persons.push_back(std::move(person));
  }
  if (ds.persons.empty()) throw Error(ErrorCode::EmptyDataset, "no readable images under " + root.string());

  const fs::path csv = root / "fiducials.csv";
  if (fs::exists(csv)) {
    ds.annotations = parse_fiducial_csv(csv, root);
    for (const auto& [path, annotation] : ds.annotations) {
      if (!fs::exists(path)) ds.missing_annotated.push_back(path);
    }
  }
  return ds;
}

}  // namespace facegraph
