// Writes the bundled synthetic toy dataset: enrolled persons, an unenrolled
// stranger, and the two detection scenes.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "facegraph/image_io.hpp"
#include "facegraph/synthetic.hpp"

namespace fs = std::filesystem;
using namespace facegraph;

namespace {

constexpr int kPersons = 3;
constexpr int kImagesPerPerson = 4;

const synthetic::Variation kVariations[kImagesPerPerson] = {
    {0, 0, 1.00, 4.0, 1}, {1, 0, 0.93, 4.0, 2}, {0, 1, 1.05, 4.0, 3}, {-1, -1, 0.97, 4.0, 4}};

void write_person(const fs::path& root, const std::string& id, int style_index, std::ofstream& csv) {
  fs::create_directories(root / id);
  const auto style = synthetic::make_style(style_index);
  for (int i = 0; i < kImagesPerPerson; ++i) {
    auto variation = kVariations[i];
    variation.noise_seed += 100u * static_cast<unsigned>(style_index);
    const auto face = synthetic::render_face(style, variation);
    const std::string rel = id + "/img_" + std::to_string(i) + ".png";
    write_png(root / rel, face.rgb);
    csv << rel;
    for (const auto& p : face.fiducials) csv << ',' << p.x() << ',' << p.y();
    csv << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("data");
  const fs::path toy = out / "toy";
  const fs::path strangers = out / "toy_unenrolled";

  fs::create_directories(toy);
  std::ofstream csv(toy / "fiducials.csv");
  csv << std::setprecision(10);
  csv << "image_path,left_iris_x,left_iris_y,right_iris_x,right_iris_y,nose_tip_x,nose_tip_y,"
         "upper_lip_tip_x,upper_lip_tip_y,chin_tip_x,chin_tip_y\n";
  for (int p = 0; p < kPersons; ++p) write_person(toy, "p" + std::to_string(p + 1), p, csv);

  fs::create_directories(strangers);
  std::ofstream stranger_csv(strangers / "fiducials.csv");
  stranger_csv << std::setprecision(10);
  write_person(strangers, "s4", kPersons, stranger_csv);

  const fs::path scenes = out / "scenes";
  fs::create_directories(scenes);
  const auto a = synthetic::render_face(synthetic::make_style(0));
  const auto b = synthetic::render_face(synthetic::make_style(1));
  write_png(scenes / "one_face.png", synthetic::compose_scene(256, 192, {{a.rgb, {64, 32}}}));
  write_png(scenes / "two_faces.png", synthetic::compose_scene(320, 160, {{a.rgb, {16, 16}}, {b.rgb, {176, 16}}}));
  write_png(scenes / "no_face.png", synthetic::solid(160, 120, synthetic::kBackground));
  std::cout << "wrote toy dataset under " << out << '\n';
  return 0;
}
