#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "facegraph/config.hpp"
#include "facegraph/dataset.hpp"
#include "facegraph/error.hpp"
#include "facegraph/image_io.hpp"
#include "facegraph/pipeline.hpp"
#include "facegraph/serialization.hpp"
#include "facegraph/synthetic.hpp"

namespace fs = std::filesystem;
using namespace facegraph;

namespace {

const fs::path kData = FACEGRAPH_DATA_DIR;
const std::string kCli = FACEGRAPH_CLI;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("facegraph_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Config toy_config() { return load_config(kData / "toy_config.json"); }

int run(const std::string& args, const fs::path& log) {
  const int status = std::system((kCli + " " + args + " >" + log.string() + " 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Two persons, three images each, annotated.
fs::path small_dataset(const std::string& name, bool annotate_all = true) {
  const fs::path root = scratch(name);
  std::ofstream csv(root / "fiducials.csv");
  csv << "image_path,lx,ly,rx,ry,nx,ny,ux,uy,cx,cy\n";
  for (int p = 0; p < 2; ++p) {
    const std::string id = std::string("person_") + char('a' + p);
    fs::create_directories(root / id);
    for (int i = 0; i < 3; ++i) {
      const auto face = synthetic::render_face(synthetic::make_style(p), {i, 0, 1.0, 2.0, unsigned(i)});
      const std::string rel = id + "/" + std::to_string(i) + ".png";
      write_png(root / rel, face.rgb);
      if (!annotate_all && p == 1 && i == 2) continue;
      csv << rel;
      for (const auto& pt : face.fiducials) csv << ',' << pt.x() << ',' << pt.y();
      csv << '\n';
    }
  }
  return root;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const nlohmann::json j = to_json(Config{});
  EXPECT_EQ(to_json(config_from_json(j)), j);
  EXPECT_DOUBLE_EQ(j["recognition"]["threshold"].get<double>(), 0.9984);
  EXPECT_EQ(j["detection"]["template_width"].get<int>(), 64);
  EXPECT_EQ(j["gabor"]["n_freq"].get<int>(), 5);
}

TEST(Config, PartialFileKeepsDefaults) {
  const Config c = config_from_json(nlohmann::json::parse(R"({"recognition": {"threshold": 0.5}})"));
  EXPECT_DOUBLE_EQ(c.recognition.threshold, 0.5);
  EXPECT_DOUBLE_EQ(c.recognition.lambda, 1.0);
  EXPECT_EQ(c.detection.face_width, 128);
}

TEST(Config, UnknownKeysRejected) {
  for (const char* text : {R"({"recognition": {"treshold": 0.5}})", R"({"extra": {}})", R"([1, 2])"}) {
    try {
      config_from_json(nlohmann::json::parse(text));
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
  }
}

TEST(Serialization, SkinModelRoundTrip) {
  SkinModel m;
  m.hue_hist.assign(64, 1.0 / 64);
  m.sat_hist.assign(64, 1.0 / 64);
  m.hue_mean = 0.0703125;
  m.sat_mean = 0.3515625;
  m.hue_dev = 0.03515625;
  m.sat_dev = 0.17578125;
  const SkinModel back = skin_model_from_json(to_json(m));
  EXPECT_EQ(back.hue_hist, m.hue_hist);
  EXPECT_EQ(back.hue_mean, m.hue_mean);
  EXPECT_EQ(back.sat_dev, m.sat_dev);
}

TEST(Serialization, BunchGraphRoundTripIsExact) {
  const auto rendered = synthetic::render_face(synthetic::make_style(0));
  FiducialSet f;
  for (int n = 0; n < kNodeCount; ++n) {
    f.points[n] = {int(std::lround(rendered.fiducials[n].x())), int(std::lround(rendered.fiducials[n].y()))};
  }
  const GaborBank bank;
  const FaceGraph g = build_face_graph(to_grayscale(rendered.rgb), f, bank);
  const FaceBunchGraph b = build_bunch_graph("p1", std::span(&g, 1));
  const nlohmann::json j = to_json(b);
  const FaceBunchGraph back = bunch_from_json(j);
  EXPECT_EQ(back.person_id, "p1");
  EXPECT_EQ(back.bank, b.bank);
  for (int n = 0; n < kNodeCount; ++n) {
    EXPECT_TRUE((back.node_stacks[n][0].magnitude == b.node_stacks[n][0].magnitude).all());
    EXPECT_TRUE((back.node_stacks[n][0].phase == b.node_stacks[n][0].phase).all());
    EXPECT_EQ(back.mean_positions[n], b.mean_positions[n]);
  }
  EXPECT_EQ(to_json(back).dump(), j.dump());
  nlohmann::json broken = j;
  broken["nodes"].erase("chin_tip");
  EXPECT_THROW(bunch_from_json(broken), Error);
}

TEST(Serialization, TemplateRoundTrip) {
  const fs::path dir = scratch("template");
  const auto face = synthetic::render_face(synthetic::make_style(1));
  const RasterImage faces[] = {to_grayscale(face.rgb)};
  const FaceTemplate t = build_average_template(faces, 64, 64);
  save_template(dir / "template.png", t);
  const FaceTemplate back = load_template(dir / "template.png");
  EXPECT_NEAR(back.mean, t.mean, 1e-9);
  EXPECT_LE((back.values - t.values).abs().maxCoeff(), 0.5 + 1e-9);
}

TEST(Dataset, IngestsPersonsInSortedOrder) {
  const fs::path root = small_dataset("ingest");
  std::ofstream(root / "person_a" / "notes.txt") << "not an image";
  std::ofstream(root / "person_b" / "broken.png") << "garbage";
  const Dataset ds = ingest_dataset(root);
  ASSERT_EQ(ds.persons.size(), 2u);
  EXPECT_EQ(ds.persons[0].id, "person_a");
  ASSERT_EQ(ds.persons[0].images.size(), 3u);
  EXPECT_EQ(ds.persons[1].images.size(), 3u);
  EXPECT_EQ(ds.persons[0].images[0].filename(), "0.png");
  EXPECT_FALSE(ds.warnings.empty());
  EXPECT_EQ(ds.annotations.size(), 6u);
  EXPECT_NE(ds.annotation_for(ds.persons[1].images[2]), nullptr);
}

TEST(Dataset, EmptyRootRejected) {
  const fs::path root = scratch("empty");
  try {
    ingest_dataset(root);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}

TEST(Dataset, FiducialCsvParsing) {
  const fs::path dir = scratch("csv");
  std::ofstream(dir / "f.csv") << "# comment\nimage_path,a,b,c,d,e,f,g,h,i,j\n\nx/1.png,1,2,3,4,5,6,7,8,9,10\n";
  const auto rows = parse_fiducial_csv(dir / "f.csv", dir);
  ASSERT_EQ(rows.size(), 1u);
  const auto& a = rows.begin()->second;
  EXPECT_EQ(a.points[4], Eigen::Vector2d(9, 10));
  std::ofstream(dir / "bad.csv") << "x/1.png,1,2,3\n";
  EXPECT_THROW(parse_fiducial_csv(dir / "bad.csv", dir), Error);
}

TEST(Enroll, StackHeightsFollowImageCount) {
  const Dataset ds = ingest_dataset(small_dataset("enroll"));
  const Enrollment one = enroll(ds, Config{}, 1);
  ASSERT_EQ(one.bunches.size(), 2u);
  EXPECT_EQ(one.bunches[0].model_count(), 1);
  const Enrollment all = enroll(ds, Config{}, 3);
  EXPECT_EQ(all.bunches[1].model_count(), 3);
  EXPECT_EQ(all.face_template.width(), 64);
}

TEST(Enroll, MissingAnnotationAbortsWithPaths) {
  const Dataset ds = ingest_dataset(small_dataset("unannotated", false));
  try {
    enroll(ds, Config{}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("2.png"), std::string::npos);
  }
}

TEST(Enroll, AnnotationForMissingImageAborts) {
  const fs::path root = small_dataset("dangling");
  std::ofstream(root / "fiducials.csv", std::ios::app) << "person_a/ghost.png,1,1,2,2,3,3,4,4,5,5\n";
  const Dataset ds = ingest_dataset(root);
  try {
    enroll(ds, Config{}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ghost.png"), std::string::npos);
  }
}

TEST(Normalize, FaceSizedImageKeepsFiducials) {
  const auto face = synthetic::render_face(synthetic::make_style(0));
  FiducialAnnotation a;
  a.points = face.fiducials;
  const NormalizedFace nf = normalize_annotated(face.rgb, a, Config{});
  EXPECT_EQ(nf.face.width(), 128);
  for (int n = 0; n < kNodeCount; ++n) EXPECT_EQ(nf.fiducials.points[n].x, int(std::lround(face.fiducials[n].x())));
}

TEST(Detect, BlueImageHasNoCandidates) {
  const Dataset ds = ingest_dataset(kData / "toy");
  const Config config = toy_config();
  const SkinModel skin = train_skin_model(ds, config);
  const Enrollment e = enroll(ds, config, 1);
  const DetectionResult r = detect_faces(read_image(kData / "scenes" / "no_face.png"), skin, e.face_template, config);
  EXPECT_TRUE(r.candidates.empty());
}

TEST(Evaluate, ThreadCountDoesNotChangeReport) {
  const Dataset ds = ingest_dataset(kData / "toy");
  const Config config = toy_config();
  const Enrollment e = enroll(ds, config, 3);
  EvaluationOptions opts;
  opts.pre_cropped = true;
  opts.threads = 1;
  const EvaluationReport serial = evaluate(ds, e.bunches, config, opts);
  opts.threads = 3;
  const EvaluationReport parallel = evaluate(ds, e.bunches, config, opts);
  EXPECT_EQ(to_json(serial).dump(), to_json(parallel).dump());
  EXPECT_EQ(serial.total, 12);
  EXPECT_EQ(serial.correct, 12);
  EXPECT_EQ(serial.training_images_per_model, 3);
  opts.max_persons = 2;
  opts.probes_per_person = 1;
  EXPECT_EQ(evaluate(ds, e.bunches, config, opts).total, 2);
}

TEST(Evaluate, TableHasOneColumnPerConfiguration) {
  EvaluationReport a, b;
  a.label = "EBGM (pre-cropped)";
  a.total = 4;
  a.correct = 3;
  a.accuracy = 0.75;
  b.label = "Skin segmentation + EBGM";
  b.total = 4;
  b.correct = 4;
  b.accuracy = 1.0;
  const EvaluationReport both[] = {a, b};
  const std::string table = format_accuracy_table("essex", both);
  EXPECT_NE(table.find("EBGM (pre-cropped)"), std::string::npos);
  EXPECT_NE(table.find("75.0% (3/4)"), std::string::npos);
  EXPECT_NE(table.find("100.0% (4/4)"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  const std::string toy = (kData / "toy").string();
  const std::string cfg = "--config " + (kData / "toy_config.json").string();
  EXPECT_EQ(run("", dir / "log"), 1);
  EXPECT_EQ(run("frobnicate", dir / "log"), 1);
  EXPECT_EQ(run("enroll " + toy + " --out " + (dir / "models").string() + " --per-person 3", dir / "log"), 0);
  EXPECT_TRUE(fs::exists(dir / "models" / "p1.json"));
  EXPECT_TRUE(fs::exists(dir / "models" / "template.png"));

  const std::string probe = (kData / "toy" / "p2" / "img_3.png").string();
  EXPECT_EQ(run("recognize " + probe + " --models " + (dir / "models").string() + " --pre-cropped " + cfg +
                    " --out " + (dir / "rec").string(),
                dir / "log"),
            0);
  const auto rec = nlohmann::json::parse(slurp(dir / "rec.json"));
  EXPECT_EQ(rec[0]["decision"]["type"], "Match");
  EXPECT_EQ(rec[0]["decision"]["persons"], nlohmann::json::array({"p2"}));

  // a second copy of p2 under another name makes the probe over-recognized
  auto dup = nlohmann::json::parse(slurp(dir / "models" / "p2.json"));
  dup["person_id"] = "p2_copy";
  write_json(dir / "models" / "p2_copy.json", dup);
  EXPECT_EQ(run("recognize " + probe + " --models " + (dir / "models").string() + " --pre-cropped " + cfg, dir / "log"),
            2);

  std::ofstream(dir / "junk.png") << "not a png";
  EXPECT_EQ(run("recognize " + (dir / "junk.png").string() + " --models " + (dir / "models").string() +
                    " --pre-cropped",
                dir / "log"),
            3);
  std::ofstream(dir / "bad.json") << R"({"recognition": {"nope": 1}})";
  EXPECT_EQ(run("--config " + (dir / "bad.json").string() + " train-skin " + toy + " --out x.json", dir / "log"), 1);
}
