#pragma once

#include <Eigen/Core>

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facegraph/gabor.hpp"
#include "facegraph/image.hpp"

namespace facegraph {

inline constexpr int kNodeCount = 5;
inline constexpr int kEdgeCount = kNodeCount * (kNodeCount - 1) / 2;

enum class Fiducial { LeftIris = 0, RightIris, NoseTip, UpperLipTip, ChinTip };

inline constexpr std::array<std::string_view, kNodeCount> kFiducialNames = {
    "left_iris", "right_iris", "nose_tip", "upper_lip_tip", "chin_tip"};

/// Node index pairs of the complete graph, (0,1), (0,2), …, (3,4).
const std::array<std::pair<int, int>, kEdgeCount>& edge_pairs();

/// Five named landmark positions inside a normalized face crop.
struct FiducialSet {
  std::array<Point, kNodeCount> points{};

  Point& operator[](Fiducial f) { return points[static_cast<int>(f)]; }
  const Point& operator[](Fiducial f) const { return points[static_cast<int>(f)]; }
};

struct GraphNode {
  Point position;
  Jet jet;
};

struct FaceGraph {
  std::array<GraphNode, kNodeCount> nodes;
  /// Δx_e = position(second) − position(first) for edge_pairs()[e].
  std::array<Eigen::Vector2d, kEdgeCount> edges;
  BankParams bank;
};

struct FaceBunchGraph {
  std::string person_id;
  std::array<std::vector<Jet>, kNodeCount> node_stacks;
  std::array<Eigen::Vector2d, kNodeCount> mean_positions;
  std::array<Eigen::Vector2d, kEdgeCount> edge_refs;
  BankParams bank;

  int model_count() const { return static_cast<int>(node_stacks[0].size()); }
};

std::array<Eigen::Vector2d, kEdgeCount> edge_vectors(const std::array<Point, kNodeCount>& positions);

/// Lazily computed jets of one gray face, shared by every model matched
/// against it.
class JetField {
 public:
  JetField(const RasterImage& gray, const GaborBank& bank);

  const Jet& at(Point pos);
  int width() const { return static_cast<int>(plane_.cols()); }
  int height() const { return static_cast<int>(plane_.rows()); }
  const GaborBank& bank() const { return *bank_; }

 private:
  GrayPlane plane_;
  const GaborBank* bank_;
  std::map<std::pair<int, int>, Jet> cache_;
};

FaceGraph build_face_graph(const RasterImage& face, const FiducialSet& fiducials, const GaborBank& bank);

/// Stacks jets per node in input order and averages positions and edges.
FaceBunchGraph build_bunch_graph(const std::string& person_id, std::span<const FaceGraph> graphs);

/// Best stack match for one jet: max over the stack of the compensated
/// similarity.
double bunch_node_similarity(const Jet& jet, const std::vector<Jet>& stack, const GaborBank& bank);

/// Searches a (2·window+1)² neighbourhood of each rounded mean position for
/// the best bunch match. Offsets are visited by ∞-norm, then row-major; the
/// first best wins. Out-of-crop offsets are skipped.
FaceGraph localize_nodes(JetField& field, const FaceBunchGraph& bunch, int window = 5);
FaceGraph localize_nodes(const RasterImage& face, const FaceBunchGraph& bunch, const GaborBank& bank,
                         int window = 5);

struct GraphSimilarity {
  double value = 0.0;
  double jet_term = 0.0;
  double edge_term = 0.0;
  std::vector<int> skipped_edges;  // zero-length reference edges
};

/// Jet term minus λ/E·Σ‖Δx^I − Δx^B‖²/‖Δx^B‖².
GraphSimilarity graph_similarity(const FaceGraph& graph, const FaceBunchGraph& bunch, const GaborBank& bank,
                                 double lambda = 1.0);

}  // namespace facegraph
