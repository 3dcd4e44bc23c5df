#include "facegraph/graph.hpp"

#include <cmath>
#include <limits>

#include "facegraph/error.hpp"

namespace facegraph {
namespace {

std::string node_label(int n) { return std::string(kFiducialNames[n]); }

// Window offsets ordered by ∞-norm, then row-major.
std::vector<Point> search_offsets(int window) {
  std::vector<Point> offsets;
  for (int ring = 0; ring <= window; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) == ring) offsets.push_back({dx, dy});
      }
    }
  }
  return offsets;
}

Point rounded(const Eigen::Vector2d& p) {
  return {static_cast<int>(std::round(p.x())), static_cast<int>(std::round(p.y()))};
}

}  // namespace

const std::array<std::pair<int, int>, kEdgeCount>& edge_pairs() {
  static const auto pairs = [] {
    std::array<std::pair<int, int>, kEdgeCount> out{};
    int e = 0;
    for (int i = 0; i < kNodeCount; ++i) {
      for (int j = i + 1; j < kNodeCount; ++j) out[e++] = {i, j};
    }
    return out;
  }();
  return pairs;
}

std::array<Eigen::Vector2d, kEdgeCount> edge_vectors(const std::array<Point, kNodeCount>& positions) {
  std::array<Eigen::Vector2d, kEdgeCount> edges;
  for (int e = 0; e < kEdgeCount; ++e) {
    const auto [i, j] = edge_pairs()[e];
    edges[e] = {static_cast<double>(positions[j].x - positions[i].x),
                static_cast<double>(positions[j].y - positions[i].y)};
  }
  return edges;
}

JetField::JetField(const RasterImage& gray, const GaborBank& bank) : bank_(&bank) {
  if (gray.format() != PixelFormat::Gray8) throw Error(ErrorCode::FormatMismatch, "JetField expects Gray8 input");
  plane_ = to_plane(gray);
}

const Jet& JetField::at(Point pos) {
  const auto key = std::make_pair(pos.y, pos.x);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, extract_jet(plane_, pos, *bank_)).first;
  return it->second;
}

FaceGraph build_face_graph(const RasterImage& face, const FiducialSet& fiducials, const GaborBank& bank) {
  if (face.format() != PixelFormat::Gray8) throw Error(ErrorCode::FormatMismatch, "face graph needs a Gray8 face");
  const GrayPlane plane = to_plane(face);
  FaceGraph graph;
  graph.bank = bank.params();
  for (int n = 0; n < kNodeCount; ++n) {
    const Point p = fiducials.points[n];
    if (!face.contains(p.x, p.y)) {
      throw Error(ErrorCode::OutOfBounds, node_label(n) + " lies outside the face crop");
    }
    graph.nodes[n] = {p, extract_jet(plane, p, bank)};
  }
  graph.edges = edge_vectors(fiducials.points);
  return graph;
}

FaceBunchGraph build_bunch_graph(const std::string& person_id, std::span<const FaceGraph> graphs) {
  if (graphs.empty()) throw Error(ErrorCode::InvalidInput, "bunch graph for " + person_id + " has no model graphs");
  FaceBunchGraph bunch;
  bunch.person_id = person_id;
  bunch.bank = graphs.front().bank;
  bunch.mean_positions.fill(Eigen::Vector2d::Zero());
  bunch.edge_refs.fill(Eigen::Vector2d::Zero());
  for (const FaceGraph& g : graphs) {
    if (!(g.bank == bunch.bank)) throw Error(ErrorCode::BankMismatch, "model graphs of " + person_id + " use different banks");
    for (int n = 0; n < kNodeCount; ++n) {
      bunch.node_stacks[n].push_back(g.nodes[n].jet);
      bunch.mean_positions[n] += Eigen::Vector2d(g.nodes[n].position.x, g.nodes[n].position.y);
    }
    for (int e = 0; e < kEdgeCount; ++e) bunch.edge_refs[e] += g.edges[e];
  }
  const double count = static_cast<double>(graphs.size());
  for (auto& p : bunch.mean_positions) p /= count;
  for (auto& e : bunch.edge_refs) e /= count;
  return bunch;
}

double bunch_node_similarity(const Jet& jet, const std::vector<Jet>& stack, const GaborBank& bank) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Jet& model : stack) best = std::max(best, jet_similarity_compensated(jet, model, bank));
  return best;
}

FaceGraph localize_nodes(JetField& field, const FaceBunchGraph& bunch, int window) {
  if (!(field.bank().params() == bunch.bank)) {
    throw Error(ErrorCode::BankMismatch, "bunch graph " + bunch.person_id + " was built with another bank");
  }
  if (window < 0) throw Error(ErrorCode::InvalidConfig, "negative localization window");
  const auto offsets = search_offsets(window);

  FaceGraph graph;
  graph.bank = bunch.bank;
  std::array<Point, kNodeCount> positions{};
  for (int n = 0; n < kNodeCount; ++n) {
    const Point center = rounded(bunch.mean_positions[n]);
    double best = -std::numeric_limits<double>::infinity();
    std::optional<Point> best_pos;
    bool any_inside = false;
    for (const Point off : offsets) {
      const Point p{center.x + off.x, center.y + off.y};
      if (p.x < 0 || p.y < 0 || p.x >= field.width() || p.y >= field.height()) continue;
      any_inside = true;
      double score = 0.0;
      try {
        score = bunch_node_similarity(field.at(p), bunch.node_stacks[n], field.bank());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateJet) throw;
        continue;
      }
      if (score > best) {
        best = score;
        best_pos = p;
      }
    }
    if (!any_inside) throw Error(ErrorCode::OutOfBounds, node_label(n) + " search window lies outside the crop");
    if (!best_pos) throw Error(ErrorCode::DegenerateJet, node_label(n) + ": no textured position in the search window");
    positions[n] = *best_pos;
    graph.nodes[n] = {*best_pos, field.at(*best_pos)};
  }
  graph.edges = edge_vectors(positions);
  return graph;
}

FaceGraph localize_nodes(const RasterImage& face, const FaceBunchGraph& bunch, const GaborBank& bank,
                         int window) {
  JetField field(face, bank);
  return localize_nodes(field, bunch, window);
}

GraphSimilarity graph_similarity(const FaceGraph& graph, const FaceBunchGraph& bunch, const GaborBank& bank,
                                 double lambda) {
  if (!(graph.bank == bunch.bank) || !(bank.params() == bunch.bank)) {
    throw Error(ErrorCode::BankMismatch, "graph and bunch graph " + bunch.person_id + " use different banks");
  }
  if (lambda < 0.0) throw Error(ErrorCode::InvalidConfig, "lambda must be non-negative");
  GraphSimilarity out;
  for (int n = 0; n < kNodeCount; ++n) {
    out.jet_term += bunch_node_similarity(graph.nodes[n].jet, bunch.node_stacks[n], bank);
  }
  out.jet_term /= kNodeCount;

  double distortion = 0.0;
  for (int e = 0; e < kEdgeCount; ++e) {
    const double ref = bunch.edge_refs[e].squaredNorm();
    if (ref == 0.0) {
      out.skipped_edges.push_back(e);
      continue;
    }
    distortion += (graph.edges[e] - bunch.edge_refs[e]).squaredNorm() / ref;
  }
  out.edge_term = lambda / kEdgeCount * distortion;
  out.value = out.jet_term - out.edge_term;
  return out;
}

}  // namespace facegraph
