#pragma once

// Commonsense concept graph, embedding store and argument-to-concept alignment.
//
// Alignment of one argument:
//   1. split the text into sentences,
//   2. pick the top_m most similar graph concepts per sentence (anchors),
//   3. connect every unordered anchor pair by its minimum-cost path, where
//      entering node v costs 1 - cos(embedding(v), argument vector) clamped
//      to [0, 2]; the argument vector is the mean of the sentence vectors.
// Path ties are broken by (cost, edge count, label sequence from the
// lexicographically smaller anchor).

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "psv/transport.hpp"

namespace psv {

using Vector = std::vector<double>;

struct RawEdge {
  std::string relation;
  std::string source;
  std::string target;
  double weight = 1.0;
};

class ConceptGraph {
 public:
  using NodeId = std::uint32_t;

  struct Edge {
    std::string relation;
    NodeId source;
    NodeId target;
    double weight;
  };

  ConceptGraph() = default;
  // Drops self-loops and exact (relation, source, target) duplicates, keeping the first.
  static ConceptGraph from_edges(const std::vector<RawEdge>& edges);

  std::size_t node_count() const { return labels_.size(); }
  // Node ids follow lexicographic label order.
  const std::string& label(NodeId id) const { return labels_.at(id); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<NodeId> find(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }

  const std::vector<Edge>& edges() const { return edges_; }
  // Undirected neighborhood, sorted by id.
  const std::vector<NodeId>& neighbors(NodeId id) const { return adjacency_.at(id); }

  std::size_t dropped_self_loops() const { return dropped_self_loops_; }
  std::size_t dropped_duplicates() const { return dropped_duplicates_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t dropped_self_loops_ = 0;
  std::size_t dropped_duplicates_ = 0;
};

// `relation \t source \t target \t weight` rows; blank and '#' lines skipped.
ConceptGraph load_graph(const std::filesystem::path& path);
ConceptGraph parse_graph(std::string_view contents, const std::string& source = "<graph>");

// ConceptNet assertion dump (uri, relation, start, end, json-info). Keeps edges whose
// endpoints are both in `lang`; labels are the term part with '_' replaced by ' '.
std::vector<RawEdge> parse_conceptnet_assertions(std::string_view contents, std::string_view lang = "en");
std::string conceptnet_label(std::string_view uri);
// Writes RawEdges in the tab-separated graph format.
std::string format_graph_tsv(const std::vector<RawEdge>& edges);

class EmbeddingStore {
 public:
  void add(std::string label, Vector v);
  const Vector* find(std::string_view label) const;
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }
  std::size_t dimension() const { return dim_; }
  const std::map<std::string, Vector, std::less<>>& entries() const { return vectors_; }

 private:
  std::map<std::string, Vector, std::less<>> vectors_;
  std::size_t dim_ = 0;
};

// `label \t f1 f2 ... fd` rows.
EmbeddingStore load_embeddings(const std::filesystem::path& path);
EmbeddingStore parse_embeddings(std::string_view contents, const std::string& source = "<embeddings>");

double cosine(std::span<const double> a, std::span<const double> b);
Vector mean_vector(std::span<const Vector> vs);

// Source of vectors for arbitrary texts (sentences).
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
};

// Looks texts up verbatim in a precomputed store.
class StoreEmbedder : public TextEmbedder {
 public:
  explicit StoreEmbedder(const EmbeddingStore& store) : store_(store) {}
  std::vector<Vector> embed(const std::vector<std::string>& texts) override;

 private:
  const EmbeddingStore& store_;
};

// POSTs {"model", "input": [texts]} and reads {"data": [{"embedding": [...]}, ...]}.
class ServiceEmbedder : public TextEmbedder {
 public:
  ServiceEmbedder(Transport& transport, std::string path, std::string model, std::string api_key = {});
  std::vector<Vector> embed(const std::vector<std::string>& texts) override;

 private:
  Transport& transport_;
  std::string path_;
  std::string model_;
  std::string api_key_;
  std::mutex mu_;
  std::unordered_map<std::string, Vector> memo_;
};

std::vector<std::string> sentence_split(std::string_view text);

struct ConceptMatch {
  std::string concept_label;
  double similarity;
};

// Graph concepts with embeddings, ranked by cosine to `query` (desc), ties by label.
std::vector<ConceptMatch> match_concepts(std::span<const double> query, const EmbeddingStore& store,
                                         const ConceptGraph& graph, int top_m);

// Quantized node cost in units of 1e-9, so path sums are exact integers.
using PathCost = std::int64_t;
inline constexpr double kCostScale = 1e9;
PathCost node_cost(const Vector* embedding, std::span<const double> argument_vector);
std::vector<PathCost> node_costs(const ConceptGraph& graph, const EmbeddingStore& store,
                                 std::span<const double> argument_vector);

struct PathResult {
  std::vector<ConceptGraph::NodeId> nodes;  // from source to target, inclusive
  PathCost cost = 0;                        // sum of costs of all nodes after the source
};

// Minimum path under (cost, length, label sequence). nullopt when unreachable.
std::optional<PathResult> shortest_path(const ConceptGraph& graph, std::span<const PathCost> costs,
                                        ConceptGraph::NodeId from, ConceptGraph::NodeId to);

struct ArgumentConcepts {
  std::string argument_id;
  std::set<std::string> concepts;
  std::set<std::string> anchor_concepts;
  std::set<std::string> path_concepts;  // concepts not among the anchors
};

ArgumentConcepts connect_paths(const ConceptGraph& graph, const std::set<std::string>& anchors,
                               std::span<const double> argument_vector, const EmbeddingStore& store);

struct AlignOptions {
  int top_m = 3;
};

ArgumentConcepts align_argument(const std::string& argument_id, std::string_view text,
                                const ConceptGraph& graph, const EmbeddingStore& store,
                                TextEmbedder& embedder, const AlignOptions& options);

}  // namespace psv
