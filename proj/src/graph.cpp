#include "psv/graph.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

#include "psv/util.hpp"

namespace psv {

using nlohmann::json;

ConceptGraph ConceptGraph::from_edges(const std::vector<RawEdge>& raw) {
  ConceptGraph g;
  std::set<std::string> labels;
  for (const auto& e : raw) {
    labels.insert(e.source);
    labels.insert(e.target);
  }
  g.labels_.assign(labels.begin(), labels.end());
  for (NodeId i = 0; i < g.labels_.size(); ++i) g.index_.emplace(g.labels_[i], i);
  g.adjacency_.resize(g.labels_.size());

  std::set<std::tuple<std::string, NodeId, NodeId>> seen;
  for (const auto& e : raw) {
    auto s = g.index_.at(e.source);
    auto t = g.index_.at(e.target);
    if (s == t) {
      ++g.dropped_self_loops_;
      continue;
    }
    if (!seen.emplace(e.relation, s, t).second) {
      ++g.dropped_duplicates_;
      continue;
    }
    g.edges_.push_back({e.relation, s, t, e.weight});
    g.adjacency_[s].push_back(t);
    g.adjacency_[t].push_back(s);
  }
  for (auto& nb : g.adjacency_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return g;
}

std::optional<ConceptGraph::NodeId> ConceptGraph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

// Calls fn(fields, row_no) for every non-blank, non-comment line.
template <typename Fn>
void for_each_tsv_row(std::string_view contents, const std::string& source, Fn&& fn) {
  std::size_t row = 0;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::trim(line).empty() || line.front() == '#') continue;
    try {
      fn(util::split(line, '\t'), row);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, row, e.what());
    }
  }
}

}  // namespace

ConceptGraph parse_graph(std::string_view contents, const std::string& source) {
  std::vector<RawEdge> edges;
  for_each_tsv_row(contents, source, [&](const std::vector<std::string>& f, std::size_t) {
    if (f.size() != 4) {
      throw Error("expected 4 tab-separated columns (relation, source, target, weight), got " +
                  std::to_string(f.size()));
    }
    RawEdge e{std::string(util::trim(f[0])), std::string(util::trim(f[1])), std::string(util::trim(f[2])),
              util::parse_double(f[3])};
    if (e.source.empty() || e.target.empty()) throw Error("empty edge endpoint");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) throw Error("edge weight must be finite and nonnegative");
    edges.push_back(std::move(e));
  });
  return ConceptGraph::from_edges(edges);
}

ConceptGraph load_graph(const std::filesystem::path& path) {
  return parse_graph(util::read_file(path), path.string());
}

std::string conceptnet_label(std::string_view uri) {
  // /c/en/ice_cream/n/... -> "ice cream"
  auto parts = util::split(uri, '/');
  if (parts.size() < 4 || parts[1] != "c") throw Error("not a concept uri: " + std::string(uri));
  auto term = parts[3];
  std::replace(term.begin(), term.end(), '_', ' ');
  return term;
}

std::vector<RawEdge> parse_conceptnet_assertions(std::string_view contents, std::string_view lang) {
  std::vector<RawEdge> out;
  const std::string prefix = "/c/" + std::string(lang) + "/";
  for_each_tsv_row(contents, "<conceptnet>", [&](const std::vector<std::string>& f, std::size_t) {
    if (f.size() < 4) throw Error("expected at least 4 columns in assertion row");
    if (!f[2].starts_with(prefix) || !f[3].starts_with(prefix)) return;
    RawEdge e;
    e.relation = f[1].starts_with("/r/") ? f[1].substr(3) : f[1];
    e.source = conceptnet_label(f[2]);
    e.target = conceptnet_label(f[3]);
    if (f.size() >= 5 && !f[4].empty()) {
      auto info = json::parse(f[4], nullptr, false);
      if (!info.is_discarded() && info.contains("weight") && info["weight"].is_number()) {
        e.weight = info["weight"].get<double>();
      }
    }
    out.push_back(std::move(e));
  });
  return out;
}

std::string format_graph_tsv(const std::vector<RawEdge>& edges) {
  std::string out;
  for (const auto& e : edges) {
    out += e.relation + '\t' + e.source + '\t' + e.target + '\t' + util::format_double(e.weight) + '\n';
  }
  return out;
}

void EmbeddingStore::add(std::string label, Vector v) {
  if (v.empty()) throw Error("empty embedding for '" + label + "'");
  if (!vectors_.empty() && v.size() != dim_) {
    throw Error("embedding for '" + label + "' has dimension " + std::to_string(v.size()) + ", expected " +
                std::to_string(dim_));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw Error("non-finite embedding value for '" + label + "'");
  }
  dim_ = v.size();
  vectors_.insert_or_assign(std::move(label), std::move(v));
}

const Vector* EmbeddingStore::find(std::string_view label) const {
  auto it = vectors_.find(label);
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingStore parse_embeddings(std::string_view contents, const std::string& source) {
  EmbeddingStore store;
  for_each_tsv_row(contents, source, [&](const std::vector<std::string>& f, std::size_t) {
    if (f.size() != 2) throw Error("expected 'label<TAB>values'");
    Vector v;
    std::istringstream vs(f[1]);
    std::string tok;
    while (vs >> tok) v.push_back(util::parse_double(tok));
    store.add(f[0], std::move(v));
  });
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(util::read_file(path), path.string());
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("cosine of vectors with dimensions " + std::to_string(a.size()) + " and " +
                std::to_string(b.size()));
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

Vector mean_vector(std::span<const Vector> vs) {
  if (vs.empty()) return {};
  Vector out(vs.front().size(), 0.0);
  for (const auto& v : vs) {
    if (v.size() != out.size()) throw Error("mean of vectors with mismatched dimensions");
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
  }
  for (auto& x : out) x /= static_cast<double>(vs.size());
  return out;
}

std::vector<Vector> StoreEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const auto* v = store_.find(t);
    if (!v) throw Error("no embedding for text: \"" + t + "\"");
    out.push_back(*v);
  }
  return out;
}

ServiceEmbedder::ServiceEmbedder(Transport& transport, std::string path, std::string model, std::string api_key)
    : transport_(transport), path_(std::move(path)), model_(std::move(model)), api_key_(std::move(api_key)) {}

std::vector<Vector> ServiceEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mu_);
    for (const auto& t : texts) {
      if (!memo_.contains(t) && std::find(missing.begin(), missing.end(), t) == missing.end()) {
        missing.push_back(t);
      }
    }
  }
  if (!missing.empty()) {
    HttpRequest req;
    req.path = path_;
    req.body = json{{"model", model_}, {"input", missing}}.dump();
    if (!api_key_.empty()) req.headers.emplace_back("Authorization", "Bearer " + api_key_);
    auto res = transport_.post(req);
    if (res.status != 200) {
      throw Error("embedding service failed (status " + std::to_string(res.status) + "): " +
                  (res.status == 0 ? res.error : res.body.substr(0, 200)));
    }
    auto j = json::parse(res.body);
    const auto& data = j.at("data");
    if (data.size() != missing.size()) throw Error("embedding service returned wrong number of vectors");
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      memo_.emplace(missing[i], data[i].at("embedding").get<Vector>());
    }
  }
  std::lock_guard lock(mu_);
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(memo_.at(t));
  return out;
}

namespace {

bool is_terminal(char c) { return c == '.' || c == '?' || c == '!'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

constexpr std::array<std::string_view, 14> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "e.g", "i.e", "u.s", "u.k", "no"};

// True if the word ending right before a '.' at `dot` is a known abbreviation.
bool ends_with_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1]))) --start;
  auto word = util::to_lower(text.substr(start, dot - start));
  while (!word.empty() && (word.front() == '(' || word.front() == '"')) word.erase(word.begin());
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

}  // namespace

std::vector<std::string> sentence_split(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    auto s = util::trim(text.substr(start, end - start));
    if (!s.empty()) out.emplace_back(s);
    start = end;
  };
  while (i < text.size()) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t first = i;
    while (i < text.size() && is_terminal(text[i])) ++i;
    while (i < text.size() && is_closer(text[i])) ++i;
    bool boundary = i == text.size() || std::isspace(static_cast<unsigned char>(text[i]));
    if (boundary && text[first] == '.' && i == first + 1 && ends_with_abbreviation(text, first)) boundary = false;
    if (boundary) emit(i);
  }
  emit(text.size());
  return out;
}

std::vector<ConceptMatch> match_concepts(std::span<const double> query, const EmbeddingStore& store,
                                         const ConceptGraph& graph, int top_m) {
  if (store.empty()) throw Error("embedding store is empty");
  if (top_m < 1) throw Error("top_m must be >= 1");
  std::vector<ConceptMatch> all;
  for (const auto& label : graph.labels()) {
    if (const auto* v = store.find(label)) all.push_back({label, cosine(*v, query)});
  }
  auto better = [](const ConceptMatch& a, const ConceptMatch& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.concept_label < b.concept_label;
  };
  auto keep = std::min<std::size_t>(static_cast<std::size_t>(top_m), all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  all.resize(keep);
  return all;
}

PathCost node_cost(const Vector* embedding, std::span<const double> argument_vector) {
  double sim = embedding ? cosine(*embedding, argument_vector) : 0.0;
  double c = std::clamp(1.0 - sim, 0.0, 2.0);
  return static_cast<PathCost>(std::llround(c * kCostScale));
}

std::vector<PathCost> node_costs(const ConceptGraph& graph, const EmbeddingStore& store,
                                 std::span<const double> argument_vector) {
  std::vector<PathCost> costs(graph.node_count());
  for (ConceptGraph::NodeId i = 0; i < graph.node_count(); ++i) {
    costs[i] = node_cost(store.find(graph.label(i)), argument_vector);
  }
  return costs;
}

namespace {

using NodeId = ConceptGraph::NodeId;
constexpr NodeId kNone = std::numeric_limits<NodeId>::max();

// Single-source search keyed on (cost, length, label sequence). Stops once all
// targets are settled. Node ids are in label order, so id sequences compare
// like label sequences.
class PathSearch {
 public:
  PathSearch(const ConceptGraph& g, std::span<const PathCost> costs, NodeId source)
      : g_(g), costs_(costs), source_(source) {
    auto n = g.node_count();
    cost_.assign(n, std::numeric_limits<PathCost>::max());
    len_.assign(n, std::numeric_limits<std::uint32_t>::max());
    pred_.assign(n, kNone);
    settled_.assign(n, false);
  }

  void run(const std::vector<NodeId>& targets) {
    std::size_t remaining = 0;
    std::vector<bool> is_target(g_.node_count(), false);
    for (auto t : targets) {
      if (!is_target[t]) {
        is_target[t] = true;
        ++remaining;
      }
    }
    using Entry = std::tuple<PathCost, std::uint32_t, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    cost_[source_] = 0;
    len_[source_] = 0;
    pq.emplace(0, 0, source_);
    while (!pq.empty() && remaining > 0) {
      auto [c, l, u] = pq.top();
      pq.pop();
      if (settled_[u] || c != cost_[u] || l != len_[u]) continue;
      settled_[u] = true;
      if (is_target[u]) --remaining;
      for (auto v : g_.neighbors(u)) {
        if (settled_[v]) continue;
        PathCost nc = c + costs_[v];
        std::uint32_t nl = l + 1;
        if (nc < cost_[v] || (nc == cost_[v] && nl < len_[v])) {
          cost_[v] = nc;
          len_[v] = nl;
          pred_[v] = u;
          pq.emplace(nc, nl, v);
        } else if (nc == cost_[v] && nl == len_[v] && prefix_less(u, pred_[v])) {
          pred_[v] = u;
        }
      }
    }
  }

  bool reached(NodeId t) const { return settled_[t]; }
  PathCost cost(NodeId t) const { return cost_[t]; }

  std::vector<NodeId> path_to(NodeId t) const {
    std::vector<NodeId> p;
    for (NodeId v = t; v != kNone; v = pred_[v]) p.push_back(v);
    std::reverse(p.begin(), p.end());
    return p;
  }

 private:
  // Compares the settled paths to a and b (equal length) from the source.
  bool prefix_less(NodeId a, NodeId b) const {
    if (a == b) return false;
    auto pa = path_to(a);
    auto pb = path_to(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  }

  const ConceptGraph& g_;
  std::span<const PathCost> costs_;
  NodeId source_;
  std::vector<PathCost> cost_;
  std::vector<std::uint32_t> len_;
  std::vector<NodeId> pred_;
  std::vector<bool> settled_;
};

}  // namespace

std::optional<PathResult> shortest_path(const ConceptGraph& graph, std::span<const PathCost> costs,
                                        ConceptGraph::NodeId from, ConceptGraph::NodeId to) {
  if (costs.size() != graph.node_count()) throw Error("node cost vector does not match graph size");
  PathSearch search(graph, costs, from);
  search.run({to});
  if (!search.reached(to)) return std::nullopt;
  return PathResult{search.path_to(to), search.cost(to)};
}

ArgumentConcepts connect_paths(const ConceptGraph& graph, const std::set<std::string>& anchors,
                               std::span<const double> argument_vector, const EmbeddingStore& store) {
  std::vector<NodeId> ids;
  for (const auto& a : anchors) {
    auto id = graph.find(a);
    if (!id) throw Error("anchor concept '" + a + "' is not in the concept graph");
    ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());

  ArgumentConcepts out;
  out.anchor_concepts = anchors;
  out.concepts = anchors;
  if (ids.size() < 2) return out;

  auto costs = node_costs(graph, store, argument_vector);
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    std::vector<NodeId> targets(ids.begin() + static_cast<std::ptrdiff_t>(i) + 1, ids.end());
    PathSearch search(graph, costs, ids[i]);
    search.run(targets);
    for (auto t : targets) {
      if (!search.reached(t)) continue;
      for (auto v : search.path_to(t)) {
        const auto& label = graph.label(v);
        if (out.concepts.insert(label).second) out.path_concepts.insert(label);
      }
    }
  }
  return out;
}

ArgumentConcepts align_argument(const std::string& argument_id, std::string_view text,
                                const ConceptGraph& graph, const EmbeddingStore& store,
                                TextEmbedder& embedder, const AlignOptions& options) {
  auto sentences = sentence_split(text);
  if (sentences.empty()) throw Error("argument '" + argument_id + "' has no sentences");
  auto vectors = embedder.embed(sentences);
  std::set<std::string> anchors;
  for (const auto& v : vectors) {
    for (auto& m : match_concepts(v, store, graph, options.top_m)) anchors.insert(std::move(m.concept_label));
  }
  auto argument_vector = mean_vector(vectors);
  auto out = connect_paths(graph, anchors, argument_vector, store);
  out.argument_id = argument_id;
  return out;
}

}  // namespace psv
