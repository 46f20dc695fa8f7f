#include "comicscript/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "comicscript/errors.hpp"
#include "json.hpp"

namespace comicscript {

using nlohmann::json;

Eigen::VectorXd core_distances(const Eigen::MatrixXd& points, int min_samples) {
  const Eigen::Index n = points.rows();
  Eigen::VectorXd core(n);
  std::vector<double> row(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      row[static_cast<size_t>(j)] = (points.row(i) - points.row(j)).norm();
    std::sort(row.begin(), row.end());
    core(i) = row[static_cast<size_t>(min_samples - 1)];
  }
  return core;
}

namespace {

struct MstEdge {
  int current = 0;   // node already in the tree when the edge was added
  int next = 0;      // node the edge brought in
  double dist = 0.0;
};

// Prim's algorithm over the mutual reachability graph. The specific
// bookkeeping (which endpoint each edge stores, first-minimum tie breaks)
// fixes the dendrogram for tied distances, so changing it changes labels.
std::vector<MstEdge> reachability_mst(const Eigen::MatrixXd& dist,
                                      const Eigen::VectorXd& core) {
  const int n = static_cast<int>(dist.rows());
  std::vector<MstEdge> edges;
  edges.reserve(static_cast<size_t>(n) - 1);

  std::vector<int> candidates(static_cast<size_t>(n) - 1);
  std::iota(candidates.begin(), candidates.end(), 1);
  std::vector<double> min_reach(static_cast<size_t>(n),
                                std::numeric_limits<double>::infinity());
  int current = 0;

  for (int step = 0; step + 1 < n; ++step) {
    size_t best_pos = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t pos = 0; pos < candidates.size(); ++pos) {
      int j = candidates[pos];
      double w = std::max({core(current), core(j), dist(current, j)});
      double& mr = min_reach[static_cast<size_t>(j)];
      if (w < mr) mr = w;
      if (mr < best) {
        best = mr;
        best_pos = pos;
      }
    }
    int next = candidates[best_pos];
    edges.push_back({current, next, best});
    candidates.erase(candidates.begin() + static_cast<long>(best_pos));
    current = next;
  }

  std::stable_sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.current != b.current) return a.current < b.current;
    return a.next < b.next;
  });
  return edges;
}

struct LinkRow {
  int left = 0;
  int right = 0;
  double dist = 0.0;
  int size = 0;
};

// Sorted MST edges -> dendrogram. Merging edge i creates node n + i whose
// children are the current roots of the edge endpoints, in edge order.
std::vector<LinkRow> single_linkage(const std::vector<MstEdge>& edges, int n) {
  std::vector<int> parent(static_cast<size_t>(2 * n - 1), -1);
  std::vector<int> size(static_cast<size_t>(2 * n - 1), 1);
  auto find = [&](int x) {
    int root = x;
    while (parent[static_cast<size_t>(root)] >= 0) root = parent[static_cast<size_t>(root)];
    while (parent[static_cast<size_t>(x)] >= 0) {
      int up = parent[static_cast<size_t>(x)];
      parent[static_cast<size_t>(x)] = root;
      x = up;
    }
    return root;
  };

  std::vector<LinkRow> rows;
  rows.reserve(edges.size());
  for (size_t i = 0; i < edges.size(); ++i) {
    int left = find(edges[i].current);
    int right = find(edges[i].next);
    int merged = n + static_cast<int>(i);
    size[static_cast<size_t>(merged)] =
        size[static_cast<size_t>(left)] + size[static_cast<size_t>(right)];
    rows.push_back({left, right, edges[i].dist, size[static_cast<size_t>(merged)]});
    parent[static_cast<size_t>(left)] = merged;
    parent[static_cast<size_t>(right)] = merged;
  }
  return rows;
}

std::vector<int> bfs_from_hierarchy(const std::vector<LinkRow>& tree, int n, int start) {
  std::vector<int> order;
  std::vector<int> level{start};
  while (!level.empty()) {
    order.insert(order.end(), level.begin(), level.end());
    std::vector<int> next;
    for (int node : level) {
      if (node < n) continue;
      const LinkRow& row = tree[static_cast<size_t>(node - n)];
      next.push_back(row.left);
      next.push_back(row.right);
    }
    level = std::move(next);
  }
  return order;
}

struct CondensedRow {
  int parent = 0;
  int child = 0;
  double lambda_val = 0.0;
  int child_size = 0;
};

// Collapses the dendrogram: clusters smaller than min_cluster_size fall
// out of their parent as individual points; surviving splits allocate new
// cluster ids. Node ids: points keep 0..n-1, clusters start at n (root).
std::vector<CondensedRow> condense_tree(const std::vector<LinkRow>& tree, int n,
                                        int min_cluster_size) {
  int root = 2 * n - 2;
  std::vector<int> relabel(static_cast<size_t>(root + 1), 0);
  relabel[static_cast<size_t>(root)] = n;
  int next_label = n + 1;
  std::vector<bool> ignore(static_cast<size_t>(root + 1), false);
  std::vector<CondensedRow> result;

  auto node_size = [&](int node) {
    return node < n ? 1 : tree[static_cast<size_t>(node - n)].size;
  };
  auto fall_out = [&](int top, int label, double lambda_val) {
    for (int sub : bfs_from_hierarchy(tree, n, top)) {
      if (sub < n) result.push_back({label, sub, lambda_val, 1});
      ignore[static_cast<size_t>(sub)] = true;
    }
  };

  for (int node : bfs_from_hierarchy(tree, n, root)) {
    if (node < n || ignore[static_cast<size_t>(node)]) continue;
    const LinkRow& row = tree[static_cast<size_t>(node - n)];
    int label = relabel[static_cast<size_t>(node)];
    double lambda_val = row.dist > 0.0 ? 1.0 / row.dist
                                       : std::numeric_limits<double>::infinity();
    int left_count = node_size(row.left);
    int right_count = node_size(row.right);

    if (left_count >= min_cluster_size && right_count >= min_cluster_size) {
      relabel[static_cast<size_t>(row.left)] = next_label++;
      result.push_back({label, relabel[static_cast<size_t>(row.left)], lambda_val, left_count});
      relabel[static_cast<size_t>(row.right)] = next_label++;
      result.push_back(
          {label, relabel[static_cast<size_t>(row.right)], lambda_val, right_count});
    } else if (left_count < min_cluster_size && right_count < min_cluster_size) {
      fall_out(row.left, label, lambda_val);
      fall_out(row.right, label, lambda_val);
    } else if (left_count < min_cluster_size) {
      relabel[static_cast<size_t>(row.right)] = label;
      fall_out(row.left, label, lambda_val);
    } else {
      relabel[static_cast<size_t>(row.left)] = label;
      fall_out(row.right, label, lambda_val);
    }
  }
  return result;
}

// Cluster birth levels and accumulated stability, by cluster id.
std::map<int, double> compute_stability(const std::vector<CondensedRow>& condensed, int n) {
  std::map<int, double> births;
  for (const auto& row : condensed) {
    auto [it, inserted] = births.emplace(row.child, row.lambda_val);
    if (!inserted) it->second = std::min(it->second, row.lambda_val);
  }
  births[n] = 0.0;

  std::map<int, double> stability;
  int max_parent = n;
  for (const auto& row : condensed) max_parent = std::max(max_parent, row.parent);
  for (int c = n; c <= max_parent; ++c) stability[c] = 0.0;
  for (const auto& row : condensed)
    stability[row.parent] += (row.lambda_val - births[row.parent]) * row.child_size;
  return stability;
}

std::vector<int> bfs_from_cluster_tree(const std::vector<CondensedRow>& cluster_rows,
                                       int start) {
  std::vector<int> order;
  std::vector<int> level{start};
  while (!level.empty()) {
    order.insert(order.end(), level.begin(), level.end());
    std::vector<int> next;
    for (int node : level)
      for (const auto& row : cluster_rows)
        if (row.parent == node) next.push_back(row.child);
    level = std::move(next);
  }
  return order;
}

// Excess-of-mass cluster selection. Walks cluster ids top-down by
// descending id (the root itself is never selectable): a node whose
// children jointly beat its own stability is deselected in their favor;
// otherwise the whole subtree collapses into the node.
std::set<int> select_clusters_eom(const std::vector<CondensedRow>& condensed,
                                  std::map<int, double> stability, int n) {
  std::vector<int> node_list;
  for (auto it = stability.rbegin(); it != stability.rend(); ++it)
    if (it->first != n) node_list.push_back(it->first);

  std::vector<CondensedRow> cluster_rows;
  for (const auto& row : condensed)
    if (row.child_size > 1) cluster_rows.push_back(row);

  std::map<int, bool> is_cluster;
  for (int node : node_list) is_cluster[node] = true;

  for (int node : node_list) {
    double subtree = 0.0;
    for (const auto& row : cluster_rows)
      if (row.parent == node) subtree += stability[row.child];
    if (subtree > stability[node]) {
      is_cluster[node] = false;
      stability[node] = subtree;
    } else {
      for (int sub : bfs_from_cluster_tree(cluster_rows, node))
        if (sub != node) is_cluster[sub] = false;
    }
  }

  std::set<int> selected;
  for (const auto& [node, keep] : is_cluster)
    if (keep) selected.insert(node);
  return selected;
}

// Each point joins its nearest selected ancestor in the condensed tree,
// or noise when the chain reaches the root unselected.
std::vector<int> label_points(const std::vector<CondensedRow>& condensed,
                              const std::set<int>& selected, int n) {
  int max_node = n;
  for (const auto& row : condensed) max_node = std::max(max_node, std::max(row.parent, row.child));

  std::vector<int> uf_parent(static_cast<size_t>(max_node + 1));
  std::iota(uf_parent.begin(), uf_parent.end(), 0);
  auto find = [&](int x) {
    int root = x;
    while (uf_parent[static_cast<size_t>(root)] != root)
      root = uf_parent[static_cast<size_t>(root)];
    while (uf_parent[static_cast<size_t>(x)] != x) {
      int up = uf_parent[static_cast<size_t>(x)];
      uf_parent[static_cast<size_t>(x)] = root;
      x = up;
    }
    return root;
  };

  for (const auto& row : condensed) {
    if (selected.count(row.child)) continue;
    uf_parent[static_cast<size_t>(find(row.child))] = find(row.parent);
  }

  std::map<int, int> label_of;
  int next = 0;
  for (int node : selected) label_of[node] = next++;  // std::set iterates ascending

  std::vector<int> labels(static_cast<size_t>(n), kNoise);
  for (int i = 0; i < n; ++i) {
    int rep = find(i);
    auto it = label_of.find(rep);
    if (it != label_of.end()) labels[static_cast<size_t>(i)] = it->second;
  }
  return labels;
}

}  // namespace

std::vector<int> hdbscan(const Eigen::MatrixXd& points, int min_cluster_size,
                         int min_samples) {
  const int n = static_cast<int>(points.rows());
  if (min_cluster_size < 2) throw ValidationError("min_cluster_size must be at least 2");
  if (min_samples < 1) throw ValidationError("min_samples must be at least 1");
  if (n == 0) return {};
  if (n < min_cluster_size || min_samples > n)
    return std::vector<int>(static_cast<size_t>(n), kNoise);

  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dist(i, j) = (points.row(i) - points.row(j)).norm();

  Eigen::VectorXd core = core_distances(points, min_samples);
  auto edges = reachability_mst(dist, core);
  auto linkage = single_linkage(edges, n);
  auto condensed = condense_tree(linkage, n, min_cluster_size);
  auto stability = compute_stability(condensed, n);
  auto selected = select_clusters_eom(condensed, stability, n);
  return label_points(condensed, selected, n);
}

Eigen::MatrixXd reduce_pca(const Eigen::MatrixXd& points, int target_dim) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (target_dim < 1) throw ValidationError("target_dim must be at least 1");
  if (n < target_dim)
    throw ValidationError("cannot reduce " + std::to_string(n) + " points to " +
                          std::to_string(target_dim) + " dimensions");
  if (d < target_dim)
    throw ValidationError("input dimension " + std::to_string(d) +
                          " is below target_dim " + std::to_string(target_dim));

  Eigen::MatrixXd centered = points.rowwise() - points.colwise().mean();
  if (centered.norm() == 0.0)
    throw ValidationError("embeddings have zero variance; nothing to reduce");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd components = svd.matrixV().leftCols(target_dim);

  // Deterministic orientation: the largest-magnitude loading of each
  // component points in the positive direction.
  for (Eigen::Index j = 0; j < components.cols(); ++j) {
    Eigen::Index at = 0;
    components.col(j).cwiseAbs().maxCoeff(&at);
    if (components(at, j) < 0.0) components.col(j) = -components.col(j);
  }
  return centered * components;
}

SpeakerId ClusterAssignment::speaker_for(const std::string& instance_id) const {
  auto it = labels.find(instance_id);
  if (it == labels.end()) return SpeakerId::unknown();
  auto sp = speakers.find(it->second);
  return sp == speakers.end() ? SpeakerId::unknown() : sp->second;
}

ClusterAssignment assign_speaker_ids(const std::vector<std::string>& instance_ids,
                                     const std::vector<int>& labels,
                                     const BookAnnotation& book) {
  if (instance_ids.size() != labels.size())
    throw ValidationError("instance/label count mismatch");

  struct Key {
    int page = 0;
    int reading_order = 0;
    double left = 0.0;
    size_t slot = 0;
  };
  std::vector<Key> keys(instance_ids.size());
  for (size_t i = 0; i < instance_ids.size(); ++i) {
    keys[i].slot = i;
    bool found = false;
    for (const auto& page : book.pages) {
      const CharacterInstance* inst = page.find_character(instance_ids[i]);
      if (!inst) continue;
      const Panel* panel = page.find_panel(inst->panel_id);
      keys[i] = {page.index, panel ? panel->reading_order : 0, inst->body_bbox.x, i};
      found = true;
      break;
    }
    if (!found)
      throw ValidationError("vectors reference unknown character instance \"" +
                            instance_ids[i] + "\"");
  }

  std::vector<size_t> order(instance_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const Key& ka = keys[a];
    const Key& kb = keys[b];
    if (ka.page != kb.page) return ka.page < kb.page;
    if (ka.reading_order != kb.reading_order) return ka.reading_order < kb.reading_order;
    if (ka.left != kb.left) return ka.left < kb.left;
    return ka.slot < kb.slot;
  });

  ClusterAssignment out;
  out.speakers[kNoise] = SpeakerId::unknown();
  int next_cluster = 0;
  for (size_t pos : order) {
    int label = labels[pos];
    out.labels[instance_ids[pos]] = label;
    if (label != kNoise && !out.speakers.count(label))
      out.speakers[label] = SpeakerId::cluster(next_cluster++);
  }
  return out;
}

std::vector<const CharacterInstance*> clusterable_instances(const BookAnnotation& book) {
  std::vector<const CharacterInstance*> out;
  for (const auto& page : book.pages)
    for (const auto& c : page.characters)
      if (!c.excluded) out.push_back(&c);
  return out;
}

ClusterResult cluster_instances(const std::vector<EmbeddingVector>& vectors,
                                const BookAnnotation& book, const ClusterParams& params) {
  ClusterResult result;
  if (vectors.empty()) return result;

  const Eigen::Index dim = vectors.front().values.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(vectors.size()), dim);
  for (size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].values.size() != dim)
      throw ValidationError("embedding dimension mismatch at instance \"" +
                            vectors[i].instance_id + "\"");
    X.row(static_cast<Eigen::Index>(i)) = vectors[i].values.cast<double>();
    result.instance_ids.push_back(vectors[i].instance_id);
  }

  if (params.reducer == Reducer::PCA) {
    if (params.normalize_embeddings) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double norm = X.row(i).norm();
        if (norm > 0.0) X.row(i) /= norm;
      }
    }
    result.reduced = reduce_pca(X, params.target_dim);
  } else {
    result.reduced = std::move(X);  // inputs arrive already reduced
  }

  result.raw_labels =
      hdbscan(result.reduced, params.min_cluster_size, params.effective_min_samples());
  result.assignment = assign_speaker_ids(result.instance_ids, result.raw_labels, book);
  return result;
}

std::vector<EmbeddingVector> load_vectors_file(const std::string& path,
                                               const BookAnnotation& book) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open vectors file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("vectors file " + path + ": " + e.what());
  }
  if (!doc.is_object())
    throw ValidationError("vectors file must be an object of id -> floats");

  std::vector<EmbeddingVector> out;
  for (const CharacterInstance* inst : clusterable_instances(book)) {
    auto it = doc.find(inst->id);
    if (it == doc.end())
      throw ValidationError("vectors file is missing instance \"" + inst->id + "\"");
    if (!it->is_array())
      throw ValidationError("vectors entry \"" + inst->id + "\" must be an array");
    EmbeddingVector v;
    v.instance_id = inst->id;
    v.values.resize(static_cast<Eigen::Index>(it->size()));
    for (size_t k = 0; k < it->size(); ++k)
      v.values(static_cast<Eigen::Index>(k)) = (*it)[k].get<float>();
    out.push_back(std::move(v));
  }
  size_t expected = out.size();
  if (doc.size() != expected)
    throw ValidationError("vectors file has " + std::to_string(doc.size()) +
                          " entries but the book has " + std::to_string(expected) +
                          " clusterable instances");
  return out;
}

void write_vectors_file(const std::string& path,
                        const std::vector<EmbeddingVector>& vectors) {
  json doc = json::object();
  for (const auto& v : vectors) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.values.size(); ++i) arr.push_back(v.values(i));
    doc[v.instance_id] = std::move(arr);
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write vectors file " + path);
  out << doc.dump(1) << "\n";
}

}  // namespace comicscript
