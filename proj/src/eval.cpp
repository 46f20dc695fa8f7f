#include "comicscript/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "comicscript/errors.hpp"

namespace comicscript {

using nlohmann::json;

namespace {
constexpr const char* kRoleNames[3] = {"Sound", "Dialogue", "Caption"};

int role_index(TextRole role) {
  switch (role) {
    case TextRole::Sound:
      return 0;
    case TextRole::Dialogue:
      return 1;
    case TextRole::Caption:
      return 2;
  }
  return 2;
}
}  // namespace

TextTypeResult text_type_confusion(const std::map<std::string, TextRole>& predicted,
                                   const std::map<std::string, TextRole>& reference) {
  TextTypeResult r;
  r.counts.setZero();
  for (const auto& [id, ref_role] : reference) {
    auto it = predicted.find(id);
    if (it == predicted.end()) continue;
    r.counts(role_index(ref_role), role_index(it->second)) += 1;
  }
  r.total = r.counts.sum();
  r.correct = r.counts.trace();
  for (int c = 0; c < 3; ++c) {
    PrMetrics m;
    long col = r.counts.col(c).sum();
    long row = r.counts.row(c).sum();
    if (col > 0) m.precision = double(r.counts(c, c)) / double(col);
    if (row > 0) m.recall = double(r.counts(c, c)) / double(row);
    r.per_class[kRoleNames[c]] = m;
  }
  return r;
}

std::vector<int> max_assignment(const Eigen::MatrixXd& weight) {
  const int rows = static_cast<int>(weight.rows());
  const int cols = static_cast<int>(weight.cols());
  if (rows == 0 || cols == 0) return std::vector<int>(static_cast<size_t>(rows), -1);

  // Shortest-augmenting-path assignment on costs; maximize by negating
  // against the largest weight. Requires n <= m, so transpose if needed.
  bool transposed = rows > cols;
  Eigen::MatrixXd w = transposed ? weight.transpose() : weight;
  const int n = static_cast<int>(w.rows());
  const int m = static_cast<int>(w.cols());
  double top = w.maxCoeff();
  Eigen::MatrixXd cost = (-w).array() + top;

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n + 1), 0.0), v(static_cast<size_t>(m + 1), 0.0);
  std::vector<int> match(static_cast<size_t>(m + 1), 0), way(static_cast<size_t>(m + 1), 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(m + 1), inf);
    std::vector<bool> used(static_cast<size_t>(m + 1), false);
    do {
      used[static_cast<size_t>(j0)] = true;
      int i0 = match[static_cast<size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<size_t>(n), -1);
  for (int j = 1; j <= m; ++j)
    if (match[static_cast<size_t>(j)] > 0)
      row_to_col[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)] = j - 1;

  if (!transposed) return row_to_col;
  std::vector<int> out(static_cast<size_t>(rows), -1);
  for (int c = 0; c < n; ++c)
    if (row_to_col[static_cast<size_t>(c)] >= 0)
      out[static_cast<size_t>(row_to_col[static_cast<size_t>(c)])] = c;
  return out;
}

ClusterConfusionResult cluster_confusion(const ClusterAssignment& assignment,
                                         const std::map<std::string, std::string>& reference) {
  ClusterConfusionResult r;

  std::set<std::string> identity_set;
  std::set<int> cluster_set;
  for (const auto& [id, identity] : reference) {
    if (!assignment.labels.count(id)) continue;
    identity_set.insert(identity);
  }
  for (const auto& [id, label] : assignment.labels)
    if (label != kNoise) cluster_set.insert(label);

  r.identities.assign(identity_set.begin(), identity_set.end());
  std::vector<int> clusters(cluster_set.begin(), cluster_set.end());
  std::map<std::string, int> identity_row;
  for (size_t i = 0; i < r.identities.size(); ++i)
    identity_row[r.identities[i]] = static_cast<int>(i);
  std::map<int, int> cluster_col;
  for (size_t j = 0; j < clusters.size(); ++j) cluster_col[clusters[j]] = static_cast<int>(j);

  Eigen::MatrixXi overlap =
      Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(r.identities.size()),
                            static_cast<Eigen::Index>(clusters.size()));
  r.misc = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(r.identities.size()));

  for (const auto& [id, identity] : reference) {
    auto it = assignment.labels.find(id);
    if (it == assignment.labels.end()) continue;
    ++r.total;
    int row = identity_row[identity];
    if (it->second == kNoise) {
      r.misc(row) += 1;
    } else {
      overlap(row, cluster_col[it->second]) += 1;
    }
  }

  // Match against columns sorted by content, not by label value, so any
  // relabeling of the clusters yields the identical matched matrix. Ties
  // between equal-content columns keep label order; either pick produces
  // the same counts.
  std::vector<int> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index i = 0; i < overlap.rows(); ++i)
      if (overlap(i, a) != overlap(i, b)) return overlap(i, a) > overlap(i, b);
    return false;
  });
  Eigen::MatrixXi canon(overlap.rows(), overlap.cols());
  for (size_t j = 0; j < order.size(); ++j)
    canon.col(static_cast<Eigen::Index>(j)) = overlap.col(order[j]);

  std::vector<int> row_match = max_assignment(canon.cast<double>());
  r.matched_clusters.resize(r.identities.size(), -1);
  for (size_t i = 0; i < r.identities.size(); ++i)
    if (i < row_match.size() && row_match[i] >= 0)
      r.matched_clusters[i] = clusters[static_cast<size_t>(order[row_match[i]])];

  r.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(r.identities.size()),
                                   static_cast<Eigen::Index>(r.identities.size()));
  for (size_t i = 0; i < r.identities.size(); ++i) {
    for (size_t j = 0; j < r.identities.size(); ++j) {
      int cluster = r.matched_clusters[j];
      if (cluster < 0) continue;
      r.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          overlap(static_cast<Eigen::Index>(i), cluster_col[cluster]);
    }
  }
  for (size_t i = 0; i < r.identities.size(); ++i)
    r.matched_correct += r.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  r.accuracy = r.total > 0 ? double(r.matched_correct) / double(r.total) : 0.0;

  std::set<int> matched(r.matched_clusters.begin(), r.matched_clusters.end());
  for (size_t j = 0; j < clusters.size(); ++j) {
    if (matched.count(clusters[j])) continue;
    long members = overlap.col(static_cast<Eigen::Index>(j)).sum();
    r.unmatched_clusters[clusters[j]] = members;
  }
  return r;
}

double association_accuracy(const std::map<std::string, std::string>& predicted,
                            const std::map<std::string, std::string>& reference) {
  if (reference.empty()) return 0.0;
  long correct = 0;
  for (const auto& [balloon, character] : reference) {
    auto it = predicted.find(balloon);
    if (it != predicted.end() && it->second == character) ++correct;
  }
  return double(correct) / double(reference.size());
}

namespace {

double rect_distance(const Point& p, const Rect& r) {
  double dx = std::max({r.x - p.x, 0.0, p.x - r.right()});
  double dy = std::max({r.y - p.y, 0.0, p.y - r.bottom()});
  return std::hypot(dx, dy);
}

}  // namespace

std::map<std::string, std::string> predict_associations(const PageAnnotation& page) {
  std::map<std::string, std::string> out;
  for (const auto& balloon : page.balloons) {
    if (!balloon.tail_tip) continue;
    const CharacterInstance* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& c : page.characters) {
      if (c.excluded) continue;
      double d = rect_distance(*balloon.tail_tip, c.body_bbox);
      if (d < best_dist) {
        best_dist = d;
        best = &c;
      }
    }
    if (best) out[balloon.id] = best->id;
  }
  return out;
}

std::map<std::string, std::string> reference_associations(const BookAnnotation& book) {
  std::map<std::string, std::string> out;
  for (const auto& page : book.pages)
    for (const auto& a : page.associations)
      out.emplace(a.balloon_id, a.character_id);
  return out;
}

double cosine_similarity(const Eigen::VectorXf& a, const Eigen::VectorXf& b) {
  if (a.size() != b.size()) throw ValidationError("cosine inputs differ in dimension");
  double na = a.cast<double>().norm();
  double nb = b.cast<double>().norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.cast<double>().dot(b.cast<double>()) / (na * nb);
}

SimilarityReport similarity_report(
    const std::vector<std::pair<std::string, std::pair<Eigen::VectorXf, Eigen::VectorXf>>>&
        pairs) {
  SimilarityReport r;
  double sum = 0.0;
  for (const auto& [key, vecs] : pairs) {
    double s = cosine_similarity(vecs.first, vecs.second);
    r.entries.push_back({key, s});
    sum += s;
  }
  if (!r.entries.empty()) r.mean = sum / double(r.entries.size());
  return r;
}

std::string render_confusion_table(const std::vector<std::string>& row_names,
                                   const std::vector<std::string>& col_names,
                                   const Eigen::MatrixXi& counts) {
  const std::string corner = "Ref\\Pred";
  size_t name_width = corner.size();
  for (const auto& n : row_names) name_width = std::max(name_width, n.size());

  std::vector<size_t> widths(col_names.size());
  for (size_t j = 0; j < col_names.size(); ++j) {
    widths[j] = col_names[j].size();
    for (Eigen::Index i = 0; i < counts.rows(); ++i)
      widths[j] = std::max(widths[j],
                           std::to_string(counts(i, static_cast<Eigen::Index>(j))).size());
  }

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width)) << corner;
  for (size_t j = 0; j < col_names.size(); ++j)
    out << "  " << std::right << std::setw(static_cast<int>(widths[j])) << col_names[j];
  out << "\n";
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    out << std::left << std::setw(static_cast<int>(name_width))
        << row_names[static_cast<size_t>(i)];
    for (size_t j = 0; j < col_names.size(); ++j)
      out << "  " << std::right << std::setw(static_cast<int>(widths[j]))
          << counts(i, static_cast<Eigen::Index>(j));
    out << "\n";
  }
  return out.str();
}

namespace {

// Undefined (0/0) values stay absent rather than serializing as null.
json pr_json(const PrMetrics& m) {
  json j = json::object();
  if (m.precision) j["precision"] = *m.precision;
  if (m.recall) j["recall"] = *m.recall;
  return j;
}

// Unweighted mean over the classes where the value is defined.
PrMetrics macro_pr(const std::map<std::string, PrMetrics>& per_class) {
  double ps = 0.0, rs = 0.0;
  int pn = 0, rn = 0;
  for (const auto& [name, m] : per_class) {
    if (m.precision) { ps += *m.precision; ++pn; }
    if (m.recall) { rs += *m.recall; ++rn; }
  }
  PrMetrics out;
  if (pn > 0) out.precision = ps / pn;
  if (rn > 0) out.recall = rs / rn;
  return out;
}

json matrix_json(const Eigen::MatrixXi& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json to_json(const TextTypeResult& r) {
  json j;
  j["classes"] = {kRoleNames[0], kRoleNames[1], kRoleNames[2]};
  Eigen::MatrixXi m = r.counts;
  j["counts"] = matrix_json(m);
  for (const auto& [name, pr] : r.per_class) j["metrics"][name] = pr_json(pr);
  j["total"] = r.total;
  j["correct"] = r.correct;
  j["accuracy"] = r.total > 0 ? json(double(r.correct) / double(r.total)) : json(nullptr);
  return j;
}

json to_json(const ClusterConfusionResult& r) {
  json j;
  j["identities"] = r.identities;
  j["matched_clusters"] = r.matched_clusters;
  j["counts"] = matrix_json(r.counts);
  json misc = json::array();
  for (Eigen::Index i = 0; i < r.misc.size(); ++i) misc.push_back(r.misc(i));
  j["misc"] = std::move(misc);
  j["total"] = r.total;
  j["matched_correct"] = r.matched_correct;
  j["accuracy"] = r.accuracy;
  json unmatched = json::object();
  for (const auto& [cluster, members] : r.unmatched_clusters)
    unmatched[std::to_string(cluster)] = members;
  j["unmatched_clusters"] = std::move(unmatched);
  return j;
}

json to_json(const SimilarityReport& r) {
  json j;
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back(json{{"key", e.key}, {"similarity", e.similarity}});
  j["entries"] = std::move(entries);
  j["mean"] = r.mean;
  return j;
}

std::string render_text_report(const TextTypeResult& r) {
  std::vector<std::string> names = {kRoleNames[0], kRoleNames[1], kRoleNames[2]};
  std::ostringstream out;
  out << "Text type confusion (" << r.total << " units)\n";
  out << render_confusion_table(names, names, r.counts);
  out << std::fixed << std::setprecision(4);
  for (const auto& name : names) {
    const PrMetrics& m = r.per_class.at(name);
    out << name << ": precision ";
    if (m.precision)
      out << *m.precision;
    else
      out << "n/a";
    out << ", recall ";
    if (m.recall)
      out << *m.recall;
    else
      out << "n/a";
    out << "\n";
  }
  if (r.total > 0)
    out << "accuracy " << double(r.correct) / double(r.total) << " (" << r.correct << "/"
        << r.total << ")\n";
  return out.str();
}

std::string render_cluster_report(const ClusterConfusionResult& r) {
  std::vector<std::string> cols;
  for (size_t j = 0; j < r.matched_clusters.size(); ++j)
    cols.push_back(r.matched_clusters[j] >= 0 ? "k" + std::to_string(r.matched_clusters[j])
                                              : "-");
  cols.push_back("Misc");

  Eigen::MatrixXi table(r.counts.rows(), r.counts.cols() + 1);
  table.leftCols(r.counts.cols()) = r.counts;
  table.col(r.counts.cols()) = r.misc;

  std::ostringstream out;
  out << "Character clustering confusion (" << r.total << " instances)\n";
  out << render_confusion_table(r.identities, cols, table);
  out << std::fixed << std::setprecision(4);
  out << "matched accuracy " << r.accuracy << " (" << r.matched_correct << "/" << r.total
      << ")\n";
  for (const auto& [cluster, members] : r.unmatched_clusters)
    out << "note: cluster k" << cluster << " matched no identity (" << members
        << " labeled members)\n";
  return out.str();
}

}  // namespace comicscript
