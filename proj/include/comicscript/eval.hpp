#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "comicscript/clustering.hpp"
#include "comicscript/textrole.hpp"
#include "json.hpp"

namespace comicscript {

// Per-class precision/recall; absent when the denominator is zero.
struct PrMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
};

struct TextTypeResult {
  // Rows = reference role, columns = predicted role, both in the fixed
  // order Sound, Dialogue, Caption.
  Eigen::Matrix3i counts;
  std::map<std::string, PrMetrics> per_class;
  long total = 0;
  long correct = 0;
};

// Joins predictions to ground truth on unit id; units missing from either
// side are skipped.
TextTypeResult text_type_confusion(const std::map<std::string, TextRole>& predicted,
                                   const std::map<std::string, TextRole>& reference);

// Maximum-weight one-to-one assignment (Hungarian method). Rows may
// outnumber columns or vice versa; unmatched rows get -1.
std::vector<int> max_assignment(const Eigen::MatrixXd& weight);

struct ClusterConfusionResult {
  std::vector<std::string> identities;      // row labels, sorted
  std::vector<int> matched_clusters;        // column labels: raw cluster ids, -1 = none
  Eigen::MatrixXi counts;                   // identities x matched clusters
  Eigen::VectorXi misc;                     // noise predictions per identity
  long total = 0;                           // instances carrying an identity
  long matched_correct = 0;                 // sum of the matched diagonal
  double accuracy = 0.0;                    // matched_correct / total
  // Predicted clusters that matched no identity (count of their members
  // with reference identities); recorded so the divergence is visible.
  std::map<int, long> unmatched_clusters;
};

// Compares clustering against reference identities. Clusters are matched
// to identities one-to-one by maximizing overlap; the Misc column counts
// noise ("?") predictions.
ClusterConfusionResult cluster_confusion(const ClusterAssignment& assignment,
                                         const std::map<std::string, std::string>& reference);

// Fraction of balloons whose predicted speaker instance matches the
// reference association exactly.
double association_accuracy(const std::map<std::string, std::string>& predicted,
                            const std::map<std::string, std::string>& reference);

// Geometric speaker prediction: each tailed balloon goes to the character
// whose body box is closest to the tail tip (zero when the tip is inside
// the box; earlier character wins ties). Excluded characters are skipped.
std::map<std::string, std::string> predict_associations(const PageAnnotation& page);

// First annotated association per balloon, page by page.
std::map<std::string, std::string> reference_associations(const BookAnnotation& book);

// Cosine similarity in [-1, 1]; zero vectors compare as 0.
double cosine_similarity(const Eigen::VectorXf& a, const Eigen::VectorXf& b);

struct SimilarityEntry {
  std::string key;
  double similarity = 0.0;
};

struct SimilarityReport {
  std::vector<SimilarityEntry> entries;
  double mean = 0.0;
};

SimilarityReport similarity_report(
    const std::vector<std::pair<std::string, std::pair<Eigen::VectorXf, Eigen::VectorXf>>>&
        pairs);

// Fixed-width text table for a confusion matrix, one row per reference
// class, "Ref\Pred" corner cell.
std::string render_confusion_table(const std::vector<std::string>& row_names,
                                   const std::vector<std::string>& col_names,
                                   const Eigen::MatrixXi& counts);

nlohmann::json to_json(const TextTypeResult& r);
nlohmann::json to_json(const ClusterConfusionResult& r);
nlohmann::json to_json(const SimilarityReport& r);

std::string render_text_report(const TextTypeResult& r);
std::string render_cluster_report(const ClusterConfusionResult& r);

}  // namespace comicscript
