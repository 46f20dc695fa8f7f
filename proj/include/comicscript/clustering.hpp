#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "comicscript/annotations.hpp"
#include "comicscript/script.hpp"

namespace comicscript {

// Label value for points that belong to no cluster.
inline constexpr int kNoise = -1;

struct EmbeddingVector {
  std::string instance_id;
  Eigen::VectorXf values;
};

enum class Reducer { PCA, External };

struct ClusterParams {
  int min_cluster_size = 15;  // drop to 5 for short books
  int min_samples = 0;        // 0 means "same as min_cluster_size"
  int target_dim = 5;
  Reducer reducer = Reducer::PCA;
  bool normalize_embeddings = true;

  int effective_min_samples() const {
    return min_samples > 0 ? min_samples : min_cluster_size;
  }
};

// Distance to the min_samples-th nearest neighbor, the point itself
// counting as its own first neighbor. One entry per row of `points`.
Eigen::VectorXd core_distances(const Eigen::MatrixXd& points, int min_samples);

// Density-based clustering over row-vector points. Returns one label per
// row: clusters numbered 0..K-1, noise kNoise. Fewer points than
// min_cluster_size (or than min_samples) makes everything noise.
std::vector<int> hdbscan(const Eigen::MatrixXd& points, int min_cluster_size,
                         int min_samples);

// Projects mean-centered rows onto the top principal components, largest
// variance first. Each component is sign-fixed so its largest-magnitude
// loading is positive. Throws ValidationError when the input has zero
// variance or fewer rows than target_dim.
Eigen::MatrixXd reduce_pca(const Eigen::MatrixXd& points, int target_dim);

struct ClusterAssignment {
  // instance id -> raw cluster label (kNoise for unclustered).
  std::map<std::string, int> labels;
  // raw label -> speaker id; noise maps to "?". Clusters are numbered by
  // first appearance in reading order: the first-seen cluster is c0.
  std::map<int, SpeakerId> speakers;

  SpeakerId speaker_for(const std::string& instance_id) const;
};

// Orders instances by page index, then panel reading order, then bbox
// left edge; assigns c0, c1, ... by each cluster's first appearance.
ClusterAssignment assign_speaker_ids(const std::vector<std::string>& instance_ids,
                                     const std::vector<int>& labels,
                                     const BookAnnotation& book);

struct ClusterResult {
  ClusterAssignment assignment;
  std::vector<std::string> instance_ids;  // row order of `reduced`
  std::vector<int> raw_labels;
  Eigen::MatrixXd reduced;
};

// Full path from embeddings to speaker ids: optional L2 normalization,
// dimensionality reduction (skipped for Reducer::External, where inputs
// are already reduced), then clustering. Instance order follows the
// input vector order.
ClusterResult cluster_instances(const std::vector<EmbeddingVector>& vectors,
                                const BookAnnotation& book, const ClusterParams& params);

// Instances eligible for clustering, in book declaration order
// (excluded ones are skipped).
std::vector<const CharacterInstance*> clusterable_instances(const BookAnnotation& book);

// JSON vectors file: an object mapping instance id -> array of floats.
// Returns vectors for exactly the clusterable instances of the book, in
// book order; missing or extra ids are validation errors.
std::vector<EmbeddingVector> load_vectors_file(const std::string& path,
                                               const BookAnnotation& book);

void write_vectors_file(const std::string& path,
                        const std::vector<EmbeddingVector>& vectors);

}  // namespace comicscript
