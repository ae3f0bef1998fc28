#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cdlrec/embeddings.hpp"
#include "cdlrec/rng.hpp"

namespace cdlrec {

struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<std::vector<double>> centroids;     // k x dim
  std::map<std::string, std::size_t> assignment;  // tag -> cluster in [0, k)
  bool operator==(const ClusterModel&) const = default;
};

struct KmeansStats {
  std::vector<double> objective;  // within-cluster sum of squares per iteration
  std::size_t iterations = 0;
  bool converged = false;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

// Nearest centroid with ties broken toward the lowest index.
std::size_t nearest_centroid(const std::vector<std::vector<double>>& centroids,
                             std::span<const double> p);

// k-means++ seeding, exposed separately so an independent Lloyd loop can
// start from identical centroids.
std::vector<std::vector<double>> kmeans_pp_init(
    const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng);

// k-means++ seeding then Lloyd iterations until the assignment reaches a
// fixed point or max_iters. Empty clusters are reseeded with the point
// farthest from its assigned centroid. Requires k <= number of distinct
// vectors. The per-iteration objective is non-increasing.
ClusterModel kmeans(const EmbeddingTable& table, std::size_t k,
                    std::size_t max_iters, std::uint64_t seed,
                    KmeansStats* stats = nullptr);

void save_cluster_model(const ClusterModel& model, const std::string& path);
ClusterModel load_cluster_model(const std::string& path);

}  // namespace cdlrec
