#pragma once

#include <map>
#include <string>
#include <vector>

#include "cdlrec/kmeans.hpp"

namespace cdlrec {

// Bag-of-clusters interest vector, L1-normalized; all-zero only when none of
// the user's tags is known to the cluster model.
using UserVector = std::vector<double>;

using UserVectorTable = std::map<std::string, UserVector>;

UserVector vectorize_user(const std::vector<std::string>& tags,
                          const ClusterModel& model,
                          std::size_t* unknown_tags = nullptr);

std::size_t positive_cluster_count(const UserVector& v);

// For each cluster, the number of users with a strictly positive entry.
std::vector<std::size_t> cluster_histogram(const std::vector<UserVector>& users,
                                           std::size_t k);

void save_user_vectors(const UserVectorTable& table, std::size_t k,
                       const std::string& path);
UserVectorTable load_user_vectors(const std::string& path, std::size_t* k_out);

}  // namespace cdlrec
