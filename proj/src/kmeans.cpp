#include "cdlrec/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"

namespace cdlrec {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

std::size_t nearest_centroid(const std::vector<std::vector<double>>& centroids,
                             std::span<const double> p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<std::vector<double>> kmeans_pp_init(
    const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  std::vector<char> chosen(points.size(), 0);

  const std::size_t first = rng.below(points.size());
  centroids.push_back(points[first]);
  chosen[first] = 1;

  std::vector<double> dist2(points.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) {
        best = std::min(best, squared_distance(c, points[i]));
      }
      dist2[i] = best;
      total += best;
    }
    std::size_t pick = points.size();
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += dist2[i];
        if (acc > r) {
          pick = i;
          break;
        }
      }
      if (pick == points.size()) pick = points.size() - 1;  // fp slack
    } else {
      // All remaining mass on already-chosen locations; take the first
      // unchosen index.
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
      if (pick == points.size()) pick = 0;
    }
    centroids.push_back(points[pick]);
    chosen[pick] = 1;
  }
  return centroids;
}

ClusterModel kmeans(const EmbeddingTable& table, std::size_t k,
                    std::size_t max_iters, std::uint64_t seed,
                    KmeansStats* stats) {
  if (k == 0) throw ConfigError("kmeans: k must be positive");
  if (max_iters == 0) throw ConfigError("kmeans: max_iters must be >= 1");

  std::vector<std::string> tags;
  std::vector<std::vector<double>> points;
  tags.reserve(table.entries.size());
  for (const auto& [tag, vec] : table.entries) {
    tags.push_back(tag);
    points.push_back(vec);
  }
  {
    std::set<std::vector<double>> distinct(points.begin(), points.end());
    if (k > distinct.size()) {
      throw DataError("kmeans: k=" + std::to_string(k) + " exceeds " +
                      std::to_string(distinct.size()) + " distinct vectors");
    }
  }

  Rng rng(seed);
  auto centroids = kmeans_pp_init(points, k, rng);

  const std::size_t n = points.size();
  std::vector<std::size_t> assign(n, 0);
  std::vector<std::size_t> prev_assign;
  KmeansStats local;

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = nearest_centroid(centroids, points[i]);
    }

    std::vector<std::size_t> counts(k, 0);
    for (std::size_t a : assign) ++counts[a];

    bool reseeded = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      // Steal the worst-fit point from a cluster that can spare one.
      std::size_t worst = n;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assign[i]] < 2) continue;
        const double d = squared_distance(centroids[assign[i]], points[i]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      if (worst == n) continue;  // nothing to spare
      --counts[assign[worst]];
      assign[worst] = c;
      ++counts[c];
      reseeded = true;
    }

    std::vector<std::vector<double>> next(k,
                                          std::vector<double>(table.dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < table.dim; ++j) {
        next[assign[i]][j] += points[i][j];
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (double& v : next[c]) v /= static_cast<double>(counts[c]);
      centroids[c] = std::move(next[c]);
    }

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      objective += squared_distance(centroids[assign[i]], points[i]);
    }
    local.objective.push_back(objective);
    local.iterations = iter + 1;

    if (!reseeded && assign == prev_assign) {
      local.converged = true;
      break;
    }
    prev_assign = assign;
  }

  ClusterModel model;
  model.k = k;
  model.dim = table.dim;
  model.centroids = std::move(centroids);
  for (std::size_t i = 0; i < n; ++i) {
    model.assignment[tags[i]] = assign[i];
  }
  if (stats != nullptr) *stats = std::move(local);
  return model;
}

void save_cluster_model(const ClusterModel& model, const std::string& path) {
  std::string out = "cdlrec-clusters v1\n";
  out += "k " + std::to_string(model.k) + " dim " + std::to_string(model.dim) + "\n";
  for (std::size_t c = 0; c < model.k; ++c) {
    out += "c " + std::to_string(c) + " " +
           join_doubles(model.centroids[c], ' ') + "\n";
  }
  for (const auto& [tag, cluster] : model.assignment) {
    out += "a " + tag + " " + std::to_string(cluster) + "\n";
  }
  write_file(path, out);
}

ClusterModel load_cluster_model(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "cdlrec-clusters v1") {
    throw VersionError(path + ": not a cdlrec-clusters v1 file");
  }
  ClusterModel model;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ' ');
    const auto fail = [&](const std::string& why) -> DataError {
      return DataError(path + ":" + std::to_string(line_no) + ": " + why);
    };
    if (fields[0] == "k") {
      if (fields.size() != 4 || fields[2] != "dim") throw fail("bad k line");
      model.k = parse_size(fields[1]);
      model.dim = parse_size(fields[3]);
      model.centroids.assign(model.k, std::vector<double>(model.dim, 0.0));
    } else if (fields[0] == "c") {
      if (fields.size() != 2 + model.dim) throw fail("bad centroid arity");
      const std::size_t c = parse_size(fields[1]);
      if (c >= model.k) throw fail("centroid index out of range");
      for (std::size_t j = 0; j < model.dim; ++j) {
        model.centroids[c][j] = parse_double(fields[2 + j]);
      }
    } else if (fields[0] == "a") {
      if (fields.size() != 3) throw fail("bad assignment line");
      const std::size_t c = parse_size(fields[2]);
      if (c >= model.k) throw fail("cluster index out of range");
      model.assignment[fields[1]] = c;
    } else {
      throw fail("unknown record '" + fields[0] + "'");
    }
  }
  if (model.k == 0) throw DataError(path + ": missing k line");
  return model;
}

}  // namespace cdlrec
