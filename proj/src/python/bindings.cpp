#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cdlrec/config.hpp"
#include "cdlrec/errors.hpp"
#include "cdlrec/pipeline.hpp"
#include "cdlrec/recsys.hpp"

namespace py = pybind11;
using namespace cdlrec;

namespace {

LossKind parse_kind(const std::string& name, double margin) {
  if (name == "cross_entropy") return LossKind{LossKind::Kind::cross_entropy, margin};
  if (name == "hinge") return LossKind{LossKind::Kind::hinge, margin};
  throw ConfigError("loss must be 'cross_entropy' or 'hinge', got '" + name + "'");
}

RunConfig config_from_string(const std::string& config_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config json: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Comparative dual-encoder training and top-K recommendation over "
            "hybrid user/item representations";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  m.def(
      "comparative_loss",
      [](double d_pos, double d_neg, const std::string& kind, double margin) {
        const auto r = comparative_loss(parse_kind(kind, margin), d_pos, d_neg);
        return py::make_tuple(r.loss, r.grad_d_pos, r.grad_d_neg);
      },
      py::arg("d_pos"), py::arg("d_neg"), py::arg("kind") = "cross_entropy",
      py::arg("margin") = 1.0,
      "Pairwise comparative loss over two distances; returns (loss, "
      "grad_d_pos, grad_d_neg).");

  m.def(
      "twonets_loss",
      [](double d, int negative_label, double offset) {
        const auto r = twonets_loss(d, negative_label, offset);
        return py::make_tuple(r.loss, r.grad_d);
      },
      py::arg("d"), py::arg("negative_label"), py::arg("offset") = 0.0,
      "Doublet baseline loss; returns (loss, grad_d).");

  m.def(
      "weighted_squared_distance",
      [](const std::vector<double>& weights, const std::vector<double>& a,
         const std::vector<double>& b) {
        const DistanceHead head{weights, 0.0};
        return distance(head, a, b);
      },
      py::arg("weights"), py::arg("a"), py::arg("b"));

  m.def(
      "fit_clusters",
      [](const std::map<std::string, std::vector<double>>& embeddings,
         std::size_t k, std::size_t max_iters, std::uint64_t seed) {
        if (embeddings.empty()) throw ConfigError("embeddings are empty");
        EmbeddingTable table;
        table.dim = embeddings.begin()->second.size();
        table.entries = embeddings;
        const auto model = kmeans(table, k, max_iters, seed);
        return py::make_tuple(model.centroids, model.assignment);
      },
      py::arg("embeddings"), py::arg("k"), py::arg("max_iters") = 50,
      py::arg("seed") = 0,
      "Cluster tag embeddings; returns (centroids, tag->cluster assignment).");

  m.def(
      "bag_of_clusters",
      [](const std::vector<std::string>& tags,
         const std::map<std::string, std::size_t>& assignment, std::size_t k) {
        ClusterModel model;
        model.k = k;
        model.assignment = assignment;
        return vectorize_user(tags, model);
      },
      py::arg("tags"), py::arg("assignment"), py::arg("k"),
      "L1-normalized bag-of-clusters user vector.");

  py::class_<CdlModel>(m, "Model")
      .def(py::init([](std::size_t user_dim, std::size_t item_dim,
                       std::size_t latent_dim,
                       const std::vector<std::size_t>& user_hidden,
                       const std::vector<std::size_t>& item_hidden,
                       double head_dropout, std::uint64_t seed) {
             Rng rng(seed);
             return make_model(
                 EncoderConfig{user_dim, user_hidden, latent_dim, 0.0},
                 EncoderConfig{item_dim, item_hidden, latent_dim, 0.0},
                 head_dropout, rng);
           }),
           py::arg("user_dim"), py::arg("item_dim"), py::arg("latent_dim"),
           py::arg("user_hidden") = std::vector<std::size_t>{},
           py::arg("item_hidden") = std::vector<std::size_t>{},
           py::arg("head_dropout") = 0.5, py::arg("seed") = 0)
      .def("encode_user",
           [](const CdlModel& model, const std::vector<double>& user_vector) {
             return encode_user(model, user_vector);
           })
      .def("encode_item",
           [](const CdlModel& model, const std::vector<double>& features) {
             return encode_item(model, features);
           })
      .def(
          "distance",
          [](const CdlModel& model, const std::vector<double>& user_vector,
             const std::vector<double>& features) {
            return distance(model.head, encode_user(model, user_vector),
                            encode_item(model, features));
          },
          py::arg("user_vector"), py::arg("item_features"),
          "Inference-mode weighted squared distance between a user and an item.")
      .def(
          "triplet_loss",
          [](const CdlModel& model, const std::vector<double>& user_vector,
             const std::vector<double>& pos, const std::vector<double>& neg,
             const std::string& kind, double margin) {
            ModelGrads grads = zero_grads(model);
            Rng rng(0);
            return triplet_forward_backward(model, user_vector, pos, neg,
                                            parse_kind(kind, margin),
                                            Mode::inference, rng, grads)
                .loss;
          },
          py::arg("user_vector"), py::arg("positive"), py::arg("negative"),
          py::arg("kind") = "cross_entropy", py::arg("margin") = 1.0)
      .def_property_readonly("checksum", &model_checksum)
      .def_property_readonly("latent_dim", [](const CdlModel& model) {
        return model.user_encoder.config.latent_dim;
      });

  m.def(
      "synth",
      [](const std::string& config_json) {
        std::ostringstream log;
        run_synth(config_from_string(config_json), log);
        return log.str();
      },
      py::arg("config_json"),
      "Generate a planted-structure corpus; returns the progress log.");

  m.def(
      "pipeline",
      [](const std::string& config_json, const std::string& until) {
        std::ostringstream log;
        const auto outcomes =
            run_pipeline(config_from_string(config_json), log, until);
        std::vector<std::pair<std::string, bool>> out;
        out.reserve(outcomes.size());
        for (const auto& o : outcomes) out.emplace_back(o.stage, o.skipped);
        return out;
      },
      py::arg("config_json"), py::arg("until") = "evaluate",
      "Run the staged pipeline; returns [(stage, skipped), ...].");

  m.def(
      "compare",
      [](const std::string& config_json) {
        std::ostringstream log;
        run_compare(config_from_string(config_json), log);
        return log.str();
      },
      py::arg("config_json"),
      "Train and evaluate cdl_xent, cdl_hinge, twonets and random on "
      "identical data.");

  m.def("default_config_json",
        [] { return annotated_config_json(default_config()).dump(2); });

  m.attr("__version__") = "0.1.0";
}
