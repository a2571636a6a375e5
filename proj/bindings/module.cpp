// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the main operations: world generation, the online
// topic model, similarity, multiway matching, fusion, scoring, the wire
// format and the experiment runner.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "semfuse/experiment.hpp"
#include "semfuse/fusion.hpp"
#include "semfuse/json_io.hpp"
#include "semfuse/matching.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/similarity.hpp"
#include "semfuse/topic_model.hpp"
#include "semfuse/wire.hpp"
#include "semfuse/world.hpp"

namespace py = pybind11;
using namespace semfuse;

namespace {

std::vector<TopicDescriptor> descriptors_from_lists(
    const std::vector<std::vector<double>>& weights) {
  std::vector<TopicDescriptor> out;
  out.reserve(weights.size());
  for (const auto& w : weights) out.push_back(TopicDescriptor{w});
  return out;
}

std::vector<RobotDescriptors> team_from_lists(
    const std::vector<std::pair<int, std::vector<std::vector<double>>>>& robots) {
  std::vector<RobotDescriptors> team;
  for (const auto& [robot_id, descs] : robots) {
    team.push_back({robot_id, descriptors_from_lists(descs)});
  }
  return team;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-robot unsupervised semantic mapping and map fusion";

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<int, int, double>(), py::arg("width"), py::arg("height"),
           py::arg("cell_size") = 1.0)
      .def_readonly("width", &GridSpec::width)
      .def_readonly("height", &GridSpec::height)
      .def_readonly("cell_size", &GridSpec::cell_size)
      .def("cell_count", &GridSpec::cell_count);

  py::class_<GroundTruthMap>(m, "GroundTruthMap")
      .def_readonly("grid", &GroundTruthMap::grid)
      .def_readonly("labels", &GroundTruthMap::labels)
      .def_readonly("num_classes", &GroundTruthMap::num_classes);

  py::class_<LabelEmissionModel>(m, "LabelEmissionModel")
      .def_readonly("vocabulary_size", &LabelEmissionModel::vocabulary_size)
      .def_readonly("noise_mix", &LabelEmissionModel::noise_mix)
      .def_readonly("class_word_dist", &LabelEmissionModel::class_word_dist);

  py::class_<EnvironmentConfig>(m, "EnvironmentConfig")
      .def(py::init<>())
      .def_readwrite("name", &EnvironmentConfig::name)
      .def_readwrite("seed", &EnvironmentConfig::seed)
      .def_readwrite("grid", &EnvironmentConfig::grid)
      .def_readwrite("num_classes", &EnvironmentConfig::num_classes)
      .def_readwrite("patchiness", &EnvironmentConfig::patchiness)
      .def_readwrite("vocabulary_size", &EnvironmentConfig::vocabulary_size)
      .def_readwrite("noise_mix", &EnvironmentConfig::noise_mix)
      .def_readwrite("words_per_class", &EnvironmentConfig::words_per_class);

  py::class_<Environment>(m, "Environment")
      .def_readonly("config", &Environment::config)
      .def_readonly("map", &Environment::map)
      .def_readonly("emission", &Environment::emission);

  py::class_<TrajectoryStep>(m, "TrajectoryStep")
      .def_readonly("cell", &TrajectoryStep::cell)
      .def_readonly("timestep", &TrajectoryStep::timestep);

  py::class_<TrajectoryPlan>(m, "TrajectoryPlan")
      .def_readonly("observations_per_robot", &TrajectoryPlan::observations_per_robot)
      .def_readonly("robots", &TrajectoryPlan::robots);

  py::class_<ObservationFrame>(m, "ObservationFrame")
      .def_readonly("robot_id", &ObservationFrame::robot_id)
      .def_readonly("timestep", &ObservationFrame::timestep)
      .def_readonly("cell", &ObservationFrame::cell)
      .def_readonly("word_counts", &ObservationFrame::word_counts)
      .def("total_words", &ObservationFrame::total_words);

  m.def("generate_environment", &generate_environment, py::arg("seed"), py::arg("grid"),
        py::arg("num_classes"), py::arg("patchiness"));
  m.def("make_emission_model", &make_emission_model, py::arg("seed"),
        py::arg("num_classes"), py::arg("vocabulary_size"), py::arg("noise_mix"),
        py::arg("words_per_class"));
  m.def("plan_coverage_trajectories", &plan_coverage_trajectories, py::arg("map"),
        py::arg("num_robots"), py::arg("observations_per_robot"), py::arg("seed"));
  m.def("partition_regions", &partition_regions, py::arg("grid"), py::arg("num_robots"),
        py::arg("seed"));
  m.def("observe", &observe, py::arg("map"), py::arg("emission"), py::arg("cell"),
        py::arg("words_per_obs"), py::arg("seed"), py::arg("robot_id") = 0,
        py::arg("timestep") = 0);
  m.def("make_environment", &make_environment);
  m.def("env1_config", &env1_config);
  m.def("env2_config", &env2_config);
  m.def("preset_config", &preset_config);

  py::class_<TopicModelConfig>(m, "TopicModelConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &TopicModelConfig::alpha)
      .def_readwrite("beta", &TopicModelConfig::beta)
      .def_readwrite("gamma", &TopicModelConfig::gamma)
      .def_readwrite("vocabulary_size", &TopicModelConfig::vocabulary_size)
      .def_readwrite("neighborhood_radius", &TopicModelConfig::neighborhood_radius)
      .def_readwrite("refine_sweeps_per_frame", &TopicModelConfig::refine_sweeps_per_frame)
      .def_readwrite("refine_window", &TopicModelConfig::refine_window)
      .def_readwrite("seed", &TopicModelConfig::seed);

  py::class_<LocalSemanticMap::Entry>(m, "LocalMapEntry")
      .def_readonly("cell", &LocalSemanticMap::Entry::cell)
      .def_readonly("label", &LocalSemanticMap::Entry::label)
      .def_readonly("timestep", &LocalSemanticMap::Entry::timestep);

  py::class_<LocalSemanticMap>(m, "LocalSemanticMap")
      .def_readonly("robot_id", &LocalSemanticMap::robot_id)
      .def_readonly("num_topics", &LocalSemanticMap::num_topics)
      .def_readonly("cells", &LocalSemanticMap::cells);

  py::class_<TopicModel>(m, "TopicModel")
      .def(py::init<int, const GridSpec&, const TopicModelConfig&>(), py::arg("robot_id"),
           py::arg("grid"), py::arg("config"))
      .def("ingest", &TopicModel::ingest)
      .def("refine", &TopicModel::refine)
      .def("descriptors",
           [](const TopicModel& model) {
             std::vector<std::vector<double>> out;
             for (const TopicDescriptor& d : model.descriptors()) out.push_back(d.weights);
             return out;
           })
      .def("local_map", &TopicModel::local_map)
      .def("num_topics", &TopicModel::num_topics)
      .def("tables_consistent", &TopicModel::tables_consistent)
      .def("checkpoint_json",
           [](const TopicModel& model) { return checkpoint_to_json(model).dump(); })
      .def_static("restore_json", [](const std::string& text) {
        return checkpoint_from_json(nlohmann::json::parse(text));
      });

  m.def(
      "topic_overlap",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return topic_overlap(TopicDescriptor{a}, TopicDescriptor{b});
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "cosine_similarity",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return cosine_similarity(TopicDescriptor{a}, TopicDescriptor{b});
      },
      py::arg("a"), py::arg("b"));

  py::class_<TopicRef>(m, "TopicRef")
      .def_readonly("robot_id", &TopicRef::robot_id)
      .def_readonly("topic_id", &TopicRef::topic_id);

  py::class_<SimilarityMatrix>(m, "SimilarityMatrix")
      .def_readonly("registry", &SimilarityMatrix::registry)
      .def_readonly("scores", &SimilarityMatrix::scores)
      .def("to_csv", [](const SimilarityMatrix& sim) {
        std::ostringstream os;
        write_similarity_csv(os, sim);
        return os.str();
      });

  m.def(
      "pairwise_similarity_matrix",
      [](const std::vector<std::pair<int, std::vector<std::vector<double>>>>& robots,
         const std::string& metric) {
        return pairwise_similarity_matrix(team_from_lists(robots),
                                          similarity_metric_from_string(metric));
      },
      py::arg("robots"), py::arg("metric") = "cosine",
      "robots: list of (robot_id, list of descriptor rows)");

  py::class_<NoisyAssociationGraph>(m, "NoisyAssociationGraph")
      .def_readonly("registry", &NoisyAssociationGraph::registry)
      .def_readonly("adjacency", &NoisyAssociationGraph::adjacency)
      .def_readonly("sigma", &NoisyAssociationGraph::sigma);

  py::class_<ClusterAssignment>(m, "ClusterAssignment")
      .def_readonly("num_global_labels", &ClusterAssignment::num_global_labels)
      .def_readonly("registry", &ClusterAssignment::registry)
      .def_readonly("labels", &ClusterAssignment::labels)
      .def_readonly("algorithm", &ClusterAssignment::algorithm)
      .def_readonly("metric", &ClusterAssignment::metric)
      .def("global_label", &ClusterAssignment::global_label, py::arg("robot_id"),
           py::arg("topic_id"))
      .def("to_json",
           [](const ClusterAssignment& a) { return assignment_to_json(a).dump(); });

  m.def("build_association_graph", &build_association_graph, py::arg("similarity"),
        py::arg("sigma") = kDefaultSigma);
  m.def("clear_rectify", &clear_rectify, py::arg("graph"));
  m.def("id_based_match", &id_based_match, py::arg("topics_per_robot"),
        "topics_per_robot: list of (robot_id, topic_count)");
  m.def(
      "hungarian_sequential_match",
      [](const std::vector<std::pair<int, std::vector<std::vector<double>>>>& robots,
         const std::string& cost) {
        return hungarian_sequential_match(team_from_lists(robots),
                                          assignment_cost_from_string(cost));
      },
      py::arg("robots"), py::arg("cost") = "l2");
  m.def(
      "hungarian_solve",
      [](const Eigen::MatrixXd& cost) {
        const HungarianResult r = hungarian_solve(cost);
        return py::make_tuple(r.row_to_col, r.total_cost);
      },
      py::arg("cost"), "Returns (row_to_col, total_cost); -1 marks unassigned rows");

  py::class_<GlobalSemanticMap>(m, "GlobalSemanticMap")
      .def_readonly("grid", &GlobalSemanticMap::grid)
      .def_readonly("num_global_labels", &GlobalSemanticMap::num_global_labels)
      .def_readonly("labels", &GlobalSemanticMap::labels)
      .def_readonly("source_robot", &GlobalSemanticMap::source_robot)
      .def_readonly("source_timestep", &GlobalSemanticMap::source_timestep)
      .def("coverage_fraction", &GlobalSemanticMap::coverage_fraction);

  m.def("fuse_maps", &fuse_maps, py::arg("maps"), py::arg("assignment"), py::arg("grid"));

  py::class_<ContingencyTable>(m, "ContingencyTable")
      .def_readonly("counts", &ContingencyTable::counts)
      .def_readonly("row_marginals", &ContingencyTable::row_marginals)
      .def_readonly("col_marginals", &ContingencyTable::col_marginals)
      .def_readonly("total", &ContingencyTable::total);

  m.def("contingency", &contingency, py::arg("truth"), py::arg("fused"));
  m.def("contingency_from_labels", &contingency_from_labels, py::arg("u"), py::arg("v"));
  m.def("mutual_information", &mutual_information);
  m.def("expected_mi", &expected_mi, py::arg("row_marginals"), py::arg("col_marginals"),
        py::arg("total"));
  m.def("ami", &ami);

  py::register_exception<WireError>(m, "WireError");
  m.def(
      "encode_map_payload",
      [](const LocalSemanticMap& map, const std::vector<std::vector<double>>& descriptors,
         const GridSpec& grid, int timestep) {
        const std::vector<std::uint8_t> bytes =
            encode_map_payload(map, descriptors_from_lists(descriptors), grid, timestep);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("map"), py::arg("descriptors"), py::arg("grid"), py::arg("timestep"));

  py::class_<MapPayload>(m, "MapPayload")
      .def_readonly("robot_id", &MapPayload::robot_id)
      .def_readonly("timestep", &MapPayload::timestep)
      .def_readonly("grid", &MapPayload::grid)
      .def_readonly("map", &MapPayload::map)
      .def("descriptors", [](const MapPayload& p) {
        std::vector<std::vector<double>> out;
        for (const TopicDescriptor& d : p.descriptors) out.push_back(d.weights);
        return out;
      });

  m.def("decode_map_payload", [](const py::bytes& data) {
    const std::string_view view = data;
    return decode_map_payload(
        std::vector<std::uint8_t>(view.begin(), view.end()));
  });

  py::class_<AlgorithmSpec>(m, "AlgorithmSpec")
      .def(py::init([](const std::string& algorithm, const std::string& metric) {
             return AlgorithmSpec{algorithm, metric};
           }),
           py::arg("algorithm"), py::arg("metric") = "")
      .def_readwrite("algorithm", &AlgorithmSpec::algorithm)
      .def_readwrite("metric", &AlgorithmSpec::metric);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("env", &ExperimentConfig::env)
      .def_readwrite("num_robots", &ExperimentConfig::num_robots)
      .def_readwrite("observations_per_robot", &ExperimentConfig::observations_per_robot)
      .def_readwrite("repetitions", &ExperimentConfig::repetitions)
      .def_readwrite("subset_sizes", &ExperimentConfig::subset_sizes)
      .def_readwrite("algorithms", &ExperimentConfig::algorithms)
      .def_readwrite("sigma", &ExperimentConfig::sigma)
      .def_readwrite("model", &ExperimentConfig::model)
      .def_readwrite("words_per_obs", &ExperimentConfig::words_per_obs)
      .def_readwrite("checkpoint_interval", &ExperimentConfig::checkpoint_interval)
      .def_readwrite("single_robot_baseline", &ExperimentConfig::single_robot_baseline)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_readwrite("save_payloads", &ExperimentConfig::save_payloads);

  py::class_<ResultRecord>(m, "ResultRecord")
      .def_readonly("env", &ResultRecord::env)
      .def_readonly("algorithm", &ResultRecord::algorithm)
      .def_readonly("metric", &ResultRecord::metric)
      .def_readonly("phase", &ResultRecord::phase)
      .def_readonly("num_robots", &ResultRecord::num_robots)
      .def_readonly("repetition", &ResultRecord::repetition)
      .def_readonly("observations_ingested", &ResultRecord::observations_ingested)
      .def_readonly("ami", &ResultRecord::ami_score)
      .def_readonly("coverage_fraction", &ResultRecord::coverage);

  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("default_algorithms", &default_algorithms);
}
