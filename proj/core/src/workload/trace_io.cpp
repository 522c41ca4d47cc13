#include "tfddrl/workload/trace_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tfddrl/errors.hpp"

namespace tfddrl::workload {

using nlohmann::json;

WorkloadTrace parse_trace(const std::string& json_text) {
  WorkloadTrace trace;
  try {
    const json doc = json::parse(json_text);
    for (const auto& app : doc.at("apps")) {
      AppDag dag;
      dag.app_id = app.at("app_id").get<int>();
      dag.label = app.value("label", 480);
      dag.kind = app.value("kind", std::string());
      for (const auto& t : app.at("tasks")) {
        TaskSpec task;
        task.id = t.at("id").get<int>();
        task.app_id = dag.app_id;
        task.cycles = t.at("cycles").get<double>();
        task.ram = t.value("ram", 0.0);
        if (t.contains("edges")) {
          for (const auto& e : t.at("edges")) {
            task.out_edges.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
          }
        }
        dag.tasks.push_back(std::move(task));
      }
      trace.apps.push_back(std::move(dag));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed workload trace: ") + e.what());
  }
  if (trace.apps.empty()) throw IoError("workload trace has no applications");
  for (const auto& dag : trace.apps) {
    for (const auto& t : dag.tasks) {
      if (!(t.cycles > 0.0)) throw ParameterError("task cycles must be positive");
      if (t.ram < 0.0) throw ParameterError("task ram must be non-negative");
      for (const auto& e : t.out_edges) {
        if (!(e.bytes > 0.0)) {
          throw ConstraintViolation("C2", "edge data size must be positive");
        }
      }
    }
    validate_and_order(dag);
  }
  return trace;
}

std::string serialize_trace(const WorkloadTrace& trace) {
  json apps = json::array();
  for (const auto& dag : trace.apps) {
    json tasks = json::array();
    for (const auto& t : dag.tasks) {
      json edges = json::array();
      for (const auto& e : t.out_edges) edges.push_back({e.successor, e.bytes});
      tasks.push_back({{"id", t.id}, {"cycles", t.cycles}, {"ram", t.ram}, {"edges", edges}});
    }
    json app = {{"app_id", dag.app_id}, {"label", dag.label}, {"tasks", tasks}};
    if (!dag.kind.empty()) app["kind"] = dag.kind;
    apps.push_back(std::move(app));
  }
  return json{{"apps", apps}}.dump(2);
}

WorkloadTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open workload trace " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write workload trace " + path.string());
  out << serialize_trace(trace) << '\n';
}

}  // namespace tfddrl::workload
