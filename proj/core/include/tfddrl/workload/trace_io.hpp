#pragma once

#include <filesystem>
#include <string>

#include "tfddrl/workload/dag.hpp"

namespace tfddrl::workload {

// JSON layout:
//   {"apps": [{"app_id": 0, "label": 480, "kind": "ocr",
//              "tasks": [{"id": 0, "cycles": 600, "ram": 0.1,
//                         "edges": [[1, 3000000]]}]}]}
// "kind" is optional. Every DAG is validated on load.
WorkloadTrace parse_trace(const std::string& json_text);
std::string serialize_trace(const WorkloadTrace& trace);

WorkloadTrace load_trace(const std::filesystem::path& path);
void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path);

}  // namespace tfddrl::workload
