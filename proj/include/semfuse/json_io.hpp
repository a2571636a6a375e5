// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <string>

#include "semfuse/matching.hpp"
#include "semfuse/topic_model.hpp"
#include "semfuse/world.hpp"

namespace semfuse {

// Versioned JSON documents for replayable experiments. Serialized
// environments embed the generator parameters, so loading one re-derives
// the emission model byte-exactly from the stored seed.

nlohmann::json environment_to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& j);

nlohmann::json plan_to_json(const TrajectoryPlan& plan);
TrajectoryPlan plan_from_json(const nlohmann::json& j);

nlohmann::json assignment_to_json(const ClusterAssignment& assignment);
ClusterAssignment assignment_from_json(const nlohmann::json& j);

/// Topic model checkpoint: config, rng stream state, and per-frame word
/// assignments. Count tables are rebuilt and verified on load, so the
/// round-trip is exact.
nlohmann::json checkpoint_to_json(const TopicModel& model);
TopicModel checkpoint_from_json(const nlohmann::json& j);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

}  // namespace semfuse
