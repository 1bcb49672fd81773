#pragma once

#include "scsmtt/filter.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace scsmtt {

/// A malformed or unknown configuration entry. key() names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Everything needed to rebuild a scenario and its filter settings.
struct ExperimentSpec {
    ScenarioConfig scenario;
    std::vector<AgentTrackSpec> agents;
    std::vector<TargetTrackSpec> targets;
    FilterConfig filter;
};

/// The only builtin is "paper-vi".
[[nodiscard]] ExperimentSpec builtin_spec(const std::string& name);

/// Reads a key = value file. Unset keys keep their paper-vi values; any agent or target line
/// replaces the whole builtin list of that kind.
[[nodiscard]] ExperimentSpec parse_spec(std::istream& in);

[[nodiscard]] ExperimentSpec load_spec(const std::string& builtin_or_path);

/// Writes every key, so that parse_spec reproduces the spec exactly.
void write_spec(std::ostream& out, const ExperimentSpec& spec);

/// Applies one filter key (variant, gibbs_iters, ...). Returns false for keys it does not know.
bool apply_filter_key(FilterConfig& config, const std::string& key, const std::string& value);

[[nodiscard]] Scenario build_scenario(const ExperimentSpec& spec);

/// One row per living target and step: t,id,px,py,vx,vy.
void write_truth_csv(std::ostream& out, const GroundTruth& truth);

/// Human-readable description of the configuration keys.
[[nodiscard]] std::string config_schema();

} // namespace scsmtt
