/* Copyright 2026 The ppi-carbon Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ppi/model.hpp"
#include "ppi/policy.hpp"

namespace ppi {

/// Named drift override applied on top of the base model.
struct Scenario {
  std::string name;
  Eigen::VectorXd a;

  bool operator==(const Scenario&) const = default;
};

struct SimulationSettings {
  double T = 5.0;
  double dt = 1.0 / 250.0;
  std::size_t nPaths = 100000;
  std::uint64_t seed = 1;
  std::vector<InfoMode> infoModes{InfoMode::Partial};
  double V0 = 1.0;
  double PL = 1.0;
  int odeSteps = 2000;
  unsigned workers = 0;

  bool operator==(const SimulationSettings&) const = default;
};

/// Complete description of a batch run, as stored in a TOML file.
struct ScenarioConfig {
  MarketModel model;
  std::vector<Scenario> scenarios;
  /// (delta, epsilon) pairs used by the table reproductions.
  std::vector<std::pair<double, double>> preferences;
  /// Axes of the curve outputs.
  std::vector<double> deltaGrid;
  std::vector<double> epsilonGrid;
  SimulationSettings simulation;
  std::string outputDir = "out";

  /// The base model with the drift of the named scenario. Errors: UnknownScenario.
  MarketModel scenario_model(const std::string& name) const;
};

bool operator==(const ScenarioConfig& x, const ScenarioConfig& y);

/// Parse and validate a TOML configuration file.
/// Errors: ParseError (with line and key), ValidationError.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Serialise a configuration so that parse_config(write_config(c)) == c.
std::string write_config(const ScenarioConfig& config);

std::string info_mode_name(InfoMode mode);
/// Errors: ValidationError for anything but "full" or "partial".
InfoMode parse_info_mode(const std::string& name);

}  // namespace ppi
