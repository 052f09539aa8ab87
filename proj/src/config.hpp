#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "experiments.hpp"
#include "verify.hpp"

namespace shiftlab {

// One named experiment plus its settings, filled from string key/value pairs
// (config files and CLI flags). Bad names, keys and values are kConfig errors.
class ExperimentSetup {
 public:
  explicit ExperimentSetup(const std::string& name);

  const std::string& name() const noexcept { return name_; }
  void set(const std::string& key, const std::string& value);
  bool accepts(const std::string& key) const;
  std::vector<std::string> keys() const;

  ExperimentReport run() const;

  static const std::vector<std::string>& experiment_names();

 private:
  using Settings = std::variant<Figure1Config, MarginConfig, SyntheticConfig, CommonConfig,
                                HighdimConfig, ConsistencyConfig, BridgeConfig, VerifyOptions>;
  std::string name_;
  Settings settings_;
};

}  // namespace shiftlab
