#ifndef NEUROGRAPH_CONFIG_HPP
#define NEUROGRAPH_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "neurograph/data.hpp"
#include "neurograph/explain.hpp"
#include "neurograph/model.hpp"
#include "neurograph/trainer.hpp"

namespace ng {

// Flat key=value run configuration. The key set is a fixed schema; unknown
// keys are rejected. Values are canonicalized on assignment so dump() is
// byte-stable: dump -> parse -> dump is the identity.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  // "key=value" as accepted on the command line
  void set_pair(const std::string& pair);
  const std::string& get(const std::string& key) const;
  std::string dump() const;

  std::uint64_t seed() const;
  double radius_fraction() const;
  std::size_t folds() const;
  std::size_t jobs() const;
  std::size_t pretrain_epochs() const;
  double balance_funnel_halfwidth() const;
  double balance_margin() const;
  bool balance_per_participant() const;

  ArchConfig arch_config() const;
  TrainConfig train_config() const;
  SyntheticSpec synthetic_spec() const;
  ExplainConfig explain_config() const;

  std::size_t sgw_projections() const;
  std::array<double, 3> sgw_axis_scale() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace ng

#endif
