#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qpc/core.hpp"
#include "qpc/measurement_limit.hpp"

namespace qpc::cli {

/// Bad or unreadable run configuration. line() is 0 when the problem is not
/// tied to a single line (missing keys, cross-field checks).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, std::size_t line, const std::string& what);
  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

struct SimConfig {
  double omega = 0.0;
  double epsilon = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double sigma11_0 = 1.0;
  double re_sigma12_0 = 0.0;
  double im_sigma12_0 = 0.0;
  double t_max = 0.0;
  std::size_t n_out = 201;
  std::optional<std::size_t> n_max_override;
  double tail_eps = 1e-12;
  double dt_lo = 1e-3;
  double dt_hi = 1e3;
  ShotNoiseModel error_mode = ShotNoiseModel::asymptotic;

  SystemParams params() const { return {omega, epsilon, d1, d2}; }
  QubitState initial_state() const { return {sigma11_0, {re_sigma12_0, im_sigma12_0}}; }
};

// Format: one "key: value" per line. Blank lines and lines starting with '#'
// are skipped. Required keys: omega, d1, d2, t_max.
SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::filesystem::path& path);

}  // namespace qpc::cli
