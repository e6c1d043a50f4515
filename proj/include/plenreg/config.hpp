#pragma once

// TOML run configuration. Command-line flags override file values.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "plenreg/pnp.hpp"
#include "plenreg/registration_ransac3d.hpp"
#include "plenreg/synthetic.hpp"

namespace plenreg {

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  Ransac3dParams ransac3d;
  PnpParams pnp;
  SceneSpec scene;
  TrajectorySpec trajectory;
};

// Tables: [ransac3d], [pnp], [scene] (with [scene.camera], [scene.pose0],
// [scene.posex], [scene.world_x]), [trajectory] (with [trajectory.schema]).
// Unknown keys are configuration errors.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::optional<std::string>& path);

// Seed precedence: flag, configuration file, PLENREG_SEED, then 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           const std::optional<std::uint64_t>& file,
                           const char* env_value);

std::uint64_t parse_seed(std::string_view text, const std::string& what);

// Copies seed and thread count into every parameter block.
void apply_run_settings(RunConfig& config, std::uint64_t seed, unsigned threads);

}  // namespace plenreg
