#pragma once

#include <cstdint>
#include <string>

#include "ionsim/config.hpp"

namespace ionsim {

struct CommandContext {
  Config config;
  std::string config_dir;  // wire_file paths resolve relative to the config
  std::string out_dir = ".";
  bool seed_given = false;  // CLI seed overrides [crystal] seed
  std::uint64_t seed = 1;
  int threads = 1;
};

int cmd_equilibrium(const CommandContext& ctx);
int cmd_modes(const CommandContext& ctx);
int cmd_spectrum(const CommandContext& ctx);
int cmd_rabi(const CommandContext& ctx);
int cmd_coherence(const CommandContext& ctx);
int cmd_field(const CommandContext& ctx);
int cmd_alpha_scan(const CommandContext& ctx);

}  // namespace ionsim
