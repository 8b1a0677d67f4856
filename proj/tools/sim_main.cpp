#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "ionsim/commands.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/output.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 1;
};

void add_common(CLI::App* sub, CliOptions& opt) {
  sub->add_option("--config", opt.config_path, "experiment config file")->required();
  sub->add_option("--seed", opt.seed, "random seed (overrides [crystal] seed)");
  sub->add_option("--out", opt.out_dir, "output directory");
  sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trapped-ion crystal and spectroscopy simulator"};
  app.set_version_flag("--version", std::string("ionsim v") + ionsim::kToolVersion);
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, int (*)(const ionsim::CommandContext&)>>
      commands = {
          {"equilibrium", {"solve the crystal equilibrium", ionsim::cmd_equilibrium}},
          {"modes", {"normal-mode table with labels and visibility", ionsim::cmd_modes}},
          {"spectrum", {"sideband spectroscopy scan", ionsim::cmd_spectrum}},
          {"rabi", {"Rabi flopping time trace", ionsim::cmd_rabi}},
          {"coherence", {"Ramsey/echo contrast under noise", ionsim::cmd_coherence}},
          {"field", {"magnetic field map along an axis", ionsim::cmd_field}},
          {"alpha_scan", {"soft-mode frequency versus anisotropy", ionsim::cmd_alpha_scan}},
      };

  CliOptions opt;
  for (const auto& [name, info] : commands) add_common(app.add_subcommand(name, info.first), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ionsim::CommandContext ctx;
    ctx.config = ionsim::Config::parse_file(opt.config_path);
    ctx.config_dir = std::filesystem::path(opt.config_path).parent_path().string();
    ctx.out_dir = opt.out_dir;
    ctx.seed = opt.seed;
    ctx.threads = opt.threads;
    std::filesystem::create_directories(opt.out_dir);

    for (const auto& [name, info] : commands) {
      CLI::App* sub = app.get_subcommand(name);
      if (sub->parsed()) {
        ctx.seed_given = sub->count("--seed") > 0;
        return info.second(ctx);
      }
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const ionsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ionsim::SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
