#include "ionsim/commands.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "ionsim/constants.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/field.hpp"
#include "ionsim/modes.hpp"
#include "ionsim/output.hpp"

namespace ionsim {

namespace {

IonSpecies load_species(const Config& cfg) {
  const std::string name =
      cfg.has("trap", "species") ? cfg.text_value("trap", "species") : "ca40";
  if (name == "ca40") return IonSpecies::ca40();
  throw ConfigError("unknown species '" + name + "' (supported: ca40)");
}

TrapPotential load_trap(const Config& cfg) {
  TrapPotential trap;
  trap.omega_x = cfg.frequency("trap", "omega_x");
  trap.omega_y = cfg.frequency("trap", "omega_y");
  trap.omega_z = cfg.frequency("trap", "omega_z");
  trap.species = load_species(cfg);
  trap.validate();
  return trap;
}

int load_ion_count(const Config& cfg) {
  const long long n = cfg.integer("crystal", "n");
  if (n < 1 || n > 64) throw ConfigError("[crystal] n must be between 1 and 64");
  return static_cast<int>(n);
}

std::uint64_t resolve_seed(const CommandContext& ctx) {
  if (ctx.seed_given) return ctx.seed;
  if (ctx.config.has("crystal", "seed"))
    return static_cast<std::uint64_t>(ctx.config.integer("crystal", "seed"));
  return 1;
}

Eigen::Vector3d gradient_direction(const Config& cfg) {
  if (cfg.has("field", "direction")) return cfg.direction("field", "direction").normalized();
  return Eigen::Vector3d::UnitX();
}

FieldModel load_field(const CommandContext& ctx) {
  const Config& cfg = ctx.config;
  const std::string kind =
      cfg.has("field", "kind") ? cfg.text_value("field", "kind") : "linear";
  const Eigen::Vector3d bias = cfg.has("field", "bias") ? cfg.field_vector("field", "bias")
                                                        : Eigen::Vector3d::Zero();
  if (kind == "linear") {
    const double g = cfg.gradient("field", "gradient");
    return FieldModel::linear_gradient(bias, g, gradient_direction(cfg));
  }
  if (kind == "wires") {
    const std::string file = cfg.text_value("field", "wire_file");
    std::filesystem::path p(file);
    if (p.is_relative()) p = std::filesystem::path(ctx.config_dir) / p;
    return FieldModel::wire_model(parse_wire_file(p.string()), bias);
  }
  throw ConfigError("[field] kind must be 'linear' or 'wires'");
}

PhononDistribution load_distribution(const Config& cfg, const std::string& section) {
  const std::string text = cfg.text_value(section, "distribution");
  std::istringstream in(text);
  std::string kind;
  double param = 0.0;
  if (!(in >> kind >> param) || !(in >> std::ws).eof())
    throw ConfigError("expected '<kind> <parameter>' for a distribution, got '" + text + "'");
  if (kind == "fock") return PhononDistribution::fock(static_cast<int>(std::lround(param)));
  if (kind == "thermal") return PhononDistribution::thermal(param);
  if (kind == "coherent") return PhononDistribution::coherent(param);
  throw ConfigError("unknown distribution kind '" + kind + "'");
}

Transition load_transition(const Config& cfg, const std::string& section) {
  const std::string t = cfg.text_value(section, "transition");
  if (t == "carrier") return Transition::carrier;
  if (t == "rsb") return Transition::rsb;
  if (t == "bsb") return Transition::bsb;
  throw ConfigError("unknown transition '" + t + "' (carrier, rsb, bsb)");
}

std::vector<int> load_roi(const Config& cfg, const std::string& section, int n) {
  std::vector<int> roi;
  if (cfg.has(section, "roi")) {
    for (long long v : cfg.integer_list(section, "roi")) {
      if (v < 0 || v >= n) throw ConfigError("ROI ion index out of range");
      roi.push_back(static_cast<int>(v));
    }
  } else {
    for (int i = 0; i < n; ++i) roi.push_back(i);
  }
  return roi;
}

Eigen::VectorXd linspace(double a, double b, int n) {
  if (n < 1) throw ConfigError("n_points must be at least 1");
  Eigen::VectorXd out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1.0);
  return out;
}

std::string out_path(const CommandContext& ctx, const std::string& name) {
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

OutputMeta make_meta(const CommandContext& ctx, const std::string& subcommand) {
  OutputMeta meta;
  meta.subcommand = subcommand;
  meta.config_hash = ctx.config.hash_hex();
  meta.seed = resolve_seed(ctx);
  return meta;
}

const char* transition_name(Transition t) {
  switch (t) {
    case Transition::carrier:
      return "carrier";
    case Transition::rsb:
      return "rsb";
    case Transition::bsb:
      return "bsb";
  }
  return "?";
}

}  // namespace

int cmd_equilibrium(const CommandContext& ctx) {
  const auto meta = make_meta(ctx, "equilibrium");
  const TrapPotential trap = load_trap(ctx.config);
  const int n = load_ion_count(ctx.config);
  const CrystalState state = find_equilibrium(trap, n, meta.seed);

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n; ++i)
    rows.push_back({static_cast<double>(i), state.positions(i, 0) * 1e6,
                    state.positions(i, 1) * 1e6, state.positions(i, 2) * 1e6});
  write_csv(out_path(ctx, "equilibrium.csv"), meta, {"ion", "x_um", "y_um", "z_um"}, rows);

  nlohmann::json j;
  j["configuration"] = to_string(state.configuration);
  j["alpha"] = trap.alpha();
  if (n >= 3) j["alpha_crit"] = critical_anisotropy(trap, n).alpha_crit;
  j["near_critical"] = state.near_critical;
  j["energy_J"] = state.energy;
  j["residual"] = state.residual;
  j["length_scale_m"] = state.length_scale;
  write_json(out_path(ctx, "equilibrium.json"), meta, std::move(j));
  return 0;
}

int cmd_modes(const CommandContext& ctx) {
  const auto meta = make_meta(ctx, "modes");
  const TrapPotential trap = load_trap(ctx.config);
  const int n = load_ion_count(ctx.config);
  const CrystalState state = find_equilibrium(trap, n, meta.seed);
  const ModeSpectrum spectrum = normal_modes(state, trap);
  const std::vector<int> roi = load_roi(ctx.config, "modes", n);
  const auto labels = classify_modes(spectrum, roi, gradient_direction(ctx.config));

  std::vector<std::string> columns = {"index", "freq_Hz", "axis_label", "rank", "name"};
  for (int i = 0; i < n; ++i) columns.push_back("vis_" + std::to_string(i));
  std::vector<std::vector<std::string>> rows;
  for (const auto& lab : labels) {
    std::vector<std::string> row = {std::to_string(lab.mode),
                                    format_double(spectrum.frequencies[lab.mode] / two_pi),
                                    to_string(lab.axis), std::to_string(lab.rank), lab.name};
    for (int i = 0; i < n; ++i) row.push_back(lab.visible[i] ? "1" : "0");
    rows.push_back(std::move(row));
  }
  write_csv(out_path(ctx, "modes.csv"), meta, columns, rows);

  nlohmann::json j;
  j["configuration"] = to_string(state.configuration);
  j["alpha"] = trap.alpha();
  j["n_modes"] = spectrum.n_modes;
  nlohmann::json jl = nlohmann::json::array();
  for (const auto& lab : labels) {
    nlohmann::json e;
    e["mode"] = lab.mode;
    e["freq_Hz"] = spectrum.frequencies[lab.mode] / two_pi;
    e["axis"] = to_string(lab.axis);
    e["rank"] = lab.rank;
    e["com"] = lab.is_com;
    e["name"] = lab.name;
    e["visible"] = lab.visible;
    jl.push_back(std::move(e));
  }
  j["modes"] = std::move(jl);
  write_json(out_path(ctx, "modes.json"), meta, std::move(j));
  return 0;
}

int cmd_spectrum(const CommandContext& ctx) {
  const auto meta = make_meta(ctx, "spectrum");
  const Config& cfg = ctx.config;
  const TrapPotential trap = load_trap(cfg);
  const int n = load_ion_count(cfg);
  const CrystalState state = find_equilibrium(trap, n, meta.seed);
  const ModeSpectrum spectrum = normal_modes(state, trap);
  const FieldModel field = load_field(ctx);
  const CouplingMatrix coupling =
      effective_lamb_dicke(spectrum, field, state, trap.species, gradient_direction(cfg));

  DriveParams drive;
  drive.rabi_frequency = cfg.frequency("spectrum", "rabi");
  drive.pulse_time = cfg.time("spectrum", "pulse_time");

  const auto dist = load_distribution(cfg, "spectrum");
  const std::vector<PhononDistribution> dists(spectrum.n_modes, dist);
  const Eigen::VectorXd grid =
      linspace(cfg.frequency("spectrum", "f_min"), cfg.frequency("spectrum", "f_max"),
               static_cast<int>(cfg.integer("spectrum", "n_points")));
  if (!cfg.has("spectrum", "roi")) throw ConfigError("[spectrum] roi is required");
  const std::vector<int> roi = load_roi(cfg, "spectrum", n);

  const double carrier = cfg.frequency("spectrum", "carrier");
  const auto scan =
      spectrum_scan(spectrum, coupling, carrier, drive, dists, grid, roi, ctx.threads);

  const double flag_window = 3.0 / drive.pulse_time;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < grid.size(); ++i) {
    double flagged = 0.0;
    for (const auto& line : scan.lines)
      if (line.overlapping && std::abs(grid[i] - line.frequency) < flag_window) flagged = 1.0;
    for (std::size_t r = 0; r < roi.size(); ++r)
      rows.push_back({grid[i] / two_pi, static_cast<double>(roi[r]), scan.excitation(i, r),
                      flagged});
  }
  write_csv(out_path(ctx, "spectrum.csv"), meta, {"freq_Hz", "ion_index", "P_up", "overlap_flag"},
            rows);

  nlohmann::json j;
  j["carrier_Hz"] = carrier / two_pi;
  j["any_overlap"] = scan.any_overlap;
  nlohmann::json jl = nlohmann::json::array();
  for (const auto& line : scan.lines) {
    nlohmann::json e;
    e["freq_Hz"] = line.frequency / two_pi;
    e["kind"] = transition_name(line.kind);
    e["mode"] = line.mode_index;
    e["overlapping"] = line.overlapping;
    jl.push_back(std::move(e));
  }
  j["lines"] = std::move(jl);
  nlohmann::json jeta = nlohmann::json::array();
  for (int m = 0; m < coupling.eta.rows(); ++m) {
    nlohmann::json row = nlohmann::json::array();
    for (int l = 0; l < coupling.eta.cols(); ++l) row.push_back(coupling.eta(m, l));
    jeta.push_back(std::move(row));
  }
  j["eta"] = std::move(jeta);
  j["gradient_T_per_m"] = coupling.gradient_used;
  write_json(out_path(ctx, "spectrum.json"), meta, std::move(j));
  return 0;
}

int cmd_rabi(const CommandContext& ctx) {
  const auto meta = make_meta(ctx, "rabi");
  const Config& cfg = ctx.config;

  const Transition transition = load_transition(cfg, "rabi");
  const double eta = cfg.number("rabi", "eta");
  DriveParams drive;
  drive.rabi_frequency = cfg.frequency("rabi", "rabi");
  drive.detuning = cfg.has("rabi", "detuning") ? cfg.frequency("rabi", "detuning") : 0.0;
  drive.decay_time = cfg.has("rabi", "decay_time")
                         ? cfg.time("rabi", "decay_time")
                         : std::numeric_limits<double>::infinity();
  const auto dist = load_distribution(cfg, "rabi");
  const Eigen::VectorXd t_grid = linspace(
      0.0, cfg.time("rabi", "t_max"), static_cast<int>(cfg.integer("rabi", "n_points")));

  const Eigen::VectorXd signal = flop_signal(dist, eta, drive, transition, t_grid);

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < t_grid.size(); ++i) rows.push_back({t_grid[i], signal[i]});
  write_csv(out_path(ctx, "rabi.csv"), meta, {"t_s", "P_up"}, rows);

  nlohmann::json j;
  j["transition"] = transition_name(transition);
  j["eta"] = eta;
  j["rabi_Hz"] = drive.rabi_frequency / two_pi;
  j["detuning_Hz"] = drive.detuning / two_pi;
  j["nbar"] = dist.parameter;

  if (cfg.has("rabi", "fit") && cfg.boolean("rabi", "fit")) {
    FlopFitGuess guess;
    guess.nbar = std::max(dist.parameter * 1.3, 0.5);
    guess.rabi_frequency = drive.rabi_frequency * 0.8;
    guess.decay_time = drive.decay_time;
    const FlopFit fit =
        fit_flop(t_grid, signal, dist.kind, eta, transition, drive.detuning, guess);
    j["fit_nbar"] = fit.nbar;
    j["fit_nbar_sigma"] = fit.nbar_sigma;
    j["fit_rabi_Hz"] = fit.rabi_frequency / two_pi;
    j["fit_rabi_sigma_Hz"] = fit.rabi_sigma / two_pi;
    if (std::isfinite(fit.decay_time)) {
      j["fit_decay_s"] = fit.decay_time;
      j["fit_decay_sigma_s"] = fit.decay_sigma;
    }
  }
  write_json(out_path(ctx, "rabi.json"), meta, std::move(j));
  return 0;
}

int cmd_coherence(const CommandContext& ctx) {
  const auto meta = make_meta(ctx, "coherence");
  const Config& cfg = ctx.config;

  const double sigma = cfg.frequency("coherence", "sigma");
  const double tau_c = cfg.time("coherence", "tau_c");
  const auto noise = NoiseModel::ornstein_uhlenbeck(sigma, tau_c, meta.seed);

  std::vector<int> orders;
  for (long long v : cfg.integer_list("coherence", "orders")) {
    if (v < 0) throw ConfigError("echo orders must be nonnegative");
    orders.push_back(static_cast<int>(v));
  }
  const int trajectories = static_cast<int>(cfg.integer("coherence", "trajectories"));
  const int n_times =
      cfg.has("coherence", "n_times") ? static_cast<int>(cfg.integer("coherence", "n_times")) : 16;

  const CoherenceResult result =
      coherence_scan(noise, orders, trajectories, n_times, ctx.threads);

  std::vector<std::vector<double>> rows;
  for (const auto& c : result.curves)
    for (int i = 0; i < c.times.size(); ++i)
      rows.push_back({static_cast<double>(c.echo_pulses), c.times[i], c.contrast[i]});
  write_csv(out_path(ctx, "coherence.csv"), meta, {"order", "t_s", "contrast"}, rows);

  nlohmann::json j;
  j["sigma_rad_per_s"] = sigma;
  j["tau_c_s"] = tau_c;
  j["trajectories"] = trajectories;
  nlohmann::json jc = nlohmann::json::array();
  for (const auto& c : result.curves) {
    nlohmann::json e;
    e["order"] = c.echo_pulses;
    e["t2_s"] = c.t2;
    e["t2_sigma_s"] = c.t2_sigma;
    jc.push_back(std::move(e));
  }
  j["curves"] = std::move(jc);
  j["exponent"] = result.exponent;
  j["exponent_sigma"] = result.exponent_sigma;
  write_json(out_path(ctx, "coherence.json"), meta, std::move(j));
  return 0;
}

int cmd_field(const CommandContext& ctx) {
  const auto meta = make_meta(ctx, "field");
  const Config& cfg = ctx.config;
  const FieldModel model = load_field(ctx);

  const std::string axis = cfg.text_value("field_map", "axis");
  Eigen::Vector3d unit;
  if (axis == "x")
    unit = Eigen::Vector3d::UnitX();
  else if (axis == "y")
    unit = Eigen::Vector3d::UnitY();
  else if (axis == "z")
    unit = Eigen::Vector3d::UnitZ();
  else
    throw ConfigError("[field_map] axis must be x, y, or z");

  const Eigen::Vector3d origin = cfg.has("field_map", "origin")
                                     ? cfg.position("field_map", "origin")
                                     : Eigen::Vector3d::Zero();
  const Eigen::VectorXd ts =
      linspace(cfg.length("field_map", "start"), cfg.length("field_map", "stop"),
               static_cast<int>(cfg.integer("field_map", "n_points")));

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < ts.size(); ++i) {
    const Eigen::Vector3d r = origin + ts[i] * unit;
    const Eigen::Vector3d b = field_at(model, r);
    const double mag = b.norm();
    const double dmag = (mag > 1e-15) ? magnitude_gradient(model, r, unit) : 0.0;
    rows.push_back({ts[i], b[0], b[1], b[2], mag, dmag});
  }
  write_csv(out_path(ctx, "field.csv"), meta,
            {"pos_m", "Bx_T", "By_T", "Bz_T", "B_T", "dB_dpos_T_per_m"}, rows);

  nlohmann::json j;
  j["kind"] = (model.kind == FieldModel::Kind::wires) ? "wires" : "linear";
  j["n_segments"] = model.segments.size();
  j["axis"] = axis;
  write_json(out_path(ctx, "field.json"), meta, std::move(j));
  return 0;
}

int cmd_alpha_scan(const CommandContext& ctx) {
  const auto meta = make_meta(ctx, "alpha_scan");
  const Config& cfg = ctx.config;
  const TrapPotential trap = load_trap(cfg);
  const int n = load_ion_count(cfg);

  const Eigen::VectorXd alphas =
      linspace(cfg.number("alpha_scan", "alpha_min"), cfg.number("alpha_scan", "alpha_max"),
               static_cast<int>(cfg.integer("alpha_scan", "n_points")));
  std::vector<double> grid(alphas.data(), alphas.data() + alphas.size());

  const auto curve = soft_mode_curve(trap, n, grid, meta.seed);

  std::vector<std::vector<double>> rows;
  nlohmann::json notes = nlohmann::json::array();
  for (const auto& e : curve) {
    rows.push_back({e.alpha, e.omega_soft / two_pi, e.valid ? 1.0 : 0.0});
    if (!e.note.empty()) {
      nlohmann::json note;
      note["alpha"] = e.alpha;
      note["note"] = e.note;
      notes.push_back(std::move(note));
    }
  }
  write_csv(out_path(ctx, "alpha_scan.csv"), meta, {"alpha", "f_soft_Hz", "valid"}, rows);

  nlohmann::json j;
  j["n"] = n;
  if (n >= 3) j["alpha_crit"] = critical_anisotropy(trap, n).alpha_crit;
  j["notes"] = std::move(notes);
  write_json(out_path(ctx, "alpha_scan.json"), meta, std::move(j));
  return 0;
}

}  // namespace ionsim
