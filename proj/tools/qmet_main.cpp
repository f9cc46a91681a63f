// Command-line front end: sweeps, simulated experiments, trade-off regions,
// walk compilation, POVM search, and calibration surfaces. Gridded data goes
// to CSV, structured records to JSON; every output file gets a metadata
// sidecar with the config hash, seed, and toolkit version.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <qmet/qmet.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qmet;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string config_path;
  int threads = 0;
  json config;  // merged config file contents
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return j;
}

// FNV-1a over the canonical serialization; stable across runs.
std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_metadata(const fs::path& data_file, const GlobalOpts& g,
                    const json& effective_config) {
  json meta;
  meta["file"] = data_file.filename().string();
  meta["seed"] = g.seed;
  meta["config_hash"] = config_hash(effective_config);
  meta["config"] = effective_config;
  meta["version"] = version();
  meta["generator"] = generator_name();
  fs::path side = data_file;
  side += ".meta.json";
  std::ofstream out(side);
  out << meta.dump(2) << "\n";
}

std::ofstream open_output(const GlobalOpts& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  std::ofstream out(fs::path(g.out_dir) / name);
  if (!out) throw ConfigError("cannot open output file " + name);
  return out;
}

template <typename T>
T cfg(const json& c, const std::string& key, T fallback) {
  if (c.contains(key)) return c.at(key).get<T>();
  return fallback;
}

std::vector<ParamPoint> default_settings() {
  std::vector<ParamPoint> out;
  for (double delta : {0.1, 0.3})
    for (double phi : {M_PI / 16.0, M_PI / 8.0, M_PI / 4.0, 3.0 * M_PI / 8.0,
                       7.0 * M_PI / 16.0})
      out.push_back({phi, delta});
  return out;
}

// --- subcommands ---

int cmd_sweep_merit(const GlobalOpts& g) {
  const json& c = g.config;
  const int phiSamples = cfg(c, "phi_samples", 100);
  const int deltaSamples = cfg(c, "delta_samples", 100);
  const double phiMax = cfg(c, "phi_max", 2.0 * M_PI);
  const double deltaMin = cfg(c, "delta_min", 0.01);
  const double deltaMax = cfg(c, "delta_max", 1.0);
  if (phiSamples < 1 || deltaSamples < 1)
    throw ConfigError("sweep-merit: sample counts must be positive");
  if (deltaMin <= 0.0)
    throw ConfigError("sweep-merit: delta_min must be > 0 (the channel is not "
                      "differentiable at delta = 0)");

  const auto family = two_copy_family();
  const auto povm = bell_povm();
  auto out = open_output(g, "sweep_merit.csv");
  out << "phi,delta,merit_analytic,merit_numeric\n";
  for (int i = 0; i < phiSamples; ++i)
    for (int j = 0; j < deltaSamples; ++j) {
      const double phi = phiMax * i / std::max(1, phiSamples - 1);
      const double delta =
          deltaMin + (deltaMax - deltaMin) * j / std::max(1, deltaSamples - 1);
      const ParamPoint p(phi, delta);
      const double analytic = bell_merit_analytic(p);
      const double numeric = figure_of_merit(classical_fim(family, povm, p),
                                             qfim2_analytic(delta));
      char row[160];
      std::snprintf(row, sizeof(row), "%.12g,%.12g,%.12g,%.12g\n", phi, delta,
                    analytic, numeric);
      out << row;
    }
  write_metadata(fs::path(g.out_dir) / "sweep_merit.csv", g, c);
  return 0;
}

int cmd_experiment(const GlobalOpts& g) {
  const json& c = g.config;
  const long long nu = cfg<long long>(c, "nu", 10000);
  const int reps = cfg(c, "reps", 400);
  const int resamples = cfg(c, "resamples", 100);
  EncodingMode mode;
  if (cfg<std::string>(c, "encoding", "analytic") == "finite_sample")
    mode.kind = EncodingMode::finite_sample;
  mode.m = cfg(c, "phase_samples", 200);
  mode.redraw_per_rep = cfg(c, "redraw_per_rep", true);

  std::vector<ParamPoint> settings;
  if (c.contains("settings")) {
    for (const auto& s : c.at("settings"))
      settings.push_back({s.at("phi").get<double>(), s.at("delta").get<double>()});
  } else {
    settings = default_settings();
  }
  if (settings.empty()) throw ConfigError("experiment: settings list is empty");
  for (const auto& s : settings)
    if (s.delta <= 0.0)
      throw ConfigError("experiment: delta must be > 0 for information inference");

  auto csv = open_output(g, "experiment.csv");
  csv << experiment_record_csv_header() << "\n";
  json records = json::array();
  for (std::size_t i = 0; i < settings.size(); ++i) {
    ExperimentRecord rec =
        run_experiment(settings[i], nu, reps, mode, SplitMix64::split(g.seed, i));
    rec.merit_error =
        monte_carlo_error(rec, resamples, SplitMix64::split(g.seed, 1000 + i));
    csv << experiment_record_csv_row(rec) << "\n";
    records.push_back(experiment_record_to_json(rec));
    std::printf("phi=%.4f delta=%.2f: merit %.4f +- %.4f (analytic %.4f)\n",
                settings[i].phi, settings[i].delta, rec.merit, rec.merit_error,
                bell_merit_analytic(settings[i]));
  }
  auto js = open_output(g, "experiment.json");
  js << records.dump(2) << "\n";
  write_metadata(fs::path(g.out_dir) / "experiment.csv", g, c);
  write_metadata(fs::path(g.out_dir) / "experiment.json", g, c);
  return 0;
}

int cmd_regions(const GlobalOpts& g) {
  const json& c = g.config;
  std::vector<double> deltas = cfg(c, "deltas", std::vector<double>{0.1, 0.3});
  const int samples = cfg(c, "samples", 201);
  const bool withExperiment = cfg(c, "experiment_points", false);
  if (deltas.empty()) throw ConfigError("regions: delta list is empty");
  for (double d : deltas)
    if (d <= 0.0) throw ConfigError("regions: delta must be > 0");

  json doc = json::array();
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    const TradeoffRegion region = region_curve(delta, samples);
    json r;
    r["delta"] = delta;
    r["attainable_sum"] = region.attainable_sum;
    r["boundary_lw"] = region.boundary_lw;
    r["bell_curve"] = region.bell_curve;
    json theory = json::array();
    for (double phi : {M_PI / 16.0, M_PI / 8.0, M_PI / 4.0, 3.0 * M_PI / 8.0,
                       7.0 * M_PI / 16.0}) {
      const auto [gp, gd] = bell_ratio_analytic({phi, delta});
      theory.push_back({{"phi", phi}, {"gamma_phi", gp}, {"gamma_delta", gd}});
    }
    r["theory_points"] = theory;
    if (withExperiment) {
      json expts = json::array();
      for (double phi : {M_PI / 16.0, M_PI / 8.0, M_PI / 4.0, 3.0 * M_PI / 8.0,
                         7.0 * M_PI / 16.0}) {
        ExperimentRecord rec = run_experiment(
            {phi, delta}, cfg<long long>(c, "nu", 10000), cfg(c, "reps", 400), {},
            SplitMix64::split(g.seed, 100 * di + static_cast<std::uint64_t>(phi * 64)));
        const auto [gp, gd] = ratio_coordinates(rec);
        expts.push_back({{"phi", phi},
                         {"gamma_phi", gp},
                         {"gamma_delta", gd},
                         {"merit", rec.merit}});
      }
      r["experiment_points"] = expts;
    }
    doc.push_back(std::move(r));
  }
  auto out = open_output(g, "regions.json");
  out << doc.dump(2) << "\n";
  write_metadata(fs::path(g.out_dir) / "regions.json", g, c);
  return 0;
}

int cmd_walk(const GlobalOpts& g) {
  const json& c = g.config;
  WalkSpec spec =
      c.contains("spec_file") ? walk_spec_from_json(load_config(c.at("spec_file").get<std::string>()))
                              : bell_walk_spec();
  const auto port = walk_to_povm(spec, default_readout_ports());

  json doc;
  doc["spec"] = walk_spec_to_json(spec);
  doc["unitary"] = matrix_to_json(build_walk_unitary(spec));
  doc["port_povm"] = povm_to_json(port.elements);
  doc["residual_norm"] = port.residual_norm;
  doc["deterministic"] = port.deterministic;
  doc["bell_equivalent"] = port.bell_equivalent;
  doc["bell_permutation"] = port.bell_permutation;
  auto out = open_output(g, "walk.json");
  out << doc.dump(2) << "\n";
  write_metadata(fs::path(g.out_dir) / "walk.json", g, c);

  std::printf("walk: deterministic=%s bell_equivalent=%s residual=%.3e\n",
              port.deterministic ? "yes" : "no",
              port.bell_equivalent ? "yes" : "no", port.residual_norm);
  return 0;
}

int cmd_optimize(const GlobalOpts& g) {
  const json& c = g.config;
  const ParamPoint p(cfg(c, "phi", 0.0), cfg(c, "delta", 1.0));
  if (p.delta <= 0.0) throw ConfigError("optimize: delta must be > 0");
  const int k = cfg(c, "outcomes", 4);
  const int restarts = cfg(c, "restarts", 20);
  const int rank = cfg(c, "rank", 1);
  const int iters = cfg(c, "max_iters", 2000);

  if (c.contains("fixture_file")) {
    // evaluate a stored POVM instead of searching
    const json fj = load_config(c.at("fixture_file").get<std::string>());
    const Povm fixture = Povm::from_approximate(
        povm_elements_from_json(fj.contains("elements") ? fj.at("elements") : fj));
    const double value = objective(fixture, p);
    const auto rep = analyze_povm(fixture, 1e-2);
    std::printf("fixture objective at (%.3f, %.3f): %.6f\n", p.phi, p.delta, value);
    std::printf("ranks:");
    for (int r : rep.ranks) std::printf(" %d", r);
    std::printf("  projective=%s\n", rep.projective ? "yes" : "no");
    return 0;
  }

  const auto trace = optimize_povm(p, k, restarts, g.seed, rank, iters);
  const auto rep = analyze_povm(Povm(trace.final_povm));

  json doc;
  doc["phi"] = p.phi;
  doc["delta"] = p.delta;
  doc["final_objective"] = trace.final_objective;
  doc["bell_objective"] = objective(bell_povm(), p);
  doc["restarts_used"] = trace.restarts_used;
  doc["final_povm"] = povm_to_json(trace.final_povm);
  doc["ranks"] = rep.ranks;
  doc["projective"] = rep.projective;
  json overlaps = json::array();
  for (Eigen::Index m = 0; m < rep.overlaps.rows(); ++m) {
    json row = json::array();
    for (Eigen::Index n = 0; n < rep.overlaps.cols(); ++n)
      row.push_back(rep.overlaps(m, n));
    overlaps.push_back(row);
  }
  doc["overlaps"] = overlaps;
  json iterations = json::array();
  for (const auto& [obj, gn] : trace.iterations)
    iterations.push_back({{"objective", obj}, {"grad_norm", gn}});
  doc["iterations"] = iterations;
  auto out = open_output(g, "optimize.json");
  out << doc.dump(2) << "\n";
  write_metadata(fs::path(g.out_dir) / "optimize.json", g, c);

  std::printf("optimize at (%.3f, %.3f): objective %.6f over %d restarts\n", p.phi,
              p.delta, trace.final_objective, trace.restarts_used);
  return 0;
}

int cmd_calibrate(const GlobalOpts& g) {
  const json& c = g.config;
  const int n1 = cfg(c, "phi1_samples", 100);
  const int n2 = cfg(c, "phi2_samples", 100);
  if (n1 < 2 || n2 < 2) throw ConfigError("calibrate: grid sizes must be >= 2");
  auto out = open_output(g, "calibrate.csv");
  out << "phi1,phi2,p1,p2,p3,p4\n";
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const double p1 = 2.0 * M_PI * i / n1;
      const double p2 = 2.0 * M_PI * j / n2;
      const auto probs = calibration_probs(p1, p2);
      char row[200];
      std::snprintf(row, sizeof(row), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", p1,
                    p2, probs[0], probs[1], probs[2], probs[3]);
      out << row;
    }
  write_metadata(fs::path(g.out_dir) / "calibrate.csv", g, c);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-copy phase / phase-diffusion estimation toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "root random seed (all randomness splits from it)");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)");

  std::function<int(const GlobalOpts&)> action;
  auto bind = [&](const char* name, const char* desc, int (*fn)(const GlobalOpts&)) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->callback([&action, fn] { action = fn; });
    return sub;
  };
  bind("sweep-merit", "grid of analytic and numeric merit values", cmd_sweep_merit);
  bind("experiment", "simulated count experiments with bootstrap errors",
       cmd_experiment);
  bind("regions", "trade-off region curves and operating points", cmd_regions);
  bind("walk", "compile the three-step walk and verify the port measurement",
       cmd_walk);
  bind("optimize", "search for the merit-maximizing POVM", cmd_optimize);
  bind("calibrate", "two-phase product-state calibration surface", cmd_calibrate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!g.config_path.empty()) g.config = load_config(g.config_path);
    thread_count() = g.threads;
    return action(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
