#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlab/grid.hpp"
#include "dlab/imethod.hpp"
#include "dlab/interaction.hpp"
#include "dlab/nls.hpp"
#include "dlab/norms.hpp"
#include "dlab/wave_packets.hpp"

namespace dlab {

using json = nlohmann::json;

inline const char* dlab_version() { return "1.0.0"; }

struct ExperimentRow {
  std::string id;
  std::string description;
  std::string measures;  // the quantity and predicted behavior probed by the run
};

inline const std::vector<ExperimentRow>& list_experiments() {
  static const std::vector<ExperimentRow> rows = {
      {"bilinear", "high-low frequency product-norm decay scan",
       "||e^{itD}f e^{itD}g||_{q/2,r/2} ~ (N1/N2)^{1-2/r} for f,g on A(N1),A(N2)"},
      {"trilinear", "Riesz-potential trilinear interaction decay scan",
       "|||grad|^{2-n}(e^{itD}f e^{itD}g) e^{itD}h|| ~ (min N/max N)^{1/2}"},
      {"sharpness", "squashed-cap lower-bound scan",
       "cap product norm tracks rho^{n+1-2(n+1)/r-4/q} (two-sided)"},
      {"theorem1", "Sobolev-weighted bilinear ratio boundedness",
       "||ff g|| / (||f||_{H^s} ||g||_{H^-s}) bounded iff |s| < 1-2/r"},
      {"wavepacket", "tube decomposition reconstruction and localization",
       "sum_T f_T = f to 1e-8; e^{itD}f_T mass concentrates in lambda^delta T"},
      {"nls", "split-step Hartree/power solve with conservation diagnostics",
       "mass exactly conserved; energy drift O(dt^2)"},
      {"smoothing", "nonlinear-part regularity gain scan",
       "||u0^K||_{H^1} ~ K^{1-s} while sup_t ||D(t)||_{H^1} stays bounded"},
      {"imethod-energy", "almost-conservation decay scan",
       "|E(Iu)(T) - E(Iu0)| ~ N^{-3/2}, pass bar slope <= -1"},
      {"imethod-error", "commutator Morawetz error decay scan",
       "|int |Iu|^2 (y-x)/|y-x|.{N_bad,Iu}| ~ N^{-3/2}, pass bar slope <= -1"},
  };
  return rows;
}

struct RunResult {
  int exit_code = 0;  // 0 pass, 2 measured-fail, 1 error
  std::vector<std::string> files;
  std::string message;
};

namespace detail {

inline Grid grid_from_json(const json& j) {
  if (!j.contains("grid")) throw std::invalid_argument("config: missing 'grid'");
  const json& g = j.at("grid");
  return Grid::make(g.at("n").get<int>(), g.at("L").get<double>(), g.at("M").get<int>());
}

inline LebesguePair pair_from_json(const json& j, const char* key) {
  const json& p = j.at(key);
  auto rat = [](const json& v) -> Rational {
    if (v.is_string()) {
      std::string s = v.get<std::string>();
      if (s == "inf") return Rational::infinity();
      auto slash = s.find('/');
      if (slash == std::string::npos) return Rational(std::stoll(s));
      return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    }
    if (v.is_number_integer()) return Rational(v.get<long long>());
    // decompose small decimals exactly (q = 8/3 should be given as "8/3")
    double d = v.get<double>();
    long long den = 1;
    while (std::abs(d * den - std::round(d * den)) > 1e-9 && den < 1000000) den *= 10;
    return Rational(std::llround(d * den), den);
  };
  return LebesguePair::of(rat(p.at(0)), rat(p.at(1)));
}

inline std::vector<double> doubles_from_json(const json& j, const char* key) {
  std::vector<double> out;
  for (const auto& v : j.at(key)) out.push_back(v.get<double>());
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << text;
}

inline std::string scan_csv(const ScanReport& rep) {
  std::ostringstream os;
  rep.write_csv(os);
  return os.str();
}

inline std::string scan_json(const ScanReport& rep) {
  std::ostringstream os;
  rep.write_json(os);
  return os.str();
}

}  // namespace detail

// Default configurations for each experiment id; these are the reference runs
// the acceptance suite executes.
inline json default_config(const std::string& id) {
  const double pi = std::numbers::pi;
  json j;
  j["experiment"] = id;
  j["seed"] = 1;
  j["output_dir"] = "out";
  if (id == "bilinear") {
    j["grid"] = {{"n", 2}, {"L", 1.75 * pi}, {"M", 128}};
    j["params"] = {{"pair", {"4", "4"}},      {"N1", 1.0}, {"N2_list", {4.0, 8.0, 16.0, 32.0}},
                   {"trials", 8},             {"T", 1.0},  {"time_samples", 64}};
  } else if (id == "trilinear") {
    j["grid"] = {{"n", 3}, {"L", 1.75 * pi}, {"M", 64}};
    j["params"] = {{"dual_pair", {"2", "6/5"}}, {"pattern", {1.0, 1.0, 1.0}},
                   {"grow_slot", 2},            {"scale_list", {2.0, 4.0, 8.0, 16.0}},
                   {"trials", 8},               {"T", 1.0},
                   {"time_samples", 48}};
  } else if (id == "sharpness") {
    j["grid"] = {{"n", 2}, {"L", 2 * pi}, {"M", 16}};  // per-rho boxes built internally
    j["params"] = {{"pair", {"4", "4"}}, {"rho_list", {0.25, 0.125, 0.0625}}, {"time_samples", 32}};
  } else if (id == "theorem1") {
    j["grid"] = {{"n", 3}, {"L", 1.75 * pi}, {"M", 64}};
    j["params"] = {{"pair", {"8/3", "4"}}, {"s", 0.25}, {"N2_list", {1.0, 2.0, 4.0, 8.0, 16.0}},
                   {"trials", 4},          {"T", 1.0},  {"time_samples", 48}};
  } else if (id == "wavepacket") {
    j["grid"] = {{"n", 1}, {"L", 1024.0}, {"M", 512}};
    j["params"] = {{"lambda", 256.0}, {"delta", 0.25}, {"fields", 5}, {"time_samples", 16}};
  } else if (id == "nls") {
    j["grid"] = {{"n", 3}, {"L", 2 * pi}, {"M", 32}};
    j["params"] = {{"nonlinearity", "hartree"}, {"kappa", 1.0}, {"dt", 1.0 / 64},
                   {"T", 0.5},                  {"save_stride", 2},
                   {"datum", {{"s", 0.5}, {"K", 8.0}, {"amplitude", 1.0}}},
                   {"dump_frames", false}};
  } else if (id == "smoothing") {
    j["grid"] = {{"n", 3}, {"L", pi}, {"M", 64}};
    j["params"] = {{"s", 0.75},      {"K_list", {8.0, 16.0, 32.0}}, {"kappa", 1.0},
                   {"dt", 1.0 / 64}, {"T", 0.5},                    {"save_stride", 2},
                   {"amplitude", 2.0}};
  } else if (id == "imethod-energy" || id == "imethod-error") {
    j["grid"] = {{"n", 3}, {"L", 2 * pi}, {"M", 64}};
    int stride = id == "imethod-energy" ? 64 : 16;
    j["params"] = {{"s", 0.5},         {"N_list", {8.0, 16.0, 32.0}}, {"kappa", 1.0},
                   {"dt", 1.0 / 512},  {"T", 0.5},                    {"save_stride", stride},
                   {"datum", {{"K", 24.0}, {"amplitude", 4.0}}}};
  } else {
    throw std::invalid_argument("unknown experiment id '" + id + "'");
  }
  return j;
}

inline void validate_config(const json& config) {
  if (!config.contains("experiment")) throw std::invalid_argument("config: missing 'experiment'");
  std::string id = config.at("experiment").get<std::string>();
  bool known = false;
  for (const auto& row : list_experiments())
    if (row.id == id) known = true;
  if (!known) throw std::invalid_argument("config: unknown experiment id '" + id + "'");
  if (!config.contains("seed")) throw std::invalid_argument("config: missing 'seed'");
  if (!config.contains("params")) throw std::invalid_argument("config: missing 'params'");
  detail::grid_from_json(config);
}

// Executes the experiment; writes <id>.csv, <id>_summary.json and manifest.json
// into output_dir. Exit 0 on pass, 2 on a measured miss, 1 on error (thrown).
inline RunResult run_experiment(const json& config) {
  validate_config(config);
  const std::string id = config.at("experiment").get<std::string>();
  const uint64_t seed = config.at("seed").get<uint64_t>();
  const json& prm = config.at("params");
  const Grid grid = detail::grid_from_json(config);
  std::filesystem::path outdir = config.value("output_dir", std::string("out"));
  std::filesystem::create_directories(outdir);

  auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  std::string csv, sidecar;
  bool pass = false;

  if (id == "bilinear") {
    auto times = uniform_times(prm.at("T").get<double>(), prm.at("time_samples").get<int>());
    ScanReport rep = bilinear_decay_scan(grid, detail::pair_from_json(prm, "pair"),
                                         prm.at("N1").get<double>(),
                                         detail::doubles_from_json(prm, "N2_list"),
                                         prm.at("trials").get<int>(), seed, times);
    csv = detail::scan_csv(rep);
    sidecar = detail::scan_json(rep);
    pass = rep.pass;
  } else if (id == "trilinear") {
    auto times = uniform_times(prm.at("T").get<double>(), prm.at("time_samples").get<int>());
    auto pat_base = detail::doubles_from_json(prm, "pattern");
    TrilinearPattern pat{pat_base.at(0), pat_base.at(1), pat_base.at(2),
                         prm.at("grow_slot").get<int>()};
    ScanReport rep = trilinear_decay_scan(grid, detail::pair_from_json(prm, "dual_pair"), pat,
                                          detail::doubles_from_json(prm, "scale_list"),
                                          prm.at("trials").get<int>(), seed, times);
    csv = detail::scan_csv(rep);
    sidecar = detail::scan_json(rep);
    pass = rep.pass;
  } else if (id == "sharpness") {
    ScanReport rep = sharpness_scan(grid.n, detail::pair_from_json(prm, "pair"),
                                    detail::doubles_from_json(prm, "rho_list"),
                                    prm.at("time_samples").get<int>());
    csv = detail::scan_csv(rep);
    sidecar = detail::scan_json(rep);
    pass = rep.pass;
  } else if (id == "theorem1") {
    auto times = uniform_times(prm.at("T").get<double>(), prm.at("time_samples").get<int>());
    Theorem1Report rep = theorem1_ratio_scan(grid, detail::pair_from_json(prm, "pair"),
                                             prm.at("s").get<double>(),
                                             detail::doubles_from_json(prm, "N2_list"),
                                             prm.at("trials").get<int>(), seed, times);
    csv = detail::scan_csv(rep.scan);
    std::ostringstream extra;
    rep.scan.write_json(extra);
    sidecar = extra.str();
    pass = rep.scan.pass;
  } else if (id == "wavepacket") {
    double lambda = prm.at("lambda").get<double>();
    double delta = prm.at("delta").get<double>();
    int nfields = prm.at("fields").get<int>();
    int ts = prm.at("time_samples").get<int>();
    double worst_recon = 0.0, worst_off = 0.0;
    std::ostringstream inv;
    for (int i = 0; i < nfields; ++i) {
      Field f = band_random(grid, SupportSpec::cube(0.9), keyed_u64(seed, uint64_t(i)));
      auto dec = packet_decompose(f, lambda);
      double err = l2_norm(packet_reconstruct(dec) - f) / l2_norm(f);
      worst_recon = std::max(worst_recon, err);
      if (i == 0) {
        write_packet_inventory(dec, inv);
        // off-tube mass of the heaviest packet
        const Packet* best = nullptr;
        for (const auto& pk : dec.packets)
          if (pk.retained && (!best || pk.l2 > best->l2)) best = &pk;
        if (best) {
          double Tw = lambda / 8.0;
          auto times = uniform_times(2.0 * Tw, ts);
          for (auto& t : times) t -= Tw;
          worst_off = off_tube_mass(best->tube, best->field, delta, times);
        }
      }
    }
    csv = inv.str();
    pass = worst_recon <= 1e-8;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"schema_version\": 1,\n  \"max_reconstruction_error\": %.6g,\n"
                  "  \"off_tube_mass\": %.6g,\n  \"pass\": %s\n}\n",
                  worst_recon, worst_off, pass ? "true" : "false");
    sidecar = buf;
  } else if (id == "nls") {
    NlsConfig nc;
    nc.grid = grid;
    std::string kind = prm.at("nonlinearity").get<std::string>();
    double kappa = prm.at("kappa").get<double>();
    nc.nl = kind == "power" ? Nonlinearity::power(kappa) : Nonlinearity::hartree(kappa);
    nc.dt = prm.at("dt").get<double>();
    nc.T = prm.at("T").get<double>();
    nc.save_stride = prm.at("save_stride").get<int>();
    const json& dat = prm.at("datum");
    Field u0 = rough_datum(grid, dat.at("s").get<double>(), dat.at("K").get<double>(), seed,
                           dat.value("amplitude", 1.0));
    SolutionTrace trace = solve(nc, u0);
    std::ostringstream os;
    write_trace_csv(trace, os);
    csv = os.str();
    double drift = 0.0;
    for (const auto& o : trace.observables)
      drift = std::max(drift, std::abs(o.mass - trace.observables.front().mass));
    double rel_drift = drift / trace.observables.front().mass;
    pass = !trace.aborted && rel_drift <= 1e-10;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"schema_version\": 1,\n  \"mass_drift_rel\": %.6g,\n"
                  "  \"aborted\": %s,\n  \"pass\": %s\n}\n",
                  rel_drift, trace.aborted ? "true" : "false", pass ? "true" : "false");
    sidecar = buf;
    if (prm.value("dump_frames", false)) {
      for (size_t k = 0; k < trace.frames.frames.size(); ++k) {
        auto fp = outdir / ("frame_" + std::to_string(k) + ".dlab");
        save_field(trace.frames.frames[k], fp.string());
        result.files.push_back(fp.string());
      }
    }
  } else if (id == "smoothing") {
    NlsConfig nc;
    nc.grid = grid;
    nc.nl = Nonlinearity::hartree(prm.at("kappa").get<double>());
    nc.dt = prm.at("dt").get<double>();
    nc.T = prm.at("T").get<double>();
    nc.save_stride = prm.at("save_stride").get<int>();
    SmoothingReport rep = smoothing_scan(prm.at("s").get<double>(),
                                         detail::doubles_from_json(prm, "K_list"), nc, seed,
                                         prm.value("amplitude", 1.0));
    std::ostringstream os;
    rep.datum_h1.write_csv(os);
    csv = os.str();
    std::ostringstream sj;
    sj << "{\n  \"schema_version\": 1,\n  \"datum_h1\": " << detail::scan_json(rep.datum_h1)
       << ",\n  \"duhamel_h1\": " << detail::scan_json(rep.duhamel_h1)
       << ",\n  \"degenerate_free_case\": " << (rep.degenerate_free_case ? "true" : "false")
       << "\n}\n";
    sidecar = sj.str();
    pass = rep.datum_h1.pass && (rep.degenerate_free_case || rep.duhamel_h1.pass);
  } else if (id == "imethod-energy" || id == "imethod-error") {
    NlsConfig nc;
    nc.grid = grid;
    nc.nl = Nonlinearity::hartree(prm.at("kappa").get<double>());
    nc.dt = prm.at("dt").get<double>();
    nc.T = prm.at("T").get<double>();
    nc.save_stride = prm.at("save_stride").get<int>();
    double s = prm.at("s").get<double>();
    const json& dat = prm.at("datum");
    Field u0 = rough_datum(grid, s, dat.at("K").get<double>(), seed, dat.value("amplitude", 1.0));
    IMethodKind kind =
        id == "imethod-energy" ? IMethodKind::energy_deviation : IMethodKind::error_term;
    IMethodReport rep = imethod_scan(kind, detail::doubles_from_json(prm, "N_list"), s, nc, u0);
    std::ostringstream os;
    write_imethod_csv(rep, os);
    csv = os.str();
    sidecar = detail::scan_json(rep.scan);
    pass = rep.scan.pass;
  }

  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto csv_path = outdir / (id + ".csv");
  auto sidecar_path = outdir / (id + "_summary.json");
  auto manifest_path = outdir / "manifest.json";
  detail::write_text(csv_path, csv);
  detail::write_text(sidecar_path, sidecar);
  json manifest;
  manifest["config"] = config;
  manifest["artifact_version"] = dlab_version();
  manifest["wall_time_seconds"] = elapsed;
  detail::write_text(manifest_path, manifest.dump(2) + "\n");
  result.files.push_back(csv_path.string());
  result.files.push_back(sidecar_path.string());
  result.files.push_back(manifest_path.string());
  result.exit_code = pass ? 0 : 2;
  result.message = pass ? "pass" : "measured check failed";
  return result;
}

}  // namespace dlab
