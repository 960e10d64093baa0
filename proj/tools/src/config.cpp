#include "lidarsurf_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "lidarsurf/bayes_io.hpp"
#include "lidarsurf/error.hpp"
#include "lidarsurf/synthetic.hpp"

namespace lidarsurf::cli {

namespace {

using nlohmann::json;

json real_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real_from(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
  }
  throw ValidationError("config key '" + key + "' must be a number");
}

std::size_t count_from(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ValidationError("config key '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<double> reals_from(const json& v, const std::string& key) {
  if (!v.is_array()) throw ValidationError("config key '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(real_from(x, key));
  return out;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config section '" + where + "' must be an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ValidationError("unknown config key '" + where + k + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  kernels.validate();
  require(kernels.size() >= 2, "scale selection needs at least 2 kernels");
  require(pfa > 0.0 && pfa < 1.0, "pfa must lie in (0, 1)");
  require(max_surfaces >= 1, "max_surfaces must be >= 1");
  require(std::isfinite(irf_sigma) && irf_sigma > 0.0, "irf_sigma must be positive");
  cda.validate();
  require(std::isfinite(alpha) && alpha >= 1.0, "alpha must be >= 1");
  require(std::isfinite(nu) && nu > 0.0, "nu must be positive");
  require(library.is_null() || library.is_string() || library.is_object(),
          "library must be null, a path or an inline object");

  const SimulationConfig& s = simulation;
  require(s.rows >= 1 && s.cols >= 1 && s.wavelengths >= 1 && s.bins >= 16,
          "simulation needs rows, cols, wavelengths >= 1 and bins >= 16");
  require(s.layers == 1 || s.layers == 2, "simulation.layers must be 1 or 2");
  require(s.classes >= 1, "simulation.classes must be >= 1");
  require(std::isfinite(s.ppp) && s.ppp > 0.0, "simulation.ppp must be positive");
  require(!std::isnan(s.sbr) && s.sbr > 0.0, "simulation.sbr must be positive");
  require(s.background == "uniform" || s.background == "exponential",
          "simulation.background must be 'uniform' or 'exponential'");
  require(std::isfinite(s.decay_bins) && s.decay_bins > 0.0, "simulation.decay_bins must be positive");
  require(std::isfinite(s.bin_width) && s.bin_width >= 0.0, "simulation.bin_width must be >= 0");

  require(!taus.empty(), "taus must not be empty");
  for (double t : taus) require(std::isfinite(t) && t >= 0.0, "taus must be finite and >= 0");
  for (double p : grid_ppp) require(std::isfinite(p) && p > 0.0, "grid.ppp entries must be positive");
  for (double b : grid_sbr) require(!std::isnan(b) && b > 0.0, "grid.sbr entries must be positive");
  require(grid_ppp.empty() == grid_sbr.empty(), "grid needs both ppp and sbr lists");
  require(!output.empty(), "output directory must be set");
}

json to_json(const PipelineConfig& c) {
  json doc;
  doc["kernels"] = {{"sizes", c.kernels.sizes}, {"weights", c.kernels.weights}};
  doc["pfa"] = c.pfa;
  doc["max_surfaces"] = c.max_surfaces;
  doc["irf_sigma"] = c.irf_sigma;
  doc["cda"] = {{"rho", c.cda.rho},
                {"gamma", c.cda.gamma},
                {"xi", real_json(c.cda.xi)},
                {"max_iterations", c.cda.max_iterations}};
  doc["prior"] = {{"alpha", c.alpha}, {"nu", c.nu}};
  doc["library"] = c.library;
  const SimulationConfig& s = c.simulation;
  doc["simulation"] = {{"rows", s.rows},
                       {"cols", s.cols},
                       {"wavelengths", s.wavelengths},
                       {"bins", s.bins},
                       {"layers", s.layers},
                       {"classes", s.classes},
                       {"ppp", s.ppp},
                       {"sbr", real_json(s.sbr)},
                       {"background", s.background},
                       {"decay_bins", s.decay_bins},
                       {"seed", s.seed},
                       {"bin_width", s.bin_width}};
  doc["taus"] = c.taus;
  json sbr = json::array();
  for (double b : c.grid_sbr) sbr.push_back(real_json(b));
  doc["grid"] = {{"ppp", c.grid_ppp}, {"sbr", sbr}};
  doc["output"] = c.output;
  return doc;
}

PipelineConfig from_json(const json& doc) {
  PipelineConfig c;
  check_keys(doc,
             {"kernels", "pfa", "max_surfaces", "irf_sigma", "cda", "prior", "library",
              "simulation", "taus", "grid", "output"},
             "");
  try {
    if (doc.contains("kernels")) {
      const json& k = doc["kernels"];
      check_keys(k, {"sizes", "weights", "preset"}, "kernels.");
      if (k.contains("preset")) {
        const auto preset = k["preset"].get<std::string>();
        if (preset == "simulation") c.kernels = KernelSet::simulation_default();
        else if (preset == "real") c.kernels = KernelSet::real_data_default();
        else throw ValidationError("kernels.preset must be 'simulation' or 'real'");
      }
      if (k.contains("sizes")) {
        c.kernels.sizes.clear();
        for (const auto& v : k["sizes"]) c.kernels.sizes.push_back(count_from(v, "kernels.sizes"));
        if (!k.contains("weights")) c.kernels = KernelSet::uniform(c.kernels.sizes);
      }
      if (k.contains("weights")) c.kernels.weights = reals_from(k["weights"], "kernels.weights");
    }
    if (doc.contains("pfa")) c.pfa = real_from(doc["pfa"], "pfa");
    if (doc.contains("max_surfaces")) c.max_surfaces = count_from(doc["max_surfaces"], "max_surfaces");
    if (doc.contains("irf_sigma")) c.irf_sigma = real_from(doc["irf_sigma"], "irf_sigma");
    if (doc.contains("cda")) {
      const json& d = doc["cda"];
      check_keys(d, {"rho", "gamma", "xi", "max_iterations"}, "cda.");
      if (d.contains("rho")) c.cda.rho = real_from(d["rho"], "cda.rho");
      if (d.contains("gamma")) c.cda.gamma = real_from(d["gamma"], "cda.gamma");
      if (d.contains("xi")) c.cda.xi = real_from(d["xi"], "cda.xi");
      if (d.contains("max_iterations"))
        c.cda.max_iterations = count_from(d["max_iterations"], "cda.max_iterations");
    }
    if (doc.contains("prior")) {
      const json& p = doc["prior"];
      check_keys(p, {"alpha", "nu"}, "prior.");
      if (p.contains("alpha")) c.alpha = real_from(p["alpha"], "prior.alpha");
      if (p.contains("nu")) c.nu = real_from(p["nu"], "prior.nu");
    }
    if (doc.contains("library")) c.library = doc["library"];
    if (doc.contains("simulation")) {
      const json& s = doc["simulation"];
      check_keys(s,
                 {"rows", "cols", "wavelengths", "bins", "layers", "classes", "ppp", "sbr",
                  "background", "decay_bins", "seed", "bin_width"},
                 "simulation.");
      SimulationConfig& o = c.simulation;
      if (s.contains("rows")) o.rows = count_from(s["rows"], "simulation.rows");
      if (s.contains("cols")) o.cols = count_from(s["cols"], "simulation.cols");
      if (s.contains("wavelengths")) o.wavelengths = count_from(s["wavelengths"], "simulation.wavelengths");
      if (s.contains("bins")) o.bins = count_from(s["bins"], "simulation.bins");
      if (s.contains("layers")) o.layers = count_from(s["layers"], "simulation.layers");
      if (s.contains("classes")) o.classes = count_from(s["classes"], "simulation.classes");
      if (s.contains("ppp")) o.ppp = real_from(s["ppp"], "simulation.ppp");
      if (s.contains("sbr")) o.sbr = real_from(s["sbr"], "simulation.sbr");
      if (s.contains("background")) o.background = s["background"].get<std::string>();
      if (s.contains("decay_bins")) o.decay_bins = real_from(s["decay_bins"], "simulation.decay_bins");
      if (s.contains("seed")) o.seed = count_from(s["seed"], "simulation.seed");
      if (s.contains("bin_width")) o.bin_width = real_from(s["bin_width"], "simulation.bin_width");
    }
    if (doc.contains("taus")) c.taus = reals_from(doc["taus"], "taus");
    if (doc.contains("grid")) {
      const json& g = doc["grid"];
      check_keys(g, {"ppp", "sbr"}, "grid.");
      if (g.contains("ppp")) c.grid_ppp = reals_from(g["ppp"], "grid.ppp");
      if (g.contains("sbr")) c.grid_sbr = reals_from(g["sbr"], "grid.sbr");
    }
    if (doc.contains("output")) c.output = doc["output"].get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config type error: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ValidationError("config is not valid JSON: " + std::string(e.what()));
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ValidationError("empty component in override key " + key);
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ValidationError("override key " + key + " crosses a non-object");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

std::uint64_t config_hash(const PipelineConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

Irf make_irf(const PipelineConfig& config, std::size_t wavelengths) {
  return Irf::gaussian(wavelengths, config.irf_sigma);
}

SpectralLibrary make_library(const PipelineConfig& config, std::size_t wavelengths) {
  SpectralLibrary lib;
  if (config.library.is_null())
    lib = SpectralLibrary::from_signatures(default_signatures(config.simulation.classes, wavelengths),
                                           config.alpha, config.nu);
  else if (config.library.is_string())
    lib = load_library(config.library.get<std::string>());
  else
    lib = parse_library(config.library.dump());
  require(lib.wavelengths == wavelengths, "library wavelength count does not match the data");
  return lib;
}

}  // namespace lidarsurf::cli
