#include "qoc/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "qoc/device.hpp"

namespace qoc {

using nlohmann::ordered_json;

namespace {

const char* hopping_name(HoppingNormalization h) {
  return h == HoppingNormalization::kPairExchange ? "pair-exchange" : "printed";
}

HoppingNormalization parse_hopping(const std::string& s) {
  if (s == "pair-exchange") return HoppingNormalization::kPairExchange;
  if (s == "printed") return HoppingNormalization::kPrinted;
  throw ValidationError("config: hopping must be 'pair-exchange' or 'printed', got '" + s + "'");
}

template <typename T>
void read(const ordered_json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  require(std::find(command_names().begin(), command_names().end(), command) != command_names().end(),
          "config: unknown command '" + command + "'");
  require(levels == 0 || (levels >= 2 && levels <= 4), "config: levels must be 2, 3 or 4");
  model.validate();
  require(initial_bits.empty() || static_cast<int>(initial_bits.size()) == model.sites,
          "config: initial bitstring length must equal the site count");
  require(initial_bits.find_first_not_of("01") == std::string::npos, "config: initial bitstring must be over {0,1}");
  require(duration > 0.0 && std::isfinite(duration), "config: pulse duration T must be > 0");
  require(segments >= 1, "config: segment count must be >= 1");
  require(substep >= 0.0 && std::isfinite(substep), "config: substep must be >= 0");
  require(frame == "rotating" || frame == "lab", "config: frame must be 'rotating' or 'lab'");
  require(phase_mode == "detuning" || phase_mode == "segment-phases",
          "config: phase_mode must be 'detuning' or 'segment-phases'");
  require(restarts >= 1, "config: restarts must be >= 1");
  require(tol > 0.0, "config: tolerance must be > 0");
  require(max_iterations >= 1, "config: max_iterations must be >= 1");
  require(gradient == "adjoint" || gradient == "finite-difference",
          "config: gradient must be 'adjoint' or 'finite-difference'");
  require(t_min > 0.0 && t_min < t_max, "config: need 0 < t_min < t_max");
  require(resolution > 0.0, "config: MET resolution must be > 0");
  require(coarse_step >= 0.0, "config: coarse_step must be >= 0");
  for (double g : couplings_mhz) require(g > 0.0, "config: coupling values must be > 0");
  require(repeats >= 1, "config: repeats must be >= 1");
  for (int n : site_counts) require(n >= 2, "config: site counts must be >= 2");
  for (double t : durations) require(t > 0.0, "config: durations must be > 0");
  require(samples >= 2, "config: samples must be >= 2");
  for (double b : betas) require(b >= 0.0, "config: beta values must be >= 0");
  require(shots >= 1, "config: shots must be >= 1");
  require(t1 > 0.0 && t2 > 0.0, "config: thermal pulse durations must be > 0");
  require(spectrum_levels >= 0, "config: spectrum_levels must be >= 0");
  require(!output_dir.empty(), "config: output_dir must not be empty");
}

RunConfig default_config(const std::string& command) {
  RunConfig c;
  c.command = command;
  if (command == "coupling-scan") {
    c.levels = 2;
    c.couplings_mhz = {5.0, 10.0, 15.0, 20.0, 25.0};
    c.repeats = 3;
  } else if (command == "variance") {
    c.levels = 2;
    c.site_counts = {2, 3, 4};
    c.durations = {5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0};
  } else if (command == "noisy-ground") {
    c.device = "ibm_kyoto";
    c.model.sites = 2;
    c.model.spacing = 0.5;
    c.initial_bits = "00";
    c.duration = 70.0;
    c.segments = 70;
    c.phase_mode = "segment-phases";
    c.thetas = {0.0, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4};
    c.noisy = true;
    c.tol = 1e-2;
  } else if (command == "thermal") {
    c.levels = 2;
    c.model.sites = 2;
    c.restarts = 20;
    c.betas = parse_number_list("0.5:5:10");
  }
  return c;
}

std::string to_json(const RunConfig& c, int indent) {
  ordered_json j;
  j["command"] = c.command;
  j["device"] = c.device;
  j["levels"] = c.levels;
  j["model"] = {{"sites", c.model.sites},       {"mass", c.model.mass},     {"spacing", c.model.spacing},
                {"theta", c.model.theta},       {"charge", c.model.charge},
                {"hopping", hopping_name(c.model.hopping)}};
  j["initial_bits"] = c.initial_bits;
  j["duration"] = c.duration;
  j["segments"] = c.segments;
  j["substep"] = c.substep;
  j["frame"] = c.frame;
  j["phase_mode"] = c.phase_mode;
  j["restarts"] = c.restarts;
  j["seed"] = c.seed;
  j["tol"] = c.tol;
  j["max_iterations"] = c.max_iterations;
  j["gradient"] = c.gradient;
  j["t_min"] = c.t_min;
  j["t_max"] = c.t_max;
  j["resolution"] = c.resolution;
  j["coarse_step"] = c.coarse_step;
  j["bisection"] = c.bisection;
  j["couplings_mhz"] = c.couplings_mhz;
  j["repeats"] = c.repeats;
  j["site_counts"] = c.site_counts;
  j["durations"] = c.durations;
  j["samples"] = c.samples;
  j["thetas"] = c.thetas;
  j["betas"] = c.betas;
  j["noisy"] = c.noisy;
  j["shots"] = c.shots;
  j["t1"] = c.t1;
  j["t2"] = c.t2;
  j["spectrum_levels"] = c.spectrum_levels;
  j["output_dir"] = c.output_dir;
  return j.dump(indent);
}

RunConfig config_from_json(std::string_view text, const RunConfig& base) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  require(j.is_object(), "config: top level must be a JSON object");
  RunConfig c = base;
  try {
    for (const auto& [key, value] : j.items()) {
      static const std::vector<std::string> known{
          "command",   "device",      "levels",     "model",          "initial_bits", "duration", "segments",
          "substep",   "frame",       "phase_mode", "restarts",       "seed",         "tol",      "max_iterations",
          "gradient",  "t_min",       "t_max",      "resolution",     "coarse_step",  "bisection", "couplings_mhz",
          "repeats",   "site_counts", "durations",  "samples",        "thetas",       "betas",    "noisy",
          "shots",     "t1",          "t2",         "spectrum_levels", "output_dir"};
      require(std::find(known.begin(), known.end(), key) != known.end(), "config: unknown key '" + key + "'");
    }
    read(j, "command", c.command);
    read(j, "device", c.device);
    read(j, "levels", c.levels);
    if (j.contains("model")) {
      const auto& m = j.at("model");
      read(m, "sites", c.model.sites);
      read(m, "mass", c.model.mass);
      read(m, "spacing", c.model.spacing);
      read(m, "theta", c.model.theta);
      read(m, "charge", c.model.charge);
      if (m.contains("hopping")) c.model.hopping = parse_hopping(m.at("hopping").get<std::string>());
    }
    read(j, "initial_bits", c.initial_bits);
    read(j, "duration", c.duration);
    read(j, "segments", c.segments);
    read(j, "substep", c.substep);
    read(j, "frame", c.frame);
    read(j, "phase_mode", c.phase_mode);
    read(j, "restarts", c.restarts);
    read(j, "seed", c.seed);
    read(j, "tol", c.tol);
    read(j, "max_iterations", c.max_iterations);
    read(j, "gradient", c.gradient);
    read(j, "t_min", c.t_min);
    read(j, "t_max", c.t_max);
    read(j, "resolution", c.resolution);
    read(j, "coarse_step", c.coarse_step);
    read(j, "bisection", c.bisection);
    read(j, "couplings_mhz", c.couplings_mhz);
    read(j, "repeats", c.repeats);
    read(j, "site_counts", c.site_counts);
    read(j, "durations", c.durations);
    read(j, "samples", c.samples);
    read(j, "thetas", c.thetas);
    read(j, "betas", c.betas);
    read(j, "noisy", c.noisy);
    read(j, "shots", c.shots);
    read(j, "t1", c.t1);
    read(j, "t2", c.t2);
    read(j, "spectrum_levels", c.spectrum_levels);
    read(j, "output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig config_from_json(std::string_view text) { return config_from_json(text, RunConfig{}); }

RunConfig config_from_header(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(static_cast<bool>(in), "cannot open '" + file.string() + "'");
  std::string first;
  std::getline(in, first);
  require(first.starts_with(kConfigHeader), "'" + file.string() + "' has no config header");
  return config_from_json(std::string_view(first).substr(kConfigHeader.size()));
}

OutputFile::OutputFile(const std::filesystem::path& path, const RunConfig& config) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  require(static_cast<bool>(out_), "cannot write '" + path.string() + "'");
  out_ << kConfigHeader << to_json(config) << '\n' << std::flush;
}

void OutputFile::line(const std::string& text) { out_ << text << '\n' << std::flush; }

void OutputFile::row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  line(s);
}

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<double> parse_number_list(std::string_view text) {
  auto number = [&](std::string_view s) {
    double v = 0.0;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    require(r.ec == std::errc{} && r.ptr == s.data() + s.size(), "cannot parse number '" + std::string(s) + "'");
    return v;
  };
  std::vector<std::string_view> parts;
  const char sep = text.find(':') != std::string_view::npos ? ':' : ',';
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(sep, start);
    parts.push_back(text.substr(start, end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  std::vector<double> out;
  if (sep == ',') {
    for (auto p : parts) out.push_back(number(p));
    return out;
  }
  require(parts.size() == 3, "grid must be lo:hi:count");
  const double lo = number(parts[0]), hi = number(parts[1]);
  const double count = number(parts[2]);
  require(count >= 1 && count == std::floor(count), "grid count must be a positive integer");
  const int n = static_cast<int>(count);
  require(n == 1 || hi >= lo, "grid needs hi >= lo");
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return out;
}

}  // namespace qoc
