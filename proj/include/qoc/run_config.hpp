#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qoc/spin_model.hpp"

namespace qoc {

/// Fully resolved settings of one CLI run. Serialized as JSON; every output
/// file starts with a "# config: <json>" line holding this object.
struct RunConfig {
  std::string command = "ground";
  std::string device = "falcon4q_nn";  // preset name or path to a device file
  int levels = 0;                      // 0 keeps the device file's truncation
  SchwingerParams model;
  std::string initial_bits;  // empty: mass eigenstate of the model

  // Pulse and integrator settings.
  double duration = 53.0;  // ns
  int segments = 100;
  double substep = 0.0;  // ns, 0 = frame default
  std::string frame = "rotating";
  std::string phase_mode = "detuning";

  // Optimizer.
  int restarts = 10;
  std::uint64_t seed = 42;
  double tol = 1e-3;
  int max_iterations = 500;
  std::string gradient = "adjoint";

  // MET search.
  double t_min = 10.0;
  double t_max = 400.0;
  double resolution = 0.5;
  double coarse_step = 0.0;
  bool bisection = false;

  // Scans.
  std::vector<double> couplings_mhz;
  int repeats = 1;
  std::vector<int> site_counts;
  std::vector<double> durations;
  int samples = 100;
  std::vector<double> thetas;
  std::vector<double> betas;

  // Noise and thermal settings.
  bool noisy = false;
  int shots = 8192;
  double t1 = 50.0;
  double t2 = 50.0;
  int spectrum_levels = 0;  // eigenvalues listed by `exact`, 0 = all

  std::string output_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  /// Checks every field against the library invariants; throws ValidationError.
  void validate() const;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"exact",  "ground",     "met",     "coupling-scan",
                                              "variance", "noisy-ground", "thermal", "trotter-compare"};
  return names;
}

/// Default settings for each command.
RunConfig default_config(const std::string& command);

std::string to_json(const RunConfig& config, int indent = -1);

/// Parses a JSON object. Missing keys keep the values of `base`.
RunConfig config_from_json(std::string_view text, const RunConfig& base);
RunConfig config_from_json(std::string_view text);

/// Reads the "# config:" header of an output file.
RunConfig config_from_header(const std::filesystem::path& file);

inline constexpr std::string_view kConfigHeader = "# config: ";

/// Line-buffered text output that starts with the config header and flushes
/// after every row, so an interrupted scan loses at most the row in progress.
class OutputFile {
 public:
  OutputFile(const std::filesystem::path& path, const RunConfig& config);

  const std::filesystem::path& path() const { return path_; }

  void line(const std::string& text);
  void row(const std::vector<std::string>& cells);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Shortest round-trip decimal form of `x`.
std::string format_number(double x);

/// "lo:hi:count" (inclusive, evenly spaced) or a comma-separated list.
std::vector<double> parse_number_list(std::string_view text);

}  // namespace qoc
