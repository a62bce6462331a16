#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace drw::experiment {

enum class Protocol { single, many, sod, pos, mh, rst, mixing, naive };

std::string_view to_string(Protocol p);
/// Throws SpecError on unknown names.
Protocol protocol_from_string(std::string_view name);

enum class Format { csv, json };

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentSpec {
  /// Generator string as accepted by graph::from_spec_string.
  std::string graph = "cycle:8";
  Protocol protocol = Protocol::single;
  /// One entry per grid point; every trial runs once per entry.
  std::vector<std::uint64_t> ell{16};
  std::uint64_t lambda = 0;
  /// With lambda = 0 and a positive scale c, each grid point uses
  /// lambda = ceil(c sqrt(ell D)) instead of the polylog default.
  double lambda_scale = 0.0;
  std::uint64_t eta = 1;
  std::uint64_t k = 1;
  double alpha = 0.5;
  /// MH target: "degree", "uniform" or "linear" (pi(v) proportional to v+1).
  std::string pi = "uniform";
  /// Source of single, pos, mh, naive, rst and mixing runs.
  std::uint32_t source = 0;
  std::uint64_t trials = 1;
  std::uint64_t seed = 1;
  /// Worker threads; results never depend on it.
  unsigned threads = 1;
  std::filesystem::path out;
  Format format = Format::csv;

  void validate() const;
};

/// Keys mirror the field names; unknown keys are rejected.
ExperimentSpec spec_from_json(const nlohmann::json& j);
/// Overlays keys of `j` onto `base`.
void merge_json(ExperimentSpec& base, const nlohmann::json& j);

struct Row {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t ell = 0;
  std::uint64_t lambda = 0;
  std::uint64_t rounds_total = 0;
  std::uint64_t messages_total = 0;
  std::uint32_t max_edge_load = 0;
  /// Destination(s), tree edges or tau estimate, depending on the protocol.
  std::string digest;
};

struct Summary {
  double mean_rounds = 0.0;
  double mean_messages = 0.0;
  double mean_max_load = 0.0;
  /// Least-squares slope of log(median rounds) on log(ell); set when the grid
  /// has at least two distinct lengths.
  std::optional<double> exponent;
};

struct ResultTable {
  std::string protocol;
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint32_t diameter = 0;
  std::uint64_t eta = 1;
  std::uint64_t k = 1;
  std::vector<Row> rows;
  std::optional<Summary> summary;
};

ResultTable run_experiment(const ExperimentSpec& spec);

/// Slope of the least-squares line through (log x, log y).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

inline constexpr std::string_view kCsvVersion = "# drw-results v1";

std::string to_csv(const ResultTable& t);
nlohmann::json to_json(const ResultTable& t);
std::string render(const ResultTable& t, Format f);

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes render(t, f) to `path`, creating parent directories.
void emit(const ResultTable& t, Format f, const std::filesystem::path& path);

}  // namespace drw::experiment
