#pragma once

// Versioned line-oriented parameter files.  A file stores the choices (a, b, s,
// D) per stage plus the derived values and condition reports for auditing;
// loading rebuilds the model from the choices and rejects any derived line that
// disagrees.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "isp/cyclicity.hpp"
#include "isp/stages.hpp"

namespace isp {

inline constexpr const char* kParamsMagic = "isp-params v1";

/// How D_n was obtained.
struct DRecord {
  bool empirical = true;  // false: supplied by hand (toy fixtures)
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  Scalar max_mass;
  friend bool operator==(const DRecord&, const DRecord&) = default;
};

struct StageRecord {
  StageChoice choice;
  std::optional<Int> log2_D;
  std::optional<DRecord> d_source;
  std::optional<ConditionReport> report;
};

struct ParameterFile {
  Mode mode = Mode::toy;
  unsigned gain = 1;
  std::uint64_t memo_cap = 1u << 22;
  std::vector<StageRecord> stages;

  WeightConfig weight_config() const;
  /// Replays every stage choice and D commitment.
  OperatorModel build_model() const;
};

std::string to_text(const ParameterFile& pf);
ParameterFile parse_params(const std::string& text);

void save_params(const std::filesystem::path& path, const ParameterFile& pf);
ParameterFile load_params(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

/// Searches the next strict stage, estimates its D and commits it.
/// `model` must equal pf.build_model(); both are extended.
void append_searched_stage(ParameterFile& pf, OperatorModel& model, const SamplerConfig& sampler = {},
                           const Progress& progress = {});
/// Appends a hand-chosen stage with a manual D and its condition report.
void append_manual_stage(ParameterFile& pf, OperatorModel& model, const StageChoice& choice, const Int& log2_D);

/// Strict: two searched stages.  Toy: the four-stage fixture with every D = 2.
ParameterFile builtin_params(Mode mode, const Progress& progress = {});

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

}  // namespace isp
