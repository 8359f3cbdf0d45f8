#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "signfem/adapt.hpp"
#include "signfem/mesh.hpp"
#include "signfem/problem.hpp"
#include "signfem/tcoercivity.hpp"

namespace signfem::cli {

/// Exit codes of the runner.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kSingular = 3,
  kIoError = 4,
};

enum class Command { Solve, Converge, VerifyCoercivity, DumpMesh };

std::string_view to_string(Command c);

/// Environment variable that overrides the output directory of the config file
/// (an explicit --output-dir flag still wins).
inline constexpr const char* kOutputDirEnv = "SIGNFEM_OUTPUT_DIR";

struct RunConfig {
  Command command = Command::Converge;
  ProblemKind problem = ProblemKind::Polynomial;
  double mu = -3.0;
  RefinementMode mode = RefinementMode::Uniform;
  int steps = 4;
  /// Cells per unit length of the starting grid; 0 picks 8 (uniform) or 4 (adaptive).
  int initial_n = 0;
  double mark_threshold = 0.5;
  std::optional<Index> max_dof;
  std::filesystem::path output_dir = "out";
  /// Degree of the load-vector rule: 4 or 6.
  int load_degree = 4;
  bool dump_indicators = true;
  bool dump_matrix = false;

  // verify-coercivity and dump-mesh
  Geometry geometry = Geometry::SymmetricSquare;
  int levels = 3;
  DiscreteLifting lifting = DiscreteLifting::NodalReflection;
  bool exchange_roles = false;
  Diagonal diagonal = Diagonal::Uniform;
  int refinements = 0;

  int starting_n() const;
  /// Field-named complaints; empty when the config is usable.
  std::vector<std::string> validate() const;
};

/// Thrown for unusable configuration; exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Plain "key = value" lines; '#' starts a comment. Throws ConfigError on
/// malformed lines, IoError when the file cannot be read.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Runs the selected pipeline, writing files below config.output_dir.
/// Progress goes to log; returns an ExitCode.
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Full command line entry point: parse, apply the config file and the
/// environment, run.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace signfem::cli
