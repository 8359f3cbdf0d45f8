#include "signfem/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "signfem/assembly.hpp"
#include "signfem/estimator.hpp"

namespace signfem::cli {

namespace fs = std::filesystem;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Converge: return "converge";
    case Command::VerifyCoercivity: return "verify-coercivity";
    case Command::DumpMesh: return "dump-mesh";
  }
  return "?";
}

int RunConfig::starting_n() const {
  if (initial_n > 0) return initial_n;
  switch (command) {
    case Command::Converge: return mode == RefinementMode::Adaptive ? 4 : 8;
    case Command::VerifyCoercivity: return 2;
    default: return 8;
  }
}

std::vector<std::string> RunConfig::validate() const {
  std::vector<std::string> out;
  if (!(mu < 0.0)) out.push_back(fmt::format("mu: must be negative, got {}", mu));
  if (steps < 1) out.push_back(fmt::format("steps: must be >= 1, got {}", steps));
  if (initial_n < 0) out.push_back(fmt::format("initial_n: must be positive, got {}", initial_n));
  if (!(mark_threshold > 0.0 && mark_threshold < 1.0)) {
    out.push_back(fmt::format("mark_threshold: must lie in (0,1), got {}", mark_threshold));
  }
  if (max_dof && *max_dof < 1) out.push_back(fmt::format("max_dof: must be positive, got {}", *max_dof));
  if (load_degree != 4 && load_degree != 6) {
    out.push_back(fmt::format("load_degree: must be 4 or 6, got {}", load_degree));
  }
  if (levels < 1) out.push_back(fmt::format("levels: must be >= 1, got {}", levels));
  if (refinements < 0) out.push_back(fmt::format("refinements: must be >= 0, got {}", refinements));
  if (output_dir.empty()) out.push_back("output_dir: must not be empty");
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  }
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  writer(file);
  file.flush();
  if (!file) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

const TriangleRule& load_rule(int degree) {
  return degree == 6 ? symmetric_rule_degree6() : symmetric_rule_degree4();
}

std::string config_echo(const RunConfig& c) {
  std::string s = fmt::format("command = {}\n", to_string(c.command));
  switch (c.command) {
    case Command::Solve:
    case Command::Converge:
      s += fmt::format("problem = {}\nmu = {}\ninitial_n = {}\nload_degree = {}\n", to_string(c.problem), c.mu,
                       c.starting_n(), c.load_degree);
      if (c.command == Command::Converge) {
        s += fmt::format("mode = {}\nsteps = {}\nmark_threshold = {}\n", to_string(c.mode), c.steps,
                         c.mark_threshold);
        if (c.max_dof) s += fmt::format("max_dof = {}\n", *c.max_dof);
      }
      break;
    case Command::VerifyCoercivity:
      s += fmt::format("geometry = {}\nmu = {}\ninitial_n = {}\nlevels = {}\nlifting = {}\nexchange_roles = {}\n",
                       to_string(c.geometry), c.mu, c.starting_n(), c.levels, to_string(c.lifting),
                       c.exchange_roles ? "true" : "false");
      break;
    case Command::DumpMesh:
      s += fmt::format("geometry = {}\ninitial_n = {}\ndiagonal = {}\nrefinements = {}\n", to_string(c.geometry),
                       c.starting_n(), c.diagonal == Diagonal::Uniform ? "uniform" : "mirrored", c.refinements);
      break;
  }
  return s;
}

void write_run_log(const RunConfig& c, const std::string& body) {
  write_file(c.output_dir / "run.log", [&](std::ostream& f) { f << config_echo(c) << body; });
}

int run_solve(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const ProblemSpec problem = ProblemSpec::make(c.problem, c.mu);
  log << problem.describe() << '\n';
  write_run_log(c, problem.describe() + "\n");
  const Mesh mesh = build_structured_mesh(problem.geometry, c.starting_n());
  DiscreteSolution uh;
  try {
    uh = solve_problem(mesh, problem, load_rule(c.load_degree));
  } catch (const SingularSystem& e) {
    throw LevelFailure(1, true, e.what());
  }
  const ErrorNorms err = compute_errors(mesh, uh, problem.exact);
  const SubdomainField f = [&](Point p, Subdomain s) { return problem.source(p, s); };
  const ElementIndicators ind = compute_indicators(mesh, uh, problem.coefficient, f, load_rule(c.load_degree));
  const EstimatorReport rep = aggregate(ind, err.h1);

  write_file(c.output_dir / "solution.txt", [&](std::ostream& s) {
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
      const Point p = mesh.vertex(v).coords;
      s << fmt::format("{:.17g} {:.17g} {:.17g}\n", p.x, p.y, uh.nodal[v]);
    }
  });
  write_file(c.output_dir / "indicators.txt", [&](std::ostream& s) { write_indicators(s, ind); });
  if (c.dump_matrix) {
    write_file(c.output_dir / "matrix.txt",
               [&](std::ostream& s) { write_coordinate(s, assemble(mesh, problem.coefficient)); });
  }
  const std::string summary =
      fmt::format("dof {}\ntriangles {}\ne_l2 {:.6e}\ne_h1 {:.6e}\neta {:.6e}\neffectivity {}\nosc {:.6e}\n",
                  mesh.num_vertices(), mesh.num_triangles(), err.l2, err.h1, rep.eta,
                  rep.exact_solution ? std::string("-") : fmt::format("{:.4f}", rep.effectivity), rep.oscillation);
  write_file(c.output_dir / "summary.txt", [&](std::ostream& s) { s << summary; });
  out << summary;
  return kOk;
}

int run_converge(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const ProblemSpec problem = ProblemSpec::make(c.problem, c.mu);
  log << problem.describe() << '\n';
  write_run_log(c, problem.describe() + "\n");
  const fs::path ind_dir = c.output_dir / "indicators";
  if (c.dump_indicators) ensure_directory(ind_dir);

  LoopOptions options;
  options.mode = c.mode;
  options.steps = c.steps;
  options.mark_threshold = c.mark_threshold;
  options.max_dof = c.max_dof;
  options.load_rule = &load_rule(c.load_degree);
  options.observer = [&](const LevelData& level) {
    log << fmt::format("level {}: dof {} e_h1 {:.3e} eta {:.3e} marked {}\n", level.k, level.row->dof,
                       level.row->e_h1, level.row->eta, level.marked.size());
    if (c.dump_indicators) {
      write_file(ind_dir / fmt::format("level_{:03}.txt", level.k),
                 [&](std::ostream& s) { write_indicators(s, *level.indicators); });
    }
  };
  const ConvergenceTable table = run_loop(problem, build_structured_mesh(problem.geometry, c.starting_n()), options);
  write_file(c.output_dir / "table.csv", [&](std::ostream& s) { table.write_csv(s); });
  write_file(c.output_dir / "table.txt", [&](std::ostream& s) { table.write_text(s); });
  table.write_text(out);
  return kOk;
}

int run_coercivity(const RunConfig& c, std::ostream& out, std::ostream& log) {
  CoercivityReport report;
  report.geometry = c.geometry;
  report.mu = c.mu;
  report.options.lifting = c.lifting;
  report.options.exchange_roles = c.exchange_roles;
  const double factor = c.geometry == Geometry::SymmetricSquare ? 1.0 : 3.0;
  report.k_bound = c.exchange_roles ? factor / std::abs(c.mu) : factor * std::abs(c.mu);
  write_run_log(c, "");

  Mesh mesh = build_structured_mesh(c.geometry, c.starting_n(), Diagonal::Mirrored);
  for (int level = 1; level <= c.levels; ++level) {
    if (level > 1) mesh = refine_uniform(mesh);
    CoercivityReportLine line;
    line.level = level;
    line.vertices = mesh.num_vertices();
    line.h = mesh.max_diameter();
    line.estimate = estimate_KR_and_coercivity(mesh, c.geometry, c.mu, report.options);
    log << fmt::format("level {}: K {:.6f} alpha {:.6e}\n", level, line.estimate.k_r, line.estimate.alpha_min);
    report.lines.push_back(line);
  }
  write_file(c.output_dir / "coercivity.txt", [&](std::ostream& s) { write_report(s, report); });
  write_report(out, report);
  return report.k_within_bound() && report.alpha_positive() ? kOk : kFailure;
}

int run_dump_mesh(const RunConfig& c, std::ostream& out, std::ostream&) {
  Mesh mesh = build_structured_mesh(c.geometry, c.starting_n(), c.diagonal);
  for (int i = 0; i < c.refinements; ++i) mesh = refine_uniform(mesh);
  write_file(c.output_dir / "mesh.txt", [&](std::ostream& s) { write_mesh(s, mesh); });
  out << fmt::format("{} vertices, {} triangles -> {}\n", mesh.num_vertices(), mesh.num_triangles(),
                     (c.output_dir / "mesh.txt").string());
  return kOk;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read config file '{}'", path.string()));
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key = value", path.string(), number));
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", path.string(), number));
    for (char& ch : key) {
      if (ch == '-') ch = '_';
    }
    out[key] = value;
  }
  return out;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& log) {
  const auto problems = config.validate();
  if (!problems.empty()) {
    for (const auto& p : problems) log << "config error: " << p << '\n';
    return kConfigError;
  }
  try {
    ensure_directory(config.output_dir);
    switch (config.command) {
      case Command::Solve: return run_solve(config, out, log);
      case Command::Converge: return run_converge(config, out, log);
      case Command::VerifyCoercivity: return run_coercivity(config, out, log);
      case Command::DumpMesh: return run_dump_mesh(config, out, log);
    }
  } catch (const LevelFailure& e) {
    log << "error: " << e.what() << '\n';
    return e.singular() ? kSingular : kFailure;
  } catch (const SingularSystem& e) {
    log << "error: " << e.what() << '\n';
    return kSingular;
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

namespace {

// Option values as text so enum names can be reported against their field.
struct RawOptions {
  std::string problem = "polynomial";
  double mu = -3.0;
  std::string mode = "uniform";
  int steps = 4;
  int initial_n = 0;
  double mark_threshold = 0.5;
  long long max_dof = 0;
  std::string output_dir;
  int load_degree = 4;
  bool no_indicators = false;
  bool dump_matrix = false;
  std::string geometry = "square";
  int levels = 3;
  std::string lifting = "reflection";
  bool exchange_roles = false;
  std::string diagonal = "uniform";
  int refinements = 0;
};

template <class F>
auto parse_field(std::string_view field, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("{}: {}", field, e.what()));
  }
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  // Pull --config out first so its entries can be placed ahead of the flags.
  std::vector<std::string> args;
  std::optional<fs::path> config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config") {
      if (i + 1 >= argc) {
        log << "config error: --config needs a path\n";
        return kConfigError;
      }
      config_path = argv[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      args.push_back(a);
    }
  }

  std::map<std::string, std::string> file_values;
  if (config_path) {
    try {
      file_values = read_config_file(*config_path);
    } catch (const ConfigError& e) {
      log << "config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const IoError& e) {
      log << "error: " << e.what() << '\n';
      return kIoError;
    }
  }
  std::optional<std::string> file_output_dir;
  if (auto it = file_values.find("output_dir"); it != file_values.end()) {
    file_output_dir = it->second;
    file_values.erase(it);
  }

  RawOptions raw;
  CLI::App app{"Sign-changing coefficient P1 finite element experiments", "signfem"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.footer(fmt::format("--config FILE reads key = value lines; flags override the file.\n"
                         "{} overrides the output directory unless --output-dir is given.",
                         kOutputDirEnv));

  auto* solve = app.add_subcommand("solve", "Solve once on a structured mesh");
  auto* converge = app.add_subcommand("converge", "Uniform or adaptive convergence table");
  auto* verify = app.add_subcommand("verify-coercivity", "Discrete lifting norm and inf-sup check");
  auto* dump = app.add_subcommand("dump-mesh", "Write a structured mesh");

  std::vector<CLI::Option*> output_opts;
  for (auto* sub : {solve, converge, verify, dump}) {
    output_opts.push_back(sub->add_option("--output-dir,-o", raw.output_dir, "Output directory (default out)"));
    sub->add_option("--initial-n", raw.initial_n, "Cells per unit length of the starting grid");
  }
  for (auto* sub : {solve, converge}) {
    sub->add_option("--problem", raw.problem, "polynomial | singular");
    sub->add_option("--mu", raw.mu, "Coefficient on the negative side (< 0)");
    sub->add_option("--load-degree", raw.load_degree, "Load quadrature degree: 4 or 6");
  }
  solve->add_flag("--dump-matrix", raw.dump_matrix, "Also write the stiffness matrix");
  converge->add_option("--mode", raw.mode, "uniform | adaptive");
  converge->add_option("--steps", raw.steps, "Number of table rows");
  converge->add_option("--mark-threshold", raw.mark_threshold, "Mark eta_T > threshold * max eta");
  auto* max_dof_opt = converge->add_option("--max-dof", raw.max_dof, "Stop once this many vertices are reached");
  converge->add_flag("--no-indicators", raw.no_indicators, "Skip the per-level indicator dumps");
  for (auto* sub : {verify, dump}) sub->add_option("--geometry", raw.geometry, "square | lshape");
  verify->add_option("--mu", raw.mu, "Coefficient on the negative side (< 0)");
  verify->add_option("--levels", raw.levels, "Number of uniformly refined levels");
  verify->add_option("--lifting", raw.lifting, "reflection | clement");
  verify->add_flag("--exchange-roles", raw.exchange_roles, "Lift from the negative side");
  dump->add_option("--diagonal", raw.diagonal, "uniform | mirrored");
  dump->add_option("--refinements", raw.refinements, "Uniform refinements after building");

  // File entries go right after the subcommand name, so later flags win.
  std::vector<std::string> merged;
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "solve" || args[i] == "converge" || args[i] == "verify-coercivity" || args[i] == "dump-mesh") {
      sub_pos = i;
      break;
    }
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    merged.push_back(args[i]);
    if (i == sub_pos) {
      for (const auto& [key, value] : file_values) {
        std::string flag = key;
        for (char& ch : flag) {
          if (ch == '_') ch = '-';
        }
        merged.push_back(fmt::format("--{}={}", flag, value));
      }
    }
  }

  try {
    std::vector<std::string> reversed(merged.rbegin(), merged.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, log);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, log);
  } catch (const CLI::ParseError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  RunConfig config;
  try {
    if (solve->parsed()) config.command = Command::Solve;
    if (converge->parsed()) config.command = Command::Converge;
    if (verify->parsed()) config.command = Command::VerifyCoercivity;
    if (dump->parsed()) config.command = Command::DumpMesh;
    config.problem = parse_field("problem", [&] { return parse_problem_kind(raw.problem); });
    config.mode = parse_field("mode", [&] { return parse_refinement_mode(raw.mode); });
    config.geometry = parse_field("geometry", [&] { return parse_geometry(raw.geometry); });
    config.lifting = parse_field("lifting", [&] { return parse_discrete_lifting(raw.lifting); });
    if (raw.diagonal == "uniform") {
      config.diagonal = Diagonal::Uniform;
    } else if (raw.diagonal == "mirrored") {
      config.diagonal = Diagonal::Mirrored;
    } else {
      throw ConfigError(fmt::format("diagonal: unknown value '{}' (expected uniform or mirrored)", raw.diagonal));
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  config.mu = raw.mu;
  config.steps = raw.steps;
  config.initial_n = raw.initial_n;
  config.mark_threshold = raw.mark_threshold;
  if (max_dof_opt->count() > 0) config.max_dof = static_cast<Index>(raw.max_dof);
  config.load_degree = raw.load_degree;
  config.dump_indicators = !raw.no_indicators;
  config.dump_matrix = raw.dump_matrix;
  config.levels = raw.levels;
  config.exchange_roles = raw.exchange_roles;
  config.refinements = raw.refinements;

  bool flag_output = false;
  for (auto* opt : output_opts) flag_output = flag_output || opt->count() > 0;
  const char* env = std::getenv(kOutputDirEnv);
  if (flag_output) {
    config.output_dir = raw.output_dir;
  } else if (env != nullptr && *env != '\0') {
    config.output_dir = env;
  } else if (file_output_dir) {
    config.output_dir = *file_output_dir;
  }
  return run(config, out, log);
}

}  // namespace signfem::cli
