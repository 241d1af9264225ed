#include "irkmg/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "irkmg/config.hpp"
#include "irkmg/error.hpp"
#include "irkmg/hierarchy.hpp"

namespace irkmg
{

namespace
{

struct CommonArgs
{
  std::string config_path;
  std::string csv_path;
  std::string dump_mesh;
  std::string dump_matrix;
  bool verbose = false;
  std::map<std::string, std::string> values;
};

void add_run_options(CLI::App *cmd, CommonArgs &args, const std::vector<std::string> &skip)
{
  for (const auto &key : config_keys())
  {
    if (std::find(skip.begin(), skip.end(), key) != skip.end())
    {
      continue;
    }
    cmd->add_option("--" + key, args.values[key], "configuration key " + key);
  }
  cmd->add_option("--config", args.config_path, "key=value file; flags override its entries");
  cmd->add_option("--csv", args.csv_path, "write result rows as CSV");
  cmd->add_option("--dump-mesh", args.dump_mesh, "write the finest mesh");
  cmd->add_option("--dump-matrix", args.dump_matrix, "write the finest stage matrix");
  cmd->add_flag("--verbose", args.verbose, "per-step progress on stderr");
}

RunConfig build_config(CLI::App *cmd, const CommonArgs &args, Problem problem)
{
  RunConfig cfg;
  cfg.problem = problem;
  bool family_set = false, stages_set = false;
  const auto apply = [&](const std::string &key, const std::string &value) {
    apply_config_value(cfg, key, value);
    family_set |= key == "family";
    stages_set |= key == "stages";
  };
  if (!args.config_path.empty())
  {
    for (const auto &[key, value] : parse_config_file(args.config_path))
    {
      apply(key, value);
    }
  }
  for (const auto &[key, value] : args.values)
  {
    if (cmd->count("--" + key) > 0)
    {
      apply(key, value);
    }
  }
  if (!family_set)
  {
    throw InvalidParameter("--family is required");
  }
  if (!stages_set)
  {
    cfg.stages = default_stages(cfg.family);
  }
  validate(cfg);
  return cfg;
}

void dump_outputs(const RunConfig &cfg, const CommonArgs &args)
{
  if (!args.dump_mesh.empty())
  {
    MeshHierarchy meshes(cfg.n0, cfg.level);
    std::ofstream os(args.dump_mesh);
    if (!os)
    {
      throw InvalidParameter("cannot open '" + args.dump_mesh + "' for writing");
    }
    write_mesh(os, meshes.finest());
  }
  if (!args.dump_matrix.empty())
  {
    TaylorHoodHierarchy h(cfg.n0, cfg.level);
    const auto [steps, dt] = timestep_schedule(cfg);
    (void)steps;
    const StageOperator op(h.finest().blocks, tableau_lookup(cfg.family, cfg.stages), dt,
                           h.finest().velocity_constrained);
    const SparseMatrix A = op.materialize(true);
    std::ofstream os(args.dump_matrix);
    if (!os)
    {
      throw InvalidParameter("cannot open '" + args.dump_matrix + "' for writing");
    }
    write_matrix(os, A);
  }
}

}  // namespace

int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Monolithic multigrid for implicit Runge-Kutta Stokes and Navier-Stokes"};
  app.name("irkmg");
  app.require_subcommand(1, 1);

  CommonArgs stokes_args, ns_args, conv_args;
  auto *stokes = app.add_subcommand("stokes-mms", "Stokes manufactured-solution run at one level");
  add_run_options(stokes, stokes_args, {"problem"});
  auto *ns = app.add_subcommand("ns-taylor-green", "Navier-Stokes Taylor-Green run at one level");
  add_run_options(ns, ns_args, {"problem"});

  auto *conv = app.add_subcommand("converge", "sweep levels and print convergence rates");
  add_run_options(conv, conv_args, {"level"});
  int lmin = 1, lmax = 3;
  conv->add_option("--lmin", lmin, "first level");
  conv->add_option("--lmax", lmax, "last level");

  auto *report = app.add_subcommand("tableau-report", "print Butcher tableau diagnostics");
  std::string rep_family;
  int rep_stages = 0;
  report->add_option("--family", rep_family, "tableau family")->required();
  report->add_option("--stages", rep_stages, "stage count");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp &)
  {
    out << app.help();
    return 0;
  }
  catch (const CLI::ParseError &e)
  {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try
  {
    if (report->parsed())
    {
      const TableauFamily fam = parse_family(rep_family);
      const int r = report->count("--stages") ? rep_stages : default_stages(fam);
      out << tableau_report(tableau_lookup(fam, r));
      return 0;
    }

    CLI::App *cmd = stokes->parsed() ? stokes : ns->parsed() ? ns : conv;
    CommonArgs &args = stokes->parsed() ? stokes_args : ns->parsed() ? ns_args : conv_args;
    const Problem problem = ns->parsed() ? Problem::NSTaylorGreen : Problem::StokesMMS;
    RunConfig cfg = build_config(cmd, args, problem);
    cfg.verbose = args.verbose;

    ConvergenceReport result;
    if (cmd == conv)
    {
      if (lmin < 0 || lmax < lmin)
      {
        throw InvalidParameter("need 0 <= lmin <= lmax");
      }
      cfg.level = lmax;
      validate(cfg);
      dump_outputs(cfg, args);
      for (int l = lmin; l <= lmax; l++)
      {
        cfg.level = l;
        result.rows.push_back(run_problem(cfg));
      }
      out << problem_name(cfg.problem) << " " << result.rows.front().scheme << "("
          << cfg.stages << ")\n";
    }
    else
    {
      dump_outputs(cfg, args);
      result.rows.push_back(run_problem(cfg));
      out << problem_name(cfg.problem) << " " << result.rows.front().scheme << "("
          << cfg.stages << ") level " << cfg.level << "\n";
    }
    print_report(out, result.rows);
    for (const auto &row : result.rows)
    {
      out << "level " << row.level << " max_divergence_ratio "
          << format_sig6(row.max_divergence_ratio) << "\n";
    }
    if (!args.csv_path.empty())
    {
      emit_csv(result, args.csv_path);
    }
    return 0;
  }
  catch (const InvalidParameter &e)
  {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  catch (const SolverFailure &e)
  {
    err << "solver failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace irkmg
