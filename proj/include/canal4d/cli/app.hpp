#pragma once

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "canal4d/cli/commands.hpp"
#include "canal4d/cli/config.hpp"

namespace canal4d::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2 };

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("--out", "cannot write '" + path + "'");
  f << text;
  if (!f) throw ConfigError("--out", "write to '" + path + "' failed");
}

/// canal4d generate|curvature|verify|export-obj --config <path> [...]
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Canal hypersurfaces in Minkowski space-time"};
  app.require_subcommand(1);
  std::string config, out_path, slice;
  bool no_oracle = false, all_types = false, inject_fault = false;
  double tol = 0.0;
  int workers = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON job file");
    sub->add_option("--out", out_path, "output file (default: config output path or stdout)");
    sub->add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::Range(1, 256));
  };
  auto* gen = app.add_subcommand("generate", "point grid CSV");
  common(gen);
  auto* curv = app.add_subcommand("curvature", "closed-form and oracle curvature CSV");
  common(curv);
  curv->add_flag("--no-oracle", no_oracle, "skip the numerical oracle");
  auto* ver = app.add_subcommand("verify", "residual report; exit 1 on any failure");
  common(ver);
  ver->add_flag("--all-types", all_types, "built-in battery over all eight types");
  ver->add_option("--tol", tol, "override every tolerance")->check(CLI::PositiveNumber);
  ver->add_flag("--inject-fault", inject_fault, "negate one closed-form coefficient (negative control)");
  auto* obj = app.add_subcommand("export-obj", "OBJ mesh of a 2-parameter slice");
  common(obj);
  obj->add_option("--slice", slice, "axis=value, axis in u, v, w")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (ver->parsed() && all_types) {
      Tolerances t;
      if (tol > 0.0) t.set_all(tol);
      const VerifyReport rep = verify_all_types(t, inject_fault);
      std::ostringstream os;
      rep.print(os);
      emit(os.str(), out_path, out);
      return rep.ok() ? kOk : kVerifyFailed;
    }
    if (config.empty()) throw ConfigError("--config", "required");
    JobConfig cfg = load_config(config);
    if (workers > 0) cfg.workers = workers;
    if (tol > 0.0) cfg.tolerances.set_all(tol);
    const Job job = build_job(cfg, inject_fault);
    if (gen->parsed()) {
      emit(cmd_generate(job), out_path.empty() ? cfg.csv_out : out_path, out);
    } else if (curv->parsed()) {
      emit(cmd_curvature(job, !no_oracle), out_path.empty() ? cfg.csv_out : out_path, out);
    } else if (obj->parsed()) {
      emit(cmd_export_obj(job, parse_slice(slice)), out_path.empty() ? cfg.obj_out : out_path, out);
    } else {
      const VerifyReport rep = verify_job(job);
      std::ostringstream os;
      rep.print(os);
      emit(os.str(), out_path, out);
      return rep.ok() ? kOk : kVerifyFailed;
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace canal4d::cli
