// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "scilib/cost_model.hpp"
#include "scilib/report.hpp"
#include "scilib/runtime_config.hpp"
#include "scilib/simulator.hpp"
#include "scilib/trace.hpp"
#include "scilib/workload.hpp"

namespace scilib::cli {

namespace {

// Failures in the data rather than the command line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  std::string model_path;
  double threshold = kDefaultThreshold;
  std::uint64_t page_size = 65536;
  std::string capacity;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--model", f.model_path, "calibration file (built-in defaults when omitted)");
  cmd->add_option("--threshold", f.threshold, "offload when N_avg exceeds this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--page-size", f.page_size, "residency page size in bytes")
      ->check(CLI::IsMember({4096, 65536}))
      ->capture_default_str();
  cmd->add_option("--capacity", f.capacity, "device capacity, bytes with optional K/M/G suffix");
}

SimulationOptions options_from(const ModelFlags& f) {
  SimulationOptions o;
  o.threshold = f.threshold;
  o.page_size = f.page_size;
  if (!f.capacity.empty()) {
    const auto bytes = parse_byte_size(f.capacity);
    if (!bytes) throw CLI::ValidationError("--capacity", "not a byte size: " + f.capacity);
    o.capacity_bytes = *bytes;
  }
  if (!f.model_path.empty()) {
    try {
      const Calibration cal = load_calibration(f.model_path);
      o.model = cal.model;
      o.counter = cal.counter;
    } catch (const CalibrationError& e) {
      throw DataError(e.what());
    }
  }
  return o;
}

std::vector<TraceEvent> load_trace(const std::string& path) {
  std::vector<TraceEvent> trace;
  try {
    trace = read_trace_file(path);
  } catch (const TraceParseError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  if (trace.empty()) throw DataError(path + ": empty trace");
  return trace;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << content;
  if (!f) throw DataError("cannot write " + path);
}

std::string banner(const std::string& what) { return std::string("scilib-sim ") + kVersion + " | " + what + "\n"; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trace-driven BLAS offload policy simulator", "scilib-sim"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic trace");
  std::string recipe_name = "must";
  std::uint64_t seed = 1;
  std::string gen_out;
  WorkloadRecipe overrides;
  std::string precision;
  std::string pattern;
  gen->add_option("--recipe", recipe_name, "must, parsec or chain")->capture_default_str();
  gen->add_option("--seed", seed, "generator seed")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "output file (stdout when omitted)");
  auto* o_pattern = gen->add_option("--pattern", pattern, "iterative_square, skinny_scalapack or blocked_chain");
  auto* o_m = gen->add_option("--m", overrides.m, "override m");
  auto* o_n = gen->add_option("--n", overrides.n, "override n");
  auto* o_k = gen->add_option("--k", overrides.k, "override k");
  auto* o_iter = gen->add_option("--iterations", overrides.iterations, "override iteration count");
  auto* o_buf = gen->add_option("--buffer-count", overrides.buffer_count, "override number of buffer sets");
  auto* o_prec = gen->add_option("--precision", precision, "S, D, C or Z");
  auto* o_gap = gen->add_option("--host-gap", overrides.host_gap_s, "non-BLAS seconds before each call");
  auto* o_jit = gen->add_option("--jitter", overrides.jitter, "per-set dimension jitter bound");

  // simulate
  auto* sim = app.add_subcommand("simulate", "replay a trace under one policy");
  std::string sim_trace;
  std::string policy_text = "first_use";
  std::string sim_json;
  ModelFlags sim_flags;
  sim->add_option("trace", sim_trace, "trace file")->required();
  sim->add_option("--policy,--mode", policy_text, "cpu_only|off, memcopy, counter or first_use")
      ->capture_default_str();
  sim->add_option("--json", sim_json, "also write the machine-readable report here");
  add_model_flags(sim, sim_flags);

  // compare
  auto* cmp = app.add_subcommand("compare", "replay a trace under every policy");
  std::string cmp_trace;
  std::string cmp_json;
  ModelFlags cmp_flags;
  cmp->add_option("trace", cmp_trace, "trace file")->required();
  cmp->add_option("--json", cmp_json, "also write the machine-readable reports here");
  add_model_flags(cmp, cmp_flags);

  // report
  auto* rep = app.add_subcommand("report", "render machine-readable reports as a table");
  std::string rep_in;
  bool rep_json = false;
  rep->add_option("reports", rep_in, "file written by --json")->required();
  rep->add_flag("--json", rep_json, "re-emit the records instead of a table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "scilib-sim: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    std::ostringstream buf;
    if (gen->parsed()) {
      auto recipe = named_recipe(recipe_name);
      if (!recipe) throw CLI::ValidationError("--recipe", "unknown recipe '" + recipe_name + "'");
      if (*o_pattern) {
        const auto p = parse_pattern(pattern);
        if (!p) throw CLI::ValidationError("--pattern", "unknown pattern '" + pattern + "'");
        recipe->pattern = *p;
      }
      if (*o_m) recipe->m = overrides.m;
      if (*o_n) recipe->n = overrides.n;
      if (*o_k) recipe->k = overrides.k;
      if (*o_iter) recipe->iterations = overrides.iterations;
      if (*o_buf) recipe->buffer_count = overrides.buffer_count;
      if (*o_gap) recipe->host_gap_s = overrides.host_gap_s;
      if (*o_jit) recipe->jitter = overrides.jitter;
      if (*o_prec) {
        const auto r = precision.size() == 1 ? parse_routine(std::string(1, static_cast<char>(std::tolower(precision[0]))) + "gemm")
                                             : std::nullopt;
        if (!r) throw CLI::ValidationError("--precision", "must be S, D, C or Z");
        recipe->precision = r->precision;
      }
      std::vector<TraceEvent> trace;
      try {
        trace = gen_trace(*recipe, seed);
      } catch (const InvalidRecipe& e) {
        throw CLI::ValidationError(e.what());
      }
      write_trace(buf, trace);
      if (gen_out.empty()) {
        out << buf.str();
      } else {
        write_file(gen_out, buf.str());
      }
    } else if (sim->parsed()) {
      const auto policy = parse_policy(policy_text);
      if (!policy) throw CLI::ValidationError("--policy", "unknown policy '" + policy_text + "'");
      const auto options = options_from(sim_flags);
      const auto trace = load_trace(sim_trace);
      const PolicyReport report = simulate(trace, *policy, options);
      if (!sim_json.empty()) write_file(sim_json, report_to_json_line(report) + "\n");
      buf << banner("simulate " + sim_trace) << render_table({report}, false);
      out << buf.str();
    } else if (cmp->parsed()) {
      const auto options = options_from(cmp_flags);
      const auto trace = load_trace(cmp_trace);
      const auto reports = compare(trace, options);
      if (!cmp_json.empty()) {
        std::ostringstream records;
        write_reports(records, reports);
        write_file(cmp_json, records.str());
      }
      buf << banner("compare " + cmp_trace) << render_table(reports, true);
      out << buf.str();
    } else if (rep->parsed()) {
      std::ifstream in(rep_in);
      if (!in) throw DataError("cannot open " + rep_in);
      std::vector<PolicyReport> reports;
      try {
        reports = read_reports(in);
      } catch (const std::exception& e) {
        throw DataError(rep_in + ": " + e.what());
      }
      if (reports.empty()) throw DataError(rep_in + ": no reports");
      if (rep_json) {
        write_reports(buf, reports);
      } else {
        buf << banner("report " + rep_in) << render_table(reports, reports.size() > 1);
      }
      out << buf.str();
    }
  } catch (const CLI::ValidationError& e) {
    err << "scilib-sim: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "scilib-sim: " << e.what() << "\n";
    return kExitData;
  } catch (const SimulationError& e) {
    err << "scilib-sim: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace scilib::cli
