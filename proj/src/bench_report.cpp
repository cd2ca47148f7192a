#include "wasmdesk/bench_report.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <json.hpp>
#include <sstream>

#include "wasmdesk/interpreter.hpp"
#include "wasmdesk/validator.hpp"

#ifndef WASMDESK_VERSION
#define WASMDESK_VERSION "0.0.0"
#endif

namespace wasmdesk::bench {

using nlohmann::ordered_json;

Stats summarize(std::span<const double> samples, size_t warmup) {
  if (warmup >= samples.size()) {
    throw ConfigError("warmup (" + std::to_string(warmup) + ") must be smaller than the sample count (" +
                      std::to_string(samples.size()) + ")");
  }
  std::vector<double> kept(samples.begin() + static_cast<std::ptrdiff_t>(warmup), samples.end());
  Stats s;
  s.samples = kept.size();
  const double n = static_cast<double>(kept.size());
  double sum = 0;
  for (double v : kept) sum += v;
  s.mean = sum / n;
  double sq = 0;
  for (double v : kept) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / n);
  std::sort(kept.begin(), kept.end());
  s.min = kept.front();
  s.max = kept.back();
  const size_t mid = kept.size() / 2;
  s.median = kept.size() % 2 ? kept[mid] : (kept[mid - 1] + kept[mid]) / 2;
  return s;
}

double reduction_percent(double unoptimized_mean, double optimized_mean) {
  if (unoptimized_mean == 0) return 0;
  return (unoptimized_mean - optimized_mean) / unoptimized_mean * 100.0;
}

Format parse_format(std::string_view text) {
  if (text == "json") return Format::Json;
  if (text == "csv") return Format::Csv;
  if (text == "table") return Format::Table;
  throw ConfigError("unknown format '" + std::string(text) + "' (json, csv, table)");
}

std::string_view to_string(Format f) {
  switch (f) {
    case Format::Json: return "json";
    case Format::Csv: return "csv";
    case Format::Table: return "table";
  }
  return "?";
}

void RunConfig::validate() const {
  if (iterations == 0) throw ConfigError("iterations must be positive");
  if (warmup >= iterations) {
    throw ConfigError("warmup (" + std::to_string(warmup) + ") must be smaller than iterations (" +
                      std::to_string(iterations) + ")");
  }
  if (opt_threshold == 0) throw ConfigError("opt-threshold must be at least 1");
  if (fold_microbench_steps < 1) throw ConfigError("fold microbenchmark needs at least one step");
  for (const auto& name : cases) scale_params(name);
  for (const auto& [name, scale] : scales) resolve_scale(name, scale);
}

std::vector<std::string> RunConfig::selected_cases() const {
  if (cases.empty()) return case_names();
  std::vector<std::string> out;
  for (const auto& name : case_names()) {
    if (std::find(cases.begin(), cases.end(), name) != cases.end()) out.push_back(name);
  }
  return out;
}

const ModeResult* CaseResult::mode(std::string_view m) const {
  for (const auto& r : modes) {
    if (r.mode == m) return &r;
  }
  return nullptr;
}

namespace {

std::vector<std::string> modes_for(const RunConfig& c) {
  if (c.compare) return {"unoptimized", "optimized"};
  return {c.optimize ? "optimized" : "unoptimized"};
}

void finish_case(CaseResult& cr) {
  const ModeResult* u = cr.mode("unoptimized");
  const ModeResult* o = cr.mode("optimized");
  if (u && o) cr.reduction_percent = reduction_percent(u->stats.mean, o->stats.mean);
}

}  // namespace

ModeResult time_mode(const std::string& mode, const Module& module, const std::string& entry,
                     const std::vector<Value>& args, int64_t expected, const RunConfig& config, uint32_t threshold) {
  InstanceConfig ic;
  ic.opt_threshold = threshold;
  ic.fuel = config.fuel;
  auto instance = ModuleInstance::instantiate(validate_module(module), {}, ic);
  ModeResult r;
  r.mode = mode;
  r.raw_ms.reserve(config.iterations);
  for (uint32_t i = 0; i < config.iterations; ++i) {
    std::vector<Value> out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      out = instance.invoke(entry, args);
    } catch (const Trap& t) {
      throw CorrectnessError(entry + " (" + mode + ") trapped on iteration " + std::to_string(i) + ": " + t.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    r.raw_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    r.result = result_value(out);
    if (r.result != expected) {
      throw CorrectnessError(entry + " (" + mode + ") returned " + std::to_string(r.result) + ", oracle says " +
                             std::to_string(expected));
    }
  }
  r.stats = summarize(r.raw_ms, config.warmup);
  return r;
}

BenchReport run_bench(const RunConfig& config, const Progress& progress) {
  config.validate();
  BenchReport report;
  report.config = config;
  report.environment = environment_block();
  const auto modes = modes_for(config);
  for (const auto& name : config.selected_cases()) {
    Scale scale;
    if (auto it = config.scales.find(name); it != config.scales.end()) scale = it->second;
    CaseInputs inputs;
    inputs.seed = config.seed;
    BenchCase bc = build_case(name, scale, inputs);
    CaseResult cr;
    cr.name = name;
    cr.scale = bc.scale;
    cr.expected = bc.expected;
    for (const auto& mode : modes) {
      if (progress) progress(name + " [" + mode + "]");
      const uint32_t threshold = mode == "optimized" ? config.opt_threshold : kNeverOptimize;
      try {
        cr.modes.push_back(time_mode(mode, bc.module, bc.entry, bc.args, bc.expected.value, config, threshold));
      } catch (const CorrectnessError& e) {
        throw CorrectnessError(name + ": " + e.what());
      }
    }
    finish_case(cr);
    report.cases.push_back(std::move(cr));
  }
  if (config.fold_microbench) {
    CaseResult cr;
    cr.name = "const-fold-micro";
    cr.scale = {{"steps", config.fold_microbench_steps}};
    cr.expected = {fold_microbench_expected(config.fold_microbench_steps), "closed-form-loop"};
    const Module m = build_fold_microbench();
    for (const auto& mode : modes) {
      if (progress) progress(cr.name + " [" + mode + "]");
      const uint32_t threshold = mode == "optimized" ? config.opt_threshold : kNeverOptimize;
      cr.modes.push_back(time_mode(mode, m, "run", {Value::i32(config.fold_microbench_steps)}, cr.expected.value,
                                   config, threshold));
    }
    finish_case(cr);
    report.fold_microbench = std::move(cr);
  }
  if (config.compare && !report.cases.empty()) {
    Sanity s;
    double unopt = 0, opt = 0;
    for (const auto& c : report.cases) {
      unopt += c.mode("unoptimized")->stats.mean;
      opt += c.mode("optimized")->stats.mean;
    }
    s.corpus_ratio = unopt > 0 ? opt / unopt : 1.0;
    s.corpus_ok = s.corpus_ratio <= s.corpus_ratio_limit;
    if (report.fold_microbench) {
      s.fold_reduction_percent = report.fold_microbench->reduction_percent;
      s.fold_ok = *s.fold_reduction_percent >= s.fold_reduction_target;
    }
    report.sanity = s;
  }
  return report;
}

std::map<std::string, std::string> environment_block() {
  std::map<std::string, std::string> env;
  utsname u{};
  if (uname(&u) == 0) {
    env["host"] = std::string(u.sysname) + " " + u.release + " " + u.machine;
    env["hostname"] = u.nodename;
  }
#ifdef __VERSION__
  env["compiler"] = __VERSION__;
#endif
  env["version"] = WASMDESK_VERSION;
  env["clock"] = "steady_clock (monotonic, ns)";
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  env["timestamp"] = buf;
  return env;
}

namespace {

ordered_json stats_json(const Stats& s) {
  return {{"samples", s.samples}, {"mean_ms", s.mean},  {"median_ms", s.median},
          {"stddev_ms", s.stddev}, {"min_ms", s.min},   {"max_ms", s.max}};
}

ordered_json case_json(const CaseResult& c, uint32_t warmup) {
  ordered_json j;
  j["case"] = c.name;
  j["scale"] = ordered_json(c.scale);
  j["expected"] = c.expected.value;
  j["oracle"] = c.expected.produced_by;
  j["reduction_percent"] = c.reduction_percent ? ordered_json(*c.reduction_percent) : ordered_json(nullptr);
  ordered_json modes = ordered_json::array();
  for (const auto& m : c.modes) {
    ordered_json mj;
    mj["mode"] = m.mode;
    mj["result"] = m.result;
    mj["iterations"] = m.raw_ms.size();
    mj["warmup_discarded"] = warmup;
    mj.update(stats_json(m.stats));
    mj["raw_ms"] = m.raw_ms;
    modes.push_back(std::move(mj));
  }
  j["modes"] = std::move(modes);
  return j;
}

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

std::string to_json(const BenchReport& r) {
  ordered_json j;
  j["schema"] = 1;
  j["comparison"] = "optimized vs unoptimized tree interpretation";
  j["environment"] = ordered_json(r.environment);
  const RunConfig& c = r.config;
  j["config"] = {{"iterations", c.iterations},
                 {"warmup", c.warmup},
                 {"optimize", c.optimize},
                 {"compare", c.compare},
                 {"opt_threshold", c.opt_threshold},
                 {"format", std::string(to_string(c.format))},
                 {"seed", c.seed},
                 {"cases", c.selected_cases()},
                 {"fuel", c.fuel ? ordered_json(*c.fuel) : ordered_json(nullptr)}};
  ordered_json cases = ordered_json::array();
  for (const auto& cr : r.cases) cases.push_back(case_json(cr, c.warmup));
  j["cases"] = std::move(cases);
  if (r.fold_microbench) j["fold_microbench"] = case_json(*r.fold_microbench, c.warmup);
  if (r.sanity) {
    const Sanity& s = *r.sanity;
    j["sanity"] = {
        {"corpus_ratio", s.corpus_ratio},
        {"corpus_ratio_limit", s.corpus_ratio_limit},
        {"corpus_ok", s.corpus_ok},
        {"fold_reduction_percent", s.fold_reduction_percent ? ordered_json(*s.fold_reduction_percent) : nullptr},
        {"fold_reduction_target_percent", s.fold_reduction_target},
        {"fold_ok", s.fold_ok},
        {"tolerance", "soft: corpus ratio above 1.05 or fold reduction below 10% is reported, not fatal"}};
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const BenchReport& r) {
  std::ostringstream os;
  os << "case,mode,samples,mean_ms,median_ms,stddev_ms,min_ms,max_ms,reduction_percent\n";
  auto rows = [&](const CaseResult& c) {
    for (const auto& m : c.modes) {
      os << c.name << ',' << m.mode << ',' << m.stats.samples << ',' << fmt(m.stats.mean) << ','
         << fmt(m.stats.median) << ',' << fmt(m.stats.stddev) << ',' << fmt(m.stats.min) << ',' << fmt(m.stats.max)
         << ',' << (c.reduction_percent ? fmt(*c.reduction_percent, 4) : "") << '\n';
    }
  };
  for (const auto& c : r.cases) rows(c);
  if (r.fold_microbench) rows(*r.fold_microbench);
  return os.str();
}

std::string to_table(const BenchReport& r) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-12s %7s %11s %11s %10s %11s %11s %9s\n", "case", "mode", "samples",
                "mean_ms", "median_ms", "stddev_ms", "min_ms", "max_ms", "reduct_%");
  os << line;
  auto rows = [&](const CaseResult& c) {
    for (const auto& m : c.modes) {
      std::snprintf(line, sizeof line, "%-18s %-12s %7zu %11.3f %11.3f %10.3f %11.3f %11.3f %9s\n", c.name.c_str(),
                    m.mode.c_str(), m.stats.samples, m.stats.mean, m.stats.median, m.stats.stddev, m.stats.min,
                    m.stats.max, c.reduction_percent ? fmt(*c.reduction_percent, 2).c_str() : "-");
      os << line;
    }
  };
  for (const auto& c : r.cases) rows(c);
  if (r.fold_microbench) rows(*r.fold_microbench);
  if (r.sanity) {
    const Sanity& s = *r.sanity;
    os << "\ncorpus optimized/unoptimized mean ratio: " << fmt(s.corpus_ratio, 4) << " (limit "
       << fmt(s.corpus_ratio_limit, 2) << ", " << (s.corpus_ok ? "ok" : "ABOVE LIMIT") << ")\n";
    if (s.fold_reduction_percent) {
      os << "fold microbenchmark reduction: " << fmt(*s.fold_reduction_percent, 2) << "% (target "
         << fmt(s.fold_reduction_target, 0) << "%, " << (s.fold_ok ? "ok" : "below target, soft") << ")\n";
    }
  }
  return os.str();
}

std::string samples_csv(const BenchReport& r) {
  std::ostringstream os;
  os << "case,mode,iteration,ms,discarded\n";
  auto rows = [&](const CaseResult& c) {
    for (const auto& m : c.modes) {
      for (size_t i = 0; i < m.raw_ms.size(); ++i) {
        os << c.name << ',' << m.mode << ',' << i << ',' << fmt(m.raw_ms[i], 9) << ','
           << (i < r.config.warmup ? 1 : 0) << '\n';
      }
    }
  };
  for (const auto& c : r.cases) rows(c);
  if (r.fold_microbench) rows(*r.fold_microbench);
  return os.str();
}

std::string render(const BenchReport& report, Format format) {
  switch (format) {
    case Format::Json: return to_json(report);
    case Format::Csv: return to_csv(report);
    case Format::Table: return to_table(report);
  }
  return {};
}

}  // namespace wasmdesk::bench
