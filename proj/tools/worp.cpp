//  Copyright 2026 The worp Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>

#include "CLI11.hpp"
#include "worp/worp.hpp"

namespace fs = std::filesystem;
using namespace worp;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out_dir = ".";
};

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw FormatError("cannot write '" + p.string() + "'");
  return out;
}

StatisticSpec parse_stat(const std::string& s) {
  if (s == "nu") return StatisticSpec::identity();
  if (s.starts_with("pow:")) return StatisticSpec::power(parse_double(s.substr(4), "--stat"));
  if (s.size() > 1 && s[0] == 'p') return StatisticSpec::power(parse_double(s.substr(1), "--stat"));
  throw ConfigError("unknown statistic '" + s + "' (expected nu, pow:E or pE)");
}

// generate

struct GenerateOpts {
  std::string dist = "zipf";
  double alpha = 1.0;
  std::uint64_t n = 10000;
  double scale = 1000.0;
  std::size_t updates = 1;
  bool integer = true;
  std::string output = "elements.csv";
};

void cmd_generate(const Globals& g, const GenerateOpts& o) {
  FrequencyVector v = o.dist == "uniform" ? gen_zipf(0.0, o.n, o.scale) : gen_zipf(o.alpha, o.n, o.scale);
  if (o.dist != "zipf" && o.dist != "uniform") throw ConfigError("unknown distribution '" + o.dist + "'");
  std::vector<Element> elems;
  Rng rng(task_seed(g.seed, 0x6E6));
  for (const auto& e : v) {
    const double target = o.integer ? std::max(1.0, std::round(e.value)) : e.value;
    if (o.updates <= 1) {
      elems.push_back({e.key, target});
      continue;
    }
    // Split into signed updates that sum to the target.
    std::normal_distribution<double> noise(0.0, std::max(1.0, std::abs(target)));
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < o.updates; ++i) {
      double d = noise(rng);
      if (o.integer) d = std::round(d);
      elems.push_back({e.key, d});
      acc += d;
    }
    elems.push_back({e.key, target - acc});
  }
  std::shuffle(elems.begin(), elems.end(), rng);
  const auto path = out_path(g, o.output);
  write_elements_file(path.string(), elems);
  std::cout << "wrote " << elems.size() << " elements over " << v.size() << " keys to " << path.string() << '\n';
}

// calibrate

struct CalibrateOpts {
  std::uint64_t n = 10000;
  std::vector<std::uint64_t> ks{10, 100, 1000};
  std::vector<double> rhos{1.0, 2.0};
  double delta = 0.01;
  std::uint64_t trials = 0;
  std::string output;
};

void cmd_calibrate(const Globals& g, const CalibrateOpts& o) {
  CalibrationGrid grid{o.n, o.ks, o.rhos, o.delta, o.trials, g.seed, g.threads, true};
  const auto cals = estimate_psi_grid(grid);
  auto csv = open_out(out_path(g, "calibration.csv"));
  const char* header = "n,k,rho,delta,trials,quantile,psi,psi_lo,psi_hi,implied_c,implied_c_lo,implied_c_hi,B\n";
  csv << header;
  std::cout << header;
  for (const auto& c : cals) {
    write_json_file(out_path(g, calibration_cache_name(c.n, c.k, c.rho, c.delta, c.trials, c.seed)).string(), json(c));
    std::ostringstream row;
    row << c.n << ',' << c.k << ',' << format_double(c.rho) << ',' << format_double(c.delta) << ',' << c.trials << ','
        << format_double(c.quantile) << ',' << format_double(c.psi) << ',' << format_double(c.psi_ci[0]) << ','
        << format_double(c.psi_ci[1]) << ',' << format_double(c.implied_c) << ','
        << format_double(c.implied_c_ci[0]) << ',' << format_double(c.implied_c_ci[1]) << ',' << c.B << '\n';
    csv << row.str();
    std::cout << row.str();
  }
  if (!o.output.empty()) {
    json j = json::array();
    for (const auto& c : cals) j.push_back(c);
    write_json_file(out_path(g, o.output).string(), j.size() == 1 ? j[0] : j);
  }
}

// sample

struct SampleOpts {
  std::string input;
  std::size_t k = 100;
  double p = 1.0;
  int q = 2;
  std::string mode = "exact2pass";
  int passes = 0;
  std::string dist = "exp1";
  std::string calibration;
  std::string cache_dir;
  std::optional<double> psi;
  double delta = 0.01;
  double epsilon = 1.0 / 3.0;
  std::optional<std::size_t> rows, width, counters;
  std::uint64_t keyhash_n = 0;
  std::uint64_t distinct = 0;
  bool integer_keys = false;
  bool extended = false;
  std::string output = "sample.json";
  std::string sketch_out;
};

template <class Sketch>
WorSample run_two_pass(const FileSource& src, const WorpConfig& cfg, const SampleOpts& o, const Globals& g) {
  TwoPassWorp<Sketch> w(cfg);
  Sketch sketch = w.make_sketch();
  src.for_each([&](const Element& e) { w.pass1(sketch, e); });
  if (!o.sketch_out.empty()) {
    auto out = open_out(out_path(g, o.sketch_out));
    const auto blob = serialize(sketch);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
  CollectT t = w.make_collector();
  src.for_each([&](const Element& e) { w.pass2(t, sketch, e); });
  return o.extended ? w.extended_sample(sketch, t) : w.finalize(sketch, t);
}

template <class Sketch>
WorSample run_one_pass(const FileSource& src, const WorpConfig& cfg, const SampleOpts& o, const Globals& g) {
  OnePassWorp<Sketch> w(cfg);
  auto st = w.make_state();
  src.for_each([&](const Element& e) { w.process(st, e); });
  if (!o.sketch_out.empty()) {
    auto out = open_out(out_path(g, o.sketch_out));
    const auto blob = serialize(st.sketch);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
  return w.finalize(st);
}

void cmd_sample(const Globals& g, const SampleOpts& o) {
  const FileSource src(o.input);
  std::uint64_t distinct = o.distinct;
  if (distinct == 0) {
    std::set<std::string> keys;
    src.for_each([&](const Element& e) { keys.insert(e.key); });
    distinct = keys.size();
  }
  WorpConfig cfg;
  cfg.k = o.k;
  cfg.p = o.p;
  cfg.q = o.q;
  cfg.dist = rdist_from(o.dist);
  cfg.seed = g.seed;
  cfg.mapping = o.integer_keys ? KeyMapping::Integer : KeyMapping::Hashed;
  cfg.keyhash_n = o.keyhash_n ? o.keyhash_n : default_keyhash_domain(distinct);
  cfg.epsilon = o.epsilon;
  cfg.delta = o.delta;
  cfg.rows = o.rows;
  cfg.width = o.width;
  cfg.counters = o.counters;
  const SampleMode mode =
      o.passes == 0 ? sample_mode_from(o.mode) : (o.passes == 2 ? SampleMode::exact2pass : SampleMode::approx1pass);
  const int passes = mode == SampleMode::exact2pass ? 2 : 1;
  if (o.psi) {
    cfg.psi = *o.psi;
    cfg.B = choose_B(cfg.k, cfg.delta, 100000, g.seed);
  } else {
    Calibration cal;
    const double rho = static_cast<double>(o.q) / o.p;
    const std::uint64_t n = std::max<std::uint64_t>(distinct, cfg.k + 2);
    if (!o.calibration.empty())
      cal = read_json_file(o.calibration).get<Calibration>();
    else
      cal = cached_calibration(o.cache_dir.empty() ? fs::path(g.out_dir) / "calibration" : fs::path(o.cache_dir), n,
                               cfg.k + 1, rho, cfg.delta, 0, g.seed, g.threads);
    cfg.apply(cal, passes);
  }
  WorSample s;
  if (mode == SampleMode::exact2pass)
    s = o.q == 2 ? run_two_pass<DefaultProjection>(src, cfg, o, g) : run_two_pass<CounterSketch>(src, cfg, o, g);
  else
    s = o.q == 2 ? run_one_pass<DefaultProjection>(src, cfg, o, g) : run_one_pass<CounterSketch>(src, cfg, o, g);
  const auto path = out_path(g, o.output);
  write_json_file(path.string(), json(s));
  std::cout << "sample of " << s.size() << " keys, tau " << format_double(s.tau) << (s.failed ? ", FAILED" : "")
            << (s.underfull ? ", underfull" : "") << " -> " << path.string() << '\n';
  if (s.failed) throw EvaluationError("the sketch failure test fired; the sample is not guaranteed");
}

// estimate

struct EstimateOpts {
  std::string sample;
  std::vector<std::string> stats{"nu"};
  std::string output = "estimate.json";
};

void cmd_estimate(const Globals& g, const EstimateOpts& o) {
  const WorSample s = read_json_file(o.sample).get<WorSample>();
  json all = json::array();
  for (const auto& name : o.stats) {
    const auto est = estimate_statistic(s, parse_stat(name));
    json j = est;
    j["statistic"] = name;
    all.push_back(j);
    std::cout << name << ',' << format_double(est.value) << '\n';
  }
  write_json_file(out_path(g, o.output).string(), all.size() == 1 ? all[0] : all);
}

// tvd-sample

struct TvdOpts {
  std::string input;
  std::size_t k = 10;
  double p = 1.0;
  std::size_t samplers = 0;
  std::string sampler = "oracle";
  std::size_t runs = 1;
  std::string output;
};

void cmd_tvd(const Globals& g, const TvdOpts& o) {
  const auto elems = read_elements(o.input);
  std::map<std::string, std::uint64_t> index;
  for (const auto& e : elems) index.emplace(e.key, 0);
  std::vector<std::string> names;
  for (auto& [k, i] : index) {
    i = names.size();
    names.push_back(k);
  }
  std::vector<std::pair<std::uint64_t, double>> stream;
  stream.reserve(elems.size());
  for (const auto& e : elems) stream.push_back({index[e.key], e.value});
  TvdConfig cfg{o.k, o.p, names.size(), o.samplers, 1e300};
  const SamplerKind kind = o.sampler == "rejection" ? SamplerKind::rejection : SamplerKind::oracle;
  if (o.sampler != "oracle" && o.sampler != "rejection") throw ConfigError("unknown sampler '" + o.sampler + "'");
  if (o.runs > 1) {
    // Empirical distribution of the returned key sets.
    std::map<std::vector<std::string>, std::size_t> counts;
    std::size_t failures = 0;
    for (std::size_t run = 0; run < o.runs; ++run) {
      const auto r = tvd_run(stream, cfg, kind, task_seed(g.seed, run));
      if (r.failed) {
        ++failures;
        continue;
      }
      std::vector<std::string> set;
      for (auto x : r.keys) set.push_back(names[x]);
      std::sort(set.begin(), set.end());
      ++counts[set];
    }
    auto os = open_out(out_path(g, o.output.empty() ? "tvd-dist.csv" : o.output));
    os << "keys,count,frequency\n";
    for (const auto& [set, c] : counts) {
      std::string joined;
      for (const auto& k : set) joined += (joined.empty() ? "" : ";") + k;
      os << '"' << joined << "\"," << c << ',' << format_double(static_cast<double>(c) / o.runs) << '\n';
    }
    os << "FAIL," << failures << ',' << format_double(static_cast<double>(failures) / o.runs) << '\n';
    std::cout << counts.size() << " distinct sets over " << o.runs << " runs, " << failures << " failures\n";
    return;
  }
  const auto r = tvd_run(stream, cfg, kind, g.seed);
  json keys = json::array();
  for (auto x : r.keys) keys.push_back(names[x]);
  json j{{"format", "worp-tvd-sample"}, {"version", 1}, {"k", o.k},    {"p", o.p},
         {"seed", g.seed},            {"failed", r.failed}, {"trials", r.trials}, {"keys", keys}};
  write_json_file(out_path(g, o.output.empty() ? "tvd-sample.json" : o.output).string(), j);
  if (r.failed) {
    std::cout << "FAIL after " << r.trials << " samplers\n";
    throw EvaluationError("ran out of single samplers before finding k distinct keys");
  }
  for (const auto& k : keys) std::cout << k.get<std::string>() << '\n';
}

// bench

struct BenchOpts {
  bool small = false;
  bool reference = false;
  std::string dist = "zipf";
  double alpha = 1.0;
  std::uint64_t n = 10000;
  std::string file;
  std::size_t k = 100;
  double p = 1.0;
  int q = 2;
  std::size_t runs = 100;
  std::vector<double> stats{1.0};
  std::vector<std::string> pipelines{"perfectWR", "perfectWOR", "worp1", "worp2"};
  std::optional<std::size_t> rows, width;
  std::string cache_dir;
  std::uint64_t cal_trials = 0;
};

std::pair<Calibration, Calibration> bench_calibrations(const Globals& g, const BenchOpts& o, const Scenario& sc,
                                                       std::uint64_t domain) {
  const fs::path dir = o.cache_dir.empty() ? fs::path(g.out_dir) / "calibration" : fs::path(o.cache_dir);
  const double rho = static_cast<double>(sc.q) / sc.p;
  const auto c = cached_calibration(dir, domain, sc.k + 1, rho, 0.01, o.cal_trials, g.seed, g.threads);
  return {c, c};
}

void write_bench(const Globals& g, const std::string& prefix, const Scenario& sc, const ScenarioResult& r) {
  {
    auto os = open_out(out_path(g, prefix + "summary.csv"));
    write_summary_csv(os, sc, r);
  }
  {
    auto os = open_out(out_path(g, prefix + "runs.csv"));
    write_runs_csv(os, r);
  }
  {
    auto os = open_out(out_path(g, prefix + "curves.csv"));
    write_curves_csv(os, r);
  }
  {
    auto os = open_out(out_path(g, prefix + "effective.csv"));
    write_effective_csv(os, r);
  }
  auto os = open_out(out_path(g, prefix + "timing.csv"));
  os << "pipeline,seconds\n";
  for (const auto& [name, s] : r.seconds) os << name << ',' << format_double(s) << '\n';
  os << "sketch_rows," << r.sketch_rows << "\nsketch_width," << r.sketch_width << "\ncollect_capacity,"
     << r.collect_capacity << '\n';
}

void cmd_bench(const Globals& g, const BenchOpts& o) {
  Scenario base;
  base.distribution = o.dist;
  base.alpha = o.alpha;
  base.n = o.n;
  base.file = o.file;
  base.k = o.k;
  base.p = o.p;
  base.q = o.q;
  base.runs = o.runs;
  base.seed_base = g.seed;
  base.stats = o.stats;
  base.pipelines.clear();
  for (const auto& p : o.pipelines) base.pipelines.push_back(pipeline_from(p));
  base.rows = o.rows;
  base.width = o.width;
  base.threads = g.threads;

  if (!o.reference) {
    const std::uint64_t domain = o.dist == "file" ? scenario_data(base).size() : base.n;
    const auto [c2, c1] = bench_calibrations(g, o, base, domain);
    const auto r = run_scenario(base, &c2, &c1);
    write_bench(g, "", base, r);
    std::ifstream in(out_path(g, "summary.csv"));
    std::cout << in.rdbuf();
    if (r.worp2_runs) std::cout << "worp2 matched perfectWOR in " << r.worp2_matches << "/" << r.worp2_runs << " runs\n";
    return;
  }

  auto os = open_out(out_path(g, "reference.csv"));
  const char* header = "p,alpha,stat,pipeline,nrmse,reference,ratio,failures\n";
  os << header;
  std::cout << header;
  std::size_t i = 0;
  for (const auto& row : reference_rows()) {
    Scenario sc = base;
    sc.distribution = "zipf";
    sc.alpha = row.alpha;
    sc.p = row.p;
    sc.stats = {row.stat};
    sc.pipelines = {Pipeline::perfectWR, Pipeline::perfectWOR, Pipeline::worp1, Pipeline::worp2};
    const auto [c2, c1] = bench_calibrations(g, o, sc, sc.n);
    const auto r = run_scenario(sc, &c2, &c1);
    write_bench(g, "ref" + std::to_string(i++) + "-", sc, r);
    const double refs[] = {row.ref_wr, row.ref_wor, row.ref_worp1, row.ref_worp2};
    for (const auto& s : r.summary) {
      const double ref = refs[static_cast<int>(s.pipeline)];
      std::ostringstream line;
      line << format_double(row.p) << ',' << format_double(row.alpha) << ',' << format_double(row.stat) << ','
           << to_string(s.pipeline) << ',' << format_double(s.nrmse) << ',' << format_double(ref) << ','
           << format_double(s.nrmse / ref) << ',' << s.failures << '\n';
      os << line.str();
      std::cout << line.str();
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"worp: l_p sampling without replacement over turnstile streams"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

  GenerateOpts go;
  auto* gen = app.add_subcommand("generate", "Write a synthetic element stream");
  gen->add_option("--dist", go.dist, "zipf or uniform")->capture_default_str();
  gen->add_option("--alpha", go.alpha, "Zipf exponent")->capture_default_str();
  gen->add_option("--n", go.n, "Number of keys")->capture_default_str();
  gen->add_option("--scale", go.scale, "Frequency of the top key")->capture_default_str();
  gen->add_option("--updates", go.updates, "Signed updates per key")->capture_default_str();
  gen->add_flag("!--real", go.integer, "Keep fractional frequencies instead of rounding");
  gen->add_option("-o,--output,--out", go.output, "Output file name")->capture_default_str();

  CalibrateOpts co;
  auto* cal = app.add_subcommand("calibrate", "Estimate the rHH parameter by Monte Carlo");
  cal->add_option("--n", co.n, "Support size")->capture_default_str();
  cal->add_option("--k", co.ks, "rHH sizes")->capture_default_str();
  cal->add_option("--rho", co.rhos, "Exponent ratios q/p")->capture_default_str();
  cal->add_option("--delta", co.delta, "Failure probability")->capture_default_str();
  cal->add_option("--trials", co.trials, "Monte Carlo trials (0 = default)")->capture_default_str();
  cal->add_option("-o,--output,--out", co.output, "Also write the records as one JSON file");

  SampleOpts so;
  auto* smp = app.add_subcommand("sample", "Draw a without-replacement sample from an element file");
  smp->add_option("-i,--input", so.input, "Element CSV")->required()->check(CLI::ExistingFile);
  smp->add_option("--k", so.k, "Sample size")->capture_default_str();
  smp->add_option("--p", so.p, "Sampling power in (0, 2]")->capture_default_str();
  smp->add_option("--q", so.q, "Sketch norm (1 counters, 2 projection)")->capture_default_str();
  smp->add_option("--mode", so.mode, "exact2pass or approx1pass")->capture_default_str();
  smp->add_option("--passes", so.passes, "2 for exact2pass, 1 for approx1pass (overrides --mode)")
      ->check(CLI::Range(1, 2));
  smp->add_option("--dist", so.dist, "exp1 (ppswor) or uniform01 (priority)")->capture_default_str();
  smp->add_option("--calibration,--cal", so.calibration, "Calibration JSON to use");
  smp->add_option("--cache-dir", so.cache_dir, "Calibration cache directory");
  smp->add_option("--psi", so.psi, "Use this rHH parameter instead of a calibration");
  smp->add_option("--delta", so.delta, "Failure probability")->capture_default_str();
  smp->add_option("--epsilon", so.epsilon, "One-pass accuracy")->capture_default_str();
  smp->add_option("--rows", so.rows, "Override sketch rows");
  smp->add_option("--width", so.width, "Override sketch width");
  smp->add_option("--counters", so.counters, "Override counter capacity");
  smp->add_option("--domain", so.keyhash_n, "Key hash domain size (0 = 4x distinct keys)");
  smp->add_option("--distinct", so.distinct, "Distinct key estimate (0 = count them)");
  smp->add_flag("--integer-keys", so.integer_keys, "Keys are integers in [0, domain)");
  smp->add_flag("--extended", so.extended, "Return every key that is certainly in the order sample");
  smp->add_option("-o,--output,--out", so.output, "Sample JSON file name")->capture_default_str();
  smp->add_option("--sketch-out", so.sketch_out, "Also write the sketch blob here");

  EstimateOpts eo;
  auto* est = app.add_subcommand("estimate", "Estimate sum statistics from a sample");
  est->add_option("-s,--sample", eo.sample, "Sample JSON")->required()->check(CLI::ExistingFile);
  est->add_option("--stat", eo.stats, "nu, pow:E or pE (repeatable)")->capture_default_str();
  est->add_option("-o,--output,--out", eo.output, "Estimate JSON file name")->capture_default_str();

  TvdOpts to;
  auto* tvd = app.add_subcommand("tvd-sample", "Sample with repeated single samplers");
  tvd->add_option("-i,--input", to.input, "Element CSV")->required()->check(CLI::ExistingFile);
  tvd->add_option("--k", to.k, "Sample size")->capture_default_str();
  tvd->add_option("--p", to.p, "Sampling power")->capture_default_str();
  tvd->add_option("--samplers", to.samplers, "Number of single samplers (0 = 8k)")->capture_default_str();
  tvd->add_option("--sampler,--mode", to.sampler, "oracle or rejection")->capture_default_str();
  tvd->add_option("--runs", to.runs, "Runs; above 1 writes the empirical set distribution as CSV")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tvd->add_option("-o,--output,--out", to.output, "Output file (default tvd-sample.json or tvd-dist.csv)");

  BenchOpts bo;
  auto* bench = app.add_subcommand("bench", "Compare estimators over many seeded runs");
  bench->add_flag("--small", bo.small, "n = 1000, k = 30, 50 runs");
  bench->add_flag("--reference", bo.reference, "Run the five reference moment settings");
  bench->add_option("--dist", bo.dist, "zipf, uniform or file")->capture_default_str();
  bench->add_option("--alpha", bo.alpha, "Zipf exponent")->capture_default_str();
  bench->add_option("--n", bo.n, "Number of keys")->capture_default_str();
  bench->add_option("--file", bo.file, "Element CSV when --dist file");
  bench->add_option("--k", bo.k, "Sample size")->capture_default_str();
  bench->add_option("--p", bo.p, "Sampling power")->capture_default_str();
  bench->add_option("--q", bo.q, "Sketch norm")->capture_default_str();
  bench->add_option("--runs", bo.runs, "Runs")->capture_default_str();
  bench->add_option("--stat", bo.stats, "Moment exponents (repeatable)")->capture_default_str();
  bench->add_option("--pipelines", bo.pipelines, "perfectWR perfectWOR worp1 worp2 tvd")->capture_default_str();
  bench->add_option("--rows", bo.rows, "Sketch rows");
  bench->add_option("--width", bo.width, "Sketch width (default 31k)");
  bench->add_option("--cache-dir", bo.cache_dir, "Calibration cache directory");
  bench->add_option("--cal-trials", bo.cal_trials, "Calibration trials (0 = default)");

  CLI11_PARSE(app, argc, argv);
  // --small only fills in the sizes that were not given explicitly.
  if (bo.small) {
    if (!bench->count("--n")) bo.n = 1000;
    if (!bench->count("--k")) bo.k = 30;
    if (!bench->count("--runs")) bo.runs = 50;
  }
  try {
    if (*gen) cmd_generate(g, go);
    if (*cal) cmd_calibrate(g, co);
    if (*smp) cmd_sample(g, so);
    if (*est) cmd_estimate(g, eo);
    if (*tvd) cmd_tvd(g, to);
    if (*bench) cmd_bench(g, bo);
  } catch (const EvaluationError& e) {
    std::cerr << "worp: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "worp: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "worp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
