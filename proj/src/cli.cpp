#include "ranemu/cli.hpp"

#include <unistd.h>

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ranemu/backends.hpp"
#include "ranemu/emulator.hpp"
#include "ranemu/error.hpp"
#include "ranemu/ingest.hpp"
#include "ranemu/kde.hpp"
#include "ranemu/model_store.hpp"
#include "ranemu/profiles.hpp"
#include "ranemu/validation.hpp"

namespace ranemu::cli {

namespace {

// Usage mistakes detected after CLI11 parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

// Writes to `path`, or to `fallback` when path is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }
  bool to_file() const { return stream_ == &file_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

struct BackendOptions {
  std::string iface;
  std::string backend;  // "", "simulated" or "dry-run"
  std::string ifb = default_ifb_name();
  std::string latency_mode = "split";
  bool realtime = false;
  int setup_rtts = 2;
};

void add_backend_options(CLI::App* cmd, BackendOptions& o) {
  auto* iface = cmd->add_option("--iface", o.iface, "Shape this real interface (needs root)");
  cmd->add_option("--backend", o.backend, "Use a built-in backend instead of a real interface")
      ->check(CLI::IsMember({"simulated", "dry-run"}))
      ->excludes(iface);
  cmd->add_option("--ifb", o.ifb, "ifb device for ingress shaping (env ERRANT_IFB)")
      ->capture_default_str();
  cmd->add_option("--latency-mode", o.latency_mode, "split: L/2 each way; egress: all on egress")
      ->check(CLI::IsMember({"split", "egress"}))
      ->capture_default_str();
  cmd->add_flag("--realtime", o.realtime, "Wall-clock pacing for built-in backends");
  cmd->add_option("--setup-rtts", o.setup_rtts, "Round trips before data flows (simulated)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

struct BackendBundle {
  std::unique_ptr<ShapingBackend> backend;
  std::unique_ptr<Clock> clock;
};

BackendBundle make_backend(const BackendOptions& o, std::uint64_t seed) {
  const auto mode = o.latency_mode == "egress" ? LatencyMode::AllEgress : LatencyMode::Split;
  BackendBundle b;
  if (!o.iface.empty()) {
    if (::geteuid() != 0) {
      throw BackendError(
          "shaping interface '" + o.iface +
          "' needs root (CAP_NET_ADMIN); rerun with sudo, or use --backend dry-run to see the "
          "commands");
    }
    b.backend = std::make_unique<TcBackend>(std::make_shared<ShellRunner>(),
                                            Interfaces{o.iface, o.ifb}, mode);
    b.clock = std::make_unique<SteadyClock>();
    return b;
  }
  if (o.backend == "simulated") {
    b.backend = std::make_unique<SimulatedBackend>(o.setup_rtts, derive_rng(seed, 3)());
  } else {
    b.backend = std::make_unique<DryRunBackend>(Interfaces{"eth0", o.ifb}, mode);
  }
  if (o.realtime) {
    b.clock = std::make_unique<SteadyClock>();
  } else {
    b.clock = std::make_unique<VirtualClock>();
  }
  return b;
}

StaticPreset parse_preset_flag(const std::string& flag) {
  const auto colon = flag.find(':');
  if (colon == std::string::npos) throw UsageError("--preset expects tool:name, e.g. chrome:3G");
  return static_preset(flag.substr(0, colon), flag.substr(colon + 1));
}

void write_report(const RunReport& report, const std::string& path, std::ostream& out) {
  Sink sink(path, out);
  *sink << report.to_json();
}

// ---------------------------------------------------------------------------

struct BuildOptions {
  std::string input;
  std::string output;
  std::size_t min_samples = 100;
  bool write_rejects = false;
  std::vector<std::string> columns;
};

CsvSchema schema_from(const std::vector<std::string>& mappings) {
  CsvSchema schema;
  for (const auto& m : mappings) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw UsageError("--column expects field=header, got " + m);
    const auto field = m.substr(0, eq);
    const auto header = m.substr(eq + 1);
    std::string* slot = nullptr;
    if (field == "timestamp") slot = &schema.timestamp;
    if (field == "country") slot = &schema.country;
    if (field == "operator") slot = &schema.op;
    if (field == "rat") slot = &schema.rat;
    if (field == "rssi") slot = &schema.rssi;
    if (field == "download_kbps") slot = &schema.download_kbps;
    if (field == "upload_kbps") slot = &schema.upload_kbps;
    if (field == "latency_ms") slot = &schema.latency_ms;
    if (slot == nullptr) throw UsageError("--column: unknown field '" + field + "'");
    *slot = header;
  }
  return schema;
}

int cmd_build_models(const BuildOptions& o, std::ostream& out, std::ostream& err) {
  auto in = open_input(o.input);
  const auto parsed = parse_speedtests(in, schema_from(o.columns));
  out << "parsed " << parsed.records.size() << " records, rejected " << parsed.rejected.size()
      << "\n";
  if (o.write_rejects) {
    const auto path = o.input + ".rejects.csv";
    std::ofstream rej(path, std::ios::binary | std::ios::trunc);
    if (!rej) throw IoError("cannot open " + path + " for writing");
    write_rejects(rej, parsed.header, parsed.rejected);
    out << "rejected rows written to " << path << "\n";
  }

  const auto profiles = filter_profiles(build_profiles(parsed.records), o.min_samples);
  if (profiles.empty()) {
    err << "error: no profiles survive filter (min samples " << o.min_samples << ")\n";
    return kDataError;
  }

  ModelBundle bundle;
  bundle.created = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  out << "profile\tn\tbandwidth_factor\n";
  for (const auto& [key, profile] : profiles) {
    try {
      auto model = KdeModel::fit(profile.samples);
      out << key.to_string() << '\t' << model.n() << '\t' << model.bandwidth_factor() << "\n";
      bundle.models.emplace(key, std::move(model));
    } catch (const DegenerateFitError& e) {
      err << "warning: skipping " << key.to_string() << ": " << e.what() << "\n";
    }
  }
  if (bundle.models.empty()) {
    err << "error: no profiles survive filter (every fit was degenerate)\n";
    return kDataError;
  }
  save_bundle(bundle, o.output);
  out << "wrote " << bundle.models.size() << " models to " << o.output << "\n";
  return kOk;
}

int cmd_list_profiles(const std::string& models, std::ostream& out) {
  const auto bundle = load_bundle(models);
  out << "profile\tn\tmedian_download_kbps\tmedian_upload_kbps\tmedian_latency_ms\n";
  for (const auto& [key, model] : bundle.models) {
    const auto st = profile_stats(model.points());
    out << key.to_string() << '\t' << model.n() << '\t' << st.download.median << '\t'
        << st.upload.median << '\t' << st.latency.median << "\n";
  }
  return kOk;
}

struct RunOptions {
  std::string models;
  std::string profile;
  std::string preset;
  bool simple = false;
  double duration = 0.0;
  std::optional<double> period;
  std::optional<std::uint64_t> seed;
  std::string report;
  BackendOptions backend;
};

// Resolves --preset / --simple / model sampling into a parameter source.
// `holder` keeps the bundle alive for model-backed sources.
ParamSource resolve_source(const std::string& models, const std::string& profile,
                           const std::string& preset, bool simple,
                           std::unique_ptr<ModelBundle>& holder, std::string& label) {
  if (!preset.empty()) {
    if (simple) throw UsageError("--preset and --simple are mutually exclusive");
    const auto p = parse_preset_flag(preset);
    label = p.tool + ":" + p.name;
    return preset_source(p);
  }
  if (models.empty() || profile.empty()) {
    throw UsageError("--models and --profile are required unless --preset is given");
  }
  holder = std::make_unique<ModelBundle>(load_bundle(models));
  const auto key = ProfileKey::parse(profile);
  const auto& model = holder->at(key);
  label = key.to_string();
  if (simple) return simple_source(simple_params(model.points()));
  return model_source(model);
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  std::unique_ptr<ModelBundle> bundle;
  std::string label;
  const auto source = resolve_source(o.models, o.profile, o.preset, o.simple, bundle, label);
  const auto seed = resolve_seed(o.seed);
  auto be = make_backend(o.backend, seed);
  auto rng = derive_rng(seed, 0);
  auto report = o.period ? run_periodic(source, *be.backend, o.duration, *o.period, rng, *be.clock,
                                        label)
                         : run_fixed(source, *be.backend, o.duration, rng, *be.clock, label);
  report.seed = seed;
  write_report(report, o.report, out);
  if (!o.report.empty()) err << "seed: " << seed << "\n";
  return kOk;
}

struct TraceOptions {
  std::string models;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string report;
  BackendOptions backend;
};

int cmd_trace_run(const TraceOptions& o, std::ostream& out, std::ostream& err) {
  const auto bundle = load_bundle(o.models);
  auto in = open_input(o.scenario);
  const auto scenario = parse_scenario(in);
  check_scenario(scenario, bundle);
  const auto seed = resolve_seed(o.seed);
  auto be = make_backend(o.backend, seed);
  auto rng = derive_rng(seed, 0);
  auto report = run_trace(scenario, bundle, *be.backend, rng, *be.clock);
  report.seed = seed;
  write_report(report, o.report, out);
  if (!o.report.empty()) err << "seed: " << seed << "\n";
  return kOk;
}

struct ValidateOptions {
  std::string models;
  std::string profile;
  std::string preset;
  bool simple = false;
  std::size_t downloads = 1000;
  std::string object_size = "10MB";
  int setup_rtts = 2;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int cmd_validate(const ValidateOptions& o, std::ostream& out, std::ostream& err) {
  const auto size = parse_size(o.object_size);
  if (!size || *size == 0) throw UsageError("--object-size: cannot parse '" + o.object_size + "'");
  std::unique_ptr<ModelBundle> bundle;
  std::string label;
  const auto source = resolve_source(o.models, o.profile, o.preset, o.simple, bundle, label);
  const auto seed = resolve_seed(o.seed);

  const auto rows = run_download_campaign(source, o.downloads, *size, seed, o.setup_rtts);
  Sink sink(o.output, out);
  write_campaign_csv(*sink, rows, seed);

  if (bundle && !rows.empty()) {
    const auto& model = bundle->at(ProfileKey::parse(o.profile));
    std::vector<double> emulated;
    for (const auto& r : rows) emulated.push_back(r.avg_speed_kbps);
    const auto observed = fluid_speeds(model.points(), *size, o.setup_rtts);
    std::ostream& report_out = sink.to_file() ? out : err;
    report_out << "# " << label << ": fluid-model speeds of profile samples vs emulated downloads\n";
    compare_distributions(observed, emulated).write_text(report_out);
  }
  return kOk;
}

struct SubsampleOptions {
  std::string models;
  std::string input;
  std::string profile;
  std::vector<std::size_t> sizes = {10, 100, 1000};
  std::size_t reps = 100;
  std::size_t cap = 10000;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int cmd_subsample(const SubsampleOptions& o, std::ostream& out, std::ostream& err) {
  if (o.models.empty() == o.input.empty()) throw UsageError("give exactly one of --models or --input");
  const auto key = ProfileKey::parse(o.profile);
  std::vector<NetworkSample> samples;
  if (!o.models.empty()) {
    samples = load_bundle(o.models).at(key).points();
  } else {
    auto in = open_input(o.input);
    const auto profiles = build_profiles(parse_speedtests(in).records);
    const auto it = profiles.find(key);
    if (it == profiles.end()) throw LookupError("no samples for profile " + key.to_string());
    samples = it->second.samples;
  }
  const auto seed = resolve_seed(o.seed);
  const auto report = subsample_experiment(samples, o.sizes, o.reps, o.cap, seed);

  Sink sink(o.output, out);
  report.write_csv(*sink, seed);
  std::ostream& summary = sink.to_file() ? out : err;
  summary << "n\tmedian_D_download\tmedian_D_upload\tmedian_D_latency\n";
  for (std::size_t i = 0; i < report.sizes.size(); ++i) {
    summary << report.sizes[i];
    for (auto dim : kDimensions) summary << '\t' << report.median(i, dim);
    summary << "\n";
  }
  return kOk;
}

}  // namespace

std::optional<std::uint64_t> parse_size(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || !(value >= 0.0) || !std::isfinite(value)) return std::nullopt;
  std::string unit(ptr, text.data() + text.size());
  while (!unit.empty() && unit.front() == ' ') unit.erase(0, 1);
  for (auto& c : unit) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  double mult = 0.0;
  if (unit.empty() || unit == "b") mult = 1.0;
  else if (unit == "kb" || unit == "k") mult = 1e3;
  else if (unit == "mb" || unit == "m") mult = 1e6;
  else if (unit == "gb" || unit == "g") mult = 1e9;
  else if (unit == "kib") mult = 1024.0;
  else if (unit == "mib") mult = 1024.0 * 1024.0;
  else if (unit == "gib") mult = 1024.0 * 1024.0 * 1024.0;
  else return std::nullopt;
  return static_cast<std::uint64_t>(std::llround(value * mult));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mobile-network emulation from speed-test density models", "ranemu"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  BuildOptions build;
  auto* build_cmd = app.add_subcommand("build-models", "Fit per-profile models from a speed-test CSV");
  build_cmd->add_option("--input", build.input, "Speed-test CSV")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--output", build.output, "Model file to write")->required();
  build_cmd->add_option("--min-samples", build.min_samples, "Drop profiles with fewer samples")
      ->capture_default_str();
  build_cmd->add_flag("--write-rejects", build.write_rejects, "Write <input>.rejects.csv");
  build_cmd->add_option("--column", build.columns, "Rename a column: field=header (repeatable)");

  std::string list_models;
  auto* list_cmd = app.add_subcommand("list-profiles", "Show the profiles in a model file");
  list_cmd->add_option("--models", list_models, "Model file")->required();

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Emulate one profile (fixed or periodic resampling)");
  run_cmd->add_option("--models", run_opts.models, "Model file");
  run_cmd->add_option("--profile", run_opts.profile, "Profile key, e.g. specific/norway/telia/4G/good");
  run_cmd->add_option("--preset", run_opts.preset, "Static preset tool:name instead of a model");
  run_cmd->add_flag("--simple", run_opts.simple, "Mean bandwidths with Gaussian latency");
  run_cmd->add_option("--duration", run_opts.duration, "Seconds")->required()->check(CLI::PositiveNumber);
  run_cmd->add_option("--period", run_opts.period, "Resample every N seconds")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run_opts.seed, "Random seed");
  run_cmd->add_option("--report", run_opts.report, "Write the run report here instead of stdout");
  add_backend_options(run_cmd, run_opts.backend);

  TraceOptions trace;
  auto* trace_cmd = app.add_subcommand("trace-run", "Follow a scenario file of timed profile steps");
  trace_cmd->add_option("--models", trace.models, "Model file")->required();
  trace_cmd->add_option("--scenario", trace.scenario, "Scenario file")->required();
  trace_cmd->add_option("--seed", trace.seed, "Random seed");
  trace_cmd->add_option("--report", trace.report, "Write the run report here instead of stdout");
  add_backend_options(trace_cmd, trace.backend);

  ValidateOptions val;
  auto* val_cmd = app.add_subcommand("validate", "Repeated simulated downloads under a profile");
  val_cmd->add_option("--models", val.models, "Model file");
  val_cmd->add_option("--profile", val.profile, "Profile key");
  val_cmd->add_option("--preset", val.preset, "Static preset tool:name instead of a model");
  val_cmd->add_flag("--simple", val.simple, "Mean bandwidths with Gaussian latency");
  val_cmd->add_option("--downloads", val.downloads, "Number of downloads")->capture_default_str();
  val_cmd->add_option("--object-size", val.object_size, "Object size, e.g. 10MB")->capture_default_str();
  val_cmd->add_option("--setup-rtts", val.setup_rtts, "Round trips before data flows")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  val_cmd->add_option("--seed", val.seed, "Random seed");
  val_cmd->add_option("--output", val.output, "CSV path (default stdout)");

  SubsampleOptions sub;
  auto* sub_cmd = app.add_subcommand("subsample", "KS distance of subsets against a reference set");
  sub_cmd->add_option("--models", sub.models, "Model file (uses stored points)");
  sub_cmd->add_option("--input", sub.input, "Speed-test CSV");
  sub_cmd->add_option("--profile", sub.profile, "Profile key")->required();
  sub_cmd->add_option("--sizes", sub.sizes, "Subset sizes")->delimiter(',')->capture_default_str();
  sub_cmd->add_option("--reps", sub.reps, "Repetitions per size")->capture_default_str();
  sub_cmd->add_option("--cap", sub.cap, "Reference set size")->capture_default_str();
  sub_cmd->add_option("--seed", sub.seed, "Random seed");
  sub_cmd->add_option("--output", sub.output, "CSV path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (build_cmd->parsed()) return cmd_build_models(build, out, err);
    if (list_cmd->parsed()) return cmd_list_profiles(list_models, out);
    if (run_cmd->parsed()) return cmd_run(run_opts, out, err);
    if (trace_cmd->parsed()) return cmd_trace_run(trace, out, err);
    if (val_cmd->parsed()) return cmd_validate(val, out, err);
    if (sub_cmd->parsed()) return cmd_subsample(sub, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const BackendError& e) {
    err << "backend failure: " << e.what() << "\n";
    return kBackendFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace ranemu::cli
