// psaug: command-line front end for the augmentation engine.
//
// Exit codes: 0 success, 1 validation error (bad flags, config, manifest or
// engine input), 2 I/O error (missing or unreadable files, bad SPGM data).
// Machine-readable results go to stdout, diagnostics to stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psaug/engine.hpp"
#include "psaug/errors.hpp"
#include "psaug/feature_io.hpp"
#include "psaug/ibf.hpp"
#include "psaug/serialization.hpp"
#include "psaug/simulator.hpp"
#include "psaug/version.hpp"

namespace fs = std::filesystem;
using namespace psaug;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  bool print_config = false;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  if (!out.flush()) throw IoError(path.string() + ": write failed");
}

EngineConfig load_config(const GlobalOptions& g, const EngineConfig& base = {}) {
  EngineConfig config = base;
  if (!g.config_path.empty()) config = parse_config(read_text(g.config_path), base);
  if (g.seed) config.master_seed = *g.seed;
  config.validate();
  return config;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_sample_id(const std::string& id) {
  if (id == "." || id == ".." || id.find_first_of("/\\") != std::string::npos) {
    throw StructuralError("sample_id '" + id + "' cannot be used as an output file name");
  }
}

// --- augment ---------------------------------------------------------------

struct AugmentOptions {
  std::string manifest;
  std::string out_dir;
  std::uint64_t epoch = 0;
  std::uint64_t batch_index = 0;
};

int run_augment(const GlobalOptions& g, const AugmentOptions& o) {
  const EngineConfig config = load_config(g);
  const fs::path manifest_path(o.manifest);
  const BatchManifest manifest = read_manifest(manifest_path);
  if (manifest.empty()) throw StructuralError(o.manifest + ": manifest has no records");

  std::vector<FeatureMatrix> features;
  std::vector<double> losses;
  for (const auto& rec : manifest) {
    check_sample_id(rec.sample_id);
    const fs::path path = resolve_feature_path(manifest_path, rec.feature_path);
    try {
      features.push_back(read_features(path));
    } catch (const IoError& e) {
      throw IoError("sample '" + rec.sample_id + "': " + e.what());
    } catch (const FormatError& e) {
      throw IoError("sample '" + rec.sample_id + "': " + e.what());
    }
    losses.push_back(rec.loss);
  }

  BatchResult result = augment_batch(features, losses, o.epoch, config, o.batch_index);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    result.report.samples[i].sample_id = manifest[i].sample_id;
  }

  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw IoError(o.out_dir + ": cannot create output directory: " + ec.message());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    write_features(result.features[i], fs::path(o.out_dir) / (manifest[i].sample_id + ".spgm"));
  }
  write_text(fs::path(o.out_dir) / "report.jsonl", report_to_jsonl(result.report));
  return kExitOk;
}

// --- policy ----------------------------------------------------------------

struct PolicyOptions {
  std::vector<double> losses;
  std::string manifest;
  std::string policy;
  bool json = false;
};

int run_policy(const GlobalOptions& g, const PolicyOptions& o) {
  const EngineConfig config = load_config(g);
  std::vector<double> losses = o.losses;
  std::vector<std::string> ids;
  if (!o.manifest.empty()) {
    for (const auto& rec : read_manifest(o.manifest)) {
      ids.push_back(rec.sample_id);
      losses.push_back(rec.loss);
    }
  } else {
    for (std::size_t i = 0; i < losses.size(); ++i) ids.push_back(std::to_string(i));
  }
  const PolicyKind kind = o.policy.empty() ? config.policy_kind : policy_kind_from_string(o.policy);

  const LossPipelineTrace trace = hybrid_normalize(losses, config.ibf, config.clip_spread);
  if (kind == PolicyKind::kRank) {
    const auto lambda = rank_policy(losses, config.ibf);
    const auto ranks = loss_ranks(losses);
    if (o.json) {
      nlohmann::json j = {{"policy_kind", "rank"}, {"sample_id", ids}, {"l_raw", losses},
                          {"rank", ranks}, {"lambda", lambda}};
      std::cout << j.dump() << '\n';
      return kExitOk;
    }
    std::cout << "sample,loss,rank,lambda\n";
    for (std::size_t i = 0; i < losses.size(); ++i) {
      std::cout << ids[i] << ',' << fmt_double(losses[i]) << ',' << ranks[i] << ','
                << fmt_double(lambda[i]) << '\n';
    }
    return kExitOk;
  }

  if (o.json) {
    nlohmann::json j = trace_to_json(trace);
    j["policy_kind"] = to_string(kind);
    j["sample_id"] = ids;
    std::cout << j.dump() << '\n';
    return kExitOk;
  }
  std::cout << "sample,loss,clipped,meannorm,minmax,lambda\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::cout << ids[i] << ',' << fmt_double(trace.l_raw[i]) << ',' << fmt_double(trace.l_clipped[i])
              << ',' << fmt_double(trace.l_meannorm[i]) << ',' << fmt_double(trace.l_minmax[i])
              << ',' << fmt_double(trace.lambda[i]) << '\n';
  }
  return kExitOk;
}

// --- schedule --------------------------------------------------------------

int run_schedule(const GlobalOptions& g, std::optional<std::uint64_t> total_epochs) {
  EngineConfig config = load_config(g);
  if (total_epochs) config.schedule.total_epochs = *total_epochs;
  config.schedule.validate();
  std::cout << "epoch,epoch_policy,p_mask,p_sub\n";
  for (std::uint64_t e = 0; e <= config.schedule.total_epochs; ++e) {
    const ScheduleState s = schedule_at(e, config.schedule);
    std::cout << e << ',' << fmt_double(s.epoch_policy) << ',' << fmt_double(s.p_mask) << ','
              << fmt_double(s.p_sub) << '\n';
  }
  return kExitOk;
}

// --- ibf -------------------------------------------------------------------

int run_ibf(double x, const IbfParams& params) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", regularized_ibf(x, params));
  std::cout << buf << '\n';
  return kExitOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
  sim::SyntheticTask task;
  std::string regime = "two_stage";
  std::size_t pretrain_epochs = 10;
  std::size_t adaptive_epochs = 20;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::string out;
  std::string trace_dir;
};

int run_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  sim::SimConfig config;
  config.engine = load_config(g, sim::SimConfig::default_engine());
  config.regime = sim::regime_from_string(o.regime);
  config.pretrain_epochs = o.pretrain_epochs;
  config.adaptive_epochs = o.adaptive_epochs;
  config.learning_rate = o.learning_rate;
  config.batch_size = o.batch_size;

  sim::BatchObserver observer;
  if (!o.trace_dir.empty()) {
    std::error_code ec;
    fs::create_directories(o.trace_dir, ec);
    if (ec) throw IoError(o.trace_dir + ": cannot create trace directory: " + ec.message());
    observer = [dir = fs::path(o.trace_dir)](const sim::EpochMetrics& row,
                                             const BatchAugReport& report) {
      char name[64];
      std::snprintf(name, sizeof name, "epoch_%04zu.jsonl", row.epoch);
      nlohmann::json line = trace_to_json(report.trace);
      line["epoch"] = row.epoch;
      line["stage"] = to_string(row.stage);
      line["batch_index"] = report.batch_index;
      std::ofstream out(dir / name, std::ios::app);
      if (!out) throw IoError((dir / name).string() + ": cannot open for writing");
      out << line.dump() << '\n';
    };
  }

  const sim::SimMetrics metrics = sim::run_simulation(o.task, config, observer);
  if (o.out.empty()) {
    std::cout << metrics.to_csv();
  } else {
    write_text(o.out, metrics.to_csv());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-adaptive spectrogram augmentation with progressive scheduling", "psaug"};
  app.set_version_flag("--version", psaug::version());
  app.require_subcommand(0, 1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed (unsigned 64-bit); overrides the config file");
  app.add_option("--config", g.config_path, "Engine config file (JSON)");
  app.add_flag("--print-config", g.print_config, "Print the effective engine config and exit");

  AugmentOptions aug;
  auto* augment = app.add_subcommand("augment", "Augment every sample of a manifest");
  augment->add_option("--manifest", aug.manifest, "Batch manifest")->required();
  augment->add_option("--out", aug.out_dir, "Output directory")->required();
  augment->add_option("--epoch", aug.epoch, "0-based epoch within the stage")->required();
  augment->add_option("--batch-index", aug.batch_index, "Batch index within the epoch");

  PolicyOptions pol;
  auto* policy = app.add_subcommand("policy", "Print the per-sample loss pipeline");
  auto* losses_opt =
      policy->add_option("--losses", pol.losses, "Comma-separated losses")->delimiter(',');
  auto* manifest_opt = policy->add_option("--manifest", pol.manifest, "Take losses from a manifest");
  losses_opt->excludes(manifest_opt);
  policy->add_option("--policy", pol.policy, "hybrid or rank (default: config)")
      ->check(CLI::IsMember({"hybrid", "rank"}));
  policy->add_flag("--json", pol.json, "Emit the trace as one JSON object");

  std::optional<std::uint64_t> total_epochs;
  auto* schedule = app.add_subcommand("schedule", "Print the progressive schedule as CSV");
  schedule->add_option("--total-epochs", total_epochs, "Schedule length (default: config)");

  double ibf_x = 0.0;
  IbfParams ibf_params;
  auto* ibf = app.add_subcommand("ibf", "Evaluate the regularized incomplete beta function");
  ibf->add_option("--x", ibf_x, "Point in [0, 1]")->required();
  ibf->add_option("--s", ibf_params.s, "Concentration s > 0")->capture_default_str();
  ibf->add_option("--a", ibf_params.a, "Skew 0 < a < 1")->capture_default_str();

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "Run the closed-loop training simulator");
  simulate->add_option("--regime", so.regime, "fixed, adaptive or two_stage")
      ->check(CLI::IsMember({"fixed", "adaptive", "two_stage"}))
      ->capture_default_str();
  simulate->add_option("--pretrain-epochs", so.pretrain_epochs)->capture_default_str();
  simulate->add_option("--adaptive-epochs", so.adaptive_epochs)->capture_default_str();
  simulate->add_option("--lr", so.learning_rate)->capture_default_str();
  simulate->add_option("--batch-size", so.batch_size)->capture_default_str();
  simulate->add_option("--classes", so.task.num_classes)->capture_default_str();
  simulate->add_option("--samples-per-class", so.task.samples_per_class)->capture_default_str();
  simulate->add_option("--eval-per-class", so.task.eval_per_class)->capture_default_str();
  simulate->add_option("--frames", so.task.frames)->capture_default_str();
  simulate->add_option("--bins", so.task.bins)->capture_default_str();
  simulate->add_option("--noise", so.task.noise)->capture_default_str();
  simulate->add_option("--task-seed", so.task.seed)->capture_default_str();
  simulate->add_option("--out", so.out, "Metrics CSV path (default: stdout)");
  simulate->add_option("--trace-dir", so.trace_dir, "Write per-epoch loss traces here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (g.print_config) {
      const EngineConfig base =
          simulate->parsed() ? sim::SimConfig::default_engine() : EngineConfig{};
      std::cout << config_to_json(load_config(g, base)).dump(2) << '\n';
      return kExitOk;
    }
    if (augment->parsed()) return run_augment(g, aug);
    if (policy->parsed()) {
      if (pol.losses.empty() && pol.manifest.empty()) {
        std::cerr << "policy: one of --losses or --manifest is required\n";
        return kExitValidation;
      }
      return run_policy(g, pol);
    }
    if (schedule->parsed()) return run_schedule(g, total_epochs);
    if (ibf->parsed()) return run_ibf(ibf_x, ibf_params);
    if (simulate->parsed()) return run_simulate(g, so);
    std::cerr << app.help();
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
