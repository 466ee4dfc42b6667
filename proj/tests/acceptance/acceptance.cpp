// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "psaug/adaptive_policy.hpp"
#include "psaug/engine.hpp"
#include "psaug/ibf.hpp"
#include "psaug/progressive_schedule.hpp"
#include "psaug/rng.hpp"
#include "psaug/simulator.hpp"
#include "psaug/spectral_augment.hpp"

#ifdef PSAUG_CLI_PATH
#include "run_cli.hpp"
#endif

using namespace psaug;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first few failures; further ones are only counted.
class Failures {
 public:
  void add(const std::string& what) {
    if (count_++ < 3) notes_ << (count_ > 1 ? "; " : "") << what;
  }
  bool any() const { return count_ > 0; }
  Outcome outcome(const std::string& ok_detail) const {
    if (count_ == 0) return {true, ok_detail};
    return {false, std::to_string(count_) + " failure(s): " + notes_.str()};
  }

 private:
  std::size_t count_ = 0;
  std::ostringstream notes_;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool same_bits(const FeatureMatrix& m, const std::vector<std::vector<float>>& ref) {
  for (std::size_t t = 0; t < m.frames(); ++t) {
    if (std::memcmp(m.row(t).data(), ref[t].data(), m.bins() * sizeof(float)) != 0) return false;
  }
  return true;
}

bool same_bits(float a, float b) { return std::memcmp(&a, &b, sizeof(float)) == 0; }

Outcome ibf_suite() {
  const auto start = Clock::now();
  Failures fails;
  std::mt19937_64 gen(20240101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> shape(0.1, 20.0);

  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = unit(gen), al = shape(gen), be = shape(gen);
    const double err = std::fabs(regularized_ibf(x, al, be) - oracle::ibf_oracle(x, al, be));
    worst = std::max(worst, err);
    if (!(err <= 1e-8)) fails.add("oracle x=" + std::to_string(x) + " err=" + fmt("%.3g", err));
  }
  for (int i = 0; i <= 1000; ++i) {
    const double x = i * 1e-3;
    if (!(std::fabs(regularized_ibf(x, IbfParams{2.0, 0.5}) - x) <= 1e-10)) {
      fails.add("identity at x=" + std::to_string(x));
    }
  }
  for (int i = 0; i < 1000; ++i) {
    const double x = unit(gen), al = shape(gen), be = shape(gen);
    const double sum = regularized_ibf(x, al, be) + regularized_ibf(1.0 - x, be, al);
    if (!(std::fabs(sum - 1.0) <= 1e-10)) fails.add("symmetry x=" + std::to_string(x));
  }
  std::uniform_real_distribution<double> conc(0.1, 40.0);
  std::uniform_real_distribution<double> skew(0.01, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const IbfParams p{conc(gen), skew(gen)};
    std::vector<double> xs(50);
    for (auto& x : xs) x = unit(gen);
    xs.push_back(0.0);
    xs.push_back(1.0);
    std::ranges::sort(xs);
    double prev = -1.0;
    for (double x : xs) {
      const double v = regularized_ibf(x, p);
      if (!(v >= prev)) fails.add("monotonicity s=" + std::to_string(p.s) + " a=" + std::to_string(p.a));
      prev = v;
    }
  }
  const double elapsed = seconds_since(start);
  if (!(elapsed < 5.0)) fails.add("runtime " + fmt("%.2f s", elapsed));
  return fails.outcome("max oracle error " + fmt("%.2e", worst) + ", " + fmt("%.2f s", elapsed));
}

Outcome hybrid_oracle() {
  Failures fails;
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> loss(0.0, 100.0);
  std::uniform_int_distribution<std::size_t> size(2, 64);
  double worst = 0.0;
  auto compare = [&](const std::vector<double>& got, const std::vector<double>& want, double tol,
                     const char* what) {
    for (std::size_t i = 0; i < got.size(); ++i) {
      const double err = std::fabs(got[i] - want[i]);
      worst = std::max(worst, err);
      if (!(err <= tol)) fails.add(std::string(what) + " element " + std::to_string(i));
    }
  };
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> losses(size(gen));
    for (auto& l : losses) l = loss(gen);
    const auto tr = hybrid_normalize(losses, IbfParams{});
    const auto ref = oracle::reference_hybrid(losses, [](double x) { return x; });
    compare(tr.l_clipped, ref.clipped, 1e-12, "clipped");
    compare(tr.l_meannorm, ref.meannorm, 1e-12, "meannorm");
    compare(tr.l_minmax, ref.minmax, 1e-12, "minmax");
    compare(tr.lambda, ref.lambda, 1e-12, "lambda");
  }
  const double worst_random = worst;

  // Precomputed by hand, compared to 4 decimals.
  const auto ex1 = hybrid_normalize(std::vector<double>{1, 2, 3, 4}, IbfParams{});
  compare(ex1.l_meannorm, {2.0 / 7, 4.0 / 9, 6.0 / 11, 8.0 / 13}, 5e-5, "example 1 meannorm");
  compare(ex1.l_minmax, {0.0, 13.0 / 27, 26.0 / 33, 1.0}, 5e-5, "example 1 minmax");
  compare(ex1.lambda, {1.0, 14.0 / 27, 7.0 / 33, 0.0}, 5e-5, "example 1 lambda");
  // Mean 1.125, variance 0.046875, clip band [1.03125, 1.21875].
  const auto ex2 = hybrid_normalize(std::vector<double>{1, 1, 1, 1.5}, IbfParams{});
  compare(ex2.l_clipped, {1.03125, 1.03125, 1.03125, 1.21875}, 5e-5, "example 2 clipped");
  compare(ex2.l_minmax, {0.0, 0.0, 0.0, 1.0}, 5e-5, "example 2 minmax");
  compare(ex2.lambda, {1.0, 1.0, 1.0, 0.0}, 5e-5, "example 2 lambda");
  return fails.outcome("100 batches, max deviation " + fmt("%.2e", worst_random) +
                       "; worked examples match");
}

Outcome count_mapping() {
  Failures fails;
  AugCounts prev{0, 0, 0};
  for (int i = 0; i <= 1000; ++i) {
    const double lambda = i * 1e-3;
    const AugCounts c = counts_from_lambda(lambda, CountPath::kAdaptive);
    const auto t = static_cast<std::size_t>(std::ceil(4.0 * lambda));
    const auto s = static_cast<std::size_t>(std::ceil(2.0 * lambda));
    if (!(c == AugCounts{t, t, s})) fails.add("adaptive at lambda=" + std::to_string(lambda));
    if (!(counts_from_lambda(lambda, CountPath::kFixed) == AugCounts{2, 2, 1})) {
      fails.add("fixed at lambda=" + std::to_string(lambda));
    }
    if (c.n_time_mask < prev.n_time_mask || c.n_freq_mask < prev.n_freq_mask ||
        c.n_time_sub < prev.n_time_sub) {
      fails.add("monotonicity at lambda=" + std::to_string(lambda));
    }
    prev = c;
  }
  return fails.outcome("1001 grid points");
}

Outcome operator_properties() {
  Failures fails;
  std::mt19937_64 gen(4242);
  std::uniform_real_distribution<float> mag(0.25f, 4.0f);
  std::size_t cases = 0;

  auto random_matrix = [&](std::size_t frames, std::size_t bins) {
    std::vector<float> v(frames * bins);
    for (auto& x : v) x = (gen() & 1 ? 1.0f : -1.0f) * mag(gen);
    return FeatureMatrix(frames, bins, std::move(v));
  };

  for (int trial = 0; trial < 1500; ++trial) {
    const MatrixDims dims{1 + gen() % 160, 1 + gen() % 64};
    const AugLimits limits{1 + gen() % 60, 1 + gen() % 20, 1 + gen() % 40, (gen() & 3) == 0};
    const FeatureMatrix x = random_matrix(dims.frames, dims.bins);
    SampleStream rng(gen());
    const auto tm = plan_time_masks(gen() % 5, dims, limits, rng);
    const auto fm = plan_freq_masks(gen() % 5, dims, limits, rng);
    const auto ts = plan_time_subs(gen() % 4, dims, limits, rng);

    // Mask-only plan: masked cells are zero, every other cell keeps its bits.
    AugmentationPlan masks(tm.begin(), tm.end());
    masks.insert(masks.end(), fm.begin(), fm.end());
    const FeatureMatrix masked = apply_plan(x, masks);
    for (std::size_t t = 0; t < dims.frames; ++t) {
      for (std::size_t f = 0; f < dims.bins; ++f) {
        bool covered = false;
        for (const auto& m : tm) covered = covered || (t >= m.t1 && t <= m.t2);
        for (const auto& m : fm) covered = covered || (f >= m.f1 && f <= m.f2);
        if (covered ? masked(t, f) != 0.0f : !same_bits(masked(t, f), x(t, f))) {
          fails.add("mask trial " + std::to_string(trial));
        }
      }
    }
    ++cases;

    // Substitution-only plan: rows outside every destination keep their bits.
    AugmentationPlan subs(ts.begin(), ts.end());
    const FeatureMatrix substituted = apply_plan(x, subs);
    if (!same_bits(substituted, oracle::reference_apply(x, subs))) {
      fails.add("substitution trial " + std::to_string(trial));
    }
    for (std::size_t t = 0; t < dims.frames; ++t) {
      bool dest = false;
      for (const auto& s : ts) dest = dest || (t >= s.dest_t && t < s.dest_t + s.width);
      if (!dest && std::memcmp(substituted.row(t).data(), x.row(t).data(),
                               dims.bins * sizeof(float)) != 0) {
        fails.add("untouched row in substitution trial " + std::to_string(trial));
      }
    }
    ++cases;

    // Full plan in a shuffled event order against the naive reference.
    AugmentationPlan full = masks;
    full.insert(full.end(), subs.begin(), subs.end());
    std::shuffle(full.begin(), full.end(), gen);
    if (!same_bits(apply_plan(x, full), oracle::reference_apply(x, full))) {
      fails.add("mixed trial " + std::to_string(trial));
    }
    ++cases;
  }
  return fails.outcome(std::to_string(cases) + " random cases, bit-exact");
}

Outcome schedule_properties() {
  Failures fails;
  std::mt19937_64 gen(555);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> conc(0.2, 30.0);
  std::uniform_real_distribution<double> skew(0.02, 0.98);
  for (int trial = 0; trial < 100; ++trial) {
    ScheduleConfig c;
    c.total_epochs = 1 + gen() % 400;
    c.ibf = {conc(gen), skew(gen)};
    double a = unit(gen), b = unit(gen);
    c.mask = {std::min(a, b), std::max(a, b)};
    a = unit(gen), b = unit(gen);
    c.sub = {std::min(a, b), std::max(a, b)};
    const auto first = schedule_at(0, c);
    const auto last = schedule_at(c.total_epochs, c);
    if (!(std::fabs(first.p_mask - c.mask.p_start) <= 1e-12 &&
          std::fabs(first.p_sub - c.sub.p_start) <= 1e-12)) {
      fails.add("start of config " + std::to_string(trial));
    }
    if (!(std::fabs(last.p_mask - c.mask.p_end) <= 1e-12 &&
          std::fabs(last.p_sub - c.sub.p_end) <= 1e-12)) {
      fails.add("end of config " + std::to_string(trial));
    }
    ScheduleState prev = first;
    for (std::uint64_t e = 1; e <= c.total_epochs; ++e) {
      const auto s = schedule_at(e, c);
      if (s.p_mask < prev.p_mask || s.p_sub < prev.p_sub) {
        fails.add("decrease at epoch " + std::to_string(e) + " of config " + std::to_string(trial));
      }
      prev = s;
    }
  }
  return fails.outcome("100 random configs");
}

Outcome gate_statistics() {
  Failures fails;
  std::vector<FeatureMatrix> features(100, FeatureMatrix(4, 2, std::vector<float>(8, 1.0f)));
  std::vector<double> losses(100);
  for (std::size_t i = 0; i < losses.size(); ++i) losses[i] = static_cast<double>((i * 37) % 23);
  std::ostringstream detail;
  for (double p : {0.1, 0.5, 0.9}) {
    EngineConfig config;
    config.master_seed = 8675309;
    config.schedule.mask = {p, p};
    config.schedule.sub = {p, p};
    std::size_t mask = 0, sub = 0, total = 0;
    for (std::uint64_t batch = 0; batch < 100; ++batch) {
      const auto r = augment_batch(features, losses, 25, config, batch);
      for (const auto& s : r.report.samples) {
        mask += s.gate_mask == Gate::kAdaptive;
        sub += s.gate_sub == Gate::kAdaptive;
        ++total;
      }
    }
    const double rm = static_cast<double>(mask) / total;
    const double rs = static_cast<double>(sub) / total;
    if (!(std::fabs(rm - p) <= 0.02)) fails.add("mask rate " + fmt("%.4f", rm) + " at p=" + fmt("%.1f", p));
    if (!(std::fabs(rs - p) <= 0.02)) fails.add("sub rate " + fmt("%.4f", rs) + " at p=" + fmt("%.1f", p));
    detail << (p == 0.1 ? "" : ", ") << "p=" << p << ": " << fmt("%.4f", rm) << "/" << fmt("%.4f", rs);
  }
  return fails.outcome("10000 samples per p, mask/sub rates " + detail.str());
}

Outcome cli_determinism() {
#ifdef PSAUG_CLI_PATH
  using namespace cli_support;
  Failures fails;
  const fs::path root = fs::path(PSAUG_TEST_TMP) / "determinism";
  fs::remove_all(root);
  const auto manifest = write_fixture(root / "data", 8, 99);
  auto run = [&](const std::string& name, std::uint64_t seed) {
    const fs::path out = root / name;
    const auto r = run_cli("--seed " + std::to_string(seed) + " augment --manifest " +
                               quote(manifest.string()) + " --out " + quote(out.string()) +
                               " --epoch 60 --batch-index 2",
                           root / (name + ".log"));
    if (r.exit_code != 0) fails.add(name + " exited with " + std::to_string(r.exit_code) + ": " + r.err);
    return out;
  };
  const auto a = run("first", 42);
  const auto b = run("second", 42);
  const auto c = run("reseeded", 43);
  if (fails.any()) return fails.outcome("");

  std::vector<std::string> names{"report.jsonl"};
  for (int i = 0; i < 8; ++i) names.push_back("utt" + std::to_string(i) + ".spgm");
  bool changed = false;
  for (const auto& name : names) {
    const std::string bytes = slurp(a / name);
    if (bytes.empty()) fails.add(name + " missing");
    if (bytes != slurp(b / name)) fails.add(name + " differs between identical runs");
    changed = changed || bytes != slurp(c / name);
  }
  if (!changed) fails.add("changing the seed changed no output byte");
  return fails.outcome("9 output files identical across repeats; seed change alters output");
#else
  return {false, "CLI not built (PSAUG_BUILD_CLI=OFF)"};
#endif
}

Outcome simulator_end_to_end() {
  Failures fails;
  const sim::SimConfig config;
  if (config.engine.threads != 1) fails.add("default config is not single-threaded");
  const auto start = Clock::now();
  const auto metrics = sim::run_simulation(sim::SyntheticTask{}, config);
  const double elapsed = seconds_since(start);
  if (!(elapsed < 60.0)) fails.add("runtime " + fmt("%.1f s", elapsed));
  const double first = metrics.epochs.front().mean_loss;
  const double last = metrics.epochs.back().mean_loss;
  if (!(last < first)) fails.add("final loss " + fmt("%.4f", last) + " >= initial " + fmt("%.4f", first));
  std::vector<double> epochs, n_time;
  for (const auto& e : metrics.epochs) {
    if (e.stage != Stage::kAdaptive) continue;
    epochs.push_back(static_cast<double>(e.epoch));
    n_time.push_back(e.mean_n_time_mask);
  }
  const double rho = sim::spearman_rho(epochs, n_time);
  if (!(rho > 0.0)) fails.add("rho " + fmt("%.3f", rho));
  return fails.outcome(fmt("%.2f s", elapsed) + ", loss " + fmt("%.4f", first) + " -> " +
                       fmt("%.4f", last) + ", rho " + fmt("%.3f", rho));
}

Outcome fixed_path_equivalence() {
  Failures fails;
  std::mt19937_64 gen(31);
  std::normal_distribution<float> value(0.0f, 1.0f);
  std::exponential_distribution<double> loss(0.5);
  EngineConfig adaptive;
  adaptive.master_seed = 123456789;
  adaptive.schedule.mask = {0.0, 0.0};
  adaptive.schedule.sub = {0.0, 0.0};
  EngineConfig pretrain = adaptive;
  pretrain.stage = Stage::kPretrain;
  std::size_t samples = 0;
  for (std::uint64_t epoch = 0; epoch <= 100; epoch += 5) {
    for (std::uint64_t batch = 0; batch < 4; ++batch) {
      std::vector<FeatureMatrix> features;
      std::vector<double> losses;
      const std::size_t n = 1 + gen() % 24;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t frames = 1 + gen() % 300, bins = 1 + gen() % 80;
        std::vector<float> v(frames * bins);
        for (auto& x : v) x = value(gen);
        features.emplace_back(frames, bins, std::move(v));
        losses.push_back(loss(gen));
      }
      const auto a = augment_batch(features, losses, epoch, adaptive, batch);
      const auto p = augment_batch(features, losses, epoch, pretrain, batch);
      for (std::size_t i = 0; i < n; ++i) {
        if (!a.features[i].bit_identical(p.features[i]) ||
            a.report.samples[i].plan != p.report.samples[i].plan) {
          fails.add("epoch " + std::to_string(epoch) + " batch " + std::to_string(batch) +
                    " sample " + std::to_string(i));
        }
      }
      samples += n;
    }
  }
  return fails.outcome(std::to_string(samples) + " samples bit-identical");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"ibf oracle suite", ibf_suite},
      {"hybrid normalization oracle", hybrid_oracle},
      {"count mapping", count_mapping},
      {"operator correctness", operator_properties},
      {"schedule", schedule_properties},
      {"gate statistics", gate_statistics},
      {"cli determinism", cli_determinism},
      {"simulator end-to-end", simulator_end_to_end},
      {"fixed-path equivalence", fixed_path_equivalence},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
