// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vicon/experiment.hpp"
#include "vicon/verify.hpp"

namespace fs = std::filesystem;
using namespace vicon;

namespace {

const std::string config_dir = std::string(VICON_SOURCE_DIR) + "/configs";
const std::vector<std::uint64_t> seeds = {1, 2, 3};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool report(int criterion, bool passed, const std::string& detail) {
  std::cout << "criterion " << criterion << ": " << (passed ? "PASS" : "FAIL") << "  " << detail << std::endl;
  return passed;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::string check_line(const CheckResult& r) {
  return r.name + " worst " + fmt(r.worst, 3) + " (bound " + fmt(r.tolerance, 3) + ")" +
         (r.passed ? "" : " at " + r.detail);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vicon_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

bool criterion_gradients() {
  Stopwatch t;
  const CheckResult r = check_gradients({});
  const double secs = t.seconds();
  return report(1, r.passed && secs < 10.0, check_line(r) + ", " + fmt(secs, 3) + " s (bound 10 s)");
}

bool criterion_normalization() {
  const CheckResult r = check_normalization({});
  return report(2, r.passed, check_line(r));
}

bool criterion_equivalence() {
  const CheckResult a = check_equivalence({});
  const CheckResult b = check_projection({});
  return report(3, a.passed && b.passed, check_line(a) + "; " + check_line(b));
}

bool criterion_reduction() {
  const CheckResult r = check_subspace_reduction({});
  return report(4, r.passed, check_line(r));
}

/// Criteria 5 and 6: the sigma 1 phase, then 2000 more updates at sigma 0.5
/// with the same network and data stream.
void criteria_stripes(bool& pass5, bool& pass6) {
  const ExperimentConfig base = load_config(config_dir + "/stripes1d.cfg");
  std::ostringstream d5, d6;
  pass5 = pass6 = true;
  for (std::uint64_t seed : seeds) {
    Stopwatch t;
    ExperimentConfig c = base;
    c.seed = seed;
    const Topology topo = build_topology(c.topology);
    AnySource source = make_source(c, false);
    TrainOptions opt;
    opt.reference_step_factor = c.reference_step_factor;
    opt.log_interval = c.log_interval;
    const NetworkParams init = init_params(topo, c.init, derive_seed(c.seed, seed_stream::init));
    const TrainResult first = train(init, topo, c.schedule, source, opt, c.seed);
    const StripeStats s1 = stripe_stats(ocularity_profile(first.params, first.topology, c.analysis.ocularity_origin));
    const double secs = t.seconds();

    const Schedule narrow{{Phase{2000, 0.01, {0.5, 0.5}}}};
    const TrainResult second = train(first.params, first.topology, narrow, source, opt, c.seed);
    const StripeStats s2 = stripe_stats(ocularity_profile(second.params, second.topology, c.analysis.ocularity_origin));

    const bool ok5 = s1.antiphase_corr && *s1.antiphase_corr < -0.5 && s1.dominant_period &&
                     *s1.dominant_period >= 5.0 && *s1.dominant_period <= 10.0 && secs < 120.0;
    pass5 = pass5 && ok5;
    d5 << " seed " << seed << ": corr " << (s1.antiphase_corr ? fmt(*s1.antiphase_corr) : "none") << " period "
       << (s1.dominant_period ? fmt(*s1.dominant_period) : "none") << " " << fmt(secs, 3) << " s;";

    const bool ok6 = s2.amplitude > s1.amplitude;
    pass6 = pass6 && ok6;
    d6 << " seed " << seed << ": amplitude " << fmt(s1.amplitude) << " -> " << fmt(s2.amplitude) << ";";
  }
  report(5, pass5, "corr < -0.5, period in [5, 10], < 120 s per seed." + d5.str());
  report(6, pass6, "mean |left - right| grows after the sigma 0.5 phase." + d6.str());
}

bool criterion_2d_stripes() {
  const ExperimentConfig base = load_config(config_dir + "/stripes2d.cfg");
  std::ostringstream d;
  bool pass = true;
  Stopwatch total;
  for (std::uint64_t seed : seeds) {
    ExperimentConfig c = base;
    c.seed = seed;
    c.analysis.eval_samples = 1;
    const TrainRun run = run_train(c, scratch("c7").string());
    const double frac = run.summary.left_fraction.value_or(-1.0);
    const double len = run.summary.correlation_length.value_or(0.0);
    const bool ok = frac >= 0.3 && frac <= 0.7 && len > 1.0;
    pass = pass && ok;
    d << " seed " << seed << ": left " << fmt(frac, 3) << " length " << fmt(len, 3) << ";";
  }
  fs::remove_all(scratch("c7"));
  const double secs = total.seconds();
  pass = pass && secs < 600.0 * static_cast<double>(seeds.size());
  return report(7, pass,
                "each label 30-70%, correlation length > 1, < 600 s per seed." + d.str() + " total " +
                    fmt(secs, 3) + " s");
}

bool criterion_reconstruction() {
  const ExperimentConfig base = load_config(config_dir + "/orient1.cfg");
  std::ostringstream d;
  bool pass = base.schedule.phases[0].num_updates >= 8000;
  for (std::uint64_t seed : seeds) {
    ExperimentConfig c = base;
    c.seed = seed;
    const TrainRun run = run_train(c, scratch("c8").string());
    const double uniform = 5.0 / static_cast<double>(run.result.topology.size());
    const AnalysisSummary& s = run.summary;
    const bool ok = s.reconstruction_mse < s.baseline_mse && s.mean_max_posterior > uniform;
    pass = pass && ok;
    d << " seed " << seed << ": mse " << fmt(s.reconstruction_mse) << " vs " << fmt(s.baseline_mse)
      << ", max posterior " << fmt(s.mean_max_posterior) << " vs " << fmt(uniform) << ";";
  }
  fs::remove_all(scratch("c8"));
  return report(8, pass, "held-out mse below zero predictor, mean max posterior > 5/M." + d.str());
}

bool criterion_determinism() {
  std::ostringstream d;
  bool pass = true;
  for (const std::string name : {"stripes1d", "stripes2d", "orient1"}) {
    ExperimentConfig c = load_config(config_dir + "/" + name + ".cfg");
    auto& updates = c.schedule.phases[0].num_updates;
    updates = std::min<std::size_t>(updates, 2000);
    const fs::path a = scratch(name + "_a"), b = scratch(name + "_b");
    run_train(c, a.string());
    run_train(c, b.string());
    std::size_t files = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      const fs::path other = b / entry.path().filename();
      if (fs::exists(other) && read_file(entry.path()) == read_file(other)) ++identical;
    }
    const bool same_count =
        files == static_cast<std::size_t>(std::distance(fs::directory_iterator(b), fs::directory_iterator{}));
    pass = pass && same_count && files > 0 && identical == files;
    d << " " << name << ": " << identical << "/" << files << " files identical;";
    fs::remove_all(a);
    fs::remove_all(b);
  }
  return report(9, pass, "two runs with the same seed and configuration." + d.str());
}

}  // namespace

int main() {
  try {
    bool ok = true;
    ok = criterion_gradients() && ok;
    ok = criterion_normalization() && ok;
    ok = criterion_equivalence() && ok;
    ok = criterion_reduction() && ok;
    bool pass5 = false, pass6 = false;
    criteria_stripes(pass5, pass6);
    ok = ok && pass5 && pass6;
    ok = criterion_2d_stripes() && ok;
    ok = criterion_reconstruction() && ok;
    ok = criterion_determinism() && ok;
    std::cout << (ok ? "all criteria passed" : "some criteria failed") << std::endl;
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
}
