#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vicon/config.hpp"
#include "vicon/data.hpp"
#include "vicon/experiment.hpp"
#include "vicon/image.hpp"
#include "vicon/verify.hpp"

namespace {

constexpr int exit_usage = 1;
constexpr int exit_numerical = 3;

int cmd_train(const std::string& cfg_path, const std::string& out, bool quiet) {
  const vicon::ExperimentConfig cfg = vicon::load_config(cfg_path);
  const auto run = vicon::run_train(cfg, out, quiet ? nullptr : &std::cout);
  std::cout << "wrote " << (out.empty() ? cfg.output_dir : out) << " (reconstruction mse "
            << run.summary.reconstruction_mse << ", baseline " << run.summary.baseline_mse << ")\n";
  return 0;
}

int cmd_analyze(const std::string& ckpt, const std::string& cfg_path, const std::string& out) {
  const vicon::ExperimentConfig cfg = vicon::load_config(cfg_path);
  vicon::run_analyze(ckpt, cfg, out);
  std::cout << "wrote " << (out.empty() ? cfg.output_dir : out) << '\n';
  return 0;
}

int cmd_verify(double perturbation, std::uint64_t seed) {
  vicon::VerifyOptions opt;
  opt.gradient_perturbation = perturbation;
  opt.seed = seed;
  const auto results = vicon::run_verify(opt);
  vicon::print_report(results, std::cout);
  return vicon::all_passed(results) ? 0 : exit_numerical;
}

int cmd_gen_texture(std::uint64_t seed, const std::string& out, std::size_t size, double blur) {
  vicon::write_pgm(vicon::procedural_texture(seed, size, blur), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-organising encoder network: training, analysis and verification"};
  app.require_subcommand(1);

  std::string cfg_path, ckpt_path, out_dir, texture_out;
  bool quiet = false;
  double perturbation = 0.0;
  std::uint64_t verify_seed = vicon::VerifyOptions{}.seed, texture_seed = 0;
  std::size_t texture_size = 256;
  double texture_blur = 3.0;

  auto* train = app.add_subcommand("train", "Train a network and write all artifacts");
  train->add_option("config", cfg_path, "Experiment configuration")->required();
  train->add_option("--out", out_dir, "Output directory (default: output.dir)");
  train->add_flag("--quiet", quiet, "Do not print the objective trace");

  auto* analyze = app.add_subcommand("analyze", "Re-emit analysis artifacts from a checkpoint");
  analyze->add_option("checkpoint", ckpt_path, "Checkpoint written by train")->required();
  analyze->add_option("config", cfg_path, "Experiment configuration")->required();
  analyze->add_option("--out", out_dir, "Output directory (default: output.dir)");

  auto* verify = app.add_subcommand("verify", "Check optimized paths against brute-force references");
  verify->add_option("--perturb-gradient", perturbation, "Add this to one analytic gradient component");
  verify->add_option("--seed", verify_seed, "Seed for the random instances");

  auto* gen = app.add_subcommand("gen-texture", "Write a procedural texture graymap");
  gen->add_option("seed", texture_seed, "Texture seed")->required();
  gen->add_option("output", texture_out, "Output .pgm path")->required();
  gen->add_option("--size", texture_size, "Side length in pixels");
  gen->add_option("--blur", texture_blur, "Smoothing width in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    if (*train) return cmd_train(cfg_path, out_dir, quiet);
    if (*analyze) return cmd_analyze(ckpt_path, cfg_path, out_dir);
    if (*verify) return cmd_verify(perturbation, verify_seed);
    if (*gen) return cmd_gen_texture(texture_seed, texture_out, texture_size, texture_blur);
  } catch (const vicon::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return exit_usage;
}
