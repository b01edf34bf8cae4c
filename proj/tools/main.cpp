#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "deeppolar/config.hpp"
#include "deeppolar/pipeline.hpp"

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string output;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* cfg = cmd->add_option("--config", c.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  auto* pre = cmd->add_option("--preset", c.preset, "named preset (full_256_37, tiny_16_7, smart_tiny)");
  cfg->excludes(pre);
  if (needs_config) cmd->callback([cmd, cfg, pre] {
      if (cfg->count() + pre->count() == 0) throw CLI::RequiredError(cmd->get_name() + ": --config or --preset");
    });
  cmd->add_option("--seed", c.seed, "override every seed in the config");
  cmd->add_option("--output", c.output, "output directory");
  cmd->add_flag("--quiet,-q", c.quiet, "no progress lines on stderr");
}

dpp::RunRequest make_request(const std::string& command, const Common& c, const std::vector<std::string>& args) {
  dpp::RunRequest r;
  r.command = command;
  r.args = args;
  if (!c.config.empty() || !c.preset.empty()) {
    r.has_config = true;
    r.config = c.config.empty() ? dpp::preset_config(c.preset) : dpp::load_config(c.config);
    if (c.seed) {
      r.config.seed = *c.seed;
      r.config.train.seed = *c.seed;
      r.config.eval.seed = *c.seed;
    }
    r.config.validate();
  }
  if (!c.output.empty()) r.output_dir = std::filesystem::absolute(c.output);
  return r;
}

std::vector<std::filesystem::path> absolute_all(const std::vector<std::string>& paths) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : paths) out.push_back(std::filesystem::absolute(p));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeepPolar+ neural polar codes: training, evaluation and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dpp::version_string());

  Common train_c, eval_c, smart_c, analyze_c, plot_c;
  std::string resume;
  std::vector<std::string> eval_ckpts, smart_ckpts, analyze_ckpt;
  std::string plot_input, plot_title, manifest, replay_output, config_preset, config_output;
  int samples = 10000;
  bool replay_quiet = false;

  auto* train = app.add_subcommand("train", "run the two-phase curriculum and write checkpoints");
  add_common(train, train_c, true);
  train->add_option("--resume", resume, "continue phase 2 from a checkpoint with optimizer state")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "BER/BLER sweep of checkpoints against the SC baseline");
  add_common(eval, eval_c, true);
  eval->add_option("--checkpoint,--checkpoints", eval_ckpts, "model checkpoint(s)")->check(CLI::ExistingFile);

  auto* smart = app.add_subcommand("smart-eval", "SMART ensemble sweep against its fallback member");
  add_common(smart, smart_c, true);
  smart->add_option("--checkpoints,--checkpoint", smart_ckpts, "member checkpoints in ensemble order")
      ->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze-distances", "pairwise codeword distance histogram");
  add_common(analyze, analyze_c, false);
  analyze->add_option("--checkpoint", analyze_ckpt, "model checkpoint")->required()->expected(1)->check(CLI::ExistingFile);
  analyze->add_option("--samples", samples, "codewords to sample")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "SVG figure from a results or histogram CSV");
  add_common(plot, plot_c, false);
  plot->add_option("--input", plot_input, "CSV file")->required()->check(CLI::ExistingFile);
  plot->add_option("--title", plot_title, "figure title");

  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  replay->add_option("--manifest", manifest, "manifest_*.json of an earlier run")->required()->check(CLI::ExistingFile);
  replay->add_option("--output", replay_output, "output directory (default: the recorded one)");
  replay->add_flag("--quiet,-q", replay_quiet, "no progress lines on stderr");

  auto* config = app.add_subcommand("config", "write a preset as an editable JSON config");
  config->add_option("--preset", config_preset, "preset name")->required();
  config->add_option("--output", config_output, "JSON file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::vector<std::string> args(argv + 1, argv + argc);
  auto logger = [](bool quiet) -> dpp::Logger {
    if (quiet) return {};
    return [](const std::string& line) { std::cerr << line << '\n'; };
  };

  try {
    if (*replay) {
      const auto report =
          dpp::replay_manifest(manifest, replay_output.empty() ? std::filesystem::path{} : std::filesystem::absolute(replay_output),
                               logger(replay_quiet));
      for (const auto& name : report.mismatched) std::cerr << "output differs: " << name << '\n';
      for (const auto& name : report.missing) std::cerr << "output missing: " << name << '\n';
      std::cout << (report.identical() ? "replay identical" : "replay differs") << ": " << report.result.manifest.string()
                << '\n';
      return report.identical() ? 0 : 2;
    }
    if (*config) {
      dpp::save_config(config_output, dpp::preset_config(config_preset));
      std::cout << std::filesystem::absolute(config_output).string() << '\n';
      return 0;
    }
    dpp::RunRequest req;
    dpp::Logger log;
    if (*train) {
      req = make_request("train", train_c, args);
      if (!resume.empty()) req.resume = std::filesystem::absolute(resume);
      log = logger(train_c.quiet);
    } else if (*eval) {
      req = make_request("eval", eval_c, args);
      req.inputs = absolute_all(eval_ckpts);
      log = logger(eval_c.quiet);
    } else if (*smart) {
      req = make_request("smart-eval", smart_c, args);
      req.inputs = absolute_all(smart_ckpts);
      log = logger(smart_c.quiet);
    } else if (*analyze) {
      req = make_request("analyze-distances", analyze_c, args);
      req.inputs = absolute_all(analyze_ckpt);
      req.samples = samples;
      if (req.output_dir.empty() && !req.has_config) req.output_dir = req.inputs.front().parent_path();
      log = logger(analyze_c.quiet);
    } else {
      req = make_request("plot", plot_c, args);
      req.inputs = {std::filesystem::absolute(plot_input)};
      req.title = plot_title;
      log = logger(plot_c.quiet);
    }
    const dpp::RunResult r = dpp::run_request(req, log);
    for (const auto& p : r.outputs) std::cout << p.string() << '\n';
    std::cout << r.manifest.string() << '\n';
    return 0;
  } catch (const dpp::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const dpp::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 2;
  }
}
