#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deeppolar/config.hpp"

namespace dpp {

/// One reproducible command. Everything a run depends on lives here, so a
/// manifest that stores the request can re-run it exactly.
struct RunRequest {
  std::string command;  // train, eval, smart-eval, analyze-distances, plot
  bool has_config = false;
  ExperimentConfig config{};
  std::filesystem::path output_dir;
  // eval: model checkpoints; smart-eval: members in ensemble order;
  // analyze-distances: one checkpoint; plot: one CSV.
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path resume;  // train only
  int samples = 10000;           // analyze-distances
  std::string title;             // plot
  std::vector<std::string> args; // the command line, for the record only
};

nlohmann::json request_to_json(const RunRequest& r);
RunRequest request_from_json(const nlohmann::json& j);

using Logger = std::function<void(const std::string&)>;

struct RunResult {
  std::vector<std::filesystem::path> outputs;
  std::filesystem::path manifest;
};

/// Phase 1, assembly, phase 2 (optionally resumed), calibration. Writes
/// checkpoints/ckpt_epoch{e}.json, model.json, training_log.csv, and for an
/// ensemble config members/member{i}.json in ensemble order.
RunResult run_train(const RunRequest& request, const Logger& log = {});
/// results.csv with the SC baseline and every input model; with several
/// inputs also convergence.csv and mismatch.csv.
RunResult run_eval(const RunRequest& request, const Logger& log = {});
/// results.csv with the ensemble and its fallback member alone.
RunResult run_smart_eval(const RunRequest& request, const Logger& log = {});
/// distances.csv with the model histogram and the Gaussian reference.
RunResult run_analyze(const RunRequest& request, const Logger& log = {});
/// <stem>.svg next to the CSV (or in output_dir), curves or histogram by header.
RunResult run_plot(const RunRequest& request, const Logger& log = {});

RunResult run_request(const RunRequest& request, const Logger& log = {});

/// Manifest file name for a command inside its output directory.
std::string manifest_name(const std::string& command);

struct ReplayReport {
  RunResult result;
  std::vector<std::string> mismatched;  // outputs whose digest differs
  std::vector<std::string> missing;     // recorded outputs not produced
  bool identical() const { return mismatched.empty() && missing.empty(); }
};

/// Re-runs a manifest's request into output_dir (the recorded directory when
/// empty) and compares every output digest with the recorded one.
ReplayReport replay_manifest(const std::filesystem::path& manifest, const std::filesystem::path& output_dir,
                             const Logger& log = {});

}  // namespace dpp
