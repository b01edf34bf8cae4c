#include "deeppolar/pipeline.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>

#include "deeppolar/checkpoint.hpp"
#include "deeppolar/codec.hpp"
#include "deeppolar/distance.hpp"
#include "deeppolar/harness.hpp"
#include "deeppolar/plot.hpp"
#include "deeppolar/results.hpp"
#include "deeppolar/smart.hpp"
#include "deeppolar/trainer.hpp"

namespace dpp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void say(const Logger& log, const std::string& line) {
  if (log) log(line);
}

const ExperimentConfig& need_config(const RunRequest& r) {
  if (!r.has_config) throw ConfigError(r.command + " needs a config (--config or --preset)");
  return r.config;
}

fs::path output_dir_of(const RunRequest& r) {
  if (!r.output_dir.empty()) return r.output_dir;
  if (r.has_config) return r.config.output_dir;
  throw ConfigError(r.command + " needs an output directory (--output)");
}

std::string epoch_line(const EpochRecord& r) {
  std::ostringstream os;
  os << r.phase;
  if (r.phase == "phase1") os << " k=" << r.stage;
  os << " epoch " << r.epoch + 1 << " lr " << format_real(r.learning_rate) << " dec " << format_real(r.decoder_loss)
     << " enc " << format_real(r.encoder_loss) << " val " << format_real(r.validation.loss) << " ber "
     << format_real(r.validation.ber) << " bler " << format_real(r.validation.bler);
  return os.str();
}

std::shared_ptr<const NeuralCode> load_model(const fs::path& path, Checkpoint* out = nullptr) {
  Checkpoint c = load_checkpoint(path);
  auto m = std::make_shared<const NeuralCode>(model_from_checkpoint(c));
  if (!m->calibrated) throw ConfigError("checkpoint " + path.string() + " has no calibrated power normalization");
  if (out) *out = std::move(c);
  return m;
}

RunResult finish(const RunRequest& request, const fs::path& out, std::vector<fs::path> outputs) {
  RunRequest recorded = request;
  recorded.output_dir = out;
  const json config = request.has_config ? config_to_json(request.config) : json(nullptr);
  const std::uint64_t seed = request.has_config ? request.config.seed : 0;
  json m = make_manifest(request.command, config, seed, request.args, outputs, out);
  m["request"] = request_to_json(recorded);
  json inputs = json::object();
  for (const auto& p : request.inputs) inputs[p.string()] = fnv1a_hex(read_text(p));
  if (!request.resume.empty()) inputs[request.resume.string()] = fnv1a_hex(read_text(request.resume));
  m["inputs"] = inputs;
  RunResult r;
  r.outputs = std::move(outputs);
  r.manifest = out / manifest_name(request.command);
  write_text(r.manifest, m.dump(2) + "\n");
  return r;
}

std::vector<ResultRow> simulate(std::span<const Codec* const> codecs, const SimulationConfig& sim, const Logger& log) {
  std::vector<ResultRow> rows;
  for (const Codec* c : codecs) {
    for (const ErrorStats& s : run_ber_bler(*c, sim)) {
      say(log, c->id() + " snr " + format_real(s.snr_db) + " ber " + format_real(s.ber) + " bler " +
                   format_real(s.bler) + " blocks " + std::to_string(s.blocks));
      rows.push_back({s, c->id(), sim.seed});
    }
  }
  return rows;
}

}  // namespace

json request_to_json(const RunRequest& r) {
  json inputs = json::array();
  for (const auto& p : r.inputs) inputs.push_back(p.string());
  return json{{"command", r.command},
              {"config", r.has_config ? config_to_json(r.config) : json(nullptr)},
              {"output_dir", r.output_dir.string()},
              {"inputs", inputs},
              {"resume", r.resume.string()},
              {"samples", r.samples},
              {"title", r.title},
              {"args", r.args}};
}

RunRequest request_from_json(const json& j) {
  try {
    RunRequest r;
    r.command = j.at("command").get<std::string>();
    if (!j.at("config").is_null()) {
      r.has_config = true;
      r.config = config_from_json(j.at("config"));
    }
    r.output_dir = j.at("output_dir").get<std::string>();
    for (const auto& p : j.at("inputs")) r.inputs.emplace_back(p.get<std::string>());
    r.resume = j.at("resume").get<std::string>();
    r.samples = j.at("samples").get<int>();
    r.title = j.at("title").get<std::string>();
    r.args = j.at("args").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed run request: ") + e.what());
  }
}

std::string manifest_name(const std::string& command) {
  std::string c = command;
  std::replace(c.begin(), c.end(), '-', '_');
  return "manifest_" + c + ".json";
}

RunResult run_train(const RunRequest& request, const Logger& log) {
  const ExperimentConfig& cfg = need_config(request);
  cfg.validate();
  const fs::path out = output_dir_of(request);
  const CodeConfig code = cfg.code();
  std::vector<fs::path> outputs;
  std::vector<EpochRecord> history;
  auto record = [&](const EpochRecord& r) {
    history.push_back(r);
    say(log, epoch_line(r));
  };
  auto write_log = [&] {
    write_text(out / "training_log.csv", training_log_csv(history));
    return out / "training_log.csv";
  };

  NeuralCode model;
  ResumeState state;
  const ResumeState* resume = nullptr;
  if (!request.resume.empty()) {
    const Checkpoint ckpt = load_checkpoint(request.resume);
    if (!(ckpt.code == code) || !(ckpt.model == cfg.model))
      throw ConfigError("resume checkpoint " + request.resume.string() + " does not match the configured code/model");
    model = model_from_checkpoint(ckpt);
    state = resume_state(ckpt, model);
    resume = &state;
    say(log, "resuming phase 2 at epoch " + std::to_string(state.next_epoch));
  } else {
    const auto stages = curriculum_phase1(cfg.ell, cfg.model, cfg.train, record);
    model = assemble_from_phase1(code, cfg.model, stages);
  }

  Phase2Hooks hooks;
  hooks.on_epoch = record;
  hooks.on_checkpoint = [&](int epoch, const NeuralCode& m, const Trainer& t) {
    const fs::path p = out / "checkpoints" / ("ckpt_epoch" + std::to_string(epoch) + ".json");
    // Calibrated copies, so any checkpoint can be evaluated on its own.
    NeuralCode snapshot = m;
    snapshot.calibrate(cfg.seed, cfg.calibration_batch);
    save_checkpoint(p, make_checkpoint(snapshot, epoch, cfg.train.snr_pair, cfg.seed, &t));
    outputs.push_back(p);
    say(log, "saved " + p.string());
  };
  try {
    curriculum_phase2(model, cfg.train, hooks, resume);
  } catch (const TrainingError&) {
    write_log();
    throw;
  }
  model.calibrate(cfg.seed, cfg.calibration_batch);
  const fs::path model_path = out / "model.json";
  save_checkpoint(model_path, make_checkpoint(model, cfg.train.epochs, cfg.train.snr_pair, cfg.seed));
  outputs.push_back(model_path);

  if (cfg.has_ensemble) {
    const auto& pairs = cfg.ensemble.pairs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      NeuralCode member = model;
      if (static_cast<int>(i) != cfg.ensemble.fallback_index && cfg.ensemble.finetune_epochs > 0) {
        // Members share the fallback encoder; only their decoders specialize.
        TrainConfig ft = cfg.train;
        ft.epochs = cfg.ensemble.finetune_epochs;
        ft.snr_pair = pairs[i];
        ft.train_encoder = false;
        ft.checkpoint_epochs.clear();
        ft.scheduler_t0 = std::min(ft.scheduler_t0, ft.epochs);
        ft.seed = derive_seed(cfg.seed, {0x6d656d, i});
        Phase2Hooks mh;
        mh.on_epoch = [&](const EpochRecord& r) {
          EpochRecord tagged = r;
          tagged.phase = "member" + std::to_string(i);
          record(tagged);
        };
        curriculum_phase2(member, ft, mh);
        member.calibrate(cfg.seed, cfg.calibration_batch);
      }
      const fs::path p = out / "members" / ("member" + std::to_string(i) + ".json");
      save_checkpoint(p, make_checkpoint(member, cfg.train.epochs, pairs[i], cfg.seed));
      outputs.push_back(p);
    }
  }
  outputs.push_back(write_log());
  save_config(out / "config.json", cfg);
  outputs.push_back(out / "config.json");
  return finish(request, out, std::move(outputs));
}

RunResult run_eval(const RunRequest& request, const Logger& log) {
  const ExperimentConfig& cfg = need_config(request);
  const fs::path out = output_dir_of(request);
  std::vector<std::unique_ptr<Codec>> owned;
  std::vector<Checkpoint> ckpts;
  std::vector<std::string> ids;
  for (const auto& p : request.inputs) {
    Checkpoint c;
    auto m = load_model(p, &c);
    std::string id = p.stem().string();
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) id += "_" + std::to_string(ids.size());
    ids.push_back(id);
    owned.push_back(std::make_unique<NeuralCodec>(m, id));
    ckpts.push_back(std::move(c));
  }
  const CodeConfig code = ckpts.empty() ? cfg.code() : ckpts.front().code;
  const PolarScCodec sc(code);
  std::vector<const Codec*> codecs{&sc};
  for (const auto& c : owned) codecs.push_back(c.get());
  const std::vector<ResultRow> rows = simulate(codecs, cfg.eval, log);

  std::vector<fs::path> outputs;
  write_text(out / "results.csv", results_csv(rows));
  outputs.push_back(out / "results.csv");
  if (owned.size() > 1) {
    const std::size_t points = cfg.eval.snr_db.size();
    std::vector<std::size_t> order(owned.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ckpts[a].epoch < ckpts[b].epoch; });
    std::vector<ConvergenceRow> conv;
    for (std::size_t i : order)
      for (std::size_t s = 0; s < points; ++s) {
        const ErrorStats& st = rows[(i + 1) * points + s].stats;
        conv.push_back({ckpts[i].epoch, st.snr_db, st.ber, st.bler});
      }
    write_text(out / "convergence.csv", convergence_csv(conv));
    outputs.push_back(out / "convergence.csv");

    MismatchTable table;
    table.snr_db = cfg.eval.snr_db;
    std::vector<double> train_snr;
    for (std::size_t i = 0; i < owned.size(); ++i) {
      table.labels.push_back(ids[i]);
      std::vector<ErrorStats> cells;
      for (std::size_t s = 0; s < points; ++s) cells.push_back(rows[(i + 1) * points + s].stats);
      table.cells.push_back(std::move(cells));
      train_snr.push_back(ckpts[i].snr_pair.decoder_db);
    }
    write_text(out / "mismatch.csv", mismatch_csv(table));
    outputs.push_back(out / "mismatch.csv");
    say(log, table.diagonal_report(train_snr));
  }
  return finish(request, out, std::move(outputs));
}

RunResult run_smart_eval(const RunRequest& request, const Logger& log) {
  const ExperimentConfig& cfg = need_config(request);
  const fs::path out = output_dir_of(request);
  std::vector<fs::path> members = request.inputs;
  if (members.empty())
    for (const auto& p : cfg.ensemble.checkpoints) members.emplace_back(p);
  if (members.empty()) throw ConfigError("smart-eval needs member checkpoints (--checkpoints or ensemble.checkpoints)");
  EnsembleSpec spec;
  spec.crc = CrcSpec::preset(cfg.ensemble.crc);
  spec.fallback_index = cfg.ensemble.fallback_index;
  for (const auto& p : members) {
    Checkpoint c;
    auto m = load_model(p, &c);
    spec.models.push_back({p.stem().string(), c.snr_pair, std::move(m)});
  }
  spec.validate();
  const SmartCodec smart(spec, "smart");
  const CrcStrippedCodec fallback(spec.models[static_cast<std::size_t>(spec.fallback_index)].model, spec.crc, "fallback");
  const Codec* codecs[] = {&smart, &fallback};
  const std::vector<ResultRow> rows = simulate(codecs, cfg.eval, log);
  write_text(out / "results.csv", results_csv(rows));
  return finish(request, out, {out / "results.csv"});
}

RunResult run_analyze(const RunRequest& request, const Logger& log) {
  if (request.inputs.size() != 1) throw ConfigError("analyze-distances takes exactly one checkpoint");
  const fs::path out = output_dir_of(request);
  Checkpoint ckpt;
  const auto model = load_model(request.inputs.front(), &ckpt);
  DistanceConfig dc;
  dc.samples = request.samples;
  dc.seed = request.has_config ? request.config.seed : ckpt.seed;
  const DistanceHistogram mh = pairwise_distance_analysis(model->encoder, dc);
  const DistanceHistogram gh = gaussian_reference(model->code.n(), dc);
  say(log, "model mean distance " + format_real(mh.mean) + ", gaussian reference " + format_real(gh.mean));
  const HistogramSeries series[] = {to_series(mh, request.inputs.front().stem().string()), to_series(gh, "gaussian")};
  write_text(out / "distances.csv", histogram_csv(series));
  return finish(request, out, {out / "distances.csv"});
}

RunResult run_plot(const RunRequest& request, const Logger& log) {
  if (request.inputs.size() != 1) throw ConfigError("plot takes exactly one CSV");
  const fs::path csv = request.inputs.front();
  const fs::path out = request.output_dir.empty() ? csv.parent_path() : request.output_dir;
  const fs::path svg = out / (csv.stem().string() + ".svg");
  const std::string text = read_text(csv);
  const std::string title = request.title.empty() ? csv.stem().string() : request.title;
  if (text.rfind(kResultsHeader, 0) == 0)
    plot_results_file(csv, svg, title);
  else
    plot_histogram_file(csv, svg, title);
  say(log, "wrote " + svg.string());
  return finish(request, out, {svg});
}

RunResult run_request(const RunRequest& request, const Logger& log) {
  if (request.command == "train") return run_train(request, log);
  if (request.command == "eval") return run_eval(request, log);
  if (request.command == "smart-eval") return run_smart_eval(request, log);
  if (request.command == "analyze-distances") return run_analyze(request, log);
  if (request.command == "plot") return run_plot(request, log);
  throw ConfigError("unknown command '" + request.command + "'");
}

ReplayReport replay_manifest(const fs::path& manifest, const fs::path& output_dir, const Logger& log) {
  json m;
  try {
    m = json::parse(read_text(manifest));
  } catch (const json::parse_error& e) {
    throw FormatError("manifest " + manifest.string() + " is not valid JSON: " + e.what());
  }
  if (!m.contains("request") || !m.contains("outputs")) throw FormatError("manifest " + manifest.string() + " has no run request");
  RunRequest req = request_from_json(m.at("request"));
  if (!output_dir.empty()) req.output_dir = output_dir;
  if (m.contains("inputs"))
    for (const auto& [path, digest] : m.at("inputs").items())
      if (fnv1a_hex(read_text(path)) != digest.get<std::string>())
        throw FormatError("replay input " + path + " changed since the recorded run");
  ReplayReport report;
  report.result = run_request(req, log);
  const json fresh = json::parse(read_text(report.result.manifest));
  for (const auto& [name, digest] : m.at("outputs").items()) {
    if (!fresh.at("outputs").contains(name))
      report.missing.push_back(name);
    else if (fresh.at("outputs").at(name) != digest)
      report.mismatched.push_back(name);
  }
  return report;
}

}  // namespace dpp
