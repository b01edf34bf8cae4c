#include "deeppolar/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "deeppolar/smart.hpp"

namespace dpp {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError("missing config field '" + where + key + "'");
  return j.at(key);
}

template <class T>
T get_required(const json& j, const char* key, const std::string& where) {
  try {
    return require(j, key, where).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + where + key + "' has the wrong type");
  }
}

template <class T>
void get_optional(const json& j, const char* key, const std::string& where, T& out) {
  if (!j.is_object() || !j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + where + key + "' has the wrong type");
  }
}

SnrPair pair_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("config field '" + where + "' must be [encoder_db, decoder_db]");
  return SnrPair{j[0].get<double>(), j[1].get<double>()};
}

json pair_to_json(const SnrPair& p) { return json::array({p.encoder_db, p.decoder_db}); }

}  // namespace

CodeConfig ExperimentConfig::code() const {
  if (!info_set.empty()) return CodeConfig(n, k, ell, info_set);
  return build_info_set(n, k, ell, design_snr_db);
}

void ExperimentConfig::validate() const {
  if (n < 2 || tree_depth(n, ell) < 1) throw ConfigError("code.n must be a positive power of code.ell");
  if (k < 1 || k > n) throw ConfigError("code.k must lie in [1, n]");
  if (!info_set.empty() && static_cast<int>(info_set.size()) != k)
    throw ConfigError("code.info_set must list exactly k positions");
  (void)code();
  model.validate();
  train.validate();
  eval.validate();
  if (calibration_batch < 2) throw ConfigError("calibration_batch must be at least 2");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (has_ensemble) {
    if (ensemble.pairs.empty()) throw ConfigError("ensemble.pairs must not be empty");
    if (ensemble.fallback_index < 0 || ensemble.fallback_index >= static_cast<int>(ensemble.pairs.size()))
      throw ConfigError("ensemble.fallback_index is out of range");
    if (!ensemble.checkpoints.empty() && ensemble.checkpoints.size() != ensemble.pairs.size())
      throw ConfigError("ensemble.checkpoints must list one file per pair");
    const CrcSpec crc = CrcSpec::preset(ensemble.crc);
    if (k - crc.r() < 1) throw ConfigError("ensemble CRC leaves no payload bits");
    if (ensemble.finetune_epochs < 0) throw ConfigError("ensemble.finetune_epochs must be non-negative");
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  ExperimentConfig c;
  get_optional(j, "name", "", c.name);
  c.seed = get_required<std::uint64_t>(j, "seed", "");
  c.output_dir = get_required<std::string>(j, "output_dir", "");
  get_optional(j, "calibration_batch", "", c.calibration_batch);

  const json& code = require(j, "code", "");
  c.n = get_required<int>(code, "n", "code.");
  c.k = get_required<int>(code, "k", "code.");
  c.ell = get_required<int>(code, "ell", "code.");
  get_optional(code, "design_snr_db", "code.", c.design_snr_db);
  get_optional(code, "info_set", "code.", c.info_set);

  const json& model = require(j, "model", "");
  get_optional(model, "enc_hidden", "model.", c.model.enc_hidden);
  get_optional(model, "enc_layers", "model.", c.model.enc_layers);
  get_optional(model, "skip_layers", "model.", c.model.skip_layers);
  get_optional(model, "augment", "model.", c.model.augment);
  c.model.decoder = decoder_kind_from_string(get_required<std::string>(model, "decoder", "model."));
  get_optional(model, "dec_hidden", "model.", c.model.dec_hidden);
  get_optional(model, "dec_layers", "model.", c.model.dec_layers);
  get_optional(model, "heads", "model.", c.model.heads);
  get_optional(model, "head_dim", "model.", c.model.head_dim);
  get_optional(model, "dropout", "model.", c.model.dropout);

  const json& train = require(j, "train", "");
  TrainConfig& t = c.train;
  t.epochs = get_required<int>(train, "epochs", "train.");
  t.batch_size = get_required<int>(train, "batch_size", "train.");
  t.learning_rate = get_required<double>(train, "learning_rate", "train.");
  t.snr_pair = pair_from_json(require(train, "snr_pair", "train."), "train.snr_pair");
  get_optional(train, "phase1_epochs", "train.", t.phase1_epochs);
  get_optional(train, "scheduler_t0", "train.", t.scheduler_t0);
  get_optional(train, "scheduler_t_mult", "train.", t.scheduler_t_mult);
  get_optional(train, "min_learning_rate", "train.", t.min_learning_rate);
  get_optional(train, "enc_dec_step_ratio", "train.", t.enc_dec_step_ratio);
  get_optional(train, "loss_epsilon", "train.", t.loss.epsilon);
  get_optional(train, "sample_snr_range", "train.", t.sample_snr_range);
  get_optional(train, "snr_range_low_db", "train.", t.snr_range_low_db);
  get_optional(train, "snr_range_high_db", "train.", t.snr_range_high_db);
  get_optional(train, "validation_batch", "train.", t.validation_batch);
  get_optional(train, "checkpoint_epochs", "train.", t.checkpoint_epochs);
  t.seed = c.seed;
  t.design_snr_db = c.design_snr_db;

  const json& eval = require(j, "eval", "");
  c.eval.snr_db = get_required<std::vector<double>>(eval, "snr_db", "eval.");
  get_optional(eval, "min_block_errors", "eval.", c.eval.min_block_errors);
  get_optional(eval, "max_blocks", "eval.", c.eval.max_blocks);
  get_optional(eval, "batch_size", "eval.", c.eval.batch_size);
  get_optional(eval, "noiseless", "eval.", c.eval.noiseless);
  c.eval.seed = c.seed;

  if (j.contains("ensemble") && !j.at("ensemble").is_null()) {
    const json& e = j.at("ensemble");
    c.has_ensemble = true;
    for (const json& p : require(e, "pairs", "ensemble."))
      c.ensemble.pairs.push_back(pair_from_json(p, "ensemble.pairs[]"));
    get_optional(e, "checkpoints", "ensemble.", c.ensemble.checkpoints);
    get_optional(e, "crc", "ensemble.", c.ensemble.crc);
    get_optional(e, "fallback_index", "ensemble.", c.ensemble.fallback_index);
    get_optional(e, "finetune_epochs", "ensemble.", c.ensemble.finetune_epochs);
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["calibration_batch"] = c.calibration_batch;
  j["code"] = {{"n", c.n}, {"k", c.k}, {"ell", c.ell}, {"design_snr_db", c.design_snr_db}, {"info_set", c.info_set}};
  const ModelConfig& m = c.model;
  j["model"] = {{"enc_hidden", m.enc_hidden}, {"enc_layers", m.enc_layers}, {"skip_layers", m.skip_layers},
                {"augment", m.augment},       {"decoder", to_string(m.decoder)}, {"dec_hidden", m.dec_hidden},
                {"dec_layers", m.dec_layers}, {"heads", m.heads},             {"head_dim", m.head_dim},
                {"dropout", m.dropout}};
  const TrainConfig& t = c.train;
  j["train"] = {{"epochs", t.epochs},
                {"phase1_epochs", t.phase1_epochs},
                {"batch_size", t.batch_size},
                {"learning_rate", t.learning_rate},
                {"snr_pair", pair_to_json(t.snr_pair)},
                {"scheduler_t0", t.scheduler_t0},
                {"scheduler_t_mult", t.scheduler_t_mult},
                {"min_learning_rate", t.min_learning_rate},
                {"enc_dec_step_ratio", t.enc_dec_step_ratio},
                {"loss_epsilon", t.loss.epsilon},
                {"sample_snr_range", t.sample_snr_range},
                {"snr_range_low_db", t.snr_range_low_db},
                {"snr_range_high_db", t.snr_range_high_db},
                {"validation_batch", t.validation_batch},
                {"checkpoint_epochs", t.checkpoint_epochs}};
  j["eval"] = {{"snr_db", c.eval.snr_db},
               {"min_block_errors", c.eval.min_block_errors},
               {"max_blocks", c.eval.max_blocks},
               {"batch_size", c.eval.batch_size},
               {"noiseless", c.eval.noiseless}};
  if (c.has_ensemble) {
    json pairs = json::array();
    for (const SnrPair& p : c.ensemble.pairs) pairs.push_back(pair_to_json(p));
    j["ensemble"] = {{"pairs", pairs},
                     {"checkpoints", c.ensemble.checkpoints},
                     {"crc", c.ensemble.crc},
                     {"fallback_index", c.ensemble.fallback_index},
                     {"finetune_epochs", c.ensemble.finetune_epochs}};
  }
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  for (std::string& ck : c.ensemble.checkpoints) {
    std::filesystem::path p(ck);
    if (p.is_relative()) p = path.parent_path() / p;
    if (!std::filesystem::exists(p)) throw ConfigError("ensemble checkpoint " + p.string() + " does not exist");
    ck = p.string();
  }
  return c;
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& c) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << config_to_json(c).dump(2) << '\n';
}

ExperimentConfig preset_config(std::string_view name) {
  ExperimentConfig c;
  if (name == "full_256_37") {
    c.name = "full_256_37";
    c.n = 256;
    c.k = 37;
    c.ell = 16;
    c.train.epochs = 500;
    c.train.batch_size = 20000;
    c.train.snr_pair = {0.0, -2.0};
    c.eval.snr_db = {-5, -4, -3, -2, -1, 0, 1};
    c.output_dir = "runs/full_256_37";
  } else if (name == "tiny_16_7") {
    c.name = "tiny_16_7";
    c.n = 16;
    c.k = 7;
    c.ell = 4;
    c.model.enc_hidden = 32;
    c.model.dec_hidden = 32;
    c.model.heads = 4;
    c.model.head_dim = 8;
    c.model.dec_layers = 2;
    c.model.dropout = 0.0;
    c.train.epochs = 50;
    c.train.phase1_epochs = 20;
    c.train.batch_size = 1000;
    c.train.learning_rate = 3e-3;
    c.train.scheduler_t0 = 50;
    c.train.snr_pair = {2.0, 0.0};
    c.train.validation_batch = 2000;
    c.train.checkpoint_epochs = {10, 25};
    c.eval.snr_db = {-2, -1, 0, 1, 2, 3, 4};
    c.eval.max_blocks = 20000;
    c.output_dir = "runs/tiny_16_7";
  } else if (name == "smart_tiny") {
    c = preset_config("tiny_16_7");
    c.name = "smart_tiny";
    // Eight check bits need room in k, so the ensemble uses a (16, 11) code.
    c.k = 11;
    c.info_set.clear();
    c.has_ensemble = true;
    c.ensemble.pairs = {{2.0, 0.0}, {4.0, 2.0}};
    c.ensemble.crc = "crc8";
    c.ensemble.finetune_epochs = 20;
    c.output_dir = "runs/smart_tiny";
  } else {
    std::string all;
    for (const std::string& p : preset_names()) all += (all.empty() ? "" : ", ") + p;
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected one of " + all + ")");
  }
  if (name == "full_256_37") {
    c.has_ensemble = true;
    c.ensemble.pairs = default_smart_pairs();
    c.ensemble.crc = "crc3";
    c.ensemble.finetune_epochs = 100;
  }
  c.train.seed = c.seed;
  c.eval.seed = c.seed;
  c.validate();
  return c;
}

std::vector<std::string> preset_names() { return {"full_256_37", "tiny_16_7", "smart_tiny"}; }

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_digest(const ExperimentConfig& c) { return fnv1a_hex(config_to_json(c).dump()); }

}  // namespace dpp
