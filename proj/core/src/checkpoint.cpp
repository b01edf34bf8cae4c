#include "deeppolar/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deeppolar/config.hpp"

namespace dpp {

using nlohmann::json;

namespace {

json matrix_to_json(const std::string& name, const Matrix& m) {
  if (!m.allFinite()) throw FormatError("array '" + name + "' contains NaN or Inf and cannot be saved");
  std::vector<double> data(m.data(), m.data() + m.size());
  return json{{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

Matrix matrix_from_json(const std::string& name, const json& j) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0 ||
      static_cast<Eigen::Index>(data.size()) != shape[0] * shape[1])
    throw FormatError("array '" + name + "' has inconsistent shape metadata");
  Matrix m(shape[0], shape[1]);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json arrays_to_json(const std::map<std::string, Matrix>& arrays) {
  json j = json::object();
  for (const auto& [name, m] : arrays) j[name] = matrix_to_json(name, m);
  return j;
}

std::map<std::string, Matrix> arrays_from_json(const json& j) {
  std::map<std::string, Matrix> out;
  for (const auto& [name, v] : j.items()) out.emplace(name, matrix_from_json(name, v));
  return out;
}

json optimizer_to_json(const OptimizerState& s) {
  return json{{"steps", s.steps}, {"first", arrays_to_json(s.first)}, {"second", arrays_to_json(s.second)}};
}

OptimizerState optimizer_from_json(const json& j) {
  return OptimizerState{j.at("steps").get<long long>(), arrays_from_json(j.at("first")),
                        arrays_from_json(j.at("second"))};
}

OptimizerState capture(const Adam& opt) {
  OptimizerState s;
  s.steps = opt.steps();
  const auto& params = opt.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i < opt.first_moments().size()) s.first.emplace(params[i]->name, opt.first_moments()[i]);
    if (i < opt.second_moments().size()) s.second.emplace(params[i]->name, opt.second_moments()[i]);
  }
  return s;
}

template <class List>
void load_into(const List& params, const std::map<std::string, Matrix>& arrays, std::size_t& used) {
  for (ad::Parameter* p : params) {
    const auto it = arrays.find(p->name);
    if (it == arrays.end()) throw FormatError("checkpoint is missing parameter '" + p->name + "'");
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      throw FormatError("checkpoint parameter '" + p->name + "' has the wrong shape");
    p->value = it->second;
    ++used;
  }
}

void moments_for(const ad::ConstParameterList& params, const OptimizerState& s, std::vector<Matrix>& m,
                 std::vector<Matrix>& v) {
  m.clear();
  v.clear();
  for (const ad::Parameter* p : params) {
    const auto a = s.first.find(p->name);
    const auto b = s.second.find(p->name);
    if (a == s.first.end() || b == s.second.end())
      throw FormatError("optimizer state is missing moments for '" + p->name + "'");
    m.push_back(a->second);
    v.push_back(b->second);
  }
}

json content_json(const Checkpoint& c) {
  json j;
  j["format_version"] = c.format_version;
  j["code"] = {{"n", c.code.n()}, {"k", c.code.k()}, {"ell", c.code.ell()}, {"info_set", c.code.info_set()}};
  const ModelConfig& m = c.model;
  j["model"] = {{"enc_hidden", m.enc_hidden}, {"enc_layers", m.enc_layers}, {"skip_layers", m.skip_layers},
                {"augment", m.augment},       {"decoder", to_string(m.decoder)}, {"dec_hidden", m.dec_hidden},
                {"dec_layers", m.dec_layers}, {"heads", m.heads},             {"head_dim", m.head_dim},
                {"dropout", m.dropout}};
  j["normalizer"] = {{"calibrated", c.calibrated}, {"mean", c.norm.mean}, {"scale", c.norm.scale}};
  j["arrays"] = arrays_to_json(c.arrays);
  j["optimizer"] = c.has_optimizer ? json{{"encoder", optimizer_to_json(c.encoder_optimizer)},
                                          {"decoder", optimizer_to_json(c.decoder_optimizer)}}
                                   : json(nullptr);
  j["epoch"] = c.epoch;
  j["snr_pair"] = {c.snr_pair.encoder_db, c.snr_pair.decoder_db};
  j["seed"] = c.seed;
  return j;
}

}  // namespace

Checkpoint make_checkpoint(const NeuralCode& model, int epoch, const SnrPair& pair, std::uint64_t seed,
                           const Trainer* trainer) {
  Checkpoint c;
  c.code = model.code;
  c.model = model.model;
  c.calibrated = model.calibrated;
  c.norm = model.norm;
  for (const ad::Parameter* p : model.encoder.parameters()) c.arrays.emplace(p->name, p->value);
  for (const ad::Parameter* p : model.decoder.parameters()) c.arrays.emplace(p->name, p->value);
  if (trainer) {
    c.has_optimizer = true;
    c.encoder_optimizer = capture(trainer->encoder_optimizer());
    c.decoder_optimizer = capture(trainer->decoder_optimizer());
  }
  c.epoch = epoch;
  c.snr_pair = pair;
  c.seed = seed;
  return c;
}

NeuralCode model_from_checkpoint(const Checkpoint& ckpt) {
  NeuralCode m = NeuralCode::create(ckpt.code, ckpt.model, 0);
  std::size_t used = 0;
  load_into(m.encoder.parameters(), ckpt.arrays, used);
  load_into(m.decoder.parameters(), ckpt.arrays, used);
  if (used != ckpt.arrays.size()) throw FormatError("checkpoint holds arrays the model does not use");
  m.norm = ckpt.norm;
  m.calibrated = ckpt.calibrated;
  return m;
}

ResumeState resume_state(const Checkpoint& ckpt, const NeuralCode& model) {
  if (!ckpt.has_optimizer) throw FormatError("checkpoint has no optimizer state to resume from");
  ResumeState r;
  r.next_epoch = ckpt.epoch;
  r.encoder_steps = ckpt.encoder_optimizer.steps;
  r.decoder_steps = ckpt.decoder_optimizer.steps;
  moments_for(model.encoder.parameters(), ckpt.encoder_optimizer, r.encoder_m, r.encoder_v);
  moments_for(model.decoder.parameters(), ckpt.decoder_optimizer, r.decoder_m, r.decoder_v);
  return r;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  json j = content_json(ckpt);
  j["digest"] = fnv1a_hex(j.dump());
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw FormatError("unsupported checkpoint format_version " + std::to_string(version));
    const std::string digest = j.at("digest").get<std::string>();
    json content = j;
    content.erase("digest");
    if (fnv1a_hex(content.dump()) != digest) throw FormatError("checkpoint digest does not match its content");

    Checkpoint c;
    c.format_version = version;
    const json& code = j.at("code");
    c.code = CodeConfig(code.at("n").get<int>(), code.at("k").get<int>(), code.at("ell").get<int>(),
                        code.at("info_set").get<std::vector<int>>());
    const json& m = j.at("model");
    c.model.enc_hidden = m.at("enc_hidden").get<int>();
    c.model.enc_layers = m.at("enc_layers").get<int>();
    c.model.skip_layers = m.at("skip_layers").get<int>();
    c.model.augment = m.at("augment").get<bool>();
    c.model.decoder = decoder_kind_from_string(m.at("decoder").get<std::string>());
    c.model.dec_hidden = m.at("dec_hidden").get<int>();
    c.model.dec_layers = m.at("dec_layers").get<int>();
    c.model.heads = m.at("heads").get<int>();
    c.model.head_dim = m.at("head_dim").get<int>();
    c.model.dropout = m.at("dropout").get<double>();
    const json& nrm = j.at("normalizer");
    c.calibrated = nrm.at("calibrated").get<bool>();
    c.norm.mean = nrm.at("mean").get<double>();
    c.norm.scale = nrm.at("scale").get<double>();
    c.arrays = arrays_from_json(j.at("arrays"));
    if (!j.at("optimizer").is_null()) {
      c.has_optimizer = true;
      c.encoder_optimizer = optimizer_from_json(j.at("optimizer").at("encoder"));
      c.decoder_optimizer = optimizer_from_json(j.at("optimizer").at("decoder"));
    }
    c.epoch = j.at("epoch").get<int>();
    c.snr_pair = SnrPair{j.at("snr_pair").at(0).get<double>(), j.at("snr_pair").at(1).get<double>()};
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint holds an invalid configuration: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string text = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write then rename so an interrupted save never clobbers the previous file.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write checkpoint " + tmp.string());
    out << text;
    if (!out) throw FormatError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace dpp
