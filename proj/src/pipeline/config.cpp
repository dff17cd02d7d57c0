#include <fstream>
#include <json.hpp>
#include <sstream>

#include "activeview/errors.hpp"
#include "activeview/nets/serialize.hpp"
#include "activeview/pipeline/pipeline.hpp"

namespace activeview {

namespace {

using nlohmann::json;

template <typename Config, typename F>
void visit_fields(Config& c, F&& f) {
  f("stage1_epochs", c.stage1_epochs);
  f("stage2_epochs", c.stage2_epochs);
  f("stage3_epochs", c.stage3_epochs);
  f("end_to_end_epochs", c.end_to_end_epochs);
  f("stage1_lr", c.stage1_lr);
  f("stage1_extractor_lr", c.stage1_extractor_lr);
  f("stage2_lr", c.stage2_lr);
  f("stage2_extractor_lr", c.stage2_extractor_lr);
  f("stage3_lr", c.stage3_lr);
  f("momentum", c.momentum);
  f("adam_beta1", c.adam_beta1);
  f("adam_beta2", c.adam_beta2);
  f("batch_size", c.batch_size);
  f("temperature", c.temperature);
  f("ppo_clip", c.ppo.clip);
  f("ppo_value_coef", c.ppo.value_coef);
  f("ppo_entropy_coef", c.ppo.entropy_coef);
  f("gamma", c.ppo.gamma);
  f("ppo_epochs", c.ppo.epochs);
  f("ppo_minibatch", c.ppo.minibatch);
  f("random_selection", c.random_selection);
  f("allow_duplicates", c.allow_duplicates);
  f("skip_stage3", c.skip_stage3);
  f("disable_em", c.disable_em);
  f("end_to_end", c.end_to_end);
  f("seed", c.seed);
  f("extractor", c.extractor);
  f("hidden_dim", c.hidden_dim);
  f("extractor_width", c.extractor_width);
  f("extractor_out_dim", c.extractor_out_dim);
}

json to_json(const TrainConfig& cfg) {
  json j = json::object();
  visit_fields(cfg, [&](const char* key, const auto& v) { j[key] = v; });
  return j;
}

constexpr std::uint32_t kCheckpointVersion = 1;
constexpr char kCheckpointMagic[4] = {'A', 'V', 'C', 'K'};

}  // namespace

void TrainConfig::validate() const {
  auto positive_int = [](const char* key, long v) {
    if (v < 1) throw ParameterError(std::string(key) + ": must be >= 1");
  };
  auto positive = [](const char* key, double v) {
    if (!(v > 0)) throw ParameterError(std::string(key) + ": must be > 0");
  };
  auto unit = [](const char* key, double v) {
    if (!(v >= 0 && v < 1)) throw ParameterError(std::string(key) + ": must lie in [0, 1)");
  };
  positive_int("stage1_epochs", stage1_epochs);
  positive_int("stage2_epochs", stage2_epochs);
  positive_int("stage3_epochs", stage3_epochs);
  positive_int("end_to_end_epochs", end_to_end_epochs);
  positive("stage1_lr", stage1_lr);
  positive("stage1_extractor_lr", stage1_extractor_lr);
  positive("stage2_lr", stage2_lr);
  positive("stage2_extractor_lr", stage2_extractor_lr);
  positive("stage3_lr", stage3_lr);
  unit("momentum", momentum);
  unit("adam_beta1", adam_beta1);
  unit("adam_beta2", adam_beta2);
  positive_int("batch_size", batch_size);
  positive("temperature", temperature);
  ppo.validate();
  if (extractor != "mlp" && extractor != "identity")
    throw ParameterError("extractor: must be \"mlp\" or \"identity\"");
  positive_int("hidden_dim", hidden_dim);
  positive_int("extractor_width", extractor_width);
  positive_int("extractor_out_dim", extractor_out_dim);
  if (random_selection && allow_duplicates)
    throw ParameterError("allow_duplicates: cannot be combined with random_selection");
}

TrainConfig parse_train_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("config: expected a JSON object");
  TrainConfig cfg;
  std::size_t known = 0;
  visit_fields(cfg, [&](const char* key, auto& field) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    ++known;
    try {
      field = it->template get<std::remove_reference_t<decltype(field)>>();
    } catch (const json::exception&) {
      throw SchemaError(std::string(key) + ": wrong value type");
    }
  });
  if (known != j.size()) {
    const json reference = to_json(cfg);
    for (const auto& [key, _] : j.items())
      if (!reference.contains(key)) throw SchemaError(key + ": unknown config key");
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str());
}

std::string canonical_config_bytes(const TrainConfig& cfg) { return to_json(cfg).dump(); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const TrainConfig& cfg) { return fnv1a64(canonical_config_bytes(cfg)); }

ModelDims model_dims(const TrainConfig& cfg, const Dataset& data) {
  ModelDims d;
  d.feature_dim = data.feature_dim();
  d.classes = data.classes;
  d.views = data.view_count();
  d.hidden_dim = cfg.hidden_dim;
  d.extractor = cfg.extractor == "identity" ? ExtractorKind::kIdentity : ExtractorKind::kMlp;
  d.extractor_width = cfg.extractor_width;
  d.extractor_out_dim = cfg.extractor_out_dim;
  return d;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, 4);
  io::write_u32(out, kCheckpointVersion);
  io::write_u32(out, static_cast<std::uint32_t>(ckpt.stage));
  io::write_u32(out, static_cast<std::uint32_t>(ckpt.epoch));
  io::write_u64(out, ckpt.config_hash);
  io::write_str(out, ckpt.rng_state);
  write_params(out, ckpt.params);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("checkpoint: cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kCheckpointMagic)) throw SchemaError("checkpoint: bad magic");
  if (io::read_u32(in) != kCheckpointVersion) throw SchemaError("checkpoint: unsupported version");
  Checkpoint ckpt;
  ckpt.stage = static_cast<int>(io::read_u32(in));
  ckpt.epoch = static_cast<int>(io::read_u32(in));
  ckpt.config_hash = io::read_u64(in);
  ckpt.rng_state = io::read_str(in);
  ckpt.params = read_params(in);
  return ckpt;
}

void write_training_log(const std::vector<LogRow>& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,stage,loss,cross_entropy,entropy_max,clip,value_loss,entropy,lr\n";
  for (const auto& r : log)
    out << r.epoch << ',' << r.stage << ',' << format_double(r.loss) << ',' << format_double(r.cross_entropy) << ','
        << format_double(r.entropy_max) << ',' << format_double(r.clip) << ',' << format_double(r.value_loss) << ','
        << format_double(r.entropy) << ',' << format_double(r.lr) << '\n';
}

}  // namespace activeview
