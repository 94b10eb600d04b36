#include "mvgcca/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace mvgcca {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "mvgcca-checkpoint";
constexpr int kFormatVersion = 1;

std::string nonlin_name(Nonlinearity f) {
  return f == Nonlinearity::ReLU ? "relu" : "tanh";
}

Nonlinearity nonlin_from(const std::string& s) {
  if (s == "relu") return Nonlinearity::ReLU;
  if (s == "tanh") return Nonlinearity::Tanh;
  throw std::invalid_argument("unknown nonlinearity: " + s);
}

std::string prop_name(Propagation p) {
  switch (p) {
    case Propagation::None: return "none";
    case Propagation::Sym: return "sym";
    case Propagation::RW: return "rw";
  }
  return "sym";
}

Propagation prop_from(const std::string& s) {
  if (s == "none") return Propagation::None;
  if (s == "sym") return Propagation::Sym;
  if (s == "rw") return Propagation::RW;
  throw std::invalid_argument("unknown propagation: " + s);
}

} // namespace

json config_to_json(const TrainConfig& cfg) {
  return json{{"latent_dim", cfg.latent_dim},
              {"hops", cfg.hops},
              {"layers", cfg.layers},
              {"hidden", cfg.hidden},
              {"batch_size", cfg.batch_size},
              {"dropout", cfg.dropout},
              {"learning_rate", cfg.learning_rate},
              {"epochs", cfg.epochs},
              {"seed", cfg.seed},
              {"mc_samples", cfg.mc_samples},
              {"adam_beta1", cfg.adam_beta1},
              {"adam_beta2", cfg.adam_beta2},
              {"adam_eps", cfg.adam_eps},
              {"nonlinearity", nonlin_name(cfg.nonlinearity)},
              {"propagation", prop_name(cfg.propagation)},
              {"link_scale", cfg.link_scale},
              {"recon_scale", cfg.recon_scale},
              {"normalized_link", cfg.normalized_link},
              {"logsig_clamp", cfg.logsig_clamp},
              {"embed_tile_size", cfg.embed_tile_size}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("latent_dim", cfg.latent_dim);
  get("hops", cfg.hops);
  get("layers", cfg.layers);
  get("hidden", cfg.hidden);
  get("batch_size", cfg.batch_size);
  get("dropout", cfg.dropout);
  get("learning_rate", cfg.learning_rate);
  get("epochs", cfg.epochs);
  get("seed", cfg.seed);
  get("mc_samples", cfg.mc_samples);
  get("adam_beta1", cfg.adam_beta1);
  get("adam_beta2", cfg.adam_beta2);
  get("adam_eps", cfg.adam_eps);
  if (j.contains("nonlinearity"))
    cfg.nonlinearity = nonlin_from(j.at("nonlinearity").get<std::string>());
  if (j.contains("propagation"))
    cfg.propagation = prop_from(j.at("propagation").get<std::string>());
  get("link_scale", cfg.link_scale);
  get("recon_scale", cfg.recon_scale);
  get("normalized_link", cfg.normalized_link);
  get("logsig_clamp", cfg.logsig_clamp);
  if (j.contains("embed_tile_size"))
    cfg.embed_tile_size = j.at("embed_tile_size").get<Index>();
  cfg.validate();
  return cfg;
}

void save_checkpoint(const std::filesystem::path& file, const ModelParams& params,
                     const TrainConfig& cfg) {
  json root;
  root["format"] = kFormatTag;
  root["version"] = kFormatVersion;
  root["config"] = config_to_json(cfg);
  root["view_dims"] = params.view_dims();

  json tensors = json::object();
  auto& mutable_params = const_cast<ModelParams&>(params);  // read-only access
  for (const auto& ref : tensor_refs(mutable_params)) {
    tensors[ref.name] = {{"rows", ref.rows},
                         {"cols", ref.cols},
                         {"data", std::vector<double>(ref.data, ref.data + ref.size())}};
  }
  root["tensors"] = std::move(tensors);

  const auto bytes = json::to_msgpack(root);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + file.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + file.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  json root;
  try {
    root = json::from_msgpack(bytes);
  } catch (const json::exception& e) {
    throw std::runtime_error(file.string() + ": not a checkpoint file (" + e.what() +
                             ")");
  }
  if (!root.contains("format") || root["format"] != kFormatTag)
    throw std::runtime_error(file.string() + ": missing checkpoint format tag");
  if (root.value("version", -1) != kFormatVersion)
    throw std::runtime_error(file.string() + ": unsupported checkpoint version");

  Checkpoint ck;
  ck.config = config_from_json(root.at("config"));
  std::vector<Index> dims = root.at("view_dims").get<std::vector<Index>>();
  Rng rng(0);
  ck.params = init_params(dims, ck.config, rng);

  const json& tensors = root.at("tensors");
  for (auto& ref : tensor_refs(ck.params)) {
    if (!tensors.contains(ref.name))
      throw std::runtime_error(file.string() + ": checkpoint missing tensor " +
                               ref.name);
    const json& t = tensors.at(ref.name);
    if (t.at("rows").get<Index>() != ref.rows ||
        t.at("cols").get<Index>() != ref.cols)
      throw std::runtime_error(file.string() + ": tensor " + ref.name +
                               " has mismatched shape");
    const auto data = t.at("data").get<std::vector<double>>();
    if (static_cast<Index>(data.size()) != ref.size())
      throw std::runtime_error(file.string() + ": tensor " + ref.name +
                               " has mismatched size");
    std::copy(data.begin(), data.end(), ref.data);
  }
  return ck;
}

} // namespace mvgcca
