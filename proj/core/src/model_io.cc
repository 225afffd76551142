#include "padist/model_io.h"

#include <fstream>

#include "padist/container.h"
#include "padist/error.h"

namespace padist::ml {

using nlohmann::json;

namespace {

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kConv: return "conv3x3";
    case LayerKind::kPool: return "maxpool2x2";
    case LayerKind::kDense: return "dense";
  }
  return "?";
}

json read_json(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot open " + p.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw IoError(p.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot write " + p.string());
  os << text;
  if (!os) throw IoError("write failed for " + p.string());
}

void write_blob(const std::filesystem::path& p, const std::vector<double>& data,
                std::vector<uint64_t> dims, std::vector<double> scalars, const std::string& tag) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot write " + p.string());
  io::ContainerHeader h;
  h.kind = io::PayloadKind::kWeights;
  h.dims = std::move(dims);
  h.scalars = std::move(scalars);
  h.tag = tag;
  io::write_container(os, h, data);
  if (!os) throw IoError("write failed for " + p.string());
}

io::ContainerHeader read_blob(const std::filesystem::path& p, std::vector<double>* data) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open " + p.string());
  auto h = io::read_container(is, data);
  if (h.kind != io::PayloadKind::kWeights) throw IoError(p.string() + " is not a weight blob");
  return h;
}

json model_json(const CNNModel& m, const std::string& weights_file) {
  json layers = json::array();
  for (const auto& l : m.layers) {
    layers.push_back({{"kind", kind_name(l.kind)},
                      {"in_shape", {l.in_c, l.in_h, l.in_w}},
                      {"out_shape", {l.out_c, l.out_h, l.out_w}},
                      {"weight_offset", l.w_off},
                      {"weight_count", l.w_count},
                      {"bias_offset", l.b_off},
                      {"bias_count", l.b_count}});
  }
  return {{"format", "padist-cnn"},
          {"version", 1},
          {"arch", arch_to_json(m.arch)},
          {"layers", layers},
          {"num_params", m.num_params()},
          {"weights_file", weights_file},
          {"training",
           {{"epochs", m.meta.epochs},
            {"seed", m.meta.seed},
            {"train_loss", m.meta.train_loss},
            {"val_loss", m.meta.val_loss}}}};
}

CNNModel model_from(const json& j, const std::filesystem::path& dir, std::vector<double>* extra,
                    io::ContainerHeader* header) {
  if (j.value("format", "") != "padist-cnn" || j.value("version", 0) != 1) {
    throw IoError("not a padist-cnn v1 descriptor");
  }
  CNNModel m(arch_from_json(j.at("arch")));
  const auto& layers = j.at("layers");
  if (layers.size() != m.layers.size()) throw ShapeMismatch("stored layer table length differs");
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& l = m.layers[i];
    const auto& s = layers[i];
    if (s.at("kind").get<std::string>() != kind_name(l.kind) ||
        s.at("weight_offset").get<std::size_t>() != l.w_off ||
        s.at("weight_count").get<std::size_t>() != l.w_count ||
        s.at("bias_offset").get<std::size_t>() != l.b_off ||
        s.at("bias_count").get<std::size_t>() != l.b_count) {
      throw ShapeMismatch("stored layer " + std::to_string(i) + " does not match the architecture");
    }
  }
  std::vector<double> data;
  const auto h = read_blob(dir / j.at("weights_file").get<std::string>(), &data);
  const std::size_t P = m.num_params();
  if (h.dims.empty() || h.dims.back() != P) {
    throw ShapeMismatch("weight blob holds a different parameter count");
  }
  std::copy(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(P), m.params.begin());
  if (extra) extra->assign(data.begin() + static_cast<std::ptrdiff_t>(P), data.end());
  if (header) *header = h;
  const auto& t = j.at("training");
  m.meta.epochs = t.at("epochs").get<int>();
  m.meta.seed = t.at("seed").get<uint64_t>();
  for (const auto& v : t.at("train_loss")) m.meta.train_loss.push_back(v.is_null() ? NAN : v.get<double>());
  for (const auto& v : t.at("val_loss")) m.meta.val_loss.push_back(v.is_null() ? NAN : v.get<double>());
  m.validate();
  return m;
}

}  // namespace

json arch_to_json(const CNNArch& arch) {
  json stages = json::array();
  for (const auto& s : arch.stages) stages.push_back({s.num_layers, s.filters});
  return {{"input_size", arch.input_size}, {"stages", stages}, {"dense", arch.dense}};
}

CNNArch arch_from_json(const json& j) {
  CNNArch a;
  try {
    a.input_size = j.at("input_size").get<int>();
    a.stages.clear();
    for (const auto& s : j.at("stages")) {
      if (!s.is_array() || s.size() != 2) throw InvalidParameter("stage must be [layers, filters]");
      a.stages.push_back({s[0].get<int>(), s[1].get<int>()});
    }
    a.dense = j.at("dense").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("bad architecture descriptor: ") + e.what());
  }
  a.validate();
  return a;
}

void save_model(const CNNModel& model, const std::filesystem::path& json_path) {
  model.validate();
  auto wpath = json_path;
  wpath.replace_extension(".weights");
  write_blob(wpath, model.params, {model.num_params()}, {}, "cnn");
  write_text(json_path, model_json(model, wpath.filename().string()).dump(2) + "\n");
}

CNNModel load_model(const std::filesystem::path& json_path) {
  return model_from(read_json(json_path), json_path.parent_path(), nullptr, nullptr);
}

void save_checkpoint(const TrainerState& st, const std::filesystem::path& json_path,
                     const std::string& config_hash) {
  auto wpath = json_path;
  wpath.replace_extension(".weights");
  std::vector<double> data = st.model.params;
  data.insert(data.end(), st.m.begin(), st.m.end());
  data.insert(data.end(), st.v.begin(), st.v.end());
  write_blob(wpath, data, {3, st.model.num_params()},
             {static_cast<double>(st.step), static_cast<double>(st.epoch)}, config_hash);
  json j = model_json(st.model, wpath.filename().string());
  j["config_hash"] = config_hash;
  write_text(json_path, j.dump(2) + "\n");
}

TrainerState load_checkpoint(const std::filesystem::path& json_path,
                             const std::string& expected_config_hash) {
  const json j = read_json(json_path);
  const std::string stored = j.value("config_hash", "");
  if (stored != expected_config_hash) {
    throw ConfigError("checkpoint " + json_path.string() + " was written for config hash " +
                      stored + ", current config hash is " + expected_config_hash);
  }
  TrainerState st;
  std::vector<double> extra;
  io::ContainerHeader h;
  st.model = model_from(j, json_path.parent_path(), &extra, &h);
  const std::size_t P = st.model.num_params();
  if (h.dims.size() != 2 || h.dims[0] != 3 || extra.size() != 2 * P || h.scalars.size() != 2) {
    throw IoError("checkpoint blob lacks optimizer state");
  }
  if (h.tag != expected_config_hash) throw ConfigError("checkpoint blob config hash mismatch");
  st.m.assign(extra.begin(), extra.begin() + static_cast<std::ptrdiff_t>(P));
  st.v.assign(extra.begin() + static_cast<std::ptrdiff_t>(P), extra.end());
  st.step = static_cast<long>(h.scalars[0]);
  st.epoch = static_cast<int>(h.scalars[1]);
  return st;
}

}  // namespace padist::ml
