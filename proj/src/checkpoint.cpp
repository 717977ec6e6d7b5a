#include "cssc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "cssc/errors.hpp"

namespace cssc {
namespace {

using nlohmann::json;

json config_to_json(const RunConfig& c) {
  json j;
  j["hidden_dim"] = c.hidden_dim;
  j["f_hidden"] = c.f_hidden;
  j["g_hidden"] = c.g_hidden;
  j["cell_input_embed"] = c.cell_input_embed;
  j["substeps"] = c.substeps;
  j["derivative_mode"] = to_string(c.derivative_mode);
  j["numerical_delta"] = c.numerical_delta;
  j["alpha"] = c.alpha;
  j["compensation_space"] = to_string(c.compensation_space);
  j["strict_natural_boundary"] = c.strict_natural_boundary;
  j["block_dot_o"] = c.block_dot_o;
  j["block_ddot_o"] = c.block_ddot_o;
  j["drop_ddot_o"] = c.drop_ddot_o;
  j["learning_rate"] = c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["seed"] = c.seed;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.f_hidden = j.at("f_hidden").get<std::vector<int>>();
  c.g_hidden = j.at("g_hidden").get<std::vector<int>>();
  c.cell_input_embed = j.at("cell_input_embed").get<int>();
  c.substeps = j.at("substeps").get<int>();
  c.derivative_mode = derivative_mode_from_string(j.at("derivative_mode").get<std::string>());
  c.numerical_delta = j.at("numerical_delta").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.compensation_space =
      compensation_space_from_string(j.at("compensation_space").get<std::string>());
  c.strict_natural_boundary = j.at("strict_natural_boundary").get<bool>();
  c.block_dot_o = j.at("block_dot_o").get<bool>();
  c.block_ddot_o = j.at("block_ddot_o").get<bool>();
  c.drop_ddot_o = j.at("drop_ddot_o").get<bool>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

// The blob is little-endian on disk regardless of host order.
void to_disk_order(std::uint64_t* words, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    (void)words;
    (void)n;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t v = words[i];
      std::uint64_t r = 0;
      for (int b = 0; b < 8; ++b) r = (r << 8) | ((v >> (8 * b)) & 0xffULL);
      words[i] = r;
    }
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::parse_error, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(Errc::parse_error, path + ": " + e.what());
  }
  return j;
}

}  // namespace

void save_checkpoint(const std::string& path, const RunConfig& config, int data_dim,
                     const ParamStore& store) {
  json j;
  j["format"] = "cssc-checkpoint";
  j["version"] = 1;
  j["data_dim"] = data_dim;
  j["config"] = config_to_json(config);
  json tensors = json::array();
  for (const TensorInfo& t : store.tensors()) {
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  j["tensors"] = tensors;
  j["value_count"] = store.size();

  std::ofstream meta(path);
  if (!meta) raise(Errc::parse_error, "cannot write " + path);
  meta << j.dump(2) << "\n";
  meta.close();

  std::vector<std::uint64_t> words(static_cast<std::size_t>(store.size()));
  if (!words.empty()) {
    std::memcpy(words.data(), store.values().data(), words.size() * sizeof(std::uint64_t));
    to_disk_order(words.data(), words.size());
  }
  std::ofstream blob(path + ".bin", std::ios::binary);
  if (!blob) raise(Errc::parse_error, "cannot write " + path + ".bin");
  blob.write(reinterpret_cast<const char*>(words.data()),
             static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
}

CheckpointHeader read_checkpoint_header(const std::string& path) {
  json j = read_json_file(path);
  try {
    if (j.at("format").get<std::string>() != "cssc-checkpoint") {
      raise(Errc::checkpoint_mismatch, path + ": not a checkpoint file");
    }
    CheckpointHeader h;
    h.config = config_from_json(j.at("config"));
    h.data_dim = j.at("data_dim").get<int>();
    return h;
  } catch (const json::exception& e) {
    raise(Errc::checkpoint_mismatch, path + ": malformed checkpoint metadata: " + e.what());
  }
}

void load_checkpoint_params(const std::string& path, ParamStore& store) {
  json j = read_json_file(path);
  try {
    const json& tensors = j.at("tensors");
    if (static_cast<int>(tensors.size()) != store.tensor_count()) {
      raise(Errc::checkpoint_mismatch, path + ": tensor count differs from model");
    }
    for (int i = 0; i < store.tensor_count(); ++i) {
      const TensorInfo& t = store.info(i);
      const json& rec = tensors[static_cast<std::size_t>(i)];
      if (rec.at("name").get<std::string>() != t.name ||
          rec.at("rows").get<int>() != t.rows || rec.at("cols").get<int>() != t.cols) {
        raise(Errc::checkpoint_mismatch,
              path + ": tensor '" + t.name + "' shape or order differs from model");
      }
    }
    if (j.at("value_count").get<int>() != store.size()) {
      raise(Errc::checkpoint_mismatch, path + ": value count differs from model");
    }
  } catch (const json::exception& e) {
    raise(Errc::checkpoint_mismatch, path + ": malformed checkpoint metadata: " + e.what());
  }

  std::ifstream blob(path + ".bin", std::ios::binary);
  if (!blob) raise(Errc::checkpoint_mismatch, "cannot open " + path + ".bin");
  std::vector<std::uint64_t> words(static_cast<std::size_t>(store.size()));
  if (!words.empty()) {
    blob.read(reinterpret_cast<char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
    if (blob.gcount() != static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t))) {
      raise(Errc::checkpoint_mismatch, path + ".bin: blob shorter than the declared tensors");
    }
  }
  char extra;
  if (blob.read(&extra, 1), blob.gcount() != 0) {
    raise(Errc::checkpoint_mismatch, path + ".bin: blob longer than the declared tensors");
  }
  if (!words.empty()) {
    to_disk_order(words.data(), words.size());
    std::memcpy(store.values().data(), words.data(), words.size() * sizeof(std::uint64_t));
  }
}

}  // namespace cssc
