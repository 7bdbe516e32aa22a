#include "abrlab/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "abrlab/error.hpp"
#include "abrlab/io.hpp"

namespace abrlab {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json checkpoint_to_json(const Mlp& net, const CheckpointMeta& meta) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& w = net.weights()[l];
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index c = 0; c < w.cols(); ++c) row[static_cast<std::size_t>(c)] = w(r, c);
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
    const auto& b = net.biases()[l];
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  nlohmann::json doc;
  doc["layer_dims"] = net.layer_dims();
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  doc["head"] = net.head() == Head::kSoftmax ? "softmax" : "linear";
  doc["meta"] = {{"epoch", meta.epoch}, {"seed", meta.seed}, {"config_hash", meta.config_hash}};
  return doc;
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  try {
    const auto dims = doc.at("layer_dims").get<std::vector<std::size_t>>();
    const auto head_name = doc.at("head").get<std::string>();
    if (head_name != "softmax" && head_name != "linear") {
      throw ParseError("checkpoint: unknown head '" + head_name + "'");
    }
    Checkpoint ckpt{Mlp(dims, head_name == "softmax" ? Head::kSoftmax : Head::kLinear), {}};
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() != ckpt.net.num_layers() || biases.size() != ckpt.net.num_layers()) {
      throw ParseError("checkpoint: layer count does not match layer_dims");
    }
    for (std::size_t l = 0; l < ckpt.net.num_layers(); ++l) {
      auto& w = ckpt.net.weights()[l];
      const auto rows = weights[l].get<std::vector<std::vector<double>>>();
      if (rows.size() != static_cast<std::size_t>(w.rows())) {
        throw ParseError("checkpoint: layer " + std::to_string(l) + " has wrong row count");
      }
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != static_cast<std::size_t>(w.cols())) {
          throw ParseError("checkpoint: layer " + std::to_string(l) + " has wrong column count");
        }
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
          w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
      }
      const auto b = biases[l].get<std::vector<double>>();
      if (b.size() != static_cast<std::size_t>(ckpt.net.biases()[l].size())) {
        throw ParseError("checkpoint: layer " + std::to_string(l) + " has wrong bias count");
      }
      ckpt.net.biases()[l] = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
    if (doc.contains("meta")) {
      const auto& m = doc["meta"];
      ckpt.meta.epoch = m.value("epoch", std::size_t{0});
      ckpt.meta.seed = m.value("seed", std::uint64_t{0});
      ckpt.meta.config_hash = m.value("config_hash", std::string{});
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Mlp& net, const CheckpointMeta& meta) {
  write_file_atomic(path, checkpoint_to_json(net, meta).dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace abrlab
