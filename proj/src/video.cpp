#include "abrlab/video.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "abrlab/error.hpp"

namespace abrlab {

VideoManifest::VideoManifest(double chunk_duration_s, std::vector<double> bitrates_kbps,
                             std::vector<std::vector<double>> sizes_bytes)
    : chunk_duration_s_(chunk_duration_s),
      bitrates_kbps_(std::move(bitrates_kbps)),
      sizes_bytes_(std::move(sizes_bytes)) {
  if (!(std::isfinite(chunk_duration_s_) && chunk_duration_s_ > 0.0)) {
    throw ValidationError("manifest: chunk_duration_s must be positive");
  }
  const auto levels = bitrates_kbps_.size();
  if (levels < 2) throw ValidationError("manifest: need at least 2 ladder levels");
  for (std::size_t l = 0; l < levels; ++l) {
    if (!(std::isfinite(bitrates_kbps_[l]) && bitrates_kbps_[l] > 0.0)) {
      throw ValidationError("manifest: non-positive bitrate at level " + std::to_string(l));
    }
    if (l > 0 && !(bitrates_kbps_[l] > bitrates_kbps_[l - 1])) {
      throw ValidationError("manifest: bitrates not strictly ascending at level " +
                            std::to_string(l));
    }
  }
  if (sizes_bytes_.empty()) throw ValidationError("manifest: need at least 1 chunk");
  for (std::size_t n = 0; n < sizes_bytes_.size(); ++n) {
    const auto& row = sizes_bytes_[n];
    if (row.size() != levels) {
      throw ValidationError("manifest: chunk " + std::to_string(n) + " has " +
                            std::to_string(row.size()) + " sizes, expected " +
                            std::to_string(levels));
    }
    for (std::size_t l = 0; l < levels; ++l) {
      const auto where = "chunk " + std::to_string(n) + " level " + std::to_string(l);
      if (!(std::isfinite(row[l]) && row[l] > 0.0)) {
        throw ValidationError("manifest: non-positive size at " + where);
      }
      if (l > 0 && row[l] < row[l - 1]) {
        throw ValidationError("manifest: size decreases with level at " + where);
      }
    }
  }
}

VideoManifest synth_manifest(const std::vector<double>& bitrates_kbps, std::size_t n_chunks,
                             double chunk_duration_s, double jitter, std::uint64_t seed) {
  if (!(jitter >= 0.0 && jitter < 1.0)) {
    throw ValidationError("synth_manifest: jitter must lie in [0, 1)");
  }
  for (std::size_t l = 1; l < bitrates_kbps.size(); ++l) {
    if (!(bitrates_kbps[l] > bitrates_kbps[l - 1])) {
      throw ValidationError("synth_manifest: ladder must be strictly ascending");
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-jitter, jitter);
  std::vector<std::vector<double>> sizes(n_chunks, std::vector<double>(bitrates_kbps.size()));
  for (auto& row : sizes) {
    double running = 0.0;
    for (std::size_t l = 0; l < row.size(); ++l) {
      const double nominal = bitrates_kbps[l] * 1000.0 * chunk_duration_s / 8.0;
      const double u = jitter > 0.0 ? noise(rng) : 0.0;
      running = std::max(running, nominal * (1.0 + u));
      row[l] = running;
    }
  }
  return VideoManifest(chunk_duration_s, bitrates_kbps, std::move(sizes));
}

VideoManifest default_manifest() {
  return synth_manifest(kDefaultLadderKbps, kDefaultChunks, kDefaultChunkDurationS, 0.0, 0);
}

VideoManifest parse_manifest(const std::string& json_text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
    return VideoManifest(doc.at("chunk_duration_s").get<double>(),
                         doc.at("bitrates_kbps").get<std::vector<double>>(),
                         doc.at("sizes_bytes").get<std::vector<std::vector<double>>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

VideoManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.string());
}

std::string format_manifest(const VideoManifest& manifest) {
  nlohmann::json doc;
  doc["chunk_duration_s"] = manifest.chunk_duration_s();
  doc["bitrates_kbps"] = manifest.bitrates_kbps();
  doc["sizes_bytes"] = manifest.sizes_bytes();
  return doc.dump() + "\n";
}

void save_manifest(const VideoManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << format_manifest(manifest);
}

}  // namespace abrlab
