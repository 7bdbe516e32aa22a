#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace abrlab {

/// Bitrate ladder plus encoded chunk sizes of one video.
class VideoManifest {
 public:
  /// sizes_bytes[n][l] is the size of chunk n encoded at ladder level l.
  /// Throws ValidationError naming the offending chunk/level.
  VideoManifest(double chunk_duration_s, std::vector<double> bitrates_kbps,
                std::vector<std::vector<double>> sizes_bytes);

  double chunk_duration_s() const { return chunk_duration_s_; }
  const std::vector<double>& bitrates_kbps() const { return bitrates_kbps_; }
  const std::vector<std::vector<double>>& sizes_bytes() const { return sizes_bytes_; }

  std::size_t num_chunks() const { return sizes_bytes_.size(); }
  std::size_t num_levels() const { return bitrates_kbps_.size(); }
  double bitrate_kbps(std::size_t level) const { return bitrates_kbps_.at(level); }
  double max_bitrate_kbps() const { return bitrates_kbps_.back(); }
  double size_bytes(std::size_t chunk, std::size_t level) const {
    return sizes_bytes_.at(chunk).at(level);
  }

  friend bool operator==(const VideoManifest&, const VideoManifest&) = default;

 private:
  double chunk_duration_s_;
  std::vector<double> bitrates_kbps_;
  std::vector<std::vector<double>> sizes_bytes_;
};

inline const std::vector<double> kDefaultLadderKbps{300, 750, 1200, 1850, 2850, 4300};
inline constexpr std::size_t kDefaultChunks = 48;
inline constexpr double kDefaultChunkDurationS = 4.0;

/// Nominal size bitrate*duration/8 scaled by (1+u), u ~ U[-jitter, jitter],
/// then made non-decreasing across levels with a running max.
VideoManifest synth_manifest(const std::vector<double>& bitrates_kbps, std::size_t n_chunks,
                             double chunk_duration_s, double jitter, std::uint64_t seed);

/// The default 6-level, 48 x 4 s manifest without jitter.
VideoManifest default_manifest();

/// JSON object {"chunk_duration_s", "bitrates_kbps", "sizes_bytes"}.
VideoManifest parse_manifest(const std::string& json_text, const std::string& source = "<string>");
VideoManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const VideoManifest& manifest);
void save_manifest(const VideoManifest& manifest, const std::filesystem::path& path);

}  // namespace abrlab
