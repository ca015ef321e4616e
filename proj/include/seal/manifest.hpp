#pragma once

// Dataset manifest: the single source of class names, colours and image
// entries. Paths inside the manifest are relative to the manifest's directory.
//
// {
//   "classes": [{"name": "road", "color": [128, 64, 128]}, ...],
//   "images": [{"id": "0001", "height": 64, "width": 64,
//               "prob": "0001_prob.sebg", "label": "0001_label.sebg",
//               "refined": "...", "image": "...", "true_label": "..."}]
// }
// Only id, height and width are required per image.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace seal {

using Rgb = std::array<std::uint8_t, 3>;

struct ClassInfo {
  std::string name;
  Rgb color{};
};

struct ManifestEntry {
  std::string id;
  int height = 0;
  int width = 0;
  std::string prob;        // f32 container, one plane per class
  std::string label;       // bitfield container (annotation, possibly noisy)
  std::string refined;     // bitfield container written by `refine`
  std::string image;       // f32 container, one plane per channel
  std::string true_label;  // bitfield container (synthetic data only)
};

struct DatasetManifest {
  std::vector<ClassInfo> classes;
  std::vector<ManifestEntry> images;
  std::filesystem::path base_dir;

  int num_classes() const { return static_cast<int>(classes.size()); }
  std::vector<Rgb> colors() const;
  // Empty string stays empty.
  std::filesystem::path resolve(const std::string& relative) const;
};

// Throws ParseError for malformed JSON (byte offset of the failure) and
// InvalidArgument for missing or ill-typed fields.
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
DatasetManifest load_manifest(const std::filesystem::path& path);

std::string manifest_to_json(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Every referenced file exists and its header matches the entry's dims and
// the class count.
void validate_manifest_files(const DatasetManifest& manifest);

// "sbd20" or "cityscapes19".
std::vector<ClassInfo> preset_palette(std::string_view name);

}  // namespace seal
