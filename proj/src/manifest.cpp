#include "seal/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "seal/container.hpp"
#include "seal/errors.hpp"

namespace seal {

namespace {

using nlohmann::json;

std::string optional_string(const json& entry, const char* key) {
  if (!entry.contains(key) || entry[key].is_null()) return {};
  if (!entry[key].is_string()) throw InvalidArgument(std::string("manifest field '") + key + "' must be a string");
  return entry[key].get<std::string>();
}

int required_int(const json& entry, const char* key) {
  if (!entry.contains(key) || !entry[key].is_number_integer()) {
    throw InvalidArgument(std::string("manifest image entry needs integer '") + key + "'");
  }
  return entry[key].get<int>();
}

// PASCAL VOC colour map: bits of the label index spread over the high bits
// of r, g and b.
Rgb voc_color(int index) {
  Rgb c{0, 0, 0};
  for (int shift = 7; index != 0; --shift, index >>= 3) {
    c[0] = static_cast<std::uint8_t>(c[0] | (((index >> 0) & 1) << shift));
    c[1] = static_cast<std::uint8_t>(c[1] | (((index >> 1) & 1) << shift));
    c[2] = static_cast<std::uint8_t>(c[2] | (((index >> 2) & 1) << shift));
  }
  return c;
}

}  // namespace

std::vector<Rgb> DatasetManifest::colors() const {
  std::vector<Rgb> out;
  out.reserve(classes.size());
  for (const ClassInfo& c : classes) out.push_back(c.color);
  return out;
}

std::filesystem::path DatasetManifest::resolve(const std::string& relative) const {
  if (relative.empty()) return {};
  const std::filesystem::path p(relative);
  return p.is_absolute() ? p : base_dir / p;
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("classes") || !doc["classes"].is_array()) {
    throw InvalidArgument("manifest needs a 'classes' array");
  }
  DatasetManifest m;
  m.base_dir = base_dir;
  for (const json& c : doc["classes"]) {
    ClassInfo info;
    if (!c.is_object() || !c.contains("name") || !c["name"].is_string()) {
      throw InvalidArgument("manifest class entry needs a 'name'");
    }
    info.name = c["name"].get<std::string>();
    if (!c.contains("color") || !c["color"].is_array() || c["color"].size() != 3) {
      throw InvalidArgument("class '" + info.name + "' needs an RGB 'color' triple");
    }
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const json& v = c["color"][ch];
      if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > 255) {
        throw InvalidArgument("class '" + info.name + "' colour components must be 0..255");
      }
      info.color[ch] = static_cast<std::uint8_t>(v.get<int>());
    }
    m.classes.push_back(std::move(info));
  }
  if (m.classes.empty() || m.classes.size() > 32) {
    throw InvalidArgument("manifest must declare between 1 and 32 classes");
  }
  if (doc.contains("images")) {
    if (!doc["images"].is_array()) throw InvalidArgument("manifest 'images' must be an array");
    for (const json& e : doc["images"]) {
      if (!e.is_object()) throw InvalidArgument("manifest image entry must be an object");
      ManifestEntry entry;
      entry.id = optional_string(e, "id");
      if (entry.id.empty()) throw InvalidArgument("manifest image entry needs an 'id'");
      entry.height = required_int(e, "height");
      entry.width = required_int(e, "width");
      if (entry.height <= 0 || entry.width <= 0) {
        throw InvalidArgument("image '" + entry.id + "' has non-positive dimensions");
      }
      entry.prob = optional_string(e, "prob");
      entry.label = optional_string(e, "label");
      entry.refined = optional_string(e, "refined");
      entry.image = optional_string(e, "image");
      entry.true_label = optional_string(e, "true_label");
      m.images.push_back(std::move(entry));
    }
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open manifest " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_manifest(text.str(), path.parent_path());
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json doc;
  doc["classes"] = json::array();
  for (const ClassInfo& c : manifest.classes) {
    doc["classes"].push_back({{"name", c.name}, {"color", {c.color[0], c.color[1], c.color[2]}}});
  }
  doc["images"] = json::array();
  for (const ManifestEntry& e : manifest.images) {
    json j = {{"id", e.id}, {"height", e.height}, {"width", e.width}};
    if (!e.prob.empty()) j["prob"] = e.prob;
    if (!e.label.empty()) j["label"] = e.label;
    if (!e.refined.empty()) j["refined"] = e.refined;
    if (!e.image.empty()) j["image"] = e.image;
    if (!e.true_label.empty()) j["true_label"] = e.true_label;
    doc["images"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << manifest_to_json(manifest);
}

void validate_manifest_files(const DatasetManifest& manifest) {
  for (const ManifestEntry& e : manifest.images) {
    auto check = [&](const std::string& rel, const char* field, bool per_class_planes) {
      if (rel.empty()) return;
      const std::filesystem::path p = manifest.resolve(rel);
      if (!std::filesystem::exists(p)) {
        throw InvalidArgument("image '" + e.id + "': " + field + " file " + p.string() + " does not exist");
      }
      const GridContainer g = read_container(p);
      if (static_cast<int>(g.height) != e.height || static_cast<int>(g.width) != e.width) {
        throw InvalidArgument("image '" + e.id + "': " + field + " is " + std::to_string(g.height) + "x" +
                              std::to_string(g.width) + ", manifest says " + std::to_string(e.height) +
                              "x" + std::to_string(e.width));
      }
      if (per_class_planes && static_cast<int>(g.num_planes) != manifest.num_classes()) {
        throw InvalidArgument("image '" + e.id + "': " + field + " has " + std::to_string(g.num_planes) +
                              " planes for " + std::to_string(manifest.num_classes()) + " classes");
      }
    };
    check(e.prob, "prob", true);
    check(e.label, "label", false);
    check(e.refined, "refined", false);
    check(e.image, "image", false);
    check(e.true_label, "true_label", false);
  }
}

std::vector<ClassInfo> preset_palette(std::string_view name) {
  if (name == "sbd20") {
    static const char* const kNames[] = {
        "aeroplane", "bicycle", "bird",  "boat",        "bottle", "bus",         "car",
        "cat",       "chair",   "cow",   "diningtable", "dog",    "horse",       "motorbike",
        "person",    "pottedplant", "sheep", "sofa",    "train",  "tvmonitor"};
    std::vector<ClassInfo> out;
    for (int i = 0; i < 20; ++i) out.push_back({kNames[i], voc_color(i + 1)});
    return out;
  }
  if (name == "cityscapes19") {
    return {{"road", {128, 64, 128}},       {"sidewalk", {244, 35, 232}},
            {"building", {70, 70, 70}},     {"wall", {102, 102, 156}},
            {"fence", {190, 153, 153}},     {"pole", {153, 153, 153}},
            {"traffic light", {250, 170, 30}}, {"traffic sign", {220, 220, 0}},
            {"vegetation", {107, 142, 35}}, {"terrain", {152, 251, 152}},
            {"sky", {70, 130, 180}},        {"person", {220, 20, 60}},
            {"rider", {255, 0, 0}},         {"car", {0, 0, 142}},
            {"truck", {0, 0, 70}},          {"bus", {0, 60, 100}},
            {"train", {0, 80, 100}},        {"motorcycle", {0, 0, 230}},
            {"bicycle", {119, 11, 32}}};
  }
  throw InvalidArgument("unknown palette '" + std::string(name) + "' (expected sbd20 or cityscapes19)");
}

}  // namespace seal
