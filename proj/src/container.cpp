#include "seal/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "seal/errors.hpp"

namespace seal {

namespace {

constexpr char kMagic[4] = {'S', 'E', 'B', 'G'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFFU));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint64_t element_count(const GridContainer& g) {
  return static_cast<std::uint64_t>(g.height) * g.width * g.num_planes;
}

void check_shape(const GridContainer& g) {
  if (g.height == 0 || g.width == 0 || g.num_planes == 0) {
    throw InvalidArgument("container dimensions must be positive");
  }
  if (g.dtype == GridDtype::kBitfield32 && g.num_planes != 1) {
    throw InvalidArgument("bitfield containers hold exactly one plane");
  }
  const std::size_t have = g.dtype == GridDtype::kFloat32 ? g.floats.size() : g.words.size();
  if (have != element_count(g)) {
    throw InvalidArgument("container payload has " + std::to_string(have) + " elements, header says " +
                          std::to_string(element_count(g)));
  }
}

}  // namespace

std::vector<std::uint8_t> encode_container(const GridContainer& grid) {
  check_shape(grid);
  std::vector<std::uint8_t> out;
  out.reserve(kContainerHeaderSize + 4 * element_count(grid));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u16(out, kContainerVersion);
  put_u16(out, static_cast<std::uint16_t>(grid.dtype));
  put_u32(out, grid.height);
  put_u32(out, grid.width);
  put_u32(out, grid.num_planes);
  if (grid.dtype == GridDtype::kFloat32) {
    for (float f : grid.floats) put_u32(out, std::bit_cast<std::uint32_t>(f));
  } else {
    for (std::uint32_t w : grid.words) put_u32(out, w);
  }
  return out;
}

GridContainer decode_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("bad magic, expected \"SEBG\"", 0);
  }
  if (bytes.size() < kContainerHeaderSize) {
    throw ParseError("truncated header: expected " + std::to_string(kContainerHeaderSize) +
                         " bytes, got " + std::to_string(bytes.size()),
                     bytes.size());
  }
  const std::uint16_t version = get_u16(bytes, 4);
  if (version != kContainerVersion) {
    throw ParseError("unsupported version " + std::to_string(version), 4);
  }
  GridContainer g;
  const std::uint16_t dtype = get_u16(bytes, 6);
  if (dtype != 1 && dtype != 2) throw ParseError("unknown dtype " + std::to_string(dtype), 6);
  g.dtype = static_cast<GridDtype>(dtype);
  g.height = get_u32(bytes, 8);
  g.width = get_u32(bytes, 12);
  g.num_planes = get_u32(bytes, 16);
  if (g.height == 0 || g.width == 0 || g.num_planes == 0) {
    throw ParseError("zero dimension in header", 8);
  }
  if (g.dtype == GridDtype::kBitfield32 && g.num_planes != 1) {
    throw ParseError("bitfield container must have one plane", 16);
  }
  const std::uint64_t expected = kContainerHeaderSize + 4 * element_count(g);
  if (bytes.size() != expected) {
    throw ParseError("payload size mismatch: expected " + std::to_string(expected) +
                         " bytes, got " + std::to_string(bytes.size()),
                     std::min<std::size_t>(bytes.size(), kContainerHeaderSize));
  }
  const std::size_t n = element_count(g);
  if (g.dtype == GridDtype::kFloat32) {
    g.floats.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.floats[i] = std::bit_cast<float>(get_u32(bytes, kContainerHeaderSize + 4 * i));
    }
  } else {
    g.words.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.words[i] = get_u32(bytes, kContainerHeaderSize + 4 * i);
  }
  return g;
}

void write_container(const GridContainer& grid, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_container(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

GridContainer read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  // Magic first, so foreign files are rejected before the payload is read.
  std::vector<std::uint8_t> bytes(4);
  in.read(reinterpret_cast<char*>(bytes.data()), 4);
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError(path.string() + ": bad magic, expected \"SEBG\"", 0);
  }
  bytes.insert(bytes.end(), std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  try {
    return decode_container(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

GridContainer to_container(const ProbMap& prob) {
  GridContainer g;
  g.dtype = GridDtype::kFloat32;
  g.height = static_cast<std::uint32_t>(prob.height());
  g.width = static_cast<std::uint32_t>(prob.width());
  g.num_planes = static_cast<std::uint32_t>(prob.num_classes());
  g.floats.assign(prob.values().begin(), prob.values().end());
  return g;
}

GridContainer to_container(const MultiLabelMap& labels) {
  GridContainer g;
  g.dtype = GridDtype::kBitfield32;
  g.height = static_cast<std::uint32_t>(labels.height());
  g.width = static_cast<std::uint32_t>(labels.width());
  g.num_planes = 1;
  g.words.assign(labels.words().begin(), labels.words().end());
  return g;
}

ProbMap prob_from_container(const GridContainer& grid) {
  if (grid.dtype != GridDtype::kFloat32) throw InvalidArgument("expected an f32 container");
  return ProbMap(static_cast<int>(grid.height), static_cast<int>(grid.width),
                 static_cast<int>(grid.num_planes), grid.floats);
}

MultiLabelMap labels_from_container(const GridContainer& grid, int num_classes) {
  if (grid.dtype != GridDtype::kBitfield32) throw InvalidArgument("expected a bitfield container");
  return MultiLabelMap(static_cast<int>(grid.height), static_cast<int>(grid.width), num_classes,
                       grid.words);
}

void write_prob_map(const ProbMap& prob, const std::filesystem::path& path) {
  write_container(to_container(prob), path);
}

ProbMap read_prob_map(const std::filesystem::path& path) {
  return prob_from_container(read_container(path));
}

void write_labels(const MultiLabelMap& labels, const std::filesystem::path& path) {
  write_container(to_container(labels), path);
}

MultiLabelMap read_labels(const std::filesystem::path& path, int num_classes) {
  return labels_from_container(read_container(path), num_classes);
}

}  // namespace seal
