#pragma once

// Binary grid container ("SEBG"). Header, all little-endian:
//   0  magic "SEBG"
//   4  u16 version (1)
//   6  u16 dtype (1 = f32 planes, 2 = u32 class bitfield)
//   8  u32 height, u32 width, u32 num_planes
//   20 payload, planar, row-major
// A bitfield container always has exactly one plane.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seal/grid.hpp"

namespace seal {

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderSize = 20;

enum class GridDtype : std::uint16_t { kFloat32 = 1, kBitfield32 = 2 };

struct GridContainer {
  GridDtype dtype = GridDtype::kFloat32;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t num_planes = 0;
  std::vector<float> floats;         // kFloat32
  std::vector<std::uint32_t> words;  // kBitfield32

  friend bool operator==(const GridContainer&, const GridContainer&) = default;
};

std::vector<std::uint8_t> encode_container(const GridContainer& grid);

// Throws ParseError (with byte offset) on bad magic, version, dtype or size.
GridContainer decode_container(std::span<const std::uint8_t> bytes);

void write_container(const GridContainer& grid, const std::filesystem::path& path);
GridContainer read_container(const std::filesystem::path& path);

GridContainer to_container(const ProbMap& prob);
GridContainer to_container(const MultiLabelMap& labels);
ProbMap prob_from_container(const GridContainer& grid);
// Rejects bits at or above num_classes.
MultiLabelMap labels_from_container(const GridContainer& grid, int num_classes);

void write_prob_map(const ProbMap& prob, const std::filesystem::path& path);
ProbMap read_prob_map(const std::filesystem::path& path);
void write_labels(const MultiLabelMap& labels, const std::filesystem::path& path);
MultiLabelMap read_labels(const std::filesystem::path& path, int num_classes);

}  // namespace seal
