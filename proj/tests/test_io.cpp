#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "../tools/cli.hpp"
#include "seal/bench.hpp"
#include "seal/container.hpp"
#include "seal/errors.hpp"
#include "seal/manifest.hpp"
#include "seal/synth.hpp"
#include "seal/visualize.hpp"

using namespace seal;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("seal_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t parse_offset(std::span<const std::uint8_t> bytes) {
  try {
    decode_container(bytes);
  } catch (const ParseError& e) {
    return e.offset();
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("containers round-trip") {
  std::mt19937 rng(1);
  std::vector<float> v(2 * 5 * 7);
  for (float& x : v) x = static_cast<float>(rng() % 1000) / 999.0F;
  const ProbMap prob(5, 7, 2, v);
  CHECK(prob_from_container(decode_container(encode_container(to_container(prob)))) == prob);

  MultiLabelMap labels(6, 9, 32);
  for (int i = 0; i < 40; ++i) labels.set(static_cast<int>(rng() % 6), static_cast<int>(rng() % 9), static_cast<int>(rng() % 32));
  const auto bytes = encode_container(to_container(labels));
  CHECK(bytes.size() == 20 + 6 * 9 * 4);
  CHECK(labels_from_container(decode_container(bytes), 32) == labels);

  const fs::path dir = scratch("roundtrip");
  write_prob_map(prob, dir / "p.sebg");
  write_labels(labels, dir / "l.sebg");
  CHECK(read_prob_map(dir / "p.sebg") == prob);
  CHECK(read_labels(dir / "l.sebg", 32) == labels);
}

TEST_CASE("malformed containers report the failing byte") {
  const auto good = encode_container(to_container(ProbMap(2, 3, 1, 0.25F)));
  CHECK(std::string(good.begin(), good.begin() + 4) == "SEBG");

  auto bad_magic = good;
  bad_magic[1] = 'X';
  CHECK(parse_offset(bad_magic) == 0);
  auto bad_version = good;
  bad_version[4] = 9;
  CHECK(parse_offset(bad_version) == 4);
  auto bad_dtype = good;
  bad_dtype[6] = 7;
  CHECK(parse_offset(bad_dtype) == 6);
  auto zero = good;
  zero[8] = zero[9] = zero[10] = zero[11] = 0;
  CHECK(parse_offset(zero) == 8);

  auto truncated = good;
  truncated.pop_back();
  try {
    decode_container(truncated);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("payload size mismatch: expected 44 bytes, got 43") != std::string::npos);
  }
  CHECK_THROWS_AS(decode_container(std::span<const std::uint8_t>(good.data(), 10)), ParseError);
  CHECK_THROWS_AS(labels_from_container(to_container(ProbMap(2, 2, 1)), 1), InvalidArgument);
}

TEST_CASE("manifests") {
  const std::string text = R"({
    "classes": [{"name": "a", "color": [255, 0, 0]}, {"name": "b", "color": [0, 0, 255]}],
    "images": [{"id": "x", "height": 4, "width": 5, "prob": "x_prob.sebg", "label": "sub/x.sebg"}]
  })";
  const DatasetManifest m = parse_manifest(text, "/data");
  CHECK(m.num_classes() == 2);
  CHECK(m.images[0].label == "sub/x.sebg");
  CHECK(m.resolve(m.images[0].label) == fs::path("/data/sub/x.sebg"));
  CHECK(parse_manifest(manifest_to_json(m), "/data").images[0].prob == "x_prob.sebg");

  try {
    parse_manifest("{\"classes\": [", "/");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() > 0);
  }
  CHECK_THROWS_AS(parse_manifest(R"({"classes": []})", "/"), InvalidArgument);
  CHECK_THROWS_AS(parse_manifest(R"({"classes": [{"name": "a", "color": [1, 2]}]})", "/"), InvalidArgument);
  CHECK_THROWS_AS(parse_manifest(R"({"classes": [{"name": "a", "color": [1, 2, 3]}],
                                    "images": [{"id": "x", "height": 0, "width": 2}]})", "/"),
                  InvalidArgument);
}

TEST_CASE("palettes and colour coding") {
  const auto sbd = preset_palette("sbd20");
  REQUIRE(sbd.size() == 20);
  CHECK(sbd[0].name == "aeroplane");
  CHECK(sbd[0].color == Rgb{128, 0, 0});
  CHECK(sbd[14].color == Rgb{192, 128, 128});
  const auto cs = preset_palette("cityscapes19");
  REQUIRE(cs.size() == 19);
  CHECK(cs[0].color == Rgb{128, 64, 128});
  CHECK_THROWS_AS(preset_palette("nope"), InvalidArgument);

  const std::vector<Rgb> colors{Rgb{255, 0, 0}, Rgb{0, 0, 255}};
  ProbMap p(1, 2, 2, 0.0F);
  p.set(0, 0, 0, 1.0F);
  p.set(1, 0, 0, 1.0F);
  const RgbImage img = visualize(p, colors);
  CHECK(img.at(0, 0) == Rgb{128, 0, 128});
  CHECK(img.at(0, 1) == Rgb{255, 255, 255});
  CHECK(round_half_up(127.5) == 128);
  CHECK_THROWS_AS(visualize(p, std::vector<Rgb>{Rgb{1, 2, 3}}), InvalidArgument);

  const fs::path dir = scratch("png");
  write_png(img, dir / "x.png");
  const auto bytes = read_bytes(dir / "x.png");
  REQUIRE(bytes.size() > 8);
  CHECK(bytes[1] == 'P');
}

TEST_CASE("synthetic data") {
  SynthSpec spec;
  spec.num_images = 3;
  spec.jitter = 0.0;
  for (const SynthSample& s : synth_samples(spec)) CHECK(s.noisy_labels == s.true_labels);

  spec.jitter = 3.0;
  const auto a = synth_samples(spec);
  const auto b = synth_samples(spec);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].noisy_labels == b[i].noisy_labels);
    CHECK(a[i].ideal_prob == b[i].ideal_prob);
  }

  // Mean distance from a noisy edge pixel to the nearest true edge of its class.
  double total = 0.0;
  std::size_t count = 0;
  for (const SynthSample& s : a) {
    for (int k = 0; k < spec.num_classes; ++k) {
      const auto truth = edge_pixels(extract_class(s.true_labels, k));
      for (PixelCoord p : edge_pixels(extract_class(s.noisy_labels, k))) {
        double best = 1e9;
        for (PixelCoord q : truth) best = std::min(best, std::sqrt(squared_distance(p, q)));
        total += best;
        ++count;
      }
    }
  }
  REQUIRE(count > 0);
  CHECK(total / static_cast<double>(count) > 0.0);
  CHECK(total / static_cast<double>(count) <= 3.0);

  const fs::path d1 = scratch("synth1"), d2 = scratch("synth2");
  write_synth_dataset(spec, d1);
  write_synth_dataset(spec, d2);
  for (const auto& entry : fs::directory_iterator(d1)) {
    CHECK(read_bytes(entry.path()) == read_bytes(d2 / entry.path().filename()));
  }
  const DatasetManifest m = load_manifest(d1 / "manifest.json");
  CHECK(m.images.size() == 3);
  validate_manifest_files(m);

  SynthSpec tiny;
  tiny.height = tiny.width = 16;
  CHECK_THROWS_AS(tiny.validate(), InvalidArgument);
}

TEST_CASE("command-line workflow and exit codes") {
  using cli::run_cli;
  const fs::path dir = scratch("cli");
  const std::string data = (dir / "data").string();
  REQUIRE(run_cli({"synth", "--out-dir", data, "--images", "4"}) == cli::kExitOk);

  const std::string prob = data + "/synth_0000_prob.sebg";
  const std::string label = data + "/synth_0000_label.sebg";
  const std::string out = (dir / "aligned.sebg").string();
  const std::string mapping = (dir / "map.csv").string();
  CHECK(run_cli({"align", "--prob", prob, "--labels", label, "--out", out, "--mapping", mapping}) ==
        cli::kExitOk);
  CHECK(read_labels(out, 2).height() == 64);
  std::ifstream csv(mapping);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "class,source_row,source_col,target_row,target_col");
  CHECK(run_cli({"align", "--mode", "iso", "--prob", prob, "--labels", label, "--out", out}) == cli::kExitOk);

  const std::string refined = (dir / "refined").string();
  CHECK(run_cli({"refine", "--manifest", data + "/manifest.json", "--out-dir", refined}) == cli::kExitOk);
  const DatasetManifest rm = load_manifest(refined + "/manifest.json");
  validate_manifest_files(rm);
  CHECK(rm.images[0].refined == "synth_0000_refined.sebg");

  const std::string eval = (dir / "eval").string();
  CHECK(run_cli({"eval", "--manifest", refined + "/manifest.json", "--out-dir", eval, "--pred", "refined",
                 "--gt", "true_label", "--thresholds", "5"}) == cli::kExitOk);
  std::ifstream sj(eval + "/summary.json");
  const auto summary = nlohmann::json::parse(sj);
  CHECK(summary["mean_mf"].get<double>() > 0.5);
  CHECK(fs::exists(eval + "/pr.csv"));
  CHECK(fs::exists(eval + "/pr.svg"));
  CHECK(run_cli({"eval", "--manifest", data + "/manifest.json", "--out-dir", eval, "--mode", "raw",
                 "--thresholds", "5"}) == cli::kExitOk);

  CHECK(run_cli({"viz", "--prob", prob, "--manifest", data + "/manifest.json", "--out",
                 (dir / "p.png").string()}) == cli::kExitOk);
  CHECK(run_cli({"viz", "--labels", label, "--preset", "sbd20", "--out", (dir / "l.png").string()}) ==
        cli::kExitOk);

  const std::string trained = (dir / "train").string();
  CHECK(run_cli({"train", "--manifest", data + "/manifest.json", "--out-dir", trained, "--steps", "3"}) ==
        cli::kExitOk);
  CHECK(fs::exists(trained + "/model.json"));
  CHECK(fs::exists(trained + "/train_log.csv"));

  CHECK(run_cli({"oracle", "--instances", "20"}) == cli::kExitOk);

  // Input problems.
  CHECK(run_cli({"align", "--prob", prob}) == cli::kExitInput);
  CHECK(run_cli({"frobnicate"}) == cli::kExitInput);
  CHECK(run_cli({"align", "--prob", (dir / "missing.sebg").string(), "--labels", label, "--out", out}) ==
        cli::kExitInput);
  {
    std::ofstream junk(dir / "junk.sebg", std::ios::binary);
    junk << "NOPE and some more bytes";
  }
  CHECK(run_cli({"align", "--prob", (dir / "junk.sebg").string(), "--labels", label, "--out", out}) ==
        cli::kExitInput);
  CHECK(run_cli({"align", "--prob", prob, "--labels", label, "--out", out, "--sigma-x", "5", "--sigma-y",
                 "1"}) == cli::kExitInput);
  CHECK(run_cli({"viz", "--prob", prob, "--out", (dir / "x.png").string()}) == cli::kExitInput);
}
