// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "lunarkit/cli.hpp"
#include "lunarkit/error.hpp"
#include "lunarkit/gan_math.hpp"
#include "lunarkit/manifest.hpp"
#include "lunarkit/odl.hpp"
#include "lunarkit/png.hpp"
#include "lunarkit/product.hpp"
#include "lunarkit/raster.hpp"
#include "png_reference.hpp"

using namespace lunarkit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  return code;
}

std::string slurp(const fs::path& p) {
  const auto b = testing::file_bytes(p);
  return {b.begin(), b.end()};
}

Outcome odl_round_trip() {
  std::vector<std::string> corpus;
  for (const auto& f : testing::odl_fixture_files()) corpus.push_back(read_file_text(f));
  corpus.push_back(testing::pds3_label({}));
  testing::Pds3Fixture cube;
  cube.bands = 3;
  cube.band_storage = "SAMPLE_INTERLEAVED";
  cube.record_bytes = 2048;
  cube.pointer = "(\"CUBE.IMG\", 2)";
  cube.instrument_id = "PCAM";
  cube.start_time = "2019-01-04T07:41:00.000Z";
  corpus.push_back(testing::pds3_label(cube));
  std::mt19937_64 rng(1001);
  while (corpus.size() < 40) corpus.push_back(odl::serialize_odl(testing::random_label(rng)));

  const auto t0 = Clock::now();
  std::size_t ok = 0;
  for (const auto& text : corpus) {
    const odl::OdlLabel once = odl::parse_odl(text);
    ok += odl::parse_odl(odl::serialize_odl(once)) == once;
  }
  const double s = seconds_since(t0);
  return {ok == corpus.size() && corpus.size() >= 20 && s < 1.0,
          fmt("%zu/%zu labels (%zu hand-written) in %.4f s", ok, corpus.size(), testing::odl_fixture_files().size(), s)};
}

Outcome decode_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::size_t cases = 0, exact = 0;
  for (ElementType t : kAllElementTypes) {
    for (std::uint64_t b = 0; b <= 3; ++b) {  // 0: 2-axis image
      for (std::uint64_t l = 1; l <= 3; ++l) {
        for (std::uint64_t s = 1; s <= 3; ++s) {
          const auto values = testing::random_values((b ? b : 1) * l * s, t, rng);
          for (Interleave il :
               {Interleave::band_sequential, Interleave::line_interleaved, Interleave::pixel_interleaved}) {
            const ArrayDescriptor d = make_descriptor(l, s, b, t, il, 3);
            std::vector<std::uint8_t> file(3, 0xEE);
            const auto payload = testing::layout_payload(values, d);
            file.insert(file.end(), payload.begin(), payload.end());
            ++cases;
            exact += decode(d, file).samples == values;
          }
        }
      }
    }
  }
  const double sec = seconds_since(t0);
  return {exact == cases && sec < 10.0, fmt("%zu/%zu descriptors exact in %.4f s", exact, cases, sec)};
}

Outcome png_round_trip() {
  std::mt19937_64 rng(1003);
  std::size_t total = 0, exact = 0;
  for (int depth : {8, 16}) {
    for (std::size_t bands : {1u, 3u}) {
      for (int i = 0; i < 50; ++i) {
        ImageRaster r;
        r.width = 1 + rng() % 64;
        r.height = 1 + rng() % 64;
        r.bands = bands;
        r.samples.resize(r.size());
        const std::uint64_t span = depth == 16 ? 65536 : 256;
        for (auto& v : r.samples) v = static_cast<double>(rng() % span);
        const QuantizedImage q = stretch(r, StretchSpec::none(depth));
        const auto ref = testing::reference_decode(encode_png(q));
        bool same = ref.width == r.width && ref.height == r.height && ref.depth == depth &&
                    ref.channels == static_cast<int>(bands);
        for (std::size_t y = 0; same && y < r.height; ++y)
          for (std::size_t x = 0; x < r.width; ++x)
            for (std::size_t b = 0; b < bands; ++b)
              same = same && ref.samples[(y * r.width + x) * bands + b] == r.samples[r.index(b, y, x)];
        ++total;
        exact += same;
      }
    }
  }
  return {exact == total, fmt("%zu/%zu rasters exact through libpng (50 per depth x bands)", exact, total)};
}

Outcome value_optimum() {
  const double two_ln2 = -1.386294361119890618834464242916353136151;
  const double at_half = gan::gan_value_estimate({{0.5}, {0.5}});
  const double err = std::abs(at_half - two_ln2);
  std::size_t above = 0, argmax = 0;
  double best = -INFINITY;
  for (int i = 1; i <= 999; ++i) {
    const double d = i / 1000.0;
    const double v = gan::gan_value_estimate({{d}, {d}});
    if (v > two_ln2 + 1e-12) ++above;
    if (v > best) {
      best = v;
      argmax = static_cast<std::size_t>(i);
    }
  }
  return {err <= 1e-12 && above == 0 && argmax == 500,
          fmt("|V(0.5)+2ln2| = %.3g, grid max at d=%.3f, %zu points above the bound", err, argmax / 1000.0, above)};
}

Outcome cycle_oracle() {
  std::mt19937_64 rng(1005);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::size_t ok = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 4096;
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = dist(rng);
      y[k] = dist(rng);
    }
    long double naive = 0;
    for (std::size_t k = 0; k < n; ++k) naive += std::fabs(static_cast<long double>(x[k]) - y[k]);
    const double oracle = static_cast<double>(naive / n);
    const double got = gan::cycle_loss(x, y);
    const double rel = std::abs(got - oracle) / oracle;
    worst = std::max(worst, rel);
    ok += got >= 0.0 && gan::cycle_loss(x, x) == 0.0 && rel <= 1e-12;
  }
  return {ok == 1000, fmt("%zu/1000 pairs; worst relative error %.3g", ok, worst)};
}

Outcome determinism() {
  testing::TempDir dir;
  testing::make_fixture_archive(dir / "in");
  // a few more products so that eight workers have something to race on
  for (int i = 0; i < 8; ++i) {
    testing::Pds4Fixture f;
    f.lid = "urn:test:extra:" + std::to_string(i);
    f.file_name = "extra" + std::to_string(i) + ".img";
    f.lines = 40 + i;
    f.samples = 30;
    f.bands = i % 2 ? 3 : 0;
    f.interleave = static_cast<Interleave>(i % 3);
    f.data_type = i % 3 ? "SignedMSB2" : "IEEE754LSBSingle";
    testing::write_pds4_product(dir / "in/extra" / ("extra" + std::to_string(i) + ".xml"), f, 2000 + i);
  }
  const int c1 = run_cli({"batch", (dir / "in").string(), "--out", (dir / "j1").string(), "--jobs", "1"});
  const int c8 = run_cli({"batch", (dir / "in").string(), "--out", (dir / "j8").string(), "--jobs", "8"});
  bool same = c1 == 0 && c8 == 0 && slurp(dir / "j1/manifest.jsonl") == slurp(dir / "j8/manifest.jsonl");
  std::size_t pngs = 0;
  if (same) {
    for (const auto& e : read_manifest(dir / "j1/manifest.jsonl")) {
      same = same && slurp(dir / "j1" / *e.png_path) == slurp(dir / "j8" / *e.png_path);
      ++pngs;
    }
  }

  const std::string m = (dir / "j1/manifest.jsonl").string();
  bool split_same = true;
  for (const char* mode : {"ratio:0.5", "ratio:0.25", "field:camera=PCAM"}) {
    std::vector<std::string> a;
    for (int rep = 0; rep < 2; ++rep) {
      const std::string out_a = (dir / ("a" + std::to_string(rep) + ".jsonl")).string();
      const std::string out_b = (dir / ("b" + std::to_string(rep) + ".jsonl")).string();
      split_same = split_same && run_cli({"split", m, "--mode", mode, "--seed", "20190103", "--out-a", out_a,
                                          "--out-b", out_b}) == 0;
      a.push_back(slurp(out_a) + "|" + slurp(out_b));
    }
    split_same = split_same && a[0] == a[1];
  }
  return {same && split_same && pngs == testing::kFixtureArchiveProducts + 8,
          fmt("batch --jobs 1 vs 8: manifest and %zu PNGs %s; split reruns %s", pngs, same ? "identical" : "DIFFER",
              split_same ? "identical" : "DIFFER")};
}

Outcome verify_truncation() {
  // Every product of the fixture archive plus generated PDS4/PDS3 variants;
  // each tree has exactly one payload cut by one byte.
  std::vector<std::function<void(const fs::path&)>> builders;
  std::vector<std::pair<std::string, std::string>> targets;  // label, payload to truncate
  builders.push_back([](const fs::path& r) { testing::make_fixture_archive(r); });
  for (std::size_t i = 0; i < testing::kFixtureArchiveProducts; ++i) {
    const std::string label = testing::fixture_archive_labels()[i];
    targets.emplace_back(label, "");
  }
  std::size_t caught = 0, total = 0;
  std::string missed;

  auto check_tree = [&](const fs::path& root, const std::string& label, const fs::path& payload) {
    fs::resize_file(payload, fs::file_size(payload) - 1);
    std::string out;
    const int code = run_cli({"verify", root.string()}, &out);
    ++total;
    if (code == cli::kVerification && out.find("FAIL " + label) != std::string::npos) ++caught;
    else missed += " " + label;
  };

  for (const auto& [label, _] : targets) {
    testing::TempDir dir;
    testing::make_fixture_archive(dir.path());
    const ResolvedProduct p = resolve_product(dir / label);
    check_tree(dir.path(), label, p.data_file);
  }

  std::mt19937_64 rng(1007);
  for (int i = 0; i < 28; ++i) {
    testing::TempDir dir;
    const ElementType t = kAllElementTypes[static_cast<std::size_t>(i) % 14];
    if (i < 14) {
      testing::Pds4Fixture f;
      f.lid = "urn:test:trunc:" + std::to_string(i);
      f.file_name = "p.dat";
      f.lines = 1 + rng() % 20;
      f.samples = 1 + rng() % 20;
      f.bands = rng() % 2 ? 1 + rng() % 3 : 0;
      f.interleave = static_cast<Interleave>(rng() % 3);
      f.data_type = std::string(pds4_type_name(t));
      f.offset = rng() % 2 ? 0 : 1 + rng() % 600;
      testing::write_pds4_product(dir / "p.xml", f, rng());
      check_tree(dir.path(), "p.xml", dir / "p.dat");
    } else {
      // PDS3: detached and attached alternately
      testing::Pds3Fixture f;
      f.lines = 1 + rng() % 20;
      f.samples = 1 + rng() % 20;
      const std::size_t payload = f.lines * f.samples;
      std::vector<std::uint8_t> bytes;
      if (i % 2) {
        f.pointer = "\"P.IMG\"";
        bytes.assign(payload, 7);
        testing::write_file(dir / "p.lbl", testing::pds3_label(f));
        testing::write_file(dir / "P.IMG", bytes);
        check_tree(dir.path(), "p.lbl", dir / "P.IMG");
      } else {
        f.record_bytes = 512;
        f.pointer = "2";
        const std::string label = testing::pds3_label(f);
        bytes.assign(label.begin(), label.end());
        bytes.resize(512, ' ');
        bytes.resize(512 + payload, 9);
        testing::write_file(dir / "p.lbl", bytes);
        check_tree(dir.path(), "p.lbl", dir / "p.lbl");
      }
    }
  }
  return {caught == total, fmt("%zu/%zu truncated fixtures caught with exit 4%s", caught, total,
                               missed.empty() ? "" : ("; missed:" + missed).c_str())};
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"odl round trip", odl_round_trip},
      {"decode oracle equivalence", decode_oracle},
      {"png round trip via reference decoder", png_round_trip},
      {"value estimate optimum", value_optimum},
      {"cycle loss vs naive oracle", cycle_oracle},
      {"batch/split determinism", determinism},
      {"verify catches 1-byte truncation", verify_truncation},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed ? 1 : 0;
}
