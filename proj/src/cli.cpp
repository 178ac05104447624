#include "lunarkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "lunarkit/error.hpp"
#include "lunarkit/gan_math.hpp"
#include "lunarkit/manifest.hpp"
#include "lunarkit/odl.hpp"
#include "lunarkit/pds4.hpp"
#include "lunarkit/png.hpp"
#include "lunarkit/product.hpp"
#include "lunarkit/raster.hpp"

namespace lunarkit::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kJsonVersion = 1;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::IoError: return kIo;
    case ErrorCode::EmptyDomain: return kVerification;
    case ErrorCode::InvalidArgument: return kUsage;
    default: return kFormat;
  }
}

std::string fmt_num(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

int cmd_inspect(const std::string& label_path, bool json, std::ostream& out) {
  const std::string text = read_file_text(label_path);
  const LabelFormat format = detect_label_format(label_path, text);
  if (format == LabelFormat::pds4) {
    const Pds4Product p = parse_pds4(text);
    if (json) {
      nlohmann::ordered_json j{{"v", kJsonVersion}, {"format", "pds4"}};
      j.update(to_json(p));
      out << j.dump(2) << '\n';
      return kOk;
    }
    out << "format: pds4\n"
        << "product_class: " << p.product_class << '\n'
        << "lid: " << p.logical_identifier << '\n'
        << "file: " << p.file_name << '\n';
    if (p.title) out << "title: " << *p.title << '\n';
    if (p.start_time) out << "start_time: " << *p.start_time << '\n';
    if (p.instrument) out << "instrument: " << *p.instrument << '\n';
    for (std::size_t i = 0; i < p.arrays.size(); ++i) {
      const auto& a = p.arrays[i];
      out << "array[" << i << "]:";
      for (const auto& ax : a.axes) out << ' ' << ax.name << '=' << ax.elements;
      out << ' ' << element_name(a.element) << " offset=" << a.offset_bytes << ' ' << interleave_name(a.interleave)
          << " bytes=" << expected_payload_bytes(a) << '\n';
    }
    return kOk;
  }
  const odl::OdlLabel label = odl::parse_odl(text);
  if (json) {
    nlohmann::ordered_json j{{"v", kJsonVersion}, {"format", "pds3"}, {"label", odl::to_json(label)}};
    out << j.dump(2) << '\n';
  } else {
    out << odl::serialize_odl(label);
  }
  return kOk;
}

int cmd_convert(const std::string& label_path, std::string out_path, const std::string& stretch_text, int depth,
                std::ostream& out) {
  const StretchSpec spec = parse_stretch(stretch_text, depth);
  const ResolvedProduct p = resolve_product(label_path);
  const std::vector<std::uint8_t> bytes = read_file_bytes(p.data_file);
  const ImageRaster raw = decode(p.descriptor, bytes);
  const ImageRaster physical =
      apply_scaling(raw, p.descriptor.scaling_factor, p.descriptor.value_offset, p.descriptor.missing_constant);
  const QuantizedImage q = stretch(physical, spec);
  if (out_path.empty()) out_path = fs::path(label_path).replace_extension(".png").string();
  const std::size_t written = write_png(q, fs::path(out_path), p.product_id);
  out << out_path << ": " << raw.width << 'x' << raw.height << 'x' << raw.bands << ' '
      << element_name(p.descriptor.element) << " stretch=" << spec.describe() << " lo=" << fmt_num(q.lo)
      << " hi=" << fmt_num(q.hi) << " depth=" << depth << " bytes=" << written << '\n';
  return kOk;
}

fs::path skip_report_path(const fs::path& manifest) {
  fs::path p = manifest;
  return p.replace_extension().concat(".skipped.jsonl");
}

int cmd_batch(const std::string& root, const std::string& out_dir, std::string manifest_path, int jobs,
              std::ostream& out, std::ostream& err) {
  if (jobs < 1) fail(ErrorCode::InvalidArgument, "--jobs must be at least 1");
  if (manifest_path.empty()) manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();

  const ScanResult scan = scan_archive(root);
  BuildOptions options;
  options.convert = true;
  options.out_dir = out_dir;
  options.jobs = jobs;
  const BuildResult built = build_entries(root, scan.pairs, options);

  std::vector<SkipRecord> skipped = scan.orphans;
  skipped.insert(skipped.end(), built.skipped.begin(), built.skipped.end());
  std::stable_sort(skipped.begin(), skipped.end(),
                   [](const SkipRecord& a, const SkipRecord& b) { return a.label_path < b.label_path; });

  const fs::path manifest(manifest_path);
  if (manifest.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(manifest.parent_path(), ec);
  }
  write_manifest(built.entries, manifest);
  write_skip_report(skipped, skip_report_path(manifest));

  for (const auto& s : skipped) err << "skip " << s.label_path << ": " << s.reason << '\n';
  const std::size_t products = scan.pairs.size() + scan.orphans.size();
  out << "converted " << built.entries.size() << " of " << products << " products; manifest " << manifest.generic_string()
      << '\n';
  return (products > 0 && built.entries.empty()) ? kVerification : kOk;
}

SplitSpec parse_split_mode(const std::string& mode, std::uint64_t seed) {
  SplitSpec spec;
  spec.seed = seed;
  if (mode.rfind("ratio:", 0) == 0) {
    const std::string v = mode.substr(6);
    double f = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), f);
    if (v.empty() || ec != std::errc() || p != v.data() + v.size() || !(f > 0.0 && f < 1.0)) {
      fail(ErrorCode::InvalidArgument, "ratio must be a number in (0, 1): " + mode);
    }
    spec.mode = ByRatio{f};
    return spec;
  }
  if (mode.rfind("field:", 0) == 0) {
    const std::string v = mode.substr(6);
    const auto eq = v.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::InvalidArgument, "expected field:NAME=GLOB, got " + mode);
    spec.mode = ByPredicate{v.substr(0, eq), v.substr(eq + 1)};
    return spec;
  }
  fail(ErrorCode::InvalidArgument, "--mode must be ratio:F or field:NAME=GLOB");
}

std::uint64_t parse_seed(const std::string& text, const char* origin) {
  std::uint64_t seed = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (text.empty() || ec != std::errc() || p != text.data() + text.size()) {
    fail(ErrorCode::InvalidArgument, std::string(origin) + " is not an unsigned 64-bit integer: " + text);
  }
  return seed;
}

int cmd_split(const std::string& manifest, const std::string& mode, std::optional<std::string> seed_text,
              const std::string& out_a, const std::string& out_b, std::ostream& out) {
  std::uint64_t seed = 0;
  if (seed_text) {
    seed = parse_seed(*seed_text, "--seed");
  } else if (const char* env = std::getenv("LUNARKIT_SEED"); env && *env) {
    seed = parse_seed(env, "LUNARKIT_SEED");
  }
  const SplitSpec spec = parse_split_mode(mode, seed);
  const auto entries = read_manifest(manifest);
  const auto [a, b] = split_unpaired(entries, spec);
  write_manifest(a, out_a);
  write_manifest(b, out_b);
  out << "A " << a.size() << '\n' << "B " << b.size() << '\n';
  return kOk;
}

int cmd_verify(const std::string& root, std::ostream& out) {
  const ScanResult scan = scan_archive(root);
  struct Line {
    std::string label;
    std::string verdict;
  };
  std::vector<Line> lines;
  bool any_fail = false;
  for (const auto& pair : scan.pairs) {
    try {
      const ResolvedProduct p = resolve_product(fs::path(root) / pair.label_path);
      const std::uint64_t expected = expected_payload_bytes(p.descriptor);
      const std::uint64_t size = fs::file_size(p.data_file);
      const std::uint64_t available = size > p.descriptor.offset_bytes ? size - p.descriptor.offset_bytes : 0;
      if (available < expected) {
        any_fail = true;
        lines.push_back({pair.label_path, "FAIL " + pair.label_path + ": PayloadTooShort: expected " +
                                              std::to_string(expected) + " bytes, found " + std::to_string(available)});
      } else {
        lines.push_back({pair.label_path, "PASS " + pair.label_path});
      }
    } catch (const std::exception& e) {
      any_fail = true;
      lines.push_back({pair.label_path, "FAIL " + pair.label_path + ": " + e.what()});
    }
  }
  for (const auto& o : scan.orphans) {
    any_fail = true;
    lines.push_back({o.label_path, "FAIL " + o.label_path + ": " + o.reason});
  }
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.label < b.label; });
  for (const auto& l : lines) out << l.verdict << '\n';
  return any_fail ? kVerification : kOk;
}

int cmd_losscheck(const std::string& log_path, std::ostream& out) {
  const std::string text = read_file_text(log_path);
  std::size_t line_no = 0, checked = 0, flagged = 0;
  bool malformed = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const gan::LossReport r = gan::loss_report_from_json(nlohmann::json::parse(line));
      const gan::LossCheck c = gan::check_loss_report(r);
      ++checked;
      if (!c.ok) {
        ++flagged;
        out << "FAIL line " << line_no << ": " << c.problem << '\n';
      }
    } catch (const std::exception& e) {
      malformed = true;
      out << "FAIL line " << line_no << ": malformed record: " << e.what() << '\n';
    }
  }
  out << "checked " << checked << " records, " << flagged << " flagged\n";
  if (malformed) return kFormat;
  return flagged ? kVerification : kOk;
}

int cmd_pngdir(const std::string& root, const std::string& manifest, std::ostream& out) {
  const auto entries = entries_from_png_dir(root);
  write_manifest(entries, manifest);
  out << entries.size() << " images; manifest " << manifest << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lunarkit: planetary image labels, PNG export and unpaired dataset manifests", "lunarkit"};
  app.require_subcommand(1);

  std::string label, root, manifest, out_path, out_dir, stretch_text = "p0.5,99.5", mode, out_a, out_b, log_path,
                                                       seed_text;
  bool json = false;
  int depth = 8;
  int jobs = 1;

  auto* inspect = app.add_subcommand("inspect", "Print a parsed PDS3 or PDS4 label");
  inspect->add_option("label", label, "Label file")->required();
  inspect->add_flag("--json", json, "Emit JSON");

  auto* convert = app.add_subcommand("convert", "Export a product's image to PNG");
  convert->add_option("label", label, "Label file")->required();
  convert->add_option("--out", out_path, "Output PNG (default: label name with .png)");
  convert->add_option("--stretch", stretch_text, "minmax | none | pLO,HI")->capture_default_str();
  convert->add_option("--depth", depth, "8 or 16")->check(CLI::IsMember({8, 16}))->capture_default_str();

  auto* batch = app.add_subcommand("batch", "Convert every product under a directory and write a manifest");
  batch->add_option("root", root, "Archive root")->required();
  batch->add_option("--out", out_dir, "PNG output directory")->required();
  batch->add_option("--manifest", manifest, "Manifest path (default: OUT/manifest.jsonl)");
  batch->add_option("--jobs", jobs, "Concurrent products")->capture_default_str();

  auto* split = app.add_subcommand("split", "Partition a manifest into unpaired domains A and B");
  split->add_option("manifest", manifest, "Manifest path")->required();
  split->add_option("--mode", mode, "ratio:F | field:NAME=GLOB")->required();
  split->add_option("--seed", seed_text, "Shuffle seed (default: $LUNARKIT_SEED or 0)");
  split->add_option("--out-a", out_a, "Domain A manifest")->required();
  split->add_option("--out-b", out_b, "Domain B manifest")->required();

  auto* verify = app.add_subcommand("verify", "Check that every product's payload is complete");
  verify->add_option("root", root, "Archive root")->required();

  auto* losscheck = app.add_subcommand("losscheck", "Recompute totals in a training loss log");
  losscheck->add_option("log", log_path, "Loss log (JSON Lines)")->required();

  auto* pngdir = app.add_subcommand("pngdir", "Write a manifest for a directory of plain PNG images");
  pngdir->add_option("root", root, "Image directory")->required();
  pngdir->add_option("--manifest", manifest, "Manifest path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*inspect) return cmd_inspect(label, json, out);
    if (*convert) return cmd_convert(label, out_path, stretch_text, depth, out);
    if (*batch) return cmd_batch(root, out_dir, manifest, jobs, out, err);
    if (*split) {
      std::optional<std::string> seed;
      if (split->count("--seed")) seed = seed_text;
      return cmd_split(manifest, mode, seed, out_a, out_b, out);
    }
    if (*verify) return cmd_verify(root, out);
    if (*losscheck) return cmd_losscheck(log_path, out);
    if (*pngdir) return cmd_pngdir(root, manifest, out);
  } catch (const Error& e) {
    err << "lunarkit: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "lunarkit: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}

}  // namespace lunarkit::cli
