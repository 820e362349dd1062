#include "flockkin/harness/snapshot_io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string_view>
#include <vector>

#include "flockkin/errors.hpp"

namespace flockkin::harness {

namespace {

constexpr std::string_view snapshot_header = "# N d time model_hash seed";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
T number(std::string_view text, const std::string& source, std::size_t line) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError(source + ":" + std::to_string(line) + ": bad number '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("sha256: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text(path)); }

std::string model_hash(const ModelSpec& model) { return sha256_hex(describe(model)).substr(0, 16); }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string format_snapshot(const ParticleState& state, const std::string& hash, std::uint64_t seed) {
  const std::size_t n = state.size(), d = state.dim();
  std::string out;
  out += snapshot_header;
  out += "\n# " + std::to_string(n) + " " + std::to_string(d) + " " + fmt17(state.time) + " " + hash + " " +
         std::to_string(seed) + "\nid";
  for (std::size_t k = 0; k < d; ++k) out += ",x_" + std::to_string(k);
  for (std::size_t k = 0; k < d; ++k) out += ",v_" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(i);
    for (std::size_t k = 0; k < d; ++k) out += "," + fmt17(state.x(i, k));
    for (std::size_t k = 0; k < d; ++k) out += "," + fmt17(state.v(i, k));
    out += '\n';
  }
  return out;
}

SnapshotFile parse_snapshot(const std::string& text, const std::string& source) {
  const auto lines = lines_of(text);
  if (lines.size() < 3 || trim(lines[0]) != snapshot_header)
    throw ParseError(source + ": not a snapshot file (missing '" + std::string(snapshot_header) + "' header)");
  std::string_view values = trim(lines[1]);
  if (values.empty() || values.front() != '#') throw ParseError(source + ":2: missing header values");
  values.remove_prefix(1);
  std::vector<std::string_view> fields;
  for (auto f : split(trim(values), ' '))
    if (!f.empty()) fields.push_back(f);
  if (fields.size() != 5) throw ParseError(source + ":2: header needs 5 values");
  SnapshotFile file;
  auto& h = file.header;
  h.n = number<std::size_t>(fields[0], source, 2);
  h.d = number<std::size_t>(fields[1], source, 2);
  h.time = number<double>(fields[2], source, 2);
  h.model_hash = std::string(fields[3]);
  h.seed = number<std::uint64_t>(fields[4], source, 2);
  if (h.n == 0 || h.d == 0) throw ParseError(source + ":2: N and d must be positive");
  if (lines.size() != h.n + 3)
    throw ParseError(source + ": expected " + std::to_string(h.n) + " particle rows, found " +
                     std::to_string(lines.size() - 3));
  file.state = ParticleState(h.n, h.d, h.time);
  for (std::size_t i = 0; i < h.n; ++i) {
    const std::size_t line_no = i + 4;
    const auto cells = split(lines[i + 3], ',');
    if (cells.size() != 1 + 2 * h.d)
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(1 + 2 * h.d) +
                       " columns");
    if (number<std::size_t>(cells[0], source, line_no) != i)
      throw ParseError(source + ":" + std::to_string(line_no) + ": particle ids must be 0..N-1 in order");
    for (std::size_t k = 0; k < h.d; ++k) {
      file.state.x(i, k) = number<double>(cells[1 + k], source, line_no);
      file.state.v(i, k) = number<double>(cells[1 + h.d + k], source, line_no);
    }
  }
  try {
    file.state.validate();
  } catch (const DomainError& e) {
    throw ParseError(source + ": " + e.what());
  }
  return file;
}

void write_snapshot(const std::string& path, const ParticleState& state, const std::string& hash,
                    std::uint64_t seed) {
  write_text(path, format_snapshot(state, hash, seed));
}

SnapshotFile read_snapshot(const std::string& path) { return parse_snapshot(read_text(path), path); }

std::string format_measure(const DiscreteMeasure& mu) {
  std::string out = "weight";
  for (std::size_t k = 0; k < mu.dim(); ++k) out += ",p_" + std::to_string(k);
  out += '\n';
  for (std::size_t a = 0; a < mu.size(); ++a) {
    out += fmt17(mu.weight(a));
    for (double c : mu.point(a)) out += "," + fmt17(c);
    out += '\n';
  }
  return out;
}

void write_measure(const std::string& path, const DiscreteMeasure& mu) { write_text(path, format_measure(mu)); }

LoadedMeasure read_measure(const std::string& path) {
  const std::string text = read_text(path);
  if (text.rfind(snapshot_header, 0) == 0) {
    const SnapshotFile snap = parse_snapshot(text, path);
    const std::size_t n = snap.header.n, d = snap.header.d;
    std::vector<double> pts(n * 2 * d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        pts[i * 2 * d + k] = snap.state.x(i, k);
        pts[i * 2 * d + d + k] = snap.state.v(i, k);
      }
    return {DiscreteMeasure::uniform(2 * d, std::move(pts)), true};
  }
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError(path + ": empty file");
  const auto head = split(lines[0], ',');
  if (head.size() < 2 || trim(head[0]) != "weight")
    throw ParseError(path + ":1: expected a snapshot header or a 'weight,p_0,...' column line");
  const std::size_t dim = head.size() - 1;
  std::vector<double> pts, w;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != dim + 1)
      throw ParseError(path + ":" + std::to_string(r + 1) + ": expected " + std::to_string(dim + 1) + " columns");
    w.push_back(number<double>(cells[0], path, r + 1));
    for (std::size_t k = 0; k < dim; ++k) pts.push_back(number<double>(cells[1 + k], path, r + 1));
  }
  try {
    return {DiscreteMeasure(dim, std::move(pts), std::move(w)), false};
  } catch (const DomainError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string format_moments(const Trajectory& traj) {
  std::string out = "t";
  const std::size_t d = traj.empty() ? 0 : traj.front().state.dim();
  for (std::size_t k = 0; k < d; ++k) out += ",V1_" + std::to_string(k);
  for (std::size_t k = 0; k < d; ++k) out += ",X1_" + std::to_string(k);
  out += ",V2,X2,Gf,Gamma,support_radius,Lambda\n";
  for (const auto& s : traj.snapshots) {
    const auto& m = s.moments;
    out += fmt17(s.time());
    for (double c : m.V1) out += "," + fmt17(c);
    for (double c : m.X1) out += "," + fmt17(c);
    for (double c : {m.V2, m.X2, m.Gf, m.Gamma, m.support_radius, s.lambda}) out += "," + fmt17(c);
    out += '\n';
  }
  return out;
}

}  // namespace flockkin::harness
