#include "lcm/io_formats.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace lcm {
namespace {

constexpr std::array<char, 4> kMagic = {'F', 'M', 'X', '1'};

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string() + " for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FormatError("write failed for " + path.string());
  }
}

double parse_csv_field(std::string_view field, std::size_t line,
                       std::size_t column) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first &&
         (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) {
    --last;
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw FormatError("CSV: cannot parse number at line " +
                      std::to_string(line) + ", field " +
                      std::to_string(column));
  }
  if (!std::isfinite(value)) {
    throw FormatError("CSV: non-finite value at line " + std::to_string(line) +
                      ", field " + std::to_string(column));
  }
  return value;
}

std::vector<double> require_double_array(const nlohmann::json& j,
                                         const char* key, std::size_t dim) {
  const auto& arr = j.at(key);
  if (!arr.is_array()) {
    throw FormatError(std::string("model file: \"") + key +
                      "\" must be an array");
  }
  if (arr.size() != dim) {
    throw FormatError(std::string("model file: \"") + key + "\" has length " +
                      std::to_string(arr.size()) + ", expected dim = " +
                      std::to_string(dim));
  }
  std::vector<double> out;
  out.reserve(dim);
  for (const auto& x : arr) {
    if (!x.is_number()) {
      throw FormatError(std::string("model file: \"") + key +
                        "\" contains a non-numeric entry");
    }
    const double v = x.get<double>();
    if (!std::isfinite(v)) {
      throw FormatError(std::string("model file: \"") + key +
                        "\" contains a non-finite entry");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

FeatureBatch read_feature_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
    std::string found;
    for (std::size_t i = 0; i < std::min<std::size_t>(4, bytes.size()); ++i) {
      char hex[8];
      std::snprintf(hex, sizeof(hex), "%02x", static_cast<unsigned char>(bytes[i]));
      if (!found.empty()) found += ' ';
      found += hex;
    }
    throw FormatError(path.string() +
                      ": bad magic (expected \"FMX1\", found bytes [" + found +
                      "])");
  }
  if (bytes.size() < 20) {
    throw FormatError(path.string() + ": truncated header (" +
                      std::to_string(bytes.size()) + " bytes, need 20)");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = get_u64_le(p + 4);
  const std::uint64_t cols = get_u64_le(p + 12);
  if (rows == 0 || cols == 0) {
    throw FormatError(path.string() + ": n_rows and n_cols must be >= 1 (got " +
                      std::to_string(rows) + " x " + std::to_string(cols) + ")");
  }
  const std::uint64_t expected = 20 + rows * cols * 8;
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": payload size mismatch (file has " +
                      std::to_string(bytes.size()) + " bytes, header implies " +
                      std::to_string(expected) + ")");
  }
  FeatureBatch b;
  b.n = rows;
  b.c = cols;
  b.centered = false;
  b.data.resize(rows * cols);
  for (std::size_t i = 0; i < b.data.size(); ++i) {
    const std::uint64_t bits = get_u64_le(p + 20 + 8 * i);
    const double v = std::bit_cast<double>(bits);
    if (!std::isfinite(v)) {
      throw FormatError(path.string() + ": non-finite value at row " +
                        std::to_string(i / cols) + ", col " +
                        std::to_string(i % cols));
    }
    b.data[i] = v;
  }
  return b;
}

void write_feature_matrix(const std::filesystem::path& path,
                          const FeatureBatch& b) {
  b.validate_shape();
  for (std::size_t i = 0; i < b.data.size(); ++i) {
    if (!std::isfinite(b.data[i])) {
      throw std::invalid_argument(
          "write_feature_matrix: non-finite value at row " +
          std::to_string(i / b.c) + ", col " + std::to_string(i % b.c));
    }
  }
  std::string bytes;
  bytes.reserve(20 + b.data.size() * 8);
  bytes.append(kMagic.data(), 4);
  put_u64_le(bytes, b.n);
  put_u64_le(bytes, b.c);
  for (double v : b.data) put_u64_le(bytes, std::bit_cast<std::uint64_t>(v));
  write_file_bytes(path, bytes);
}

FeatureBatch read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open " + path.string() + " for reading");
  }
  FeatureBatch b;
  b.centered = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) {
      if (in.peek() == EOF) break;  // trailing newline
      throw FormatError(path.string() + ": empty line " +
                        std::to_string(line_no));
    }
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t field_no = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      ++field_no;
      row.push_back(parse_csv_field(
          std::string_view(line).substr(start, end - start), line_no, field_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (b.c == 0) {
      b.c = row.size();
    } else if (row.size() != b.c) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        " has " + std::to_string(row.size()) +
                        " fields, expected " + std::to_string(b.c));
    }
    b.data.insert(b.data.end(), row.begin(), row.end());
    ++b.n;
  }
  if (b.n == 0) {
    throw FormatError(path.string() + ": no data rows");
  }
  return b;
}

FeatureBatch load_features(const std::filesystem::path& path) {
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw FormatError("cannot open " + path.string() + " for reading");
    }
    char head[4] = {0, 0, 0, 0};
    in.read(head, 4);
    if (in.gcount() == 4 && std::memcmp(head, kMagic.data(), 4) == 0) {
      return read_feature_matrix(path);
    }
  }
  return read_csv_matrix(path);
}

LcmParams read_model(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    // parse_error for syntax, out_of_range for number overflow; both mean
    // the document is not a readable model file.
    throw FormatError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) {
    throw FormatError(path.string() + ": model file must be a JSON object");
  }
  static constexpr const char* kKeys[] = {"version", "dim", "eps", "mu",
                                          "u",       "w",   "a"};
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || item.key() == k;
    if (!known) {
      throw FormatError(path.string() + ": unknown member \"" + item.key() +
                        "\"");
    }
  }
  for (const char* k : kKeys) {
    if (!j.contains(k)) {
      throw FormatError(path.string() + ": missing member \"" + k + "\"");
    }
  }
  if (!j["version"].is_number_integer() || j["version"].get<std::int64_t>() != 1) {
    throw FormatError(path.string() + ": unsupported model file version " +
                      j["version"].dump() + " (this build reads version 1)");
  }
  if (!j["dim"].is_number_integer() || j["dim"].get<std::int64_t>() < 1) {
    throw FormatError(path.string() + ": \"dim\" must be a positive integer");
  }
  const auto dim = static_cast<std::size_t>(j["dim"].get<std::int64_t>());
  if (!j["eps"].is_number()) {
    throw FormatError(path.string() + ": \"eps\" must be a number");
  }
  LcmParams p;
  p.eps = j["eps"].get<double>();
  if (!(p.eps > 0.0) || !std::isfinite(p.eps)) {
    throw FormatError(path.string() + ": \"eps\" must be positive and finite");
  }
  p.mu = require_double_array(j, "mu", dim);
  p.u = require_double_array(j, "u", dim);
  p.w = require_double_array(j, "w", dim);
  p.a = require_double_array(j, "a", dim);
  return p;
}

void write_model(const std::filesystem::path& path, const LcmParams& p) {
  p.validate();
  // nlohmann::json keeps object members sorted by key, and doubles are
  // printed with shortest round-trip precision, so the output is
  // byte-deterministic and write -> read -> write is the identity.
  nlohmann::json j;
  j["version"] = 1;
  j["dim"] = p.dim();
  j["eps"] = p.eps;
  j["mu"] = p.mu;
  j["u"] = p.u;
  j["w"] = p.w;
  j["a"] = p.a;
  write_file_bytes(path, j.dump(2) + "\n");
}

}  // namespace lcm
