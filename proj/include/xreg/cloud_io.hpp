#ifndef XREG_CLOUD_IO_HPP_
#define XREG_CLOUD_IO_HPP_

// PLY (ASCII and binary little-endian) and OFF readers/writers for point
// clouds with optional triangle faces.

#include "xreg/geometry.hpp"

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace xreg {

enum class CloudFormat { kPlyAscii, kPlyBinaryLE, kOff };

inline std::string to_string(CloudFormat f) {
  switch (f) {
    case CloudFormat::kPlyAscii: return "ply-ascii";
    case CloudFormat::kPlyBinaryLE: return "ply-binary-le";
    case CloudFormat::kOff: return "off";
  }
  return "unknown";
}

inline CloudFormat parse_format(const std::string& s) {
  if (s == "ply-ascii") return CloudFormat::kPlyAscii;
  if (s == "ply-binary-le" || s == "ply") return CloudFormat::kPlyBinaryLE;
  if (s == "off") return CloudFormat::kOff;
  throw Error("io", "unknown cloud format '" + s + "'");
}

namespace detail {

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

inline bool ply_type_from_name(const std::string& name, PlyType& out) {
  static const std::pair<const char*, PlyType> kTable[] = {
      {"char", PlyType::kInt8},     {"int8", PlyType::kInt8},      {"uchar", PlyType::kUInt8},
      {"uint8", PlyType::kUInt8},   {"short", PlyType::kInt16},    {"int16", PlyType::kInt16},
      {"ushort", PlyType::kUInt16}, {"uint16", PlyType::kUInt16},  {"int", PlyType::kInt32},
      {"int32", PlyType::kInt32},   {"uint", PlyType::kUInt32},    {"uint32", PlyType::kUInt32},
      {"float", PlyType::kFloat32}, {"float32", PlyType::kFloat32}, {"double", PlyType::kFloat64},
      {"float64", PlyType::kFloat64}};
  for (const auto& [n, t] : kTable) {
    if (name == n) {
      out = t;
      return true;
    }
  }
  return false;
}

inline std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8: return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16: return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
  PlyType count_type = PlyType::kUInt8;
  PlyType value_type = PlyType::kFloat32;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

// Little-endian host assumed for binary I/O; checked at compile time.
static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::size_t offset, const std::string& path)
      : in_(in), offset_(offset), path_(path) {}

  double read(PlyType t) {
    unsigned char buf[8];
    const std::size_t n = ply_type_size(t);
    in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error("io", path_ + ": unexpected end of binary data at byte " + std::to_string(offset_));
    }
    offset_ += n;
    switch (t) {
      case PlyType::kInt8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
      case PlyType::kUInt8: return static_cast<double>(buf[0]);
      case PlyType::kInt16: return static_cast<double>(load<std::int16_t>(buf));
      case PlyType::kUInt16: return static_cast<double>(load<std::uint16_t>(buf));
      case PlyType::kInt32: return static_cast<double>(load<std::int32_t>(buf));
      case PlyType::kUInt32: return static_cast<double>(load<std::uint32_t>(buf));
      case PlyType::kFloat32: return static_cast<double>(load<float>(buf));
      case PlyType::kFloat64: return load<double>(buf);
    }
    return 0.0;
  }

  std::size_t offset() const { return offset_; }

 private:
  template <typename T>
  static T load(const unsigned char* buf) {
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::istream& in_;
  std::size_t offset_;
  const std::string& path_;
};

class AsciiReader {
 public:
  AsciiReader(std::istream& in, std::size_t line, const std::string& path)
      : in_(in), line_(line), path_(path) {}

  // Tokens are consumed line by line so errors can name the line.
  double read() {
    std::string tok;
    while (!(tokens_ >> tok)) {
      std::string line;
      if (!std::getline(in_, line)) {
        throw Error("io", path_ + ": unexpected end of file at line " + std::to_string(line_));
      }
      ++line_;
      tokens_.clear();
      tokens_.str(line);
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
      throw Error("io", path_ + ": malformed number '" + tok + "' at line " + std::to_string(line_));
    }
    return v;
  }

  // Subsequent reads begin on a fresh line.
  void end_record() {
    tokens_.clear();
    tokens_.str("");
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_;
  const std::string& path_;
  std::istringstream tokens_;
};

inline void append_polygon(std::vector<Face>& faces, const std::vector<int>& poly) {
  for (std::size_t k = 2; k < poly.size(); ++k) faces.push_back({poly[0], poly[k - 1], poly[k]});
}

inline PointCloud load_ply(std::istream& in, const std::string& path) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != "ply") throw Error("io", path + ": missing 'ply' magic at line 1");

  std::string format;
  std::vector<PlyElement> elements;
  for (;;) {
    if (!next_line()) throw Error("io", path + ": header not terminated by end_header");
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key.empty() || key == "comment" || key == "obj_info") continue;
    if (key == "end_header") break;
    if (key == "format") {
      ls >> format;
      if (format == "binary_big_endian") {
        throw Error("io", path + ": big-endian binary PLY is not supported (line " + std::to_string(line_no) + ")");
      }
      if (format != "ascii" && format != "binary_little_endian") {
        throw Error("io", path + ": unknown PLY format '" + format + "' at line " + std::to_string(line_no));
      }
    } else if (key == "element") {
      PlyElement e;
      long long count = -1;
      ls >> e.name >> count;
      if (e.name.empty() || count < 0) {
        throw Error("io", path + ": malformed element declaration at line " + std::to_string(line_no));
      }
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (key == "property") {
      if (elements.empty()) throw Error("io", path + ": property before element at line " + std::to_string(line_no));
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string ct, vt;
        ls >> ct >> vt >> p.name;
        p.is_list = true;
        if (!ply_type_from_name(ct, p.count_type)) throw Error("io", path + ": unsupported property type '" + ct + "' at line " + std::to_string(line_no));
        if (!ply_type_from_name(vt, p.value_type)) throw Error("io", path + ": unsupported property type '" + vt + "' at line " + std::to_string(line_no));
      } else {
        ls >> p.name;
        if (!ply_type_from_name(type, p.value_type)) {
          throw Error("io", path + ": unsupported property type '" + type + "' at line " + std::to_string(line_no));
        }
      }
      elements.back().properties.push_back(p);
    } else {
      throw Error("io", path + ": unexpected header keyword '" + key + "' at line " + std::to_string(line_no));
    }
  }
  if (format.empty()) throw Error("io", path + ": header lacks a format line");

  PointCloud cloud;
  cloud.id = std::filesystem::path(path).stem().string();
  const bool binary = format == "binary_little_endian";
  const auto data_start = static_cast<std::size_t>(in.tellg());
  BinaryReader bin(in, data_start, path);
  AsciiReader txt(in, line_no, path);

  auto location = [&]() {
    return binary ? "byte " + std::to_string(bin.offset()) : "line " + std::to_string(txt.line());
  };

  for (const auto& e : elements) {
    int ix = -1, iy = -1, iz = -1, ilist = -1;
    for (std::size_t k = 0; k < e.properties.size(); ++k) {
      const auto& p = e.properties[k];
      if (e.name == "vertex" && !p.is_list) {
        if (p.name == "x") ix = static_cast<int>(k);
        if (p.name == "y") iy = static_cast<int>(k);
        if (p.name == "z") iz = static_cast<int>(k);
      }
      if (e.name == "face" && p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) {
        ilist = static_cast<int>(k);
      }
    }
    if (e.name == "vertex" && (ix < 0 || iy < 0 || iz < 0)) {
      throw Error("io", path + ": vertex element lacks x, y or z property");
    }
    std::vector<double> scalars(e.properties.size());
    std::vector<int> poly;
    for (std::size_t r = 0; r < e.count; ++r) {
      for (std::size_t k = 0; k < e.properties.size(); ++k) {
        const auto& p = e.properties[k];
        if (!p.is_list) {
          scalars[k] = binary ? bin.read(p.value_type) : txt.read();
          continue;
        }
        const double cnt = binary ? bin.read(p.count_type) : txt.read();
        if (cnt < 0 || cnt != std::floor(cnt)) throw Error("io", path + ": invalid list count at " + location());
        const auto n = static_cast<std::size_t>(cnt);
        if (static_cast<int>(k) == ilist) poly.assign(n, 0);
        for (std::size_t v = 0; v < n; ++v) {
          const double val = binary ? bin.read(p.value_type) : txt.read();
          if (static_cast<int>(k) == ilist) poly[v] = static_cast<int>(val);
        }
      }
      if (!binary) txt.end_record();
      if (e.name == "vertex") {
        cloud.points.emplace_back(scalars[ix], scalars[iy], scalars[iz]);
      } else if (e.name == "face" && ilist >= 0) {
        append_polygon(cloud.faces, poly);
      }
    }
  }
  validate(cloud, "io");
  return cloud;
}

inline PointCloud load_off(std::istream& in, const std::string& path) {
  std::size_t line_no = 0;
  std::string line;
  // Next non-empty, non-comment line.
  auto next_content = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_content()) throw Error("io", path + ": empty OFF file");
  std::istringstream head(line);
  std::string magic;
  head >> magic;
  if (magic != "OFF") throw Error("io", path + ": missing 'OFF' magic at line " + std::to_string(line_no));
  long long nv = -1, nf = -1, ne = 0;
  if (!(head >> nv >> nf)) {
    if (!next_content()) throw Error("io", path + ": missing OFF counts");
    std::istringstream counts(line);
    counts >> nv >> nf >> ne;
  }
  if (nv < 0 || nf < 0) throw Error("io", path + ": malformed OFF counts at line " + std::to_string(line_no));

  PointCloud cloud;
  cloud.id = std::filesystem::path(path).stem().string();
  cloud.points.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    if (!next_content()) throw Error("io", path + ": unexpected end of file in vertex list at line " + std::to_string(line_no));
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw Error("io", path + ": malformed vertex at line " + std::to_string(line_no));
    cloud.points.emplace_back(x, y, z);
  }
  std::vector<int> poly;
  for (long long f = 0; f < nf; ++f) {
    if (!next_content()) throw Error("io", path + ": unexpected end of file in face list at line " + std::to_string(line_no));
    std::istringstream ls(line);
    int k = 0;
    if (!(ls >> k) || k < 0) throw Error("io", path + ": malformed face at line " + std::to_string(line_no));
    poly.assign(static_cast<std::size_t>(k), 0);
    for (int v = 0; v < k; ++v) {
      if (!(ls >> poly[v])) throw Error("io", path + ": malformed face at line " + std::to_string(line_no));
    }
    append_polygon(cloud.faces, poly);
  }
  validate(cloud, "io");
  return cloud;
}

}  // namespace detail

inline PointCloud load_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", path + ": " + std::strerror(errno));
  if (format == CloudFormat::kOff) return detail::load_off(in, path);
  return detail::load_ply(in, path);  // the header names the PLY encoding
}

/// Picks the reader from the file's magic bytes.
inline PointCloud load_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", path + ": " + std::strerror(errno));
  char magic[3] = {0, 0, 0};
  in.read(magic, 3);
  in.close();
  if (std::string(magic, 3) == "OFF") return load_cloud(path, CloudFormat::kOff);
  return load_cloud(path, CloudFormat::kPlyBinaryLE);
}

inline void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format,
                       const std::vector<std::array<std::uint8_t, 3>>* colors = nullptr) {
  if (cloud.empty()) throw Error("io", "refusing to write an empty cloud to " + path);
  if (colors && colors->size() != cloud.size()) throw Error("io", "color count does not match point count");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", path + ": " + std::strerror(errno));

  if (format == CloudFormat::kOff) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "OFF\n" << cloud.size() << ' ' << cloud.faces.size() << " 0\n";
    for (const auto& p : cloud.points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const auto& f : cloud.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  } else {
    const bool binary = format == CloudFormat::kPlyBinaryLE;
    out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
    if (!cloud.id.empty()) out << "comment id " << cloud.id << '\n';
    out << "element vertex " << cloud.size() << '\n'
        << "property double x\nproperty double y\nproperty double z\n";
    if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (cloud.has_faces()) out << "element face " << cloud.faces.size() << "\nproperty list uchar int vertex_indices\n";
    out << "end_header\n";
    if (binary) {
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        out.write(reinterpret_cast<const char*>(cloud.points[i].data()), 3 * sizeof(double));
        if (colors) out.write(reinterpret_cast<const char*>((*colors)[i].data()), 3);
      }
      for (const auto& f : cloud.faces) {
        const std::uint8_t three = 3;
        out.write(reinterpret_cast<const char*>(&three), 1);
        const std::int32_t idx[3] = {f[0], f[1], f[2]};
        out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
      }
    } else {
      out << std::setprecision(std::numeric_limits<double>::max_digits10);
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        out << p.x() << ' ' << p.y() << ' ' << p.z();
        if (colors) out << ' ' << int((*colors)[i][0]) << ' ' << int((*colors)[i][1]) << ' ' << int((*colors)[i][2]);
        out << '\n';
      }
      for (const auto& f : cloud.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
  }
  out.flush();
  if (!out) throw Error("io", path + ": write failed: " + std::strerror(errno));
}

}  // namespace xreg

#endif  // XREG_CLOUD_IO_HPP_
