#include "gsphys/io/ply.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gsphys/core/error.hpp"
#include "le_bytes.hpp"

namespace gsphys::io {
namespace {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<PlyType> parse_type(const std::string& name) {
  static const std::map<std::string, PlyType> table = {
      {"char", PlyType::i8},    {"int8", PlyType::i8},     {"uchar", PlyType::u8},
      {"uint8", PlyType::u8},   {"short", PlyType::i16},   {"int16", PlyType::i16},
      {"ushort", PlyType::u16}, {"uint16", PlyType::u16},  {"int", PlyType::i32},
      {"int32", PlyType::i32},  {"uint", PlyType::u32},    {"uint32", PlyType::u32},
      {"float", PlyType::f32},  {"float32", PlyType::f32}, {"double", PlyType::f64},
      {"float64", PlyType::f64}};
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

double read_value(const std::uint8_t* p, PlyType t) {
  switch (t) {
    case PlyType::i8: return static_cast<std::int8_t>(p[0]);
    case PlyType::u8: return p[0];
    case PlyType::i16: return static_cast<std::int16_t>(le::get_u16(p));
    case PlyType::u16: return le::get_u16(p);
    case PlyType::i32: return static_cast<std::int32_t>(le::get_u32(p));
    case PlyType::u32: return le::get_u32(p);
    case PlyType::f32: return le::get_f32(p);
    case PlyType::f64: return le::get_f64(p);
  }
  return 0.0;
}

struct Property {
  std::string name;
  PlyType type;
  std::size_t offset;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
  std::size_t stride = 0;
};

}  // namespace

GaussianSet load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open PLY file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw Error(Errc::unsupported_format, "'" + path.string() + "' is not a PLY file");
  }

  std::vector<Element> elements;
  bool saw_format = false;
  while (true) {
    if (!std::getline(in, line)) throw Error(Errc::truncated, "PLY header is not terminated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian") {
        throw Error(Errc::unsupported_format, "PLY format '" + fmt + "' is not supported (binary_little_endian only)");
      }
      saw_format = true;
    } else if (keyword == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (elements.empty()) throw Error(Errc::schema, "PLY property declared before any element");
      std::string type_name, name;
      ls >> type_name;
      if (type_name == "list") throw Error(Errc::unsupported_format, "PLY list properties are not supported");
      ls >> name;
      auto type = parse_type(type_name);
      if (!type) throw Error(Errc::unsupported_format, "unknown PLY property type '" + type_name + "'");
      Element& e = elements.back();
      e.props.push_back({name, *type, e.stride});
      e.stride += type_size(*type);
    }
    // comment / obj_info lines are ignored
  }
  if (!saw_format) throw Error(Errc::unsupported_format, "PLY header lacks a format line");

  std::size_t skip = 0;
  const Element* vertex = nullptr;
  for (const Element& e : elements) {
    if (e.name == "vertex") {
      vertex = &e;
      break;
    }
    skip += e.count * e.stride;
  }
  if (vertex == nullptr) throw Error(Errc::schema, "PLY file has no vertex element");

  std::map<std::string, const Property*> by_name;
  for (const Property& p : vertex->props) by_name[p.name] = &p;
  auto require = [&](const std::string& name) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error(Errc::schema, "PLY is missing required property '" + name + "'");
    return it->second;
  };
  auto optional = [&](const std::string& name) -> const Property* {
    auto it = by_name.find(name);
    return it == by_name.end() ? nullptr : it->second;
  };

  const Property* pos[3] = {require("x"), require("y"), require("z")};
  const Property* dc[3] = {require("f_dc_0"), require("f_dc_1"), require("f_dc_2")};
  const Property* opacity = require("opacity");
  const Property* scale[3] = {require("scale_0"), require("scale_1"), require("scale_2")};
  const Property* rot[4] = {require("rot_0"), require("rot_1"), require("rot_2"), require("rot_3")};
  const Property* rest[45];
  for (int i = 0; i < 45; ++i) rest[i] = optional("f_rest_" + std::to_string(i));

  in.seekg(static_cast<std::streamoff>(skip), std::ios::cur);
  std::vector<std::uint8_t> payload(vertex->count * vertex->stride);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size() || !in) {
    throw Error(Errc::truncated, "PLY payload truncated: expected " + std::to_string(payload.size()) +
                                     " bytes of vertex data");
  }

  GaussianSet set;
  set.gaussians.resize(vertex->count);
  for (std::size_t i = 0; i < vertex->count; ++i) {
    const std::uint8_t* row = payload.data() + i * vertex->stride;
    auto get = [&](const Property* p) { return read_value(row + p->offset, p->type); };
    Gaussian& g = set.gaussians[i];
    for (int a = 0; a < 3; ++a) {
      g.center[a] = get(pos[a]);
      g.log_scale[a] = get(scale[a]);
      g.color[a] = static_cast<float>(get(dc[a]));
    }
    for (int a = 0; a < 4; ++a) g.rotation[a] = get(rot[a]);
    for (int r = 0; r < 45; ++r) g.color[3 + r] = rest[r] ? static_cast<float>(get(rest[r])) : 0.0f;
    g.opacity_logit = get(opacity);
  }
  set.select_all();
  return set;
}

void save_ply(const GaussianSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write PLY file '" + path.string() + "'");

  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\nelement vertex " << set.size() << "\n";
  for (const char* n : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"}) {
    header << "property float " << n << "\n";
  }
  for (int i = 0; i < 45; ++i) header << "property float f_rest_" << i << "\n";
  header << "property float opacity\n";
  for (int i = 0; i < 3; ++i) header << "property float scale_" << i << "\n";
  for (int i = 0; i < 4; ++i) header << "property float rot_" << i << "\n";
  header << "end_header\n";
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));

  constexpr std::size_t kFloats = 3 + 3 + 48 + 1 + 3 + 4;
  std::vector<std::uint8_t> row(kFloats * 4);
  for (const Gaussian& g : set.gaussians) {
    std::uint8_t* p = row.data();
    auto put = [&](double v) {
      le::put_f32(p, static_cast<float>(v));
      p += 4;
    };
    for (int a = 0; a < 3; ++a) put(g.center[a]);
    for (int a = 0; a < 3; ++a) put(0.0);
    for (float c : g.color) put(c);
    put(g.opacity_logit);
    for (int a = 0; a < 3; ++a) put(g.log_scale[a]);
    for (int a = 0; a < 4; ++a) put(g.rotation[a]);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error(Errc::io, "failed writing PLY file '" + path.string() + "'");
}

}  // namespace gsphys::io
