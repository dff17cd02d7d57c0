#include "activeview/nets/serialize.hpp"

#include <bit>
#include <istream>
#include <map>
#include <ostream>
#include <vector>

namespace activeview {
namespace io {

namespace {

template <typename U>
void write_le(std::ostream& out, U v) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, sizeof(U));
}

template <typename U>
U read_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw SchemaError("truncated binary stream");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }

void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t>(in); }
double read_f64(std::istream& in) { return std::bit_cast<double>(read_le<std::uint64_t>(in)); }

std::string read_str(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  if (n > (1u << 20)) throw SchemaError("implausible string length in binary stream");
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw SchemaError("truncated binary stream");
  return s;
}

}  // namespace io

namespace {

struct Section {
  std::string name;
  std::vector<std::pair<std::string, const MatrixXd*>> tensors;
};

std::vector<Section> sections_of(const ModelParams<double>& params) {
  std::vector<Section> sections;
  auto& m = const_cast<ModelParams<double>&>(params);
  for_each_param(m, [&](Component c, std::string_view name, MatrixXd& t, std::string_view prefix) {
    const std::string section(section_name(c));
    if (sections.empty() || sections.back().name != section) sections.push_back({section, {}});
    sections.back().tensors.emplace_back(std::string(prefix) + std::string(name), &t);
  });
  return sections;
}

}  // namespace

void write_params(std::ostream& out, const ModelParams<double>& params) {
  out.write("AVMP", 4);
  io::write_u32(out, kParamsFormatVersion);
  io::write_u32(out, static_cast<std::uint32_t>(params.extractor_kind));
  const auto sections = sections_of(params);
  io::write_u32(out, static_cast<std::uint32_t>(sections.size()));
  for (const auto& section : sections) {
    io::write_str(out, section.name);
    io::write_u32(out, static_cast<std::uint32_t>(section.tensors.size()));
    for (const auto& [name, t] : section.tensors) {
      io::write_str(out, name);
      io::write_u64(out, static_cast<std::uint64_t>(t->rows()));
      io::write_u64(out, static_cast<std::uint64_t>(t->cols()));
      for (Index i = 0; i < t->rows(); ++i)
        for (Index j = 0; j < t->cols(); ++j) io::write_f64(out, (*t)(i, j));
    }
  }
}

ModelParams<double> read_params(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "AVMP") throw SchemaError("parameter block: bad magic");
  const std::uint32_t version = io::read_u32(in);
  if (version != kParamsFormatVersion)
    throw SchemaError("parameter block: unsupported version " + std::to_string(version));
  const std::uint32_t kind = io::read_u32(in);
  if (kind > 1) throw SchemaError("parameter block: unknown extractor kind");

  std::map<std::string, MatrixXd> loaded;
  const std::uint32_t section_count = io::read_u32(in);
  for (std::uint32_t s = 0; s < section_count; ++s) {
    const std::string section = io::read_str(in);
    const std::uint32_t tensor_count = io::read_u32(in);
    for (std::uint32_t k = 0; k < tensor_count; ++k) {
      const std::string name = io::read_str(in);
      const std::uint64_t rows = io::read_u64(in);
      const std::uint64_t cols = io::read_u64(in);
      if (rows > (1u << 24) || cols > (1u << 24)) throw SchemaError("parameter block: implausible tensor shape");
      MatrixXd t(static_cast<Index>(rows), static_cast<Index>(cols));
      for (Index i = 0; i < t.rows(); ++i)
        for (Index j = 0; j < t.cols(); ++j) t(i, j) = io::read_f64(in);
      loaded.emplace(section + "/" + name, std::move(t));
    }
  }

  ModelParams<double> params;
  params.extractor_kind = static_cast<ExtractorKind>(kind);
  std::size_t used = 0;
  for_each_param(params, [&](Component c, std::string_view name, MatrixXd& t, std::string_view prefix) {
    const std::string key = std::string(section_name(c)) + "/" + std::string(prefix) + std::string(name);
    auto it = loaded.find(key);
    if (it == loaded.end()) throw SchemaError("parameter block: missing tensor " + key);
    t = std::move(it->second);
    ++used;
  });
  if (used != loaded.size()) throw SchemaError("parameter block: unexpected extra tensors");
  return params;
}

}  // namespace activeview
