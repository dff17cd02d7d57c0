#ifndef ACTIVEVIEW_NETS_SERIALIZE_HPP_
#define ACTIVEVIEW_NETS_SERIALIZE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "activeview/nets/model.hpp"

namespace activeview {

/// Parameter block layout (all integers little-endian):
///   "AVMP" | u32 version | u32 extractor kind | u32 section count
///   per section: str name | u32 tensor count
///     per tensor: str name | u64 rows | u64 cols | rows*cols f64, row-major
/// where str is u32 length followed by bytes. Sections appear in the order
/// extractor (MLP only), gru_e, gru_s, classifier, actor, value.
inline constexpr std::uint32_t kParamsFormatVersion = 1;

void write_params(std::ostream& out, const ModelParams<double>& params);
ModelParams<double> read_params(std::istream& in);

namespace io {

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_str(std::ostream& out, const std::string& s);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_str(std::istream& in);

}  // namespace io

}  // namespace activeview

#endif  // ACTIVEVIEW_NETS_SERIALIZE_HPP_
