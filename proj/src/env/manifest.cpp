#include "activeview/env/manifest.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "activeview/errors.hpp"
#include "activeview/nets/serialize.hpp"

namespace activeview {

using nlohmann::json;

namespace {

const char* split_name(Split s) { return s == Split::kTrain ? "train" : "test"; }

std::filesystem::path sidecar_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  p.replace_extension(".bin");
  return p;
}

}  // namespace

void save_manifest(const Dataset& data, const std::filesystem::path& path, PayloadMode mode) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());

  json header = {{"version", kManifestVersion},
                 {"C", data.classes},
                 {"V", data.view_count()},
                 {"feature_dim", data.feature_dim()},
                 {"class_names", data.class_names},
                 {"view_names", data.view_names},
                 {"split", split_name(data.split)}};
  if (!data.class_groups.empty()) header["class_groups"] = data.class_groups;
  out << header.dump() << '\n';

  std::ofstream sidecar;
  const auto bin = sidecar_path(path);
  if (mode == PayloadMode::kSidecar) {
    sidecar.open(bin, std::ios::binary);
    if (!sidecar) throw std::runtime_error("cannot write " + bin.string());
  }
  std::uint64_t offset = 0;
  for (Index i = 0; i < data.size(); ++i) {
    json views = json::object();
    for (Index v = 0; v < data.view_count(); ++v) {
      const auto row = data.views[v].row(i);
      if (mode == PayloadMode::kInline) {
        std::vector<double> values(row.begin(), row.end());
        views[std::to_string(v)] = values;
      } else {
        views[std::to_string(v)] = {{"file", bin.filename().string()}, {"offset", offset}};
        for (double x : row) io::write_f64(sidecar, x);
        offset += static_cast<std::uint64_t>(row.size());
      }
    }
    json record = {{"id", data.ids[i]}, {"label", data.labels[i]}, {"views", std::move(views)}};
    out << record.dump() << '\n';
  }
}

namespace {

class SidecarCache {
 public:
  explicit SidecarCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::vector<double> read(const std::string& file, std::uint64_t offset, Index dim) {
    auto it = files_.find(file);
    if (it == files_.end()) {
      std::ifstream in(dir_ / file, std::ios::binary);
      if (!in) throw SchemaError("manifest: cannot open feature file " + file);
      std::vector<double> values;
      while (in.peek() != std::char_traits<char>::eof()) values.push_back(io::read_f64(in));
      it = files_.emplace(file, std::move(values)).first;
    }
    const auto& values = it->second;
    if (offset + static_cast<std::uint64_t>(dim) > values.size())
      throw SchemaError("manifest: feature file " + file + " too short for offset " + std::to_string(offset));
    return {values.begin() + static_cast<std::ptrdiff_t>(offset),
            values.begin() + static_cast<std::ptrdiff_t>(offset + static_cast<std::uint64_t>(dim))};
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::vector<double>> files_;
};

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw SchemaError("manifest: " + where + " lacks field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError("manifest: " + where + " field '" + key + "': " + e.what());
  }
}

}  // namespace

Dataset load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("manifest: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("manifest: empty file " + path.string());

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("manifest: header is not JSON: ") + e.what());
  }
  const int version = field<int>(header, "version", "header");
  if (version != kManifestVersion) throw SchemaError("manifest: unsupported version " + std::to_string(version));
  Dataset d;
  d.classes = field<Index>(header, "C", "header");
  const Index view_count = field<Index>(header, "V", "header");
  const Index dim = field<Index>(header, "feature_dim", "header");
  if (d.classes < 1 || view_count < 1 || dim < 1) throw SchemaError("manifest: C, V and feature_dim must be positive");
  d.class_names = field<std::vector<std::string>>(header, "class_names", "header");
  d.view_names = field<std::vector<std::string>>(header, "view_names", "header");
  if (static_cast<Index>(d.class_names.size()) != d.classes) throw SchemaError("manifest: class_names length != C");
  if (static_cast<Index>(d.view_names.size()) != view_count) throw SchemaError("manifest: view_names length != V");
  if (header.contains("split")) d.split = header["split"] == "test" ? Split::kTest : Split::kTrain;
  if (header.contains("class_groups")) d.class_groups = field<std::vector<Index>>(header, "class_groups", "header");

  SidecarCache sidecars(path.parent_path());
  std::vector<std::vector<VectorXd>> rows(static_cast<std::size_t>(view_count));
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError("manifest: line " + std::to_string(line_no) + " is not JSON: " + e.what());
    }
    const std::string id = field<std::string>(record, "id", "line " + std::to_string(line_no));
    const Index label = field<Index>(record, "label", "sample " + id);
    if (label < 0 || label >= d.classes)
      throw SchemaError("manifest: sample " + id + " has label " + std::to_string(label) + " outside [0, " +
                        std::to_string(d.classes) + ")");
    const json views = field<json>(record, "views", "sample " + id);
    if (!views.is_object()) throw SchemaError("manifest: sample " + id + " views is not an object");
    for (Index v = 0; v < view_count; ++v) {
      const std::string key = std::to_string(v);
      if (!views.contains(key)) throw AlignmentError("manifest: sample " + id + " is missing view " + key);
    }
    if (static_cast<Index>(views.size()) != view_count)
      throw SchemaError("manifest: sample " + id + " has view ids outside [0, V)");
    for (Index v = 0; v < view_count; ++v) {
      const json& payload = views[std::to_string(v)];
      std::vector<double> values;
      if (payload.is_array()) {
        values = payload.get<std::vector<double>>();
      } else if (payload.is_object()) {
        values = sidecars.read(field<std::string>(payload, "file", "sample " + id),
                               field<std::uint64_t>(payload, "offset", "sample " + id), dim);
      } else {
        throw SchemaError("manifest: sample " + id + " view " + std::to_string(v) + " has an unknown payload");
      }
      if (static_cast<Index>(values.size()) != dim)
        throw SchemaError("manifest: sample " + id + " view " + std::to_string(v) + " has dimension " +
                          std::to_string(values.size()) + ", expected " + std::to_string(dim));
      rows[v].push_back(Eigen::Map<const VectorXd>(values.data(), dim));
    }
    d.ids.push_back(id);
    d.labels.push_back(label);
  }

  d.views.assign(static_cast<std::size_t>(view_count), MatrixXd(d.size(), dim));
  for (Index v = 0; v < view_count; ++v)
    for (Index i = 0; i < d.size(); ++i) d.views[v].row(i) = rows[v][i].transpose();
  d.validate();
  return d;
}

}  // namespace activeview
