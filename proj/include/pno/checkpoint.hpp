#ifndef PNO_CHECKPOINT_HPP
#define PNO_CHECKPOINT_HPP

#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pno/io.hpp"
#include "pno/model.hpp"

namespace pno {

// ---------------------------------------------------------------------------
// EIKM checkpoint container.
//
//   magic   "EIKM"
//   version u32 LE       1
//   count   u32 LE       number of tensors
//   count x { name_len u32 LE, name bytes, EIKF blob }
//   meta_len u32 LE
//   metadata             plain text, one key=value per '\n' line
//
// Tensor order and metadata line order are fixed by the writer, so equal
// models serialize to identical bytes.
// ---------------------------------------------------------------------------

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

inline void write_eikm(std::ostream& out, const std::vector<NamedTensor>& tensors,
                       const std::string& meta, std::uint32_t payload_version = 1) {
  out.write("EIKM", 4);
  detail::put_u32(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    detail::put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    write_eikf(out, t.dims, t.values, payload_version);
  }
  detail::put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
}

struct EikmFile {
  std::vector<NamedTensor> tensors;
  std::map<std::string, std::string> meta;
};

inline EikmFile read_eikm(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "EIKM")
    throw std::runtime_error("eikm: bad magic");
  if (detail::get_u32(in) != 1) throw std::runtime_error("eikm: bad version");
  const std::uint32_t count = detail::get_u32(in);
  EikmFile f;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t name_len = detail::get_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw std::runtime_error("eikm: truncated name");
    EikfBlob blob = read_eikf(in);
    f.tensors.push_back({std::move(name), std::move(blob.dims), std::move(blob.values)});
  }
  const std::uint32_t meta_len = detail::get_u32(in);
  std::string meta(meta_len, '\0');
  in.read(meta.data(), meta_len);
  if (!in) throw std::runtime_error("eikm: truncated metadata");
  std::istringstream ms(meta);
  std::string line;
  while (std::getline(ms, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("eikm: bad metadata line");
    f.meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return f;
}

namespace ckptdetail {

// 17 significant digits round-trip any double exactly
inline std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

inline double meta_double(const std::map<std::string, std::string>& m,
                          const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw std::runtime_error("eikm: missing key " + key);
  return std::stod(it->second);
}

inline int meta_int(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw std::runtime_error("eikm: missing key " + key);
  return std::stoi(it->second);
}

inline std::string meta_str(const std::map<std::string, std::string>& m,
                            const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw std::runtime_error("eikm: missing key " + key);
  return it->second;
}

inline std::string head_dims_str(const std::vector<int>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(dims[i]);
  }
  return s;
}

inline std::vector<int> parse_dims(const std::string& s) {
  std::vector<int> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

template <typename Model>
void fill_from_file(Model& m, const EikmFile& f) {
  auto refs = collect_params(m);
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& t : f.tensors) by_name[t.name] = &t;
  for (auto& r : refs) {
    auto it = by_name.find(r.name);
    if (it == by_name.end())
      throw std::runtime_error("eikm: missing tensor " + r.name);
    if (it->second->values.size() != r.count)
      throw std::runtime_error("eikm: size mismatch for " + r.name);
    for (std::size_t k = 0; k < r.count; ++k) r.data[k] = it->second->values[k];
  }
}

template <typename Model>
std::vector<NamedTensor> dump_tensors(Model& m) {
  std::vector<NamedTensor> out;
  for (const auto& r : collect_params(m)) {
    NamedTensor t;
    t.name = r.name;
    t.dims = r.dims;
    t.values.assign(r.data, r.data + r.count);
    out.push_back(std::move(t));
  }
  return out;
}

inline std::string model_meta(const SdfModel& m) {
  std::string meta;
  meta += "kind=sdf\n";
  meta += "channels=" + std::to_string(m.cfg.channels) + "\n";
  meta += "layers=" + std::to_string(m.cfg.layers) + "\n";
  meta += "modes=" + std::to_string(m.cfg.modes) + "\n";
  meta += "lift_hidden=" + std::to_string(m.cfg.lift_hidden) + "\n";
  meta += "cell_size_train=" + fmt(m.cell_size_train) + "\n";
  return meta;
}

inline std::string model_meta(const ValueModel& m) {
  std::string meta;
  meta += "kind=value\n";
  meta += "arch=" + arch_name(m.arch) + "\n";
  meta += "channels=" + std::to_string(m.cfg.channels) + "\n";
  meta += "layers=" + std::to_string(m.cfg.layers) + "\n";
  meta += "modes=" + std::to_string(m.cfg.modes) + "\n";
  meta += "lift_hidden=" + std::to_string(m.cfg.lift_hidden) + "\n";
  meta += "head_hidden=" + head_dims_str(m.cfg.head_hidden) + "\n";
  meta += "beta=" + fmt(m.beta) + "\n";
  meta += "cell_size_train=" + fmt(m.cell_size_train) + "\n";
  return meta;
}

}  // namespace ckptdetail

// extra: caller metadata appended verbatim (key=value lines, may be empty).
// Weights are stored at full precision so a loaded model reproduces the
// trained one bit for bit.
inline void save_sdf_model(std::ostream& out, SdfModel& m,
                           const std::string& extra = "") {
  write_eikm(out, ckptdetail::dump_tensors(m), ckptdetail::model_meta(m) + extra,
             /*payload_version=*/2);
}

inline SdfModel load_sdf_model(const EikmFile& f) {
  if (ckptdetail::meta_str(f.meta, "kind") != "sdf")
    throw std::runtime_error("eikm: not an sdf checkpoint");
  OperatorConfig cfg;
  cfg.channels = ckptdetail::meta_int(f.meta, "channels");
  cfg.layers = ckptdetail::meta_int(f.meta, "layers");
  cfg.modes = ckptdetail::meta_int(f.meta, "modes");
  cfg.lift_hidden = ckptdetail::meta_int(f.meta, "lift_hidden");
  SdfModel m(cfg);
  m.cell_size_train = ckptdetail::meta_double(f.meta, "cell_size_train");
  ckptdetail::fill_from_file(m, f);
  return m;
}

inline SdfModel load_sdf_model(std::istream& in) {
  return load_sdf_model(read_eikm(in));
}

inline void save_value_model(std::ostream& out, ValueModel& m,
                             const std::string& extra = "") {
  write_eikm(out, ckptdetail::dump_tensors(m), ckptdetail::model_meta(m) + extra,
             /*payload_version=*/2);
}

inline ValueModel load_value_model(const EikmFile& f) {
  if (ckptdetail::meta_str(f.meta, "kind") != "value")
    throw std::runtime_error("eikm: not a value checkpoint");
  OperatorConfig cfg;
  cfg.channels = ckptdetail::meta_int(f.meta, "channels");
  cfg.layers = ckptdetail::meta_int(f.meta, "layers");
  cfg.modes = ckptdetail::meta_int(f.meta, "modes");
  cfg.lift_hidden = ckptdetail::meta_int(f.meta, "lift_hidden");
  cfg.head_hidden = ckptdetail::parse_dims(ckptdetail::meta_str(f.meta, "head_hidden"));
  ValueModel m(arch_from_name(ckptdetail::meta_str(f.meta, "arch")), cfg);
  m.beta = ckptdetail::meta_double(f.meta, "beta");
  m.cell_size_train = ckptdetail::meta_double(f.meta, "cell_size_train");
  ckptdetail::fill_from_file(m, f);
  return m;
}

inline ValueModel load_value_model(std::istream& in) {
  return load_value_model(read_eikm(in));
}

}  // namespace pno

#endif  // PNO_CHECKPOINT_HPP
