#pragma once

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "vrec/common.hpp"
#include "vrec/data.hpp"

namespace vrec {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Visual feature vectors, one row per catalog item (row index == item id).
struct FeatureStore {
  FeatureMatrix rows;

  int dim() const { return static_cast<int>(rows.cols()); }
  int count() const { return static_cast<int>(rows.rows()); }
  Vector row(int item) const {
    if (item < 0 || item >= count()) throw CatalogError("no feature row for item " + std::to_string(item));
    return rows.row(item).transpose().cast<double>();
  }
};

namespace io {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ParseError(std::string("truncated input reading ") + what);
  return v;
}

inline void expect_magic(std::istream& in, const char (&magic)[5]) {
  std::array<char, 4> got{};
  if (!in.read(got.data(), 4) || std::memcmp(got.data(), magic, 4) != 0)
    throw ParseError(std::string("bad magic, expected ") + magic);
}

}  // namespace io

inline constexpr char kFeatureMagic[5] = "VFSR";

// VFSR layout: magic, u32 count, u32 dim, count*dim f32 row-major (little-endian).
inline void write_vfsr(std::ostream& out, const FeatureMatrix& m) {
  out.write(kFeatureMagic, 4);
  io::write_pod(out, static_cast<std::uint32_t>(m.rows()));
  io::write_pod(out, static_cast<std::uint32_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
}

inline FeatureMatrix read_vfsr(std::istream& in) {
  io::expect_magic(in, kFeatureMagic);
  auto count = io::read_pod<std::uint32_t>(in, "item count");
  auto dim = io::read_pod<std::uint32_t>(in, "dimension");
  if (dim == 0) throw ParseError("feature dimension is zero");
  FeatureMatrix m(count, dim);
  if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float))))
    throw ParseError("truncated feature payload");
  if (!m.allFinite()) throw ParseError("non-finite value in feature file");
  return m;
}

inline std::vector<std::string> read_manifest(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto v = detail::trim(line);
    if (!v.empty()) ids.emplace_back(v);
  }
  return ids;
}

// Reorders raw rows (in manifest order) into catalog item order. Every catalog
// item needs a row; manifest entries the catalog does not know are dropped.
inline FeatureStore align_features(const Catalog& catalog, const std::vector<std::string>& manifest,
                                   const FeatureMatrix& raw) {
  if (static_cast<Eigen::Index>(manifest.size()) != raw.rows())
    throw ParseError("manifest has " + std::to_string(manifest.size()) + " ids but feature file has " +
                     std::to_string(raw.rows()) + " rows");
  std::vector<int> row_of(static_cast<std::size_t>(catalog.num_items()), -1);
  for (std::size_t r = 0; r < manifest.size(); ++r) {
    if (auto id = catalog.items.find(manifest[r])) {
      if (row_of[static_cast<std::size_t>(*id)] != -1)
        throw ParseError("duplicate manifest id '" + manifest[r] + "'");
      row_of[static_cast<std::size_t>(*id)] = static_cast<int>(r);
    }
  }
  FeatureStore fs;
  fs.rows.resize(catalog.num_items(), raw.cols());
  for (int i = 0; i < catalog.num_items(); ++i) {
    int r = row_of[static_cast<std::size_t>(i)];
    if (r < 0) throw CatalogError("item '" + catalog.items.name(i) + "' has no feature row");
    fs.rows.row(i) = raw.row(r);
  }
  return fs;
}

inline FeatureStore load_features(const Catalog& catalog, const std::string& vfsr_path,
                                  const std::string& manifest_path) {
  std::ifstream bin(vfsr_path, std::ios::binary);
  if (!bin) throw Error("cannot open feature file '" + vfsr_path + "'");
  std::ifstream man(manifest_path);
  if (!man) throw Error("cannot open manifest '" + manifest_path + "'");
  return align_features(catalog, read_manifest(man), read_vfsr(bin));
}

}  // namespace vrec
