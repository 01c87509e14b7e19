#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "vrec/common.hpp"
#include "vrec/data.hpp"
#include "vrec/demand.hpp"
#include "vrec/features.hpp"
#include "vrec/preference.hpp"

namespace vrec {

// DSPM container:
//   "DSPM" | u32 version | u32 model tag
//   u32 d | u32 F | u32 users | u32 items | u32 categories | u32 input contexts | u32 transition contexts
//   vocabularies: users, items, categories (u32 count, then u32 length + bytes each)
//   u32 block count, then per block: u32 name length + name, u32 rows, u32 cols,
//   rows*cols little-endian f64 in row-major order.
inline constexpr char kCheckpointMagic[5] = "DSPM";
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ModelTag : std::uint32_t { bpr = 0, vbpr = 1, deepstyle = 2, gru = 16, cagru = 17 };

inline ModelTag tag_of(PrefVariant v) { return static_cast<ModelTag>(static_cast<std::uint32_t>(v)); }
inline ModelTag tag_of(DemandKind k) { return k == DemandKind::gru ? ModelTag::gru : ModelTag::cagru; }

inline bool is_preference(ModelTag t) { return static_cast<std::uint32_t>(t) < 16; }

inline std::string to_string(ModelTag t) {
  switch (t) {
    case ModelTag::bpr: return "bpr";
    case ModelTag::vbpr: return "vbpr";
    case ModelTag::deepstyle: return "deepstyle";
    case ModelTag::gru: return "gru";
    case ModelTag::cagru: return "cagru";
  }
  return "unknown";
}

struct Checkpoint {
  ModelTag tag = ModelTag::deepstyle;
  std::vector<std::string> users, items, categories;
  std::variant<PrefParams, DemandParams> model;

  const PrefParams& preference() const {
    if (!std::holds_alternative<PrefParams>(model)) throw InvalidArgument("checkpoint holds a demand model");
    return std::get<PrefParams>(model);
  }
  const DemandParams& demand() const {
    if (!std::holds_alternative<DemandParams>(model)) throw InvalidArgument("checkpoint holds a preference model");
    return std::get<DemandParams>(model);
  }
};

namespace detail {

inline void write_string(std::ostream& out, const std::string& s) {
  io::write_pod(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
  auto n = io::read_pod<std::uint32_t>(in, "string length");
  if (n > (1u << 24)) throw ParseError("string length out of range");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw ParseError("truncated string");
  return s;
}

inline void write_names(std::ostream& out, const std::vector<std::string>& names) {
  io::write_pod(out, static_cast<std::uint32_t>(names.size()));
  for (const auto& n : names) write_string(out, n);
}

inline std::vector<std::string> read_names(std::istream& in) {
  auto n = io::read_pod<std::uint32_t>(in, "vocabulary size");
  std::vector<std::string> names;
  names.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) names.push_back(read_string(in));
  return names;
}

template <typename M>
void write_block(std::ostream& out, std::string_view name, const M& m) {
  write_string(out, std::string(name));
  io::write_pod(out, static_cast<std::uint32_t>(m.rows()));
  io::write_pod(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) io::write_pod(out, static_cast<double>(m(r, c)));
}

template <typename M>
void read_block(std::istream& in, std::string_view expected, M& m) {
  const std::string name = read_string(in);
  if (name != expected) throw ParseError("expected block '" + std::string(expected) + "', found '" + name + "'");
  auto rows = io::read_pod<std::uint32_t>(in, "block rows");
  auto cols = io::read_pod<std::uint32_t>(in, "block cols");
  m.resize(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = io::read_pod<double>(in, "block payload");
  if (!m.allFinite()) throw ParseError("non-finite value in block '" + name + "'");
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  out.write(kCheckpointMagic, 4);
  io::write_pod(out, kCheckpointVersion);
  io::write_pod(out, static_cast<std::uint32_t>(ck.tag));
  std::uint32_t d = 0, f = 0, ic = 0, tc = 0;
  if (is_preference(ck.tag)) {
    d = static_cast<std::uint32_t>(ck.preference().dim);
    f = static_cast<std::uint32_t>(ck.preference().feature_dim());
  } else {
    d = static_cast<std::uint32_t>(ck.demand().dim);
    ic = static_cast<std::uint32_t>(ck.demand().input_context.rows());
    tc = static_cast<std::uint32_t>(ck.demand().transition_context.rows());
  }
  for (std::uint32_t v : {d, f, static_cast<std::uint32_t>(ck.users.size()), static_cast<std::uint32_t>(ck.items.size()),
                          static_cast<std::uint32_t>(ck.categories.size()), ic, tc})
    io::write_pod(out, v);
  detail::write_names(out, ck.users);
  detail::write_names(out, ck.items);
  detail::write_names(out, ck.categories);
  std::uint32_t blocks = 0;
  std::visit([&](const auto& p) { p.for_each_block([&](std::string_view, const auto&) { ++blocks; }); }, ck.model);
  io::write_pod(out, blocks);
  std::visit([&](const auto& p) { p.for_each_block([&](std::string_view n, const auto& m) { detail::write_block(out, n, m); }); },
             ck.model);
}

inline Checkpoint read_checkpoint(std::istream& in) {
  io::expect_magic(in, kCheckpointMagic);
  auto version = io::read_pod<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  auto tag = io::read_pod<std::uint32_t>(in, "model tag");
  switch (tag) {
    case 0: case 1: case 2: case 16: case 17: ck.tag = static_cast<ModelTag>(tag); break;
    default: throw ParseError("unknown model tag " + std::to_string(tag));
  }
  std::uint32_t dims[7];
  for (auto& v : dims) v = io::read_pod<std::uint32_t>(in, "dimensions");
  ck.users = detail::read_names(in);
  ck.items = detail::read_names(in);
  ck.categories = detail::read_names(in);
  if (ck.users.size() != dims[2] || ck.items.size() != dims[3] || ck.categories.size() != dims[4])
    throw ParseError("vocabulary sizes disagree with header");
  auto blocks = io::read_pod<std::uint32_t>(in, "block count");

  auto read_all = [&](auto& p) {
    std::uint32_t expected = 0;
    p.for_each_block([&](std::string_view, const auto&) { ++expected; });
    if (blocks != expected) throw ParseError("unexpected block count " + std::to_string(blocks));
    p.for_each_block([&](std::string_view n, auto& m) { detail::read_block(in, n, m); });
  };
  if (is_preference(ck.tag)) {
    PrefParams p;
    p.variant = static_cast<PrefVariant>(tag);
    p.dim = static_cast<int>(dims[0]);
    read_all(p);
    if (p.user.rows() != dims[2] || p.item.rows() != dims[3] || p.user.cols() != p.dim ||
        p.embedding.cols() != dims[1])
      throw ParseError("preference blocks disagree with header");
    ck.model = std::move(p);
  } else {
    DemandParams p;
    p.kind = ck.tag == ModelTag::gru ? DemandKind::gru : DemandKind::cagru;
    p.dim = static_cast<int>(dims[0]);
    read_all(p);
    if (p.category.rows() != dims[4] || p.category.cols() != p.dim)
      throw ParseError("category table disagrees with header");
    if (p.kind == DemandKind::cagru &&
        (dims[5] != kInputContexts || dims[6] != kTransitionContexts || p.input_context.rows() != kInputContexts ||
         p.transition_context.rows() != kTransitionContexts))
      throw ParseError("context vocabulary sizes do not match 84 input / 11 transition contexts");
    ck.model = std::move(p);
  }
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, ck);
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

inline Checkpoint make_checkpoint(const Dataset& ds, std::variant<PrefParams, DemandParams> model) {
  Checkpoint ck;
  ck.tag = std::visit(
      [](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, PrefParams>) return tag_of(p.variant);
        else return tag_of(p.kind);
      },
      model);
  ck.users = ds.users.names();
  ck.items = ds.catalog.items.names();
  ck.categories = ds.catalog.categories.names();
  ck.model = std::move(model);
  return ck;
}

// The checkpoint was trained on this dataset's vocabularies.
inline void validate_checkpoint(const Checkpoint& ck, const Dataset& ds) {
  if (ck.categories != ds.catalog.categories.names())
    throw CatalogError("checkpoint category vocabulary does not match the dataset");
  if (is_preference(ck.tag)) {
    if (ck.items != ds.catalog.items.names()) throw CatalogError("checkpoint item vocabulary does not match the dataset");
    if (ck.users != ds.users.names()) throw CatalogError("checkpoint user vocabulary does not match the dataset");
  }
}

}  // namespace vrec
