#pragma once

#include <string>
#include <unordered_map>
#include <utility>

#include "sedil/adapter.hpp"
#include "sedil/io.hpp"
#include "sedil/model.hpp"

namespace sedil {

// Checkpoint file (little-endian):
//   magic "SEDM", version u32, kind u8 (0 = model, 1 = composite)
//   kind 0: one model block
//   kind 1: source model block, adapter block, target model block
// Model block: 7 config u32 (mels, frames, filters, blocks, pool_h, pool_w,
// classes), then one length-prefixed UTF-8 name per class, then tensor count
// u32 and the named tensors. Adapter block: 4 config u32 (in, hidden, out,
// input kind), then tensor count and tensors.

inline constexpr char kCheckpointMagic[5] = "SEDM";
inline constexpr uint32_t kCheckpointVersion = 1;

enum class CheckpointKind : uint8_t { kModel = 0, kComposite = 1 };

namespace detail {

inline void write_model_block(bin::Writer& w, const SedCnn<float>& m) {
  const SedCnnConfig& c = m.config();
  for (int v : {c.input_mels, c.input_frames, c.conv_filters, c.num_conv_blocks, c.pool_h,
                c.pool_w, c.num_classes})
    w.u32(static_cast<uint32_t>(v));
  for (const auto& n : m.class_names()) w.str(n);
  auto sv = m.state_view();
  w.u32(static_cast<uint32_t>(sv.size()));
  for (const auto& [name, t] : sv) w.tensor(name, *t);
}

inline void write_adapter_block(bin::Writer& w, const NeuralAdapter<float>& a) {
  for (int v : {a.in_dim(), a.hidden_dim(), a.out_dim(), static_cast<int>(a.input_kind())})
    w.u32(static_cast<uint32_t>(v));
  auto sv = a.state_view();
  w.u32(static_cast<uint32_t>(sv.size()));
  for (const auto& [name, t] : sv) w.tensor(name, *t);
}

template <typename Fill>
void read_tensor_table(bin::Reader& r, const std::string& ctx, size_t expected, Fill&& fill) {
  const uint32_t count = r.u32(ctx + " tensor count");
  if (count != expected)
    throw DataError(ctx + " has " + std::to_string(count) + " tensors, expected " +
                    std::to_string(expected));
  for (uint32_t i = 0; i < count; ++i) {
    auto [name, t] = r.tensor(ctx);
    fill(name, std::move(t));
  }
}

inline SedCnn<float> read_model_block(bin::Reader& r, const std::string& ctx) {
  SedCnnConfig c;
  c.input_mels = static_cast<int>(r.u32(ctx + " input_mels"));
  c.input_frames = static_cast<int>(r.u32(ctx + " input_frames"));
  c.conv_filters = static_cast<int>(r.u32(ctx + " conv_filters"));
  c.num_conv_blocks = static_cast<int>(r.u32(ctx + " num_conv_blocks"));
  c.pool_h = static_cast<int>(r.u32(ctx + " pool_h"));
  c.pool_w = static_cast<int>(r.u32(ctx + " pool_w"));
  c.num_classes = static_cast<int>(r.u32(ctx + " num_classes"));
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(c.num_classes));
  for (int i = 0; i < c.num_classes; ++i) names.push_back(r.str(ctx + " class name"));

  SedCnn<float> m(c, names);
  std::unordered_map<std::string, Tensor<float>*> slots;
  for (auto& s : m.state()) slots[s.name] = s.value;
  read_tensor_table(r, ctx, slots.size(), [&](const std::string& name, Tensor<float> t) {
    auto it = slots.find(name);
    if (it == slots.end()) throw DataError(ctx + " has unexpected tensor '" + name + "'");
    if (!it->second->same_shape(t))
      throw DataError(ctx + " tensor '" + name + "' has shape " + shape_str(t.shape()) +
                      ", expected " + shape_str(it->second->shape()));
    *it->second = std::move(t);
  });
  return m;
}

inline NeuralAdapter<float> read_adapter_block(bin::Reader& r, const std::string& ctx) {
  const int in = static_cast<int>(r.u32(ctx + " in_dim"));
  const int hidden = static_cast<int>(r.u32(ctx + " hidden_dim"));
  const int out = static_cast<int>(r.u32(ctx + " out_dim"));
  const uint32_t kind = r.u32(ctx + " input kind");
  if (kind > 1) throw DataError(ctx + " has unknown adapter input kind " + std::to_string(kind));

  NeuralAdapter<float> a(in, hidden, out, static_cast<AdapterInput>(kind));
  std::unordered_map<std::string, Tensor<float>*> slots;
  for (auto& s : a.params()) slots[s.name] = s.value;
  read_tensor_table(r, ctx, slots.size(), [&](const std::string& name, Tensor<float> t) {
    auto it = slots.find(name);
    if (it == slots.end()) throw DataError(ctx + " has unexpected tensor '" + name + "'");
    if (!it->second->same_shape(t))
      throw DataError(ctx + " tensor '" + name + "' has shape " + shape_str(t.shape()) +
                      ", expected " + shape_str(it->second->shape()));
    *it->second = std::move(t);
  });
  return a;
}

inline void check_header(bin::Reader& r) {
  r.need(4, "checkpoint magic");
  const std::string magic = r.buf.substr(r.pos, 4);
  r.pos += 4;
  if (magic != kCheckpointMagic)
    throw DataError("checkpoint magic mismatch: got '" + magic + "', expected '" +
                    kCheckpointMagic + "'");
  const uint32_t version = r.u32("checkpoint version");
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version) +
                    ", expected " + std::to_string(kCheckpointVersion));
}

}  // namespace detail

inline void checkpoint_save(const SedCnn<float>& model, const std::string& path) {
  bin::Writer w;
  w.buf.append(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u8(static_cast<uint8_t>(CheckpointKind::kModel));
  detail::write_model_block(w, model);
  bin::write_file(path, w.buf);
}

inline void checkpoint_save(const AdapterComposite<float>& comp, const std::string& path) {
  bin::Writer w;
  w.buf.append(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u8(static_cast<uint8_t>(CheckpointKind::kComposite));
  detail::write_model_block(w, comp.source());
  detail::write_adapter_block(w, comp.adapter());
  detail::write_model_block(w, comp.target());
  bin::write_file(path, w.buf);
}

inline CheckpointKind checkpoint_kind(const std::string& path) {
  const std::string buf = bin::read_file(path);
  bin::Reader r(buf);
  detail::check_header(r);
  const uint8_t kind = r.u8("checkpoint kind");
  if (kind > 1) throw DataError("unknown checkpoint kind byte " + std::to_string(kind));
  return static_cast<CheckpointKind>(kind);
}

inline SedCnn<float> checkpoint_load_model(const std::string& path) {
  const std::string buf = bin::read_file(path);
  bin::Reader r(buf);
  detail::check_header(r);
  const uint8_t kind = r.u8("checkpoint kind");
  if (kind != static_cast<uint8_t>(CheckpointKind::kModel))
    throw DataError("'" + path + "' holds an adapter composite, expected a single model");
  SedCnn<float> m = detail::read_model_block(r, "model block");
  if (!r.eof()) throw DataError("trailing bytes after model block in '" + path + "'");
  return m;
}

inline AdapterComposite<float> checkpoint_load_composite(const std::string& path) {
  const std::string buf = bin::read_file(path);
  bin::Reader r(buf);
  detail::check_header(r);
  const uint8_t kind = r.u8("checkpoint kind");
  if (kind != static_cast<uint8_t>(CheckpointKind::kComposite))
    throw DataError("'" + path + "' holds a single model, expected an adapter composite");
  SedCnn<float> source = detail::read_model_block(r, "source block");
  NeuralAdapter<float> adapter = detail::read_adapter_block(r, "adapter block");
  SedCnn<float> target = detail::read_model_block(r, "target block");
  if (!r.eof()) throw DataError("trailing bytes after target block in '" + path + "'");
  return AdapterComposite<float>(std::move(source), std::move(adapter), std::move(target));
}

}  // namespace sedil
