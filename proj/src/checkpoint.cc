/* Copyright (c) 2026 The evframe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */


#include "evframe/checkpoint.h"

#include <cstring>

#include "evframe/error.h"

namespace evframe {

namespace {

constexpr std::uint8_t kDtypeF64 = 0;

std::string MomentName(const char* which, const std::string& param) {
  return std::string("adam.") + which + "." + param;
}

void CopyInto(const Checkpoint& ckpt, const std::string& name, Tensor& dst) {
  const Tensor* src = ckpt.Find(name);
  if (src == nullptr) throw Error(ErrorKind::kShapeMismatch, "checkpoint lacks tensor " + name);
  src->RequireShape(dst.shape(), name.c_str());
  dst = *src;
}

}  // namespace

const Tensor* Checkpoint::Find(const std::string& name) const {
  for (const NamedTensor& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

Bytes EncodeCheckpoint(const Checkpoint& checkpoint) {
  ByteWriter w;
  w.Raw(std::string_view(kCheckpointMagic, 8));
  w.U64(checkpoint.digest);
  const std::string config = ModelConfigToJson(checkpoint.config).dump();
  const std::string state = checkpoint.state.dump();
  w.U32(static_cast<std::uint32_t>(config.size()));
  w.Raw(config);
  w.U32(static_cast<std::uint32_t>(state.size()));
  w.Raw(state);
  w.U64(checkpoint.tensors.size());
  for (const NamedTensor& t : checkpoint.tensors) {
    w.U16(static_cast<std::uint16_t>(t.name.size()));
    w.Raw(t.name);
    w.U8(kDtypeF64);
    w.U8(static_cast<std::uint8_t>(t.value.rank()));
    for (std::size_t d : t.value.shape()) w.U64(d);
    for (double v : t.value.values()) w.F64(v);
  }
  return w.Take();
}

Checkpoint DecodeCheckpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw Error(ErrorKind::kBadMagic, "not an evframe checkpoint");
  }
  ByteReader r(bytes);
  r.Raw(8);
  Checkpoint ckpt;
  ckpt.digest = r.U64();
  nlohmann::json config_json, state_json;
  try {
    config_json = nlohmann::json::parse(r.Raw(r.U32()));
    state_json = nlohmann::json::parse(r.Raw(r.U32()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedHeader, std::string("checkpoint JSON: ") + e.what());
  }
  try {
    ckpt.config = ModelConfigFromJson(config_json);
  } catch (const Error& e) {
    throw Error(ErrorKind::kMalformedHeader, "checkpoint config: " + e.detail());
  }
  if (ModelConfigDigest(ckpt.config) != ckpt.digest) {
    throw Error(ErrorKind::kConfigDigestMismatch, "stored digest does not match stored config");
  }
  ckpt.state = std::move(state_json);
  const std::uint64_t count = r.U64();
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.Raw(r.U16());
    const std::size_t at = r.offset();
    if (r.U8() != kDtypeF64) {
      throw Error(ErrorKind::kMalformedHeader,
                  "unsupported dtype for " + t.name + " at byte offset " + std::to_string(at));
    }
    Shape shape(r.U8());
    for (std::size_t& d : shape) d = r.U64();
    const std::size_t n = ShapeSize(shape);
    if (r.remaining() / 8 < n) throw TruncatedRecord(r.offset(), "tensor " + t.name);
    std::vector<double> data(n);
    for (double& v : data) v = r.F64();
    t.value = Tensor(std::move(shape), std::move(data));
    ckpt.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorKind::kCountMismatch,
                std::to_string(r.remaining()) + " trailing bytes after tensor table");
  }
  return ckpt;
}

Checkpoint CaptureCheckpoint(Model& model, const AdamState* optimizer, nlohmann::json state) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.digest = ModelConfigDigest(ckpt.config);
  ckpt.state = std::move(state);
  const std::vector<ParamRef> params = model.Parameters();
  for (const ParamRef& p : params) ckpt.tensors.push_back({p.name, *p.value});
  for (const BufferRef& b : model.Buffers()) ckpt.tensors.push_back({b.name, *b.value});
  if (optimizer != nullptr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      ckpt.tensors.push_back({MomentName("m", params[i].name), optimizer->first_moment.at(i)});
      ckpt.tensors.push_back({MomentName("v", params[i].name), optimizer->second_moment.at(i)});
    }
  }
  return ckpt;
}

void RestoreCheckpoint(const Checkpoint& checkpoint, Model& model, AdamState* optimizer) {
  if (checkpoint.digest != ModelConfigDigest(model.config())) {
    throw Error(ErrorKind::kConfigDigestMismatch,
                "checkpoint was written for a different model configuration");
  }
  const std::vector<ParamRef> params = model.Parameters();
  for (const ParamRef& p : params) CopyInto(checkpoint, p.name, *p.value);
  for (const BufferRef& b : model.Buffers()) CopyInto(checkpoint, b.name, *b.value);
  if (optimizer != nullptr) {
    *optimizer = MakeAdamState(params);
    optimizer->step = checkpoint.state.value("adam_step", std::uint64_t{0});
    for (std::size_t i = 0; i < params.size(); ++i) {
      CopyInto(checkpoint, MomentName("m", params[i].name), optimizer->first_moment[i]);
      CopyInto(checkpoint, MomentName("v", params[i].name), optimizer->second_moment[i]);
    }
  }
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  WriteFileBytes(path, EncodeCheckpoint(checkpoint));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace evframe
