// Copyright 2026 The smv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "smv/common/bytes.hpp"

namespace smv::twin {

enum class StoreKind : std::uint8_t { Document, SeriesSegment, Blob };

std::string_view to_string(StoreKind k) noexcept;
/// "document", "series-segment", "blob". Throws InvalidArgument.
StoreKind store_kind_from_string(std::string_view s);

/// Lowercase hex SHA-256.
std::string sha256_hex(ByteSpan data);

/// Keyed byte storage. get returns exactly what the last put stored.
/// Writes go through a temporary file and a rename, so a reader never sees
/// a half-written value.
class AssetStore {
 public:
  virtual ~AssetStore() = default;
  /// Returns the key the value is stored under. Throws InvalidArgument for bad keys or content.
  virtual std::string put(std::string_view key, ByteSpan bytes) = 0;
  /// Throws NotFound.
  virtual Bytes get(std::string_view key) const = 0;
  virtual bool contains(std::string_view key) const = 0;
  virtual std::vector<std::string> keys() const = 0;
};

/// JSON documents at <root>/<key>.json. Keys are '/'-separated segments
/// of [A-Za-z0-9_.-]; the bytes must parse as JSON.
class DocumentStore final : public AssetStore {
 public:
  explicit DocumentStore(std::filesystem::path root);
  std::string put(std::string_view key, ByteSpan bytes) override;
  Bytes get(std::string_view key) const override;
  bool contains(std::string_view key) const override;
  std::vector<std::string> keys() const override;

 private:
  std::filesystem::path root_;
};

/// Series segments at <root>/<key>.seg, in the broker's record framing;
/// the bytes must be a whole number of well-formed frames.
class SeriesSegmentStore final : public AssetStore {
 public:
  explicit SeriesSegmentStore(std::filesystem::path root);
  std::string put(std::string_view key, ByteSpan bytes) override;
  Bytes get(std::string_view key) const override;
  bool contains(std::string_view key) const override;
  std::vector<std::string> keys() const override;

 private:
  std::filesystem::path root_;
};

/// Content-addressed blobs at <root>/<hex[0:2]>/<hex[2:]>, key = SHA-256 of
/// the content. Storing the same content twice keeps one copy.
class BlobStore final : public AssetStore {
 public:
  explicit BlobStore(std::filesystem::path root);
  /// An empty key means "compute it"; a non-empty key must equal the
  /// content hash or HashMismatch is thrown.
  std::string put(std::string_view key, ByteSpan bytes) override;
  std::string put(ByteSpan bytes) { return put({}, bytes); }
  /// Re-hashes on read; HashMismatch if the file was altered.
  Bytes get(std::string_view key) const override;
  bool contains(std::string_view key) const override;
  std::vector<std::string> keys() const override;

  std::filesystem::path path_of(std::string_view key) const;

 private:
  std::filesystem::path root_;
};

/// The three stores rooted under one data directory:
/// <dir>/documents, <dir>/series, <dir>/blobs.
class AssetStores {
 public:
  explicit AssetStores(const std::filesystem::path& data_dir);

  AssetStore& store(StoreKind k);
  std::string put(StoreKind k, std::string_view key, ByteSpan bytes) { return store(k).put(key, bytes); }
  Bytes get(StoreKind k, std::string_view key) { return store(k).get(key); }

 private:
  DocumentStore documents_;
  SeriesSegmentStore series_;
  BlobStore blobs_;
};

}  // namespace smv::twin
