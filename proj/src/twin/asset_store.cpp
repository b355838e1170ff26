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

#include "smv/twin/asset_store.hpp"

#include <fstream>
#include <random>

#include <openssl/evp.h>

#include <json.hpp>

#include "smv/broker/topic.hpp"
#include "smv/common/error.hpp"

namespace smv::twin {

namespace fs = std::filesystem;

namespace {

void check_key(std::string_view key) {
  if (key.empty()) fail(Errc::InvalidArgument, "empty store key");
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = std::min(key.find('/', start), key.size());
    const auto seg = key.substr(start, end - start);
    if (seg.empty() || seg == "." || seg == "..")
      fail(Errc::InvalidArgument, "bad store key '" + std::string(key) + "'");
    for (char c : seg)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
        fail(Errc::InvalidArgument, "bad store key '" + std::string(key) + "'");
    if (end == key.size()) return;
    start = end + 1;
  }
}

Bytes read_file(const fs::path& p, std::string_view key) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(Errc::NotFound, std::string(key));
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return out;
}

void write_atomic(const fs::path& p, ByteSpan bytes) {
  fs::create_directories(p.parent_path());
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path tmp = p.parent_path() / (".tmp-" + std::to_string(rng()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::InvalidArgument, "cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::vector<std::string> list_keys(const fs::path& root, std::string_view ext) {
  std::vector<std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ext) continue;
    auto rel = fs::relative(e.path(), root).generic_string();
    out.push_back(rel.substr(0, rel.size() - ext.size()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_hex_digest(std::string_view key) {
  if (key.size() != 64) return false;
  for (char c : key)
    if (!std::isxdigit(static_cast<unsigned char>(c)) || std::isupper(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

std::string_view to_string(StoreKind k) noexcept {
  switch (k) {
    case StoreKind::Document: return "document";
    case StoreKind::SeriesSegment: return "series-segment";
    case StoreKind::Blob: return "blob";
  }
  return "?";
}

StoreKind store_kind_from_string(std::string_view s) {
  for (auto k : {StoreKind::Document, StoreKind::SeriesSegment, StoreKind::Blob})
    if (to_string(k) == s) return k;
  fail(Errc::InvalidArgument, "unknown store kind '" + std::string(s) + "'");
}

std::string sha256_hex(ByteSpan data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(Errc::InvalidArgument, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

DocumentStore::DocumentStore(fs::path root) : root_(std::move(root)) {}

std::string DocumentStore::put(std::string_view key, ByteSpan bytes) {
  check_key(key);
  if (!nlohmann::json::accept(as_string(bytes)))
    fail(Errc::InvalidArgument, "document '" + std::string(key) + "' is not JSON");
  write_atomic(root_ / (std::string(key) + ".json"), bytes);
  return std::string(key);
}

Bytes DocumentStore::get(std::string_view key) const {
  check_key(key);
  return read_file(root_ / (std::string(key) + ".json"), key);
}

bool DocumentStore::contains(std::string_view key) const {
  check_key(key);
  return fs::exists(root_ / (std::string(key) + ".json"));
}

std::vector<std::string> DocumentStore::keys() const { return list_keys(root_, ".json"); }

SeriesSegmentStore::SeriesSegmentStore(fs::path root) : root_(std::move(root)) {}

std::string SeriesSegmentStore::put(std::string_view key, ByteSpan bytes) {
  check_key(key);
  ByteReader r(bytes, Errc::InvalidArgument);
  broker::Record rec;
  try {
    while (broker::read_record_frame(r, rec, Errc::InvalidArgument)) {
    }
  } catch (const Error& e) {
    fail(Errc::InvalidArgument, "segment '" + std::string(key) + "' is not record-framed: " + e.what());
  }
  write_atomic(root_ / (std::string(key) + ".seg"), bytes);
  return std::string(key);
}

Bytes SeriesSegmentStore::get(std::string_view key) const {
  check_key(key);
  return read_file(root_ / (std::string(key) + ".seg"), key);
}

bool SeriesSegmentStore::contains(std::string_view key) const {
  check_key(key);
  return fs::exists(root_ / (std::string(key) + ".seg"));
}

std::vector<std::string> SeriesSegmentStore::keys() const { return list_keys(root_, ".seg"); }

BlobStore::BlobStore(fs::path root) : root_(std::move(root)) {}

fs::path BlobStore::path_of(std::string_view key) const {
  if (!is_hex_digest(key)) fail(Errc::InvalidArgument, "blob key must be a lowercase hex SHA-256");
  return root_ / std::string(key.substr(0, 2)) / std::string(key.substr(2));
}

std::string BlobStore::put(std::string_view key, ByteSpan bytes) {
  const std::string digest = sha256_hex(bytes);
  if (!key.empty() && key != digest)
    fail(Errc::HashMismatch, "key " + std::string(key) + " does not match content hash " + digest);
  const fs::path p = path_of(digest);
  if (fs::exists(p) && fs::file_size(p) == bytes.size() && sha256_hex(read_file(p, digest)) == digest) return digest;
  write_atomic(p, bytes);
  return digest;
}

Bytes BlobStore::get(std::string_view key) const {
  Bytes data = read_file(path_of(key), key);
  if (sha256_hex(data) != key) fail(Errc::HashMismatch, "blob " + std::string(key) + " failed verification");
  return data;
}

bool BlobStore::contains(std::string_view key) const { return fs::exists(path_of(key)); }

std::vector<std::string> BlobStore::keys() const {
  std::vector<std::string> out;
  if (!fs::exists(root_)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root_)) {
    if (!e.is_regular_file()) continue;
    auto key = e.path().parent_path().filename().string() + e.path().filename().string();
    if (is_hex_digest(key)) out.push_back(key);
  }
  std::sort(out.begin(), out.end());
  return out;
}

AssetStores::AssetStores(const fs::path& data_dir)
    : documents_(data_dir / "documents"), series_(data_dir / "series"), blobs_(data_dir / "blobs") {}

AssetStore& AssetStores::store(StoreKind k) {
  switch (k) {
    case StoreKind::Document: return documents_;
    case StoreKind::SeriesSegment: return series_;
    case StoreKind::Blob: return blobs_;
  }
  fail(Errc::InvalidArgument, "unknown store kind");
}

}  // namespace smv::twin
