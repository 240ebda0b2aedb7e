/**
 * Copyright 2026 The plweb Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef PLWEB_STORE_HPP
#define PLWEB_STORE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace plweb {

/// 40-character lowercase hex SHA-1 of some bytes.
std::string sha1_hex(std::string_view bytes);
bool is_sha1_hex(std::string_view text);

struct Commit {
  /// SHA-1 of the commit's serialized fields.
  std::string id;
  /// BlobId of the content.
  std::string blob;
  std::string name;
  /// Id of the commit of the prior version.
  std::optional<std::string> previous;
  /// Seconds since the epoch.
  double time = 0;
  std::optional<std::string> author;
  /// Origin head name and its head blob at fork time.
  std::optional<std::pair<std::string, std::string>> forked_from;
};

struct SaveMeta {
  std::optional<std::string> author;
};

class StoreError : public std::runtime_error {
 public:
  enum class Code { kNotFound, kConflict, kNameTaken, kVersionNotInHistory, kInvalid, kStorage };
  StoreError(Code code, const std::string& message, std::string current = {})
      : std::runtime_error(message), code_(code), current_(std::move(current)) {}
  [[nodiscard]] Code code() const { return code_; }
  /// not_found, conflict, name_taken, version_not_in_history, invalid, storage.
  [[nodiscard]] std::string_view code_name() const;
  /// The current head blob for a conflict.
  [[nodiscard]] const std::string& current() const { return current_; }

 private:
  Code code_;
  std::string current_;
};

/// Per-file version store with content-addressed blobs and named heads.
class Store {
 public:
  /// An empty root keeps everything in memory. Otherwise blobs live in
  /// root/blobs and each head has an append-only commit log in root/heads,
  /// replayed on construction.
  explicit Store(std::filesystem::path root = {});

  struct Saved {
    std::string name;
    std::string blob;
  };

  /// Saves under a fresh random name, or under name when it is unused.
  Saved save_new(const std::string& content, const SaveMeta& meta = {},
                 const std::optional<std::string>& name = std::nullopt);
  /// Appends a version when the head blob still equals expected_prev.
  /// Throws StoreError kConflict carrying the current head blob otherwise.
  std::string save_version(const std::string& name, const std::string& content,
                           const std::string& expected_prev, const SaveMeta& meta = {});
  Saved fork(const std::string& src, const std::optional<std::string>& new_name = std::nullopt,
             const SaveMeta& meta = {});

  struct Loaded {
    std::string content;
    Commit commit;
  };
  /// ref is a head name or a BlobId; version pins a blob in the history of
  /// a named ref.
  Loaded load(const std::string& ref, const std::optional<std::string>& version = std::nullopt) const;
  /// Newest first, following previous links across forks.
  std::vector<Commit> history(const std::string& name) const;
  /// Content for include/1: a 40-hex spec loads that blob, anything else
  /// the head of that name.
  std::optional<std::string> resolve_include(const std::string& spec) const;

  [[nodiscard]] bool has_head(const std::string& name) const;
  [[nodiscard]] std::vector<std::string> heads() const;

 private:
  struct Head {
    std::mutex write;
    std::string commit;
  };

  std::string put_blob(const std::string& content);
  std::optional<std::string> get_blob(const std::string& id) const;
  Commit make_commit(const std::string& blob, const std::string& name,
                     std::optional<std::string> previous, const SaveMeta& meta,
                     std::optional<std::pair<std::string, std::string>> forked_from) const;
  void record(const Commit& c);
  std::string fresh_name();
  static bool valid_name(const std::string& name);
  void replay();

  std::filesystem::path root_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::string> blobs_;
  std::map<std::string, Commit> commits_;
  std::map<std::string, std::string> blob_commit_;
  std::map<std::string, std::shared_ptr<Head>> heads_;
  std::mutex log_mu_;
};

}  // namespace plweb

#endif  // PLWEB_STORE_HPP
