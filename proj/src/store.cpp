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


#include "plweb/store.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace plweb {

using nlohmann::json;

std::string sha1_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw StoreError(StoreError::Code::kStorage, "SHA-1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

bool is_sha1_hex(std::string_view text) {
  return text.size() == 40 && std::all_of(text.begin(), text.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string_view StoreError::code_name() const {
  switch (code_) {
    case Code::kNotFound: return "not_found";
    case Code::kConflict: return "conflict";
    case Code::kNameTaken: return "name_taken";
    case Code::kVersionNotInHistory: return "version_not_in_history";
    case Code::kInvalid: return "invalid";
    case Code::kStorage: return "storage";
  }
  return "storage";
}

namespace {

json to_json(const Commit& c) {
  json j = {{"blob", c.blob}, {"name", c.name}, {"time", c.time}};
  j["previous"] = c.previous ? json(*c.previous) : json(nullptr);
  j["author"] = c.author ? json(*c.author) : json(nullptr);
  if (c.forked_from) {
    j["forked_from"] = {{"name", c.forked_from->first}, {"blob", c.forked_from->second}};
  } else {
    j["forked_from"] = nullptr;
  }
  return j;
}

Commit from_json(const json& j) {
  Commit c;
  c.blob = j.at("blob").get<std::string>();
  c.name = j.at("name").get<std::string>();
  c.time = j.at("time").get<double>();
  if (!j.at("previous").is_null()) c.previous = j.at("previous").get<std::string>();
  if (!j.at("author").is_null()) c.author = j.at("author").get<std::string>();
  if (!j.at("forked_from").is_null()) {
    c.forked_from = {j["forked_from"].at("name").get<std::string>(),
                     j["forked_from"].at("blob").get<std::string>()};
  }
  c.id = j.contains("id") ? j["id"].get<std::string>() : sha1_hex(to_json(c).dump());
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Store::Store(std::filesystem::path root) : root_(std::move(root)) {
  if (root_.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(root_ / "blobs", ec);
  std::filesystem::create_directories(root_ / "heads", ec);
  if (ec) throw StoreError(StoreError::Code::kStorage, "cannot create " + root_.string());
  replay();
}

void Store::replay() {
  for (const auto& entry : std::filesystem::directory_iterator(root_ / "heads")) {
    if (entry.path().extension() != ".log") continue;
    std::ifstream in(entry.path());
    std::string line;
    std::string head;
    while (std::getline(in, line)) {
      json j = json::parse(line, nullptr, false);
      // A torn final line from a crash is skipped.
      if (j.is_discarded() || !j.is_object()) continue;
      Commit c = from_json(j);
      std::filesystem::path blob = root_ / "blobs" / c.blob;
      if (!std::filesystem::exists(blob)) continue;
      if (!blobs_.count(c.blob)) blobs_[c.blob] = read_file(blob);
      blob_commit_.try_emplace(c.blob, c.id);
      head = c.id;
      commits_[c.id] = std::move(c);
    }
    if (!head.empty()) {
      auto h = std::make_shared<Head>();
      h->commit = head;
      heads_[entry.path().stem().string()] = h;
    }
  }
}

bool Store::valid_name(const std::string& name) {
  if (name.empty() || name.size() > 64 || is_sha1_hex(name)) return false;
  if (name.front() == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::string Store::fresh_name() {
  static const char* alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_int_distribution<int> pick(0, 61);
  for (;;) {
    std::string name;
    for (int i = 0; i < 10; ++i) name += alphabet[pick(rng)];
    if (!heads_.count(name)) return name;
  }
}

std::string Store::put_blob(const std::string& content) {
  std::string id = sha1_hex(content);
  {
    std::shared_lock lock(mu_);
    if (blobs_.count(id)) return id;
  }
  if (!root_.empty()) {
    std::filesystem::path final_path = root_ / "blobs" / id;
    if (!std::filesystem::exists(final_path)) {
      std::filesystem::path tmp = final_path;
      tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
      {
        std::ofstream out(tmp, std::ios::binary);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw StoreError(StoreError::Code::kStorage, "cannot write blob " + id);
      }
      std::filesystem::rename(tmp, final_path);
    }
  }
  std::unique_lock lock(mu_);
  blobs_.try_emplace(id, content);
  return id;
}

std::optional<std::string> Store::get_blob(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = blobs_.find(id);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

Commit Store::make_commit(const std::string& blob, const std::string& name,
                          std::optional<std::string> previous, const SaveMeta& meta,
                          std::optional<std::pair<std::string, std::string>> forked_from) const {
  Commit c;
  c.blob = blob;
  c.name = name;
  c.previous = std::move(previous);
  c.time = std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
  c.author = meta.author;
  c.forked_from = std::move(forked_from);
  json j = to_json(c);
  // Commits saved within the same clock tick differ by a nonce.
  thread_local std::mt19937_64 rng{std::random_device{}()};
  j["nonce"] = rng();
  c.id = sha1_hex(j.dump());
  return c;
}

void Store::record(const Commit& c) {
  if (!root_.empty()) {
    json j = to_json(c);
    j["id"] = c.id;
    std::lock_guard lock(log_mu_);
    std::ofstream out(root_ / "heads" / (c.name + ".log"), std::ios::app);
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw StoreError(StoreError::Code::kStorage, "cannot append to log of " + c.name);
  }
}

Store::Saved Store::save_new(const std::string& content, const SaveMeta& meta,
                             const std::optional<std::string>& name) {
  if (content.empty()) throw StoreError(StoreError::Code::kInvalid, "content is empty");
  if (name && !valid_name(*name)) {
    throw StoreError(StoreError::Code::kInvalid, "invalid file name " + *name);
  }
  std::string blob = put_blob(content);
  std::unique_lock lock(mu_);
  std::string chosen = name.value_or("");
  if (name) {
    if (heads_.count(chosen)) throw StoreError(StoreError::Code::kNameTaken, chosen + " exists");
  } else {
    chosen = fresh_name();
  }
  Commit c = make_commit(blob, chosen, std::nullopt, meta, std::nullopt);
  record(c);
  auto h = std::make_shared<Head>();
  h->commit = c.id;
  heads_[chosen] = h;
  blob_commit_.try_emplace(blob, c.id);
  commits_[c.id] = c;
  return {chosen, blob};
}

std::string Store::save_version(const std::string& name, const std::string& content,
                                const std::string& expected_prev, const SaveMeta& meta) {
  if (content.empty()) throw StoreError(StoreError::Code::kInvalid, "content is empty");
  std::shared_ptr<Head> head;
  {
    std::shared_lock lock(mu_);
    auto it = heads_.find(name);
    if (it == heads_.end()) throw StoreError(StoreError::Code::kNotFound, "no file " + name);
    head = it->second;
  }
  std::lock_guard write(head->write);
  std::string current_commit;
  std::string current_blob;
  {
    std::shared_lock lock(mu_);
    current_commit = head->commit;
    current_blob = commits_.at(current_commit).blob;
  }
  if (current_blob != expected_prev) {
    throw StoreError(StoreError::Code::kConflict, name + " was modified", current_blob);
  }
  std::string blob = put_blob(content);
  Commit c = make_commit(blob, name, current_commit, meta, std::nullopt);
  record(c);
  std::unique_lock lock(mu_);
  blob_commit_.try_emplace(blob, c.id);
  commits_[c.id] = c;
  head->commit = c.id;
  return blob;
}

Store::Saved Store::fork(const std::string& src, const std::optional<std::string>& new_name,
                         const SaveMeta& meta) {
  if (new_name && !valid_name(*new_name)) {
    throw StoreError(StoreError::Code::kInvalid, "invalid file name " + *new_name);
  }
  std::unique_lock lock(mu_);
  auto it = heads_.find(src);
  if (it == heads_.end()) throw StoreError(StoreError::Code::kNotFound, "no file " + src);
  std::string chosen = new_name.value_or("");
  if (new_name) {
    if (heads_.count(chosen)) throw StoreError(StoreError::Code::kNameTaken, chosen + " exists");
  } else {
    chosen = fresh_name();
  }
  const Commit& origin = commits_.at(it->second->commit);
  Commit c = make_commit(origin.blob, chosen, origin.id, meta,
                         std::make_pair(src, origin.blob));
  record(c);
  auto h = std::make_shared<Head>();
  h->commit = c.id;
  heads_[chosen] = h;
  commits_[c.id] = c;
  return {chosen, origin.blob};
}

Store::Loaded Store::load(const std::string& ref, const std::optional<std::string>& version) const {
  std::shared_lock lock(mu_);
  auto head = heads_.find(ref);
  if (head != heads_.end()) {
    std::string id = head->second->commit;
    if (version) {
      for (;;) {
        const Commit& c = commits_.at(id);
        if (c.blob == *version) break;
        if (!c.previous) {
          throw StoreError(StoreError::Code::kVersionNotInHistory,
                           *version + " is not a version of " + ref);
        }
        id = *c.previous;
      }
    }
    const Commit& c = commits_.at(id);
    return {blobs_.at(c.blob), c};
  }
  if (is_sha1_hex(ref)) {
    auto blob = blobs_.find(ref);
    if (blob != blobs_.end()) return {blob->second, commits_.at(blob_commit_.at(ref))};
  }
  throw StoreError(StoreError::Code::kNotFound, "no file or blob " + ref);
}

std::vector<Commit> Store::history(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto head = heads_.find(name);
  if (head == heads_.end()) throw StoreError(StoreError::Code::kNotFound, "no file " + name);
  std::vector<Commit> out;
  std::optional<std::string> id = head->second->commit;
  while (id) {
    const Commit& c = commits_.at(*id);
    out.push_back(c);
    id = c.previous;
  }
  return out;
}

std::optional<std::string> Store::resolve_include(const std::string& spec) const {
  try {
    if (is_sha1_hex(spec)) {
      std::optional<std::string> blob = get_blob(spec);
      if (blob) return blob;
    }
    return load(spec).content;
  } catch (const StoreError&) {
    return std::nullopt;
  }
}

bool Store::has_head(const std::string& name) const {
  std::shared_lock lock(mu_);
  return heads_.count(name) > 0;
}

std::vector<std::string> Store::heads() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, head] : heads_) out.push_back(name);
  return out;
}

}  // namespace plweb
