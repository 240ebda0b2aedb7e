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


#ifndef PLWEB_SERVER_HPP
#define PLWEB_SERVER_HPP

#include <filesystem>
#include <memory>
#include <string>

#include "plweb/highlight.hpp"
#include "plweb/session.hpp"
#include "plweb/store.hpp"

namespace plweb {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 3050;
  /// Store directory; empty keeps programs in memory only.
  std::filesystem::path data_root;
  /// Web client assets served under /. Empty or missing serves a stub page.
  std::filesystem::path static_root;
  SessionConfig sessions;
  /// HTTP worker threads. Long polls hold one each.
  size_t threads = 64;
  bool access_log = false;
};

/// The HTTP front end: engine, store and highlight endpoints.
class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds config.host:config.port and serves until stop().
  bool listen();
  /// Binds an ephemeral port and returns it; follow with serve().
  int bind_any_port();
  bool serve();
  void stop();
  [[nodiscard]] bool running() const;

  SessionManager& sessions();
  Store& store();
  MirrorRegistry& mirrors();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Highlight payload: per group, {"kind","len","class"?} entries measured in
/// code points, with "layout" entries for the text between tokens.
nlohmann::json tokens_to_json(const MirrorRegistry::Tokens& tokens);
nlohmann::json commit_to_json(const Commit& commit);

}  // namespace plweb

#endif  // PLWEB_SERVER_HPP
