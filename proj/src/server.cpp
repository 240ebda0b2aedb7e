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


#include "plweb/server.hpp"

#include <algorithm>
#include <cstdio>

#include <httplib.h>

#include "plweb/reader.hpp"

namespace plweb {

using nlohmann::json;

json tokens_to_json(const MirrorRegistry::Tokens& tokens) {
  json groups = json::array();
  size_t pos = 0;
  for (const auto& group : tokens.groups) {
    json out = json::array();
    for (const EnrichedToken& t : group) {
      if (t.base.span.start > pos) {
        out.push_back({{"kind", "layout"}, {"len", t.base.span.start - pos}});
      }
      json tok = {{"kind", std::string(token_kind_name(t.base.kind))},
                  {"len", t.base.span.end - t.base.span.start}};
      if (t.cls) tok["class"] = std::string(token_class_name(*t.cls));
      out.push_back(std::move(tok));
      pos = t.base.span.end;
    }
    groups.push_back(std::move(out));
  }
  return {{"generation", tokens.generation}, {"groups", groups}};
}

json commit_to_json(const Commit& c) {
  json j = {{"id", c.id}, {"blob", c.blob}, {"name", c.name}, {"time", c.time}};
  j["previous"] = c.previous ? json(*c.previous) : json(nullptr);
  j["author"] = c.author ? json(*c.author) : json(nullptr);
  if (c.forked_from) {
    j["forked_from"] = {{"name", c.forked_from->first}, {"blob", c.forked_from->second}};
  } else {
    j["forked_from"] = nullptr;
  }
  return j;
}

namespace {

constexpr const char* kStubPage =
    "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>plweb</title></head>\n"
    "<body><p>The web client is not installed. The API is served under /api.</p></body></html>\n";

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view code,
                 const std::string& message, json extra = json::object()) {
  extra["error"] = std::string(code);
  extra["message"] = message;
  reply(res, status, extra);
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw json::type_error::create(302, "request body must be an object", nullptr);
  return j;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

AskRequest ask_request(const json& body) {
  AskRequest r;
  r.query = body.at("query").get<std::string>();
  r.chunk = body.value("chunk", size_t{1});
  r.debug = body.value("debug", false);
  r.table = body.value("table", false);
  std::vector<std::string> names;
  if (auto it = body.find("modifiers"); it != body.end()) {
    names = it->get<std::vector<std::string>>();
  }
  if (auto m = opt_string(body, "modifier")) names.push_back(*m);
  for (const std::string& name : names) {
    std::optional<Modifier> m = parse_modifier(name);
    if (!m) throw SessionError(SessionError::Code::kBadRequest, "unknown modifier: " + name);
    r.modifiers.push_back(*m);
  }
  return r;
}

int session_status(const SessionError& e) {
  switch (e.code()) {
    case SessionError::Code::kNotFound: return 404;
    case SessionError::Code::kProtocol: return 409;
    case SessionError::Code::kTooManyEngines: return 429;
    case SessionError::Code::kBadRequest: return 400;
  }
  return 400;
}

int store_status(const StoreError& e) {
  switch (e.code()) {
    case StoreError::Code::kNotFound: return 404;
    case StoreError::Code::kConflict:
    case StoreError::Code::kNameTaken:
    case StoreError::Code::kVersionNotInHistory: return 409;
    case StoreError::Code::kInvalid: return 400;
    case StoreError::Code::kStorage: return 500;
  }
  return 500;
}

int highlight_status(const HighlightError& e) {
  switch (e.code()) {
    case HighlightError::Code::kStaleGeneration: return 409;
    case HighlightError::Code::kUnknownUuid: return 404;
    case HighlightError::Code::kBadChange: return 400;
  }
  return 400;
}

}  // namespace

struct Server::Impl {
  explicit Impl(ServerConfig c)
      : config(std::move(c)),
        store(config.data_root),
        sessions(with_include(config.sessions)),
        mirrors([this](const std::string& spec) { return store.resolve_include(spec); }) {
    routes();
  }

  SessionConfig with_include(SessionConfig sc) {
    sc.include = [this](const std::string& spec) { return store.resolve_include(spec); };
    return sc;
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  /// Maps exceptions to JSON error replies.
  static Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const SessionError& e) {
        reply_error(res, session_status(e), e.code_name(), e.what());
      } catch (const StoreError& e) {
        json extra = json::object();
        if (e.code() == StoreError::Code::kConflict) extra["current"] = e.current();
        reply_error(res, store_status(e), e.code_name(), e.what(), extra);
      } catch (const HighlightError& e) {
        reply_error(res, highlight_status(e), e.code_name(), e.what());
      } catch (const json::exception& e) {
        reply_error(res, 400, "bad_request", e.what());
      } catch (const std::exception& e) {
        reply_error(res, 500, "internal_error", e.what());
      }
    };
  }

  void routes() {
    http.new_task_queue = [n = config.threads] { return new httplib::ThreadPool(n); };
    if (config.access_log) {
      http.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        std::fprintf(stderr, "%s %s %d\n", req.method.c_str(), req.path.c_str(), res.status);
      });
    }
    pengine_routes();
    store_routes();
    highlight_routes();
    std::error_code ec;
    if (!config.static_root.empty() && std::filesystem::is_directory(config.static_root, ec)) {
      http.set_mount_point("/", config.static_root.string());
    } else {
      http.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kStubPage, "text/html; charset=utf-8");
      });
    }
  }

  void pengine_routes() {
    const std::string id = R"(/api/pengine/([0-9a-f]+))";
    http.Get("/api/pengine", guarded([this](const auto&, auto& res) {
      reply(res, 200,
            {{"live", sessions.live()},
             {"sessions", sessions.size()},
             {"max_engines", sessions.config().max_engines}});
    }));
    http.Post("/api/pengine/create", guarded([this](const auto& req, auto& res) {
      json body = body_of(req);
      reply(res, 200, {{"id", sessions.create(body.value("src", std::string()))}});
    }));
    http.Get(id, guarded([this](const auto& req, auto& res) {
      std::string sid = req.matches[1];
      json j = {{"id", sid}, {"state", std::string(session_state_name(sessions.state(sid)))}};
      auto fin = sessions.final_state(sid);
      j["final_state"] = fin ? json(std::string(session_state_name(*fin))) : json(nullptr);
      reply(res, 200, j);
    }));
    http.Delete(id, guarded([this](const auto& req, auto& res) {
      sessions.destroy(req.matches[1]);
      reply(res, 200, {{"ok", true}});
    }));
    http.Post(id + "/ask", guarded([this](const auto& req, auto& res) {
      sessions.ask(req.matches[1], ask_request(body_of(req)));
      reply(res, 200, {{"ok", true}});
    }));
    http.Post(id + "/next", guarded([this](const auto& req, auto& res) {
      json body = body_of(req);
      int64_t count = body.value("count", int64_t{1});
      sessions.next(req.matches[1], static_cast<size_t>(std::max<int64_t>(count, 1)));
      reply(res, 200, {{"ok", true}});
    }));
    http.Post(id + "/stop", guarded([this](const auto& req, auto& res) {
      sessions.stop(req.matches[1]);
      reply(res, 200, {{"ok", true}});
    }));
    http.Post(id + "/abort", guarded([this](const auto& req, auto& res) {
      sessions.abort(req.matches[1]);
      reply(res, 200, {{"ok", true}});
    }));
    http.Post(id + "/respond", guarded([this](const auto& req, auto& res) {
      json body = body_of(req);
      sessions.respond(req.matches[1], body.at("input").get<std::string>());
      reply(res, 200, {{"ok", true}});
    }));
    http.Post(id + "/breakpoints", guarded([this](const auto& req, auto& res) {
      json body = body_of(req);
      std::vector<int> lines = body.value("lines", std::vector<int>{});
      sessions.set_breakpoints(req.matches[1], std::set<int>(lines.begin(), lines.end()));
      reply(res, 200, {{"ok", true}});
    }));
    http.Get(id + "/events", guarded([this](const auto& req, auto& res) {
      double timeout = 0;
      if (req.has_param("timeout")) timeout = std::stod(req.get_param_value("timeout"));
      timeout = std::clamp(timeout, 0.0, 60.0);
      std::optional<uint64_t> cursor;
      if (req.has_param("cursor")) cursor = std::stoull(req.get_param_value("cursor"));
      EventBatch batch = sessions.pull_events(req.matches[1], cursor, timeout);
      reply(res, 200, {{"events", batch.events}, {"cursor", batch.cursor}});
    }));
  }

  static SaveMeta meta_of(const json& body) { return SaveMeta{opt_string(body, "author")}; }

  void store_routes() {
    const std::string name = R"(/api/store/([^/]+))";
    http.Get("/api/store", guarded([this](const auto&, auto& res) {
      reply(res, 200, {{"heads", store.heads()}});
    }));
    http.Post("/api/store", guarded([this](const auto& req, auto& res) {
      json body = body_of(req);
      Store::Saved saved = store.save_new(body.at("content").get<std::string>(), meta_of(body),
                                          opt_string(body, "name"));
      reply(res, 200, {{"name", saved.name}, {"hash", saved.blob}});
    }));
    http.Put(name, guarded([this](const auto& req, auto& res) {
      json body = body_of(req);
      std::string blob = store.save_version(req.matches[1], body.at("content").get<std::string>(),
                                            body.at("previous").get<std::string>(), meta_of(body));
      reply(res, 200, {{"hash", blob}});
    }));
    http.Post(name + "/fork", guarded([this](const auto& req, auto& res) {
      json body = body_of(req);
      Store::Saved saved = store.fork(req.matches[1], opt_string(body, "name"), meta_of(body));
      reply(res, 200, {{"name", saved.name}, {"hash", saved.blob}});
    }));
    http.Get(name + "/history", guarded([this](const auto& req, auto& res) {
      json out = json::array();
      for (const Commit& c : store.history(req.matches[1])) out.push_back(commit_to_json(c));
      reply(res, 200, out);
    }));
    http.Get(name, guarded([this](const auto& req, auto& res) {
      std::optional<std::string> version;
      if (req.has_param("version")) version = req.get_param_value("version");
      Store::Loaded loaded = store.load(req.matches[1], version);
      if (req.has_param("format") && req.get_param_value("format") == "json") {
        reply(res, 200,
              {{"content", loaded.content},
               {"commit", commit_to_json(loaded.commit)},
               {"examples", extract_examples(loaded.content)}});
        return;
      }
      res.set_header("X-Commit", loaded.commit.id);
      res.set_header("X-Blob", loaded.commit.blob);
      res.set_content(loaded.content, "text/plain; charset=utf-8");
    }));
  }

  void highlight_routes() {
    const std::string uuid = R"(/api/highlight/([A-Za-z0-9_-]+))";
    http.Post(uuid, guarded([this](const auto& req, auto& res) {
      json body = body_of(req);
      std::string id = req.matches[1];
      if (auto text = opt_string(body, "text")) {
        mirrors.set_text(id, *text);
      } else {
        std::vector<TextChange> changes;
        for (const json& c : body.at("changes")) {
          changes.push_back({c.at("from").get<size_t>(), c.at("to").get<size_t>(),
                             c.value("insert", std::string())});
        }
        mirrors.apply_changes(id, body.at("generation").get<uint64_t>(), changes);
      }
      reply(res, 200, tokens_to_json(mirrors.enriched_tokens(id)));
    }));
    http.Delete(uuid, guarded([this](const auto& req, auto& res) {
      mirrors.remove(req.matches[1]);
      reply(res, 200, {{"ok", true}});
    }));
    http.Get(R"(/api/hover/([A-Za-z0-9_-]+))", guarded([this](const auto& req, auto& res) {
      size_t offset = std::stoull(req.get_param_value("offset"));
      std::optional<HoverInfo> h = mirrors.hover_info(req.matches[1], offset);
      if (!h) {
        reply(res, 200, nullptr);
        return;
      }
      json j = {{"origin", std::string(origin_name(h->origin))},
                {"predicate", h->predicate.str()},
                {"template", h->templ},
                {"summary", h->summary}};
      j["line"] = h->line ? json(*h->line) : json(nullptr);
      reply(res, 200, j);
    }));
    http.Get("/api/templates", guarded([](const auto& req, auto& res) {
      std::string prefix = req.has_param("prefix") ? req.get_param_value("prefix") : "";
      reply(res, 200, {{"templates", templates(prefix)}});
    }));
  }

  ServerConfig config;
  Store store;
  SessionManager sessions;
  MirrorRegistry mirrors;
  httplib::Server http;
};

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

bool Server::listen() { return impl_->http.listen(impl_->config.host, impl_->config.port); }

int Server::bind_any_port() { return impl_->http.bind_to_any_port(impl_->config.host); }

bool Server::serve() { return impl_->http.listen_after_bind(); }

void Server::stop() {
  impl_->sessions.close();
  impl_->http.stop();
}

bool Server::running() const { return impl_->http.is_running(); }

SessionManager& Server::sessions() { return impl_->sessions; }
Store& Server::store() { return impl_->store; }
MirrorRegistry& Server::mirrors() { return impl_->mirrors; }

}  // namespace plweb
