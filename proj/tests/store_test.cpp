#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "plweb/store.hpp"

using namespace plweb;

namespace {

std::string from_hex(const std::string& hex) {
  std::string out;
  for (size_t i = 0; i + 1 < hex.size(); i += 2) {
    out += static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16));
  }
  return out;
}

std::filesystem::path temp_root(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("plweb_store_" + tag + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(p);
  return p;
}

StoreError::Code error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const StoreError& e) {
    return e.code();
  }
  FAIL("expected a store error");
  return StoreError::Code::kStorage;
}

}  // namespace

TEST_CASE("sha1 matches the reference vectors") {
  std::ifstream in(PLWEB_FIXTURE_DIR "/sha1_vectors.txt");
  std::string hex, digest;
  int n = 0;
  while (in >> hex >> digest) {
    CHECK(sha1_hex(from_hex(hex)) == digest);
    ++n;
  }
  // The empty string has no hex token of its own, so the reader skips it.
  CHECK(n >= 95);
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(sha1_hex("foo.") == "6ba62a7c5e3e9a260c5a30adf2756882c02f12a6");
}

TEST_CASE("anonymous saves") {
  Store store;
  auto a = store.save_new("foo.");
  CHECK(std::regex_match(a.name, std::regex("^[a-zA-Z0-9]{10}$")));
  CHECK(a.blob == sha1_hex("foo."));
  auto b = store.save_new("foo.");
  CHECK(a.name != b.name);
  CHECK(a.blob == b.blob);
  CHECK(error_code([&] { store.save_new(""); }) == StoreError::Code::kInvalid);
  CHECK(store.history(a.name).size() == 1);
}

TEST_CASE("versions and conflicts") {
  Store store;
  auto v1 = store.save_new("a.", {}, std::string("lists"));
  std::string v2 = store.save_version("lists", "a. b.", v1.blob);
  CHECK(store.history("lists").size() == 2);
  try {
    store.save_version("lists", "c.", v1.blob);
    FAIL("expected conflict");
  } catch (const StoreError& e) {
    CHECK(e.code() == StoreError::Code::kConflict);
    CHECK(e.current() == v2);
  }
  std::string v3 = store.save_version("lists", "a. b.", v2, {std::string("bob")});
  CHECK(v3 == v2);
  auto h = store.history("lists");
  CHECK(h.size() == 3);
  CHECK(h[0].author == std::optional<std::string>("bob"));
  CHECK(h[2].blob == v1.blob);
  CHECK_FALSE(h[2].previous.has_value());
  CHECK(error_code([&] { store.save_version("nope", "x.", v1.blob); }) ==
        StoreError::Code::kNotFound);
  CHECK(error_code([&] { store.save_new("x.", {}, std::string("lists")); }) ==
        StoreError::Code::kNameTaken);
}

TEST_CASE("load by name, version and hash") {
  Store store;
  auto v1 = store.save_new("one.", {}, std::string("lists"));
  std::string v2 = store.save_version("lists", "two.", v1.blob);
  std::string v3 = store.save_version("lists", "three.", v2);
  CHECK(store.load("lists").content == "three.");
  CHECK(store.load("lists", v1.blob).content == "one.");
  CHECK(store.load(v2).content == "two.");
  CHECK(sha1_hex(store.load(v2).content) == v2);
  auto other = store.save_new("zzz.");
  CHECK(error_code([&] { store.load("lists", other.blob); }) ==
        StoreError::Code::kVersionNotInHistory);
  CHECK(error_code([&] { store.load("missing"); }) == StoreError::Code::kNotFound);
  CHECK(store.resolve_include("lists") == std::optional<std::string>("three."));
  CHECK(store.resolve_include(v1.blob) == std::optional<std::string>("one."));
  CHECK_FALSE(store.resolve_include("unknown").has_value());
  (void)v3;
}

TEST_CASE("forks keep the origin history") {
  Store store;
  auto q1 = store.save_new("q1.", {}, std::string("queens"));
  std::string q2 = store.save_version("queens", "q2.", q1.blob);
  auto f = store.fork("queens", std::string("myqueens"));
  CHECK(f.blob == q2);
  auto h = store.history("myqueens");
  REQUIRE(h.size() == 3);
  REQUIRE(h[0].forked_from.has_value());
  CHECK(h[0].forked_from->first == "queens");
  CHECK(h[0].forked_from->second == q2);
  CHECK(h[1].blob == q2);
  CHECK(h[2].blob == q1.blob);
  CHECK_FALSE(h[1].forked_from.has_value());

  store.save_version("queens", "q3.", q2);
  CHECK(store.history("myqueens").size() == 3);
  CHECK(store.load("myqueens").content == "q2.");
  CHECK(error_code([&] { store.fork("queens", std::string("myqueens")); }) ==
        StoreError::Code::kNameTaken);
  CHECK(error_code([&] { store.fork("nothing"); }) == StoreError::Code::kNotFound);
  auto anon = store.fork("queens");
  CHECK(anon.name.size() == 10);
}

TEST_CASE("concurrent writers on one head have one winner") {
  Store store;
  auto base = store.save_new("base.", {}, std::string("shared"));
  for (int round = 0; round < 20; ++round) {
    std::string prev = store.load("shared").commit.blob;
    std::atomic<int> wins{0};
    std::atomic<int> conflicts{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        try {
          store.save_version("shared", "r" + std::to_string(round) + "t" + std::to_string(t) + ".",
                             prev);
          ++wins;
        } catch (const StoreError& e) {
          if (e.code() == StoreError::Code::kConflict) ++conflicts;
        }
      });
    }
    for (auto& th : threads) th.join();
    CHECK(wins == 1);
    CHECK(conflicts == 7);
  }
  CHECK(store.history("shared").size() == 21);
  (void)base;
}

TEST_CASE("the log is replayed from disk") {
  auto root = temp_root("replay");
  std::string blob;
  {
    Store store(root);
    auto a = store.save_new("first.", {}, std::string("doc"));
    blob = store.save_version("doc", "second.", a.blob);
    store.fork("doc", std::string("copy"));
  }
  {
    // A torn final line is ignored.
    std::ofstream log(root / "heads" / "doc.log", std::ios::app);
    log << "{\"blob\":\"abc";
  }
  Store again(root);
  CHECK(again.load("doc").content == "second.");
  CHECK(again.history("doc").size() == 2);
  CHECK(again.history("copy").size() == 3);
  CHECK(again.load(blob).content == "second.");
  CHECK(std::filesystem::exists(root / "blobs" / blob));
  std::filesystem::remove_all(root);
}

TEST_CASE("randomized operations keep the store consistent") {
  Store store;
  std::mt19937 rng(7);
  // Model: per head, the list of contents newest last, plus the fork point.
  std::map<std::string, std::vector<std::string>> model;
  std::map<std::string, size_t> history_length;
  std::vector<std::string> names;
  auto random_content = [&rng] {
    std::string s;
    int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) s += static_cast<char>(rng() % 256);
    return s;
  };
  for (int op = 0; op < 1000; ++op) {
    int kind = names.empty() ? 0 : static_cast<int>(rng() % 4);
    if (kind == 0) {
      std::string c = random_content();
      auto saved = store.save_new(c);
      CHECK(saved.blob == sha1_hex(c));
      model[saved.name] = {c};
      history_length[saved.name] = 1;
      names.push_back(saved.name);
    } else if (kind == 1) {
      const std::string& n = names[rng() % names.size()];
      std::string c = random_content();
      std::string prev = sha1_hex(model[n].back());
      if (rng() % 5 == 0) {
        std::string stale = sha1_hex(model[n].back() + "x");
        CHECK(error_code([&] { store.save_version(n, c, stale); }) == StoreError::Code::kConflict);
      } else {
        CHECK(store.save_version(n, c, prev) == sha1_hex(c));
        model[n].push_back(c);
        ++history_length[n];
      }
    } else if (kind == 2) {
      const std::string src = names[rng() % names.size()];
      auto f = store.fork(src);
      model[f.name] = model[src];
      history_length[f.name] = history_length[src] + 1;
      names.push_back(f.name);
      auto h = store.history(f.name);
      CHECK(h.size() == history_length[f.name]);
      CHECK(h[0].forked_from->first == src);
    } else {
      const std::string& n = names[rng() % names.size()];
      const auto& versions = model[n];
      auto loaded = store.load(n);
      CHECK(loaded.content == versions.back());
      const std::string& old = versions[rng() % versions.size()];
      CHECK(store.load(n, sha1_hex(old)).content == old);
      CHECK(store.load(sha1_hex(old)).content == old);
    }
  }
  for (const auto& [name, versions] : model) {
    auto h = store.history(name);
    CHECK(h.front().blob == sha1_hex(versions.back()));
    CHECK(h.size() == history_length[name]);
    for (size_t i = 1; i < h.size(); ++i) CHECK(h[i - 1].previous == h[i].id);
  }
}
