#pragma once

// JSON-over-HTTP decode service for keyboard front ends.
//
//   POST /decode  {"points":[{"x":..,"y":..,"t":..}], "context":["word",..], "nbest":k}
//                 -> {"candidates":[{"words":[..],"text":..,"total":..,"spatial":..,"lm":..,"source":..}]}
//   GET  /layout  -> {"name":..,"keys":[{"char":..,"x":..,"y":..,"width":..,"height":..}]}
//   POST /commit  {"words":[..]} -> {"context":[..]}
//
// Sessions are named by the X-Session-Id header and hold committed words.
// A /decode body with "context" uses it as given; otherwise the session's
// words are used. Idle sessions are dropped lazily on later requests.

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "swkb/decoder.hpp"
#include "swkb/error.hpp"
#include "swkb/utf8.hpp"

namespace swkb {

inline constexpr const char* kSessionHeader = "X-Session-Id";

struct ServiceOptions {
  std::chrono::seconds idle_timeout{600};
  std::size_t max_points = 256;
  std::size_t max_context = 64;
};

struct HttpReply {
  int status = 200;
  std::string body;
};

class DecodeService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  /// `models` may be null: every endpoint then answers 503.
  DecodeService(std::shared_ptr<const KeyboardModels> models, DecoderConfig cfg, ServiceOptions opt = {},
                Clock clock = [] { return std::chrono::steady_clock::now(); })
      : models_(std::move(models)), cfg_(cfg), opt_(opt), clock_(std::move(clock)) {
    cfg_.validate();
    if (models_) {
      decoder_ = std::make_unique<Decoder>(models_->lexicon_fst, models_->lm_fst.fst, models_->lm.vocab, cfg_);
    }
  }

  HttpReply decode(const std::string& body, const std::string& session_id) {
    if (!decoder_) return unavailable();
    nlohmann::json req;
    if (auto err = parse_object(body, req)) return *err;

    TouchSequence taps;
    const auto points = req.find("points");
    if (points == req.end() || !points->is_array() || points->empty()) {
      return bad_request("\"points\" must be a non-empty array");
    }
    if (points->size() > opt_.max_points) return bad_request("too many points");
    for (const auto& p : *points) {
      if (!p.is_object() || !p.contains("x") || !p.contains("y") || !p["x"].is_number() || !p["y"].is_number()) {
        return bad_request("each point needs numeric \"x\" and \"y\"");
      }
      if (p.contains("t") && !p["t"].is_number()) return bad_request("\"t\" must be a number");
      taps.push_back({p["x"].get<double>(), p["y"].get<double>(), p.value("t", 0.0)});
    }

    std::size_t k = cfg_.nbest;
    if (const auto n = req.find("nbest"); n != req.end()) {
      if (!n->is_number_integer() || n->get<long long>() < 1) return bad_request("\"nbest\" must be a positive integer");
      k = std::min<std::size_t>(k, n->get<std::size_t>());
    }

    std::vector<std::string> context;
    if (const auto c = req.find("context"); c != req.end()) {
      if (auto err = string_list(*c, "context", context)) return *err;
      touch(session_id);
    } else if (!session_id.empty()) {
      const auto s = touch(session_id);
      std::lock_guard lock(s->mutex);
      context = s->context;
    }

    CandidateList cands;
    try {
      const StateId state = context_state(*decoder_, context);
      cands = decode_word(taps, *models_, *decoder_, state);
    } catch (const Error& e) {
      return bad_request(e.what());
    }
    if (cands.size() > k) cands.resize(k);
    nlohmann::json out = {{"candidates", nlohmann::json::array()}};
    for (const auto& c : cands) out["candidates"].push_back(candidate_json(c));
    return {200, out.dump()};
  }

  HttpReply commit(const std::string& body, const std::string& session_id) {
    if (!decoder_) return unavailable();
    if (session_id.empty()) return bad_request(std::string("missing ") + kSessionHeader + " header");
    nlohmann::json req;
    if (auto err = parse_object(body, req)) return *err;
    const auto w = req.find("words");
    if (w == req.end()) return bad_request("\"words\" is required");
    std::vector<std::string> words;
    if (auto err = string_list(*w, "words", words)) return *err;
    if (words.empty()) return bad_request("\"words\" must not be empty");

    const auto s = touch(session_id);
    std::lock_guard lock(s->mutex);
    s->context.insert(s->context.end(), words.begin(), words.end());
    if (s->context.size() > opt_.max_context) {
      s->context.erase(s->context.begin(), s->context.end() - static_cast<std::ptrdiff_t>(opt_.max_context));
    }
    return {200, nlohmann::json{{"context", s->context}}.dump()};
  }

  HttpReply layout() const {
    if (!decoder_) return unavailable();
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& [c, k] : models_->layout.keys) {
      std::string ch;
      utf8::append(ch, c);
      keys.push_back({{"char", ch},
                      {"label", c == kSeparatorChar ? std::string("space") : ch},
                      {"x", k.cx},
                      {"y", k.cy},
                      {"width", k.width},
                      {"height", k.height}});
    }
    return {200, nlohmann::json{{"name", models_->layout.name}, {"keys", keys}}.dump()};
  }

  /// Live sessions after dropping idle ones.
  std::size_t session_count() {
    std::lock_guard lock(mutex_);
    expire_locked();
    return sessions_.size();
  }

  /// Committed words of a session, empty when unknown or expired.
  std::vector<std::string> session_context(const std::string& id) {
    std::shared_ptr<Session> s;
    {
      std::lock_guard lock(mutex_);
      expire_locked();
      auto it = sessions_.find(id);
      if (it == sessions_.end()) return {};
      s = it->second;
    }
    std::lock_guard lock(s->mutex);
    return s->context;
  }

  /// Registers the routes on an httplib server.
  void mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const HttpReply& r) {
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server.Post("/decode", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, decode(req.body, req.get_header_value(kSessionHeader)));
    });
    server.Post("/commit", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, commit(req.body, req.get_header_value(kSessionHeader)));
    });
    server.Get("/layout", [this, send](const httplib::Request&, httplib::Response& res) { send(res, layout()); });
  }

 private:
  struct Session {
    std::mutex mutex;
    std::vector<std::string> context;
    std::chrono::steady_clock::time_point last_used;
  };

  static HttpReply bad_request(const std::string& msg) { return {400, nlohmann::json{{"error", msg}}.dump()}; }
  static HttpReply unavailable() { return {503, nlohmann::json{{"error", "model not loaded"}}.dump()}; }

  static std::optional<HttpReply> parse_object(const std::string& body, nlohmann::json& out) {
    out = nlohmann::json::parse(body, nullptr, false);
    if (out.is_discarded()) return bad_request("body is not valid JSON");
    if (!out.is_object()) return bad_request("body must be a JSON object");
    return std::nullopt;
  }

  std::optional<HttpReply> string_list(const nlohmann::json& v, const char* what, std::vector<std::string>& out) const {
    if (!v.is_array()) return bad_request(std::string("\"") + what + "\" must be an array of strings");
    if (v.size() > opt_.max_context) return bad_request(std::string("\"") + what + "\" is too long");
    for (const auto& w : v) {
      if (!w.is_string()) return bad_request(std::string("\"") + what + "\" must be an array of strings");
      auto s = w.get<std::string>();
      if (s.empty() || !utf8::is_valid(s)) return bad_request(std::string("\"") + what + "\" has an empty or invalid word");
      out.push_back(std::move(s));
    }
    return std::nullopt;
  }

  static nlohmann::json candidate_json(const Candidate& c) {
    const char* source = c.source == Candidate::Source::Decoded    ? "decoded"
                         : c.source == Candidate::Source::Rewritten ? "rewritten"
                                                                     : "literal";
    return {{"words", c.words}, {"text", c.text()}, {"total", c.total}, {"spatial", c.spatial}, {"lm", c.lm},
            {"source", source}};
  }

  /// Finds or creates a session and marks it used; null for an empty id.
  std::shared_ptr<Session> touch(const std::string& id) {
    std::lock_guard lock(mutex_);
    expire_locked();
    if (id.empty()) return nullptr;
    auto& s = sessions_[id];
    if (!s) s = std::make_shared<Session>();
    s->last_used = clock_();
    return s;
  }

  void expire_locked() {
    const auto now = clock_();
    std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_used > opt_.idle_timeout; });
  }

  std::shared_ptr<const KeyboardModels> models_;
  DecoderConfig cfg_;
  ServiceOptions opt_;
  Clock clock_;
  std::unique_ptr<Decoder> decoder_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace swkb
