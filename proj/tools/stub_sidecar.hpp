#pragma once

// Deterministic stand-in for the steering sidecar. Speaks the same wire
// protocol, needs no model. Used by the test suites and by the
// ipd_stub_sidecar demo binary.

#include <httplib.h>

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ipd/errors.hpp"
#include "ipd/llm_gateway.hpp"
#include "ipd/rng.hpp"

namespace ipd::stub {

/// Reply text for a request. Cooperation probability rises with
/// agreeableness/conscientiousness steering and falls with the opposite sign;
/// the choice is a pure function of (seed, trait, direction, prompt length).
/// Replies answer whichever labels the user prompt asks for.
inline std::string scripted_reply(const SidecarRequest& request) {
  double p_cooperate = 0.5;
  if (request.trait && (*request.trait == Trait::Agreeableness || *request.trait == Trait::Conscientiousness)) {
    p_cooperate = *request.direction > 0 ? 0.95 : 0.1;
  }
  RandomStream rng(derive_seed(request.seed, request.trait ? static_cast<std::uint64_t>(*request.trait) + 1 : 0,
                               request.user.size()));
  const Action action = rng.uniform01() < p_cooperate ? Action::Cooperate : Action::Defect;
  // Honest agents say what they do; the baseline lies now and then.
  const bool honest = request.trait.has_value() ? *request.direction > 0 : rng.uniform01() < 0.5;
  const Action message = honest ? action : opposite(action);

  std::string out = "Weighing the history and the sentence lengths, I settle on my move.\n";
  const bool wants_message = request.user.find("MESSAGE:") != std::string::npos;
  const bool wants_action = request.user.find("ACTION:") != std::string::npos;
  if (wants_message) out += "MESSAGE: " + std::string(to_string(message)) + "\n";
  if (wants_action) out += "ACTION: " + std::string(to_string(action)) + "\n";
  return out;
}

using Responder = std::function<std::string(const SidecarRequest&)>;

/// Validates a request body the way the sidecar does and fills `res`.
inline void handle_steered_chat(const httplib::Request& req, httplib::Response& res, const Responder& responder,
                                const std::string& model_id) {
  const auto body = nlohmann::json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    res.status = 400;
    res.set_content(R"({"error":"malformed body"})", "application/json");
    return;
  }
  if (body.contains("trait") && body["trait"].is_string()) {
    try {
      parse_trait(body["trait"].get<std::string>());
    } catch (const Error&) {
      res.status = 422;
      res.set_content(R"({"error":"unknown trait"})", "application/json");
      return;
    }
  }
  SidecarRequest request;
  try {
    request = SidecarRequest::from_json(body);
  } catch (const Error& e) {
    res.status = 400;
    res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    return;
  }
  SidecarResponse out{responder(request), model_id, request.trait.has_value() && request.coefficient != 0.0};
  res.set_content(out.to_json().dump(), "application/json");
}

/// In-process server on an ephemeral port. The responder may be swapped
/// between requests; every received request is recorded.
class StubServer {
 public:
  explicit StubServer(Responder responder = scripted_reply, std::string model_id = "stub-model")
      : responder_(std::move(responder)), model_id_(std::move(model_id)) {
    server_.Post("/v1/steered-chat", [this](const httplib::Request& req, httplib::Response& res) {
      Responder r;
      {
        std::lock_guard lock(mutex_);
        requests_.push_back(req.body);
        r = responder_;
      }
      if (fail_next_.load() > 0) {
        --fail_next_;
        res.status = 503;
        return;
      }
      handle_steered_chat(req, res, r, model_id_);
    });
    server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(nlohmann::json{{"status", "ok"}, {"model_id", model_id_}, {"traits_loaded", nlohmann::json::array()}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  void set_responder(Responder r) {
    std::lock_guard lock(mutex_);
    responder_ = std::move(r);
  }
  /// The next `n` chat requests answer 503.
  void fail_next(int n) { fail_next_ = n; }

  std::vector<std::string> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  httplib::Server server_;
  Responder responder_;
  std::string model_id_;
  mutable std::mutex mutex_;
  std::vector<std::string> requests_;
  std::atomic<int> fail_next_{0};
  int port_ = 0;
  std::thread thread_;
};

}  // namespace ipd::stub
