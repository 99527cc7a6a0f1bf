#include <httplib.h>

#include "ipd/errors.hpp"
#include "ipd/llm_gateway.hpp"

namespace ipd {

struct HttpSidecarClient::Impl {
  std::string base;    // scheme://host:port
  std::string prefix;  // path prefix without trailing slash
  std::unique_ptr<httplib::Client> client;
};

namespace {

void split_url(const std::string& url, std::string& base, std::string& prefix) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::InvalidArgument, "endpoint needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  base = url.substr(0, path_start);
  prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

}  // namespace

HttpSidecarClient::HttpSidecarClient(Endpoint endpoint) : impl_(std::make_unique<Impl>()) {
  split_url(endpoint.url, impl_->base, impl_->prefix);
  impl_->client = std::make_unique<httplib::Client>(impl_->base);
  if (!impl_->client->is_valid()) {
    throw Error(ErrorKind::InvalidArgument, "unsupported endpoint " + endpoint.url);
  }
  const auto secs = [](std::chrono::milliseconds ms) {
    return std::pair<time_t, time_t>(ms.count() / 1000, (ms.count() % 1000) * 1000);
  };
  const auto [cs, cus] = secs(endpoint.connect_timeout);
  const auto [rs, rus] = secs(endpoint.read_timeout);
  impl_->client->set_connection_timeout(cs, cus);
  impl_->client->set_read_timeout(rs, rus);
  impl_->client->set_write_timeout(rs, rus);
}

HttpSidecarClient::~HttpSidecarClient() = default;

SidecarResponse HttpSidecarClient::steered_chat(const SidecarRequest& request) {
  const std::string path = impl_->prefix + "/v1/steered-chat";
  auto res = impl_->client->Post(path, request.to_json().dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::SidecarUnavailable, impl_->base + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status >= 500) {
    throw Error(ErrorKind::SidecarUnavailable, "sidecar returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::SidecarRejected,
                "sidecar returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  const auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw Error(ErrorKind::SidecarRejected, "sidecar response is not JSON");
  return SidecarResponse::from_json(body);
}

std::optional<nlohmann::json> HttpSidecarClient::health() {
  auto res = impl_->client->Get(impl_->prefix + "/healthz");
  if (!res || res->status != 200) return std::nullopt;
  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded()) return std::nullopt;
  return body;
}

}  // namespace ipd
