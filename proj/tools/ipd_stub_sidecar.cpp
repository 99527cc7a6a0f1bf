// Stand-in sidecar for trying the CLI without a model. Serves the same
// endpoints with deterministic canned replies.

#include <CLI11.hpp>
#include <httplib.h>

#include <iostream>

#include "stub_sidecar.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic stub of the steering sidecar"};
  int port = 8000;
  std::string host = "127.0.0.1";
  app.add_option("--port", port, "Listen port");
  app.add_option("--host", host, "Listen address");
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;
  const std::string model_id = "stub-model";
  server.Post("/v1/steered-chat", [&](const httplib::Request& req, httplib::Response& res) {
    ipd::stub::handle_steered_chat(req, res, ipd::stub::scripted_reply, model_id);
  });
  server.Get("/healthz", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"status", "ok"}, {"model_id", model_id}, {"traits_loaded", nlohmann::json::array()}}
                        .dump(),
                    "application/json");
  });
  std::cerr << "stub sidecar on http://" << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}
