#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "drhai/dialogue.hpp"
#include "drhai/errors.hpp"
#include "drhai/formula.hpp"
#include "drhai/reconciliation.hpp"

namespace drhai {

/// Failure carrying an HTTP status and a short machine-readable code.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& detail)
      : Error(detail), status_(status), code_(std::move(code)) {}

  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

struct Scenario {
  std::string id;
  std::string title;
  std::string description;
  KnowledgeBase kb_r{"KB_r"};
  /// Stands in for the human's knowledge when building move menus.
  KnowledgeBase menu_kb{"KB_e"};
  std::vector<Formula> topic;
  /// Keyed by formula text as printed by format_formula.
  std::map<std::string, std::string> labels;

  /// Label of f, "not <label>" for a negated labelled formula, else syntax.
  std::string render(const Formula& f) const;
  std::string render(const Move& m) const;
};

/// Reads `{title, description, kb_r, menu_kb, topic, labels}`. Checks that
/// both knowledge bases are consistent and that every topic formula is
/// entailed by kb_r and not by menu_kb. Throws ServiceError (400).
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

struct MenuItem {
  std::string token;
  Move move;
  std::string text;
};

struct SessionSummary {
  SimilarityReport pre;
  SimilarityReport post;
  std::size_t updates = 0;
  /// False when the success procedure ran out of arguments.
  bool success = false;
};

struct ServiceOptions {
  std::size_t menu_size = 6;
  std::chrono::milliseconds explainer_budget{2000};
  /// Append-only event log; empty keeps everything in memory.
  std::string store_path;
};

/// Sessions in which a human plays the explainee against the automated
/// explainer. Thread-safe; operations on one session are serialised.
class DialogueService {
 public:
  explicit DialogueService(ServiceOptions options = {});
  ~DialogueService();
  DialogueService(const DialogueService&) = delete;
  DialogueService& operator=(const DialogueService&) = delete;

  std::string add_scenario(Scenario s);
  std::vector<Scenario> scenarios() const;

  /// Plays the first topic query for the human and the explainer's reply.
  std::string create_session(const std::string& scenario_id);
  nlohmann::json session_json(const std::string& id) const;
  DialogueState state(const std::string& id) const;
  std::optional<SessionSummary> summary(const std::string& id) const;

  std::vector<MenuItem> menu(const std::string& id) const;
  /// Applies the menu move named by `token`, then the explainer's answer.
  /// Returns the updated session payload.
  nlohmann::json post_move(const std::string& id, const std::string& token);
  void delete_session(const std::string& id);

  const ServiceOptions& options() const { return options_; }

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<const Scenario> scenario(const std::string& id) const;
  void explainer_turn(Session& s);
  void finish(Session& s);
  nlohmann::json payload(const Session& s) const;
  std::vector<MenuItem> menu_of(const Session& s) const;
  void log(const nlohmann::json& event);
  void restore();

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Scenario>> scenarios_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_scenario_ = 1;
  std::uint64_t next_session_ = 1;
  std::mutex log_mu_;
  bool restoring_ = false;
};

nlohmann::json similarity_to_json(const SimilarityReport& r);

/// HTTP front end for a DialogueService.
class HttpServer {
 public:
  explicit HttpServer(DialogueService& service);
  ~HttpServer();

  /// Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace drhai
