#include "drhai/service.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>

#include "httplib.h"

#include "drhai/transcript.hpp"

namespace drhai {

using nlohmann::json;

namespace {

std::string now_iso() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(mu);
  return hex(gen());
}

ServiceError bad_request(const std::string& detail) {
  return ServiceError(400, "bad_request", detail);
}

KnowledgeBase kb_from_json(const json& j, const std::string& label) {
  if (!j.is_array()) throw bad_request(label + " must be an array of formula strings");
  KnowledgeBase kb(label);
  std::size_t line = 0;
  for (const auto& item : j) {
    ++line;
    if (!item.is_string()) throw bad_request(label + " must be an array of formula strings");
    const Formula f = parse_formula(item.get<std::string>(), line);
    if (!kb.add(f)) throw bad_request(label + " repeats " + format_formula(f));
  }
  return kb;
}

json kb_to_json(const KnowledgeBase& kb) {
  json out = json::array();
  for (const auto& f : kb) out.push_back(format_formula(f));
  return out;
}

json formula_list(const std::vector<Formula>& fs) {
  json out = json::array();
  for (const auto& f : fs) out.push_back(format_formula(f));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenarios

std::string Scenario::render(const Formula& f) const {
  if (auto it = labels.find(format_formula(f)); it != labels.end()) return it->second;
  if (f.kind() == Connective::Not) {
    if (auto it = labels.find(format_formula(f.child())); it != labels.end()) {
      return "not " + it->second;
    }
  }
  return format_formula(f);
}

std::string Scenario::render(const Move& m) const {
  switch (m.locution) {
    case Locution::Query:
      return "Why do you hold that " + render(*m.target) + "?";
    case Locution::AgreeToDisagree:
      return "Let's agree to disagree.";
    case Locution::Support:
    case Locution::Refute: {
      std::string text;
      for (const auto& p : m.argument->premises) {
        if (!text.empty()) text += "; ";
        text += render(p);
      }
      return text + ", so " + render(m.argument->claim) + ".";
    }
  }
  return {};
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw bad_request("scenario must be a JSON object");
  Scenario s;
  try {
    s.id = j.value("id", std::string());
    s.title = j.value("title", std::string());
    s.description = j.value("description", std::string());
    if (!j.contains("kb_r") || !j.contains("menu_kb") || !j.contains("topic")) {
      throw bad_request("scenario needs kb_r, menu_kb and topic");
    }
    s.kb_r = kb_from_json(j.at("kb_r"), "KB_r");
    s.menu_kb = kb_from_json(j.at("menu_kb"), "KB_e");
    if (!j.at("topic").is_array() || j.at("topic").empty()) {
      throw bad_request("topic must be a non-empty array");
    }
    for (const auto& t : j.at("topic")) s.topic.push_back(parse_formula(t.get<std::string>()));
    if (j.contains("labels")) {
      for (const auto& [key, value] : j.at("labels").items()) {
        s.labels[format_formula(parse_formula(key))] = value.get<std::string>();
      }
    }
  } catch (const ParseError& e) {
    throw bad_request(std::string("formula: ") + e.what());
  } catch (const json::exception& e) {
    throw bad_request(std::string("scenario: ") + e.what());
  }
  // The dialogue preconditions are the scenario invariants.
  try {
    (void)DialogueState::start(s.kb_r, s.menu_kb, s.topic);
  } catch (const PreconditionError& e) {
    throw bad_request(e.what());
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json labels = json::object();
  for (const auto& [k, v] : s.labels) labels[k] = v;
  return {{"id", s.id},
          {"title", s.title},
          {"description", s.description},
          {"kb_r", kb_to_json(s.kb_r)},
          {"menu_kb", kb_to_json(s.menu_kb)},
          {"topic", formula_list(s.topic)},
          {"labels", labels}};
}

json similarity_to_json(const SimilarityReport& r) {
  return {{"syntactic", format_ratio(r.syntactic)},
          {"semantic", format_ratio(r.semantic)},
          {"alpha", r.alpha},
          {"sigma", r.sigma}};
}

// ---------------------------------------------------------------------------
// Sessions

struct DialogueService::Session {
  Session(std::string id_, std::shared_ptr<const Scenario> sc, DialogueState st, std::string at)
      : id(std::move(id_)), scenario(std::move(sc)), state(std::move(st)), created(at), updated(at) {}

  std::string id;
  std::shared_ptr<const Scenario> scenario;
  DialogueState state;
  std::string created;
  std::string updated;
  std::optional<SessionSummary> summary;
  std::mutex mu;
};

DialogueService::DialogueService(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.store_path.empty()) restore();
}

DialogueService::~DialogueService() = default;

void DialogueService::log(const json& event) {
  if (restoring_ || options_.store_path.empty()) return;
  std::lock_guard lock(log_mu_);
  std::ofstream out(options_.store_path, std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error("cannot write event log " + options_.store_path);
}

std::string DialogueService::add_scenario(Scenario s) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    if (s.id.empty() || scenarios_.contains(s.id)) {
      do {
        s.id = "scenario-" + std::to_string(next_scenario_++);
      } while (scenarios_.contains(s.id));
    }
    id = s.id;
    scenarios_[id] = std::make_shared<const Scenario>(s);
  }
  log({{"event", "scenario"}, {"scenario", scenario_to_json(s)}});
  return id;
}

std::vector<Scenario> DialogueService::scenarios() const {
  std::lock_guard lock(mu_);
  std::vector<Scenario> out;
  for (const auto& [id, s] : scenarios_) out.push_back(*s);
  return out;
}

std::shared_ptr<const Scenario> DialogueService::scenario(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = scenarios_.find(id);
  if (it == scenarios_.end()) throw ServiceError(404, "not_found", "unknown scenario " + id);
  return it->second;
}

std::shared_ptr<DialogueService::Session> DialogueService::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "not_found", "unknown session " + id);
  return it->second;
}

void DialogueService::explainer_turn(Session& s) {
  Move m;
  try {
    m = next_move(s.state, Agent::Explainer, Strategy::explainer_default());
  } catch (const BudgetExceeded&) {
    std::cerr << "session " << s.id << ": explainer out of time, agreeing to disagree\n";
    m = Move::agree(Agent::Explainer);
  }
  s.state = commit_move(s.state, m);
  log({{"event", "move"}, {"session", s.id}, {"move", move_to_json(s.state.history().back())},
       {"at", s.updated}});
}

void DialogueService::finish(Session& s) {
  const Scenario& sc = *s.scenario;
  SessionSummary sum;
  sum.pre = similarity(sc.menu_kb, sc.kb_r);
  try {
    const SuccessResult r =
        success_procedure(sc.menu_kb, s.state.store(Agent::Explainer), queried_topic(s.state));
    sum.post = similarity(r.kb, sc.kb_r);
    sum.updates = r.updates.size();
    sum.success = true;
  } catch (const BudgetExceeded&) {
    throw;
  } catch (const Error&) {
    sum.post = sum.pre;
  }
  s.summary = std::move(sum);
}

std::string DialogueService::create_session(const std::string& scenario_id) {
  auto sc = scenario(scenario_id);
  DialogueOptions opts;
  opts.explainee_may_concede = true;
  opts.budget.max_time = options_.explainer_budget;
  auto session = std::make_shared<Session>(
      random_id(), sc, DialogueState::start(sc->kb_r, sc->menu_kb, sc->topic, opts), now_iso());
  {
    std::lock_guard lock(mu_);
    while (sessions_.contains(session->id)) session->id = random_id();
    sessions_[session->id] = session;
  }
  std::lock_guard lock(session->mu);
  log({{"event", "session"}, {"session", session->id}, {"scenario_id", scenario_id},
       {"at", session->created}});
  session->state = apply_move(session->state, Move::query(sc->topic.front()));
  log({{"event", "move"}, {"session", session->id},
       {"move", move_to_json(session->state.history().back())}, {"at", session->updated}});
  explainer_turn(*session);
  return session->id;
}

std::vector<MenuItem> DialogueService::menu_of(const Session& s) const {
  if (s.state.terminated()) throw ServiceError(409, "finished", "session is finished");
  if (s.state.agent_to_move() != Agent::Explainee) {
    throw ServiceError(409, "not_your_turn", "it is not the explainee's turn");
  }
  LegalMoveQuery q;
  q.sources = SourceMode::Pure;
  q.per_target_limit = options_.menu_size;
  std::vector<MenuItem> out;
  std::optional<Move> agree;
  for (auto& m : legal_moves(s.state, Agent::Explainee, q)) {
    if (m.locution == Locution::AgreeToDisagree) {
      agree = std::move(m);
      continue;
    }
    if (out.size() >= options_.menu_size) continue;
    out.push_back({{}, std::move(m), {}});
  }
  if (agree) out.push_back({{}, std::move(*agree), {}});
  for (auto& item : out) {
    item.token = hex(fnv1a(s.id + "|" + format_move(item.move)));
    item.text = s.scenario->render(item.move);
  }
  return out;
}

std::vector<MenuItem> DialogueService::menu(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return menu_of(*s);
}

json DialogueService::post_move(const std::string& id, const std::string& token) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto items = menu_of(*s);
  auto it = std::find_if(items.begin(), items.end(),
                         [&](const MenuItem& i) { return i.token == token; });
  if (it == items.end()) {
    throw ServiceError(422, "stale_token", "move token is not on the current menu");
  }
  DialogueState next = apply_move(s->state, it->move);
  s->state = std::move(next);
  s->updated = now_iso();
  log({{"event", "move"}, {"session", s->id}, {"move", move_to_json(s->state.history().back())},
       {"at", s->updated}});
  if (!s->state.terminated()) explainer_turn(*s);
  if (s->state.terminated()) finish(*s);
  return payload(*s);
}

void DialogueService::delete_session(const std::string& id) {
  {
    std::lock_guard lock(mu_);
    if (sessions_.erase(id) == 0) throw ServiceError(404, "not_found", "unknown session " + id);
  }
  log({{"event", "delete"}, {"session", id}});
}

DialogueState DialogueService::state(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->state;
}

std::optional<SessionSummary> DialogueService::summary(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->summary;
}

json DialogueService::payload(const Session& s) const {
  json transcript = json::array();
  for (const auto& m : s.state.history()) {
    json j = move_to_json(m);
    j["text"] = s.scenario->render(m);
    transcript.push_back(std::move(j));
  }
  json out{{"id", s.id},
           {"scenario_id", s.scenario->id},
           {"title", s.scenario->title},
           {"topic", formula_list(s.state.topic())},
           {"transcript", transcript},
           {"turn", s.state.terminated() ? json(nullptr)
                                         : json(std::string(to_string(s.state.agent_to_move())))},
           {"finished", s.state.terminated()},
           {"created", s.created},
           {"updated", s.updated},
           {"summary", nullptr}};
  if (s.summary) {
    out["summary"] = {{"pre", similarity_to_json(s.summary->pre)},
                      {"post", similarity_to_json(s.summary->post)},
                      {"updates", s.summary->updates},
                      {"success", s.summary->success}};
  }
  return out;
}

json DialogueService::session_json(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return payload(*s);
}

void DialogueService::restore() {
  std::ifstream in(options_.store_path);
  if (!in) return;
  restoring_ = true;
  std::string line;
  std::size_t n = 0;
  try {
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      const json e = json::parse(line);
      const std::string kind = e.at("event");
      if (kind == "scenario") {
        add_scenario(scenario_from_json(e.at("scenario")));
      } else if (kind == "session") {
        auto sc = scenario(e.at("scenario_id"));
        DialogueOptions opts;
        opts.explainee_may_concede = true;
        opts.budget.max_time = options_.explainer_budget;
        auto s = std::make_shared<Session>(
            e.at("session").get<std::string>(), sc,
            DialogueState::start(sc->kb_r, sc->menu_kb, sc->topic, opts),
            e.value("at", std::string()));
        std::lock_guard lock(mu_);
        sessions_[s->id] = s;
      } else if (kind == "move") {
        auto s = find(e.at("session"));
        s->state = commit_move(s->state, move_from_json(e.at("move")));
        s->updated = e.value("at", s->updated);
        if (s->state.terminated()) finish(*s);
      } else if (kind == "delete") {
        std::lock_guard lock(mu_);
        sessions_.erase(e.at("session").get<std::string>());
      }
    }
  } catch (const std::exception& ex) {
    restoring_ = false;
    throw Error("event log " + options_.store_path + " line " + std::to_string(n) + ": " +
                ex.what());
  }
  restoring_ = false;
}

// ---------------------------------------------------------------------------
// HTTP

struct HttpServer::Impl {
  explicit Impl(DialogueService& svc) : service(svc) {}

  DialogueService& service;
  httplib::Server server;
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& detail) {
  send_json(res, status, {{"error", code}, {"detail", detail}});
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const ProtocolError& e) {
      send_error(res, 409, "protocol", e.what());
    } catch (const BudgetExceeded& e) {
      send_error(res, 503, "budget", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

HttpServer::HttpServer(DialogueService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto& svc = impl_->service;
  auto& srv = impl_->server;

  srv.Post("/api/scenarios", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const std::string id = svc.add_scenario(scenario_from_json(json::parse(req.body)));
             send_json(res, 201, {{"id", id}});
           }));
  srv.Get("/api/scenarios", guarded([&svc](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto& s : svc.scenarios()) {
              out.push_back({{"id", s.id}, {"title", s.title}, {"description", s.description}});
            }
            send_json(res, 200, out);
          }));
  srv.Post("/api/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = json::parse(req.body);
             if (!body.contains("scenario_id") || !body.at("scenario_id").is_string()) {
               throw bad_request("scenario_id is required");
             }
             const std::string id = svc.create_session(body.at("scenario_id"));
             send_json(res, 201, svc.session_json(id));
           }));
  srv.Get(R"(/api/sessions/([0-9a-f]+))",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, svc.session_json(req.matches[1]));
          }));
  srv.Get(R"(/api/sessions/([0-9a-f]+)/moves)",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            json moves = json::array();
            for (const auto& item : svc.menu(req.matches[1])) {
              json m = move_to_json(item.move);
              m["token"] = item.token;
              m["text"] = item.text;
              moves.push_back(std::move(m));
            }
            send_json(res, 200, {{"moves", moves}});
          }));
  srv.Post(R"(/api/sessions/([0-9a-f]+)/moves)",
           guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = json::parse(req.body);
             if (!body.contains("token") || !body.at("token").is_string()) {
               throw bad_request("token is required");
             }
             send_json(res, 200, svc.post_move(req.matches[1], body.at("token")));
           }));
  srv.Delete(R"(/api/sessions/([0-9a-f]+))",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               svc.delete_session(req.matches[1]);
               res.status = 204;
             }));
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "not_found" : "http",
                 httplib::status_message(res.status));
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace drhai
