#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gst/env/corpus.hpp"
#include "gst/model/guesser_model.hpp"

namespace gst {

struct HttpResponse {
  int status = 200;
  std::string body;
};

struct PlayServiceOptions {
  std::size_t max_sessions = 256;
  std::chrono::seconds idle_timeout{1800};
  int max_rounds = 5;
  StopPolicy stop;
  std::uint64_t seed = 0;  // scenes for creates without an explicit seed
  std::string checkpoint_root;  // request "checkpoint" paths resolve under this directory
};

enum class SessionStatus { kAwaitingTarget, kAwaitingAnswer, kFinished };

inline std::string SessionStatusName(SessionStatus s) {
  switch (s) {
    case SessionStatus::kAwaitingTarget: return "awaiting_target";
    case SessionStatus::kAwaitingAnswer: return "awaiting_answer";
    case SessionStatus::kFinished: return "finished";
  }
  return "finished";
}

// Live games with a human Oracle against a frozen model. Handle() is the
// whole HTTP surface; the httplib binding in ServePlay only forwards to it.
class PlayService {
 public:
  using Model = GuesserModel<double>;
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  PlayService(std::shared_ptr<const Model> model, const TemplateSet& templates,
              PlayServiceOptions opts, Clock clock = std::chrono::steady_clock::now)
      : model_(std::move(model)),
        templates_(&templates),
        qgen_(templates, QGenPolicy::kGreedySplit),
        opts_(std::move(opts)),
        clock_(std::move(clock)),
        ids_(std::random_device{}()) {
    if (opts_.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
    opts_.max_rounds = std::min(opts_.max_rounds, model_->tracker_options().max_rounds);
  }

  HttpResponse Handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      std::vector<std::string> parts;
      for (std::size_t i = 0; i < path.size();) {
        const std::size_t j = path.find('/', i);
        const std::size_t end = j == std::string::npos ? path.size() : j;
        if (end > i) parts.push_back(path.substr(i, end - i));
        i = end + 1;
      }
      if (parts.empty() || parts[0] != "games" || parts.size() > 3) return Fail(404, "no such route");
      if (parts.size() == 1) {
        if (method != "POST") return Fail(405, "method not allowed");
        return Create(ParseBody(body));
      }
      std::shared_ptr<Session> s = Find(parts[1]);
      if (!s) return Fail(404, "unknown session");
      std::lock_guard<std::mutex> lock(s->mu);
      s->last_used = clock_();
      if (parts.size() == 2) {
        if (method != "GET") return Fail(405, "method not allowed");
        return Ok(View(*s));
      }
      if (method != "POST") return Fail(405, "method not allowed");
      if (parts[2] == "target") return SetTarget(*s, ParseBody(body));
      if (parts[2] == "answer") return Answer(*s, ParseBody(body));
      return Fail(404, "no such route");
    } catch (const BadRequest& e) {
      return Fail(400, e.what());
    } catch (const Error& e) {
      return Fail(500, e.Category() + ": " + e.what());
    }
  }

  std::size_t session_count() {
    std::lock_guard<std::mutex> lock(mu_);
    return sessions_.size();
  }

  void ExpireIdle() {
    std::lock_guard<std::mutex> lock(mu_);
    ExpireLocked();
  }

 private:
  struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  struct Session {
    std::mutex mu;
    std::string id;
    Scene scene;
    int target = -1;
    SessionStatus status = SessionStatus::kAwaitingTarget;
    std::shared_ptr<const Model> model;
    std::unique_ptr<ModelGuesser<double>> guesser;
    std::vector<QaPair> rounds;
    std::optional<Question> pending;
    Rng rng{0};
    int guess = -1;
    std::chrono::steady_clock::time_point last_used;
  };

  static HttpResponse Ok(const Json& j) { return {200, j.dump()}; }
  static HttpResponse Fail(int status, const std::string& msg) {
    return {status, Json{{"error", msg}}.dump()};
  }

  static Json ParseBody(const std::string& body) {
    if (body.empty()) return Json::object();
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw BadRequest("body must be a JSON object");
    return j;
  }

  std::shared_ptr<Session> Find(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu_);
    ExpireLocked();
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  void ExpireLocked() {
    const auto now = clock_();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      // A session whose mutex is held is in use, hence not idle.
      std::unique_lock<std::mutex> busy(it->second->mu, std::try_to_lock);
      if (busy.owns_lock() && now - it->second->last_used > opts_.idle_timeout) {
        busy.unlock();
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::shared_ptr<const Model> ModelFor(const Json& body) {
    if (!body.contains("checkpoint")) return model_;
    if (!body["checkpoint"].is_string()) throw BadRequest("checkpoint must be a string");
    const std::filesystem::path rel(body["checkpoint"].get<std::string>());
    if (rel.is_absolute() || rel.lexically_normal().string().rfind("..", 0) == 0 ||
        opts_.checkpoint_root.empty()) {
      return nullptr;
    }
    const std::string path = (std::filesystem::path(opts_.checkpoint_root) / rel).string();
    std::lock_guard<std::mutex> lock(mu_);
    auto it = loaded_.find(path);
    if (it != loaded_.end()) return it->second;
    try {
      auto m = std::make_shared<const Model>(LoadModel<double>(path).model);
      loaded_[path] = m;
      return m;
    } catch (const Error&) {
      return nullptr;
    }
  }

  static std::uint64_t UintField(const Json& body, const char* key) {
    const Json& v = body.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw BadRequest(std::string(key) + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  HttpResponse Create(const Json& body) {
    SceneConfig cfg = templates_->config();
    if (body.contains("m")) {
      const std::uint64_t m = UintField(body, "m");
      if (m < static_cast<std::uint64_t>(cfg.min_objects) ||
          m > static_cast<std::uint64_t>(cfg.max_objects)) {
        throw BadRequest("m must lie in [" + std::to_string(cfg.min_objects) + ", " +
                         std::to_string(cfg.max_objects) + "]");
      }
      cfg.min_objects = cfg.max_objects = static_cast<int>(m);
    }
    std::uint64_t scene_seed;
    if (body.contains("seed")) {
      scene_seed = SceneSeed(UintField(body, "seed"), SceneStream::kServer, 0);
    } else {
      std::lock_guard<std::mutex> lock(mu_);
      scene_seed = SceneSeed(opts_.seed, SceneStream::kServer, ++created_);
    }
    std::shared_ptr<const Model> model = ModelFor(body);
    if (!model) return Fail(422, "checkpoint cannot be loaded");

    auto s = std::make_shared<Session>();
    s->scene = GenerateScene(scene_seed, cfg);
    s->model = model;
    s->rng = Rng(DeriveSeed(scene_seed, 0x9E55));
    s->last_used = clock_();
    {
      std::lock_guard<std::mutex> lock(mu_);
      ExpireLocked();
      if (sessions_.size() >= opts_.max_sessions) return Fail(503, "session capacity reached");
      do {
        s->id = NewId();
      } while (sessions_.count(s->id));
      sessions_[s->id] = s;
    }
    return Ok({{"session_id", s->id}, {"scene", SceneView(s->scene)}});
  }

  std::string NewId() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id;
    for (int i = 0; i < 4; ++i) {
      std::uint32_t w = ids_();
      for (int k = 0; k < 8; ++k, w >>= 4) id.push_back(kHex[w & 15]);
    }
    return id;
  }

  HttpResponse SetTarget(Session& s, const Json& body) {
    if (s.status != SessionStatus::kAwaitingTarget) return Fail(409, "target already chosen");
    if (!body.contains("object_index")) throw BadRequest("object_index is required");
    const std::uint64_t idx = UintField(body, "object_index");
    if (idx >= s.scene.size()) throw BadRequest("object_index out of range");
    s.guesser = std::make_unique<ModelGuesser<double>>(*s.model, false);
    s.guesser->Reset(s.scene);
    s.pending = qgen_.Next(s.scene, s.rounds, s.rng);
    if (!s.pending) return Fail(500, "no question available");
    s.target = static_cast<int>(idx);
    s.status = SessionStatus::kAwaitingAnswer;
    return Ok({{"question", QuestionView(*s.pending)},
               {"round", 1},
               {"state", s.guesser->States().back()}});
  }

  HttpResponse Answer(Session& s, const Json& body) {
    if (s.status != SessionStatus::kAwaitingAnswer) return Fail(409, "not awaiting an answer");
    if (!body.contains("answer") || !body["answer"].is_string()) {
      throw BadRequest("answer must be one of yes, no, na");
    }
    gst::Answer a;
    try {
      a = ParseAnswer(body["answer"].get<std::string>());
    } catch (const ProtocolError&) {
      throw BadRequest("answer must be one of yes, no, na");
    }
    s.guesser->Observe(*s.pending, a);
    s.rounds.push_back({*s.pending, a});
    s.pending.reset();
    const auto& states = s.guesser->States();
    Json out = {{"state", states.back()}, {"round", s.rounds.size()}};
    bool finish = static_cast<int>(s.rounds.size()) >= opts_.max_rounds ||
                  StopDecision(std::span<const Belief>(states), opts_.stop);
    if (!finish) {
      s.pending = qgen_.Next(s.scene, s.rounds, s.rng);
      finish = !s.pending;
    }
    if (finish) {
      // The target enters only here, for the verdict.
      s.guess = static_cast<int>(ArgmaxLowest(states.back()));
      s.status = SessionStatus::kFinished;
      out["finished"] = true;
      out["guess"] = s.guess;
      out["success"] = s.guess == s.target;
    } else {
      out["finished"] = false;
      out["next_question"] = QuestionView(*s.pending);
    }
    return Ok(out);
  }

  Json QuestionView(const Question& q) const {
    return {{"text", templates_->vocabulary().Render(q.tokens)},
            {"template", q.template_id},
            {"tokens", q.tokens}};
  }

  Json SceneView(const Scene& scene) const {
    const SceneConfig& cfg = templates_->config();
    const auto& cats = DefaultCategoryNames();
    Json objs = Json::array();
    for (std::size_t i = 0; i < scene.size(); ++i) {
      const SceneObject& o = scene.objects[i];
      Json attrs = Json::array();
      for (int a : o.attributes) {
        if (cfg.IsColorAttribute(a)) {
          attrs.push_back(DefaultColorNames().at(static_cast<std::size_t>(a)));
        } else {
          attrs.push_back(kSizeNames[a - cfg.num_colors]);
        }
      }
      const double w = scene.width, h = scene.height;
      objs.push_back({{"id", i},
                      {"category", o.category < static_cast<int>(cats.size())
                                       ? cats[static_cast<std::size_t>(o.category)]
                                       : std::to_string(o.category)},
                      {"bbox", {o.box.x / w, o.box.y / h, o.box.w / w, o.box.h / h}},
                      {"attributes", attrs}});
    }
    return {{"width", scene.width}, {"height", scene.height}, {"objects", objs}};
  }

  Json View(const Session& s) const {
    Json rounds = Json::array();
    Json states = Json::array();
    if (s.guesser) {
      const auto& st = s.guesser->States();
      for (const auto& b : st) states.push_back(b);
      for (std::size_t j = 0; j < s.rounds.size(); ++j) {
        rounds.push_back({{"question", QuestionView(s.rounds[j].question)},
                          {"answer", AnswerName(s.rounds[j].answer)},
                          {"state", st[j + 1]}});
      }
    }
    Json j = {{"session_id", s.id},
              {"status", SessionStatusName(s.status)},
              {"scene", SceneView(s.scene)},
              {"rounds", rounds},
              {"states", states},
              {"finished", s.status == SessionStatus::kFinished}};
    if (s.target >= 0) j["target"] = s.target;
    if (s.pending) j["question"] = QuestionView(*s.pending);
    if (s.status == SessionStatus::kFinished) {
      j["guess"] = s.guess;
      j["success"] = s.guess == s.target;
    }
    return j;
  }

  std::shared_ptr<const Model> model_;
  const TemplateSet* templates_;
  QuestionGenerator qgen_;
  PlayServiceOptions opts_;
  Clock clock_;
  std::mutex mu_;
  std::mt19937 ids_;
  std::uint64_t created_ = 0;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<const Model>> loaded_;
};

}  // namespace gst
