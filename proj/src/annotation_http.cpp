#include "hatescope/annotation_http.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hatescope/util.hpp"

namespace hatescope {

using json = nlohmann::ordered_json;

namespace {

int status_for(AnnotationErrorCode code) {
    switch (code) {
        case AnnotationErrorCode::unknown_task:
        case AnnotationErrorCode::unknown_annotator: return 404;
        case AnnotationErrorCode::denied: return 403;
        case AnnotationErrorCode::not_assigned:
        case AnnotationErrorCode::duplicate:
        case AnnotationErrorCode::not_in_conflict: return 409;
        case AnnotationErrorCode::bad_label: return 400;
    }
    return 400;
}

void send_json(httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, json{{"error", message}}, status);
}

json label_json(const AggregatedLabel& a) {
    json j;
    j["task_id"] = a.task_id;
    j["label"] = a.label ? json(judgment_label_name(*a.label)) : json(nullptr);
    j["confidence"] = a.confidence;
    j["margin"] = a.margin;
    j["status"] = to_string(a.status);
    j["provenance"] = to_string(a.provenance);
    j["judgments"] = a.judgments;
    return j;
}

json annotator_json(const Annotator& a) {
    json j;
    j["annotator_id"] = a.id;
    j["trust"] = a.trust;
    j["test_correct"] = a.test_correct;
    j["test_seen"] = a.test_seen;
    j["active"] = a.active;
    j["stopped"] = a.stopped;
    j["completed"] = a.completed;
    j["payment_eligible"] = a.payment_eligible();
    return j;
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const AnnotationError& e) {
        send_error(res, status_for(e.code()), e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, std::string("malformed request: ") + e.what());
    }
}

}  // namespace

struct AnnotationServer::Impl {
    AnnotationStore& store;
    std::optional<std::string> token;
    std::optional<std::filesystem::path> history;
    httplib::Server server;
    std::thread thread;

    Impl(AnnotationStore& s, std::optional<std::string> t, std::optional<std::filesystem::path> h)
        : store(s), token(std::move(t)), history(std::move(h)) {
        routes();
    }

    void routes() {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (!token) return httplib::Server::HandlerResponse::Unhandled;
            if (req.get_header_value("Authorization") == "Bearer " + *token)
                return httplib::Server::HandlerResponse::Unhandled;
            send_error(res, 401, "missing or invalid bearer token");
            return httplib::Server::HandlerResponse::Handled;
        });

        server.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string who = req.get_param_value("annotator");
            if (who.empty()) return send_error(res, 400, "annotator parameter required");
            const TaskOffer offer = store.next_task(who);
            json j;
            j["notice"] = store.config().notice;
            j["criterion"] = store.config().criterion;
            switch (offer.kind) {
                case TaskOffer::Kind::denied:
                    j["status"] = "denied";
                    j["error"] = "annotator " + who + " has been removed from the task";
                    return send_json(res, j, 403);
                case TaskOffer::Kind::empty:
                    j["status"] = "empty";
                    return send_json(res, j);
                case TaskOffer::Kind::task:
                    j["status"] = "ok";
                    j["task"] = {{"task_id", offer.task_id}, {"text", offer.text}};
                    return send_json(res, j);
            }
        });

        server.Post("/judgments", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const json body = json::parse(req.body);
                Judgment j;
                j.task_id = body.at("task_id").get<std::string>();
                j.annotator_id = body.at("annotator_id").get<std::string>();
                const auto& label = body.at("label");
                j.label = label.is_number_integer() ? label.get<int>() : parse_judgment_label(label.get<std::string>());
                send_json(res, label_json(store.submit(j)));
            });
        });

        server.Get("/tasks/conflicts", [this](const httplib::Request&, httplib::Response& res) {
            json list = json::array();
            for (const auto& a : store.conflicts()) {
                json j = label_json(a);
                j["text"] = store.task_text(a.task_id);
                list.push_back(j);
            }
            send_json(res, json{{"conflicts", list}});
        });

        server.Post(R"(/tasks/([^/]+)/adjudicate)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const json body = json::parse(req.body);
                const auto& label = body.at("label");
                const int y = label.is_number_integer() ? label.get<int>() : parse_judgment_label(label.get<std::string>());
                send_json(res, label_json(store.adjudicate(req.matches[1], y, body.value("adjudicator_id", "adjudicator"))));
            });
        });

        server.Get("/export/labels", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(store.export_csv(), "text/csv");
        });

        server.Get(R"(/annotators/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto a = store.annotator(req.matches[1]);
            if (!a) return send_error(res, 404, "unknown annotator " + std::string(req.matches[1]));
            send_json(res, annotator_json(*a));
        });

        server.Post(R"(/annotators/([^/]+)/stop)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, annotator_json(store.stop(req.matches[1]))); });
        });

        server.Get("/active-learning/history", [this](const httplib::Request&, httplib::Response& res) {
            if (!history || !std::filesystem::exists(*history)) return send_error(res, 404, "no active-learning history");
            res.set_content(read_file(*history), "text/csv");
        });
    }
};

AnnotationServer::AnnotationServer(AnnotationStore& store, std::optional<std::string> token,
                                   std::optional<std::filesystem::path> history)
    : impl_(std::make_unique<Impl>(store, std::move(token), std::move(history))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

int AnnotationServer::start(const std::string& host, int port) {
    const int bound = bind(host, port);
    if (bound < 0) return bound;
    impl_->thread = std::thread([this] { listen(); });
    impl_->server.wait_until_ready();
    return bound;
}

void AnnotationServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace hatescope
