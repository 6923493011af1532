#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "hatescope/annotation.hpp"

namespace hatescope {

/// Environment variable holding the optional shared bearer token.
inline constexpr const char* kAnnotationTokenEnv = "HATESCOPE_ANNOTATION_TOKEN";

/// JSON-over-HTTP front end for an AnnotationStore.
///
///   GET  /tasks/next?annotator=ID      next task, {"status":"empty"} or 403
///   POST /judgments                    {"task_id","annotator_id","label"}
///   GET  /tasks/conflicts
///   POST /tasks/{id}/adjudicate        {"label","adjudicator_id"}
///   GET  /export/labels                CSV
///   GET  /annotators/{id}
///   POST /annotators/{id}/stop
///   GET  /active-learning/history      CSV, when a history file is configured
class AnnotationServer {
public:
    AnnotationServer(AnnotationStore& store, std::optional<std::string> token = std::nullopt,
                     std::optional<std::filesystem::path> history = std::nullopt);
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    /// bind + listen on a background thread.
    int start(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hatescope
