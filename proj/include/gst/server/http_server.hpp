#pragma once

#include <string>

#include "gst/server/play_service.hpp"
#include "httplib.h"

namespace gst {

// Routes /games/... to the service; everything else is the static UI mount
// when `static_dir` is set.
inline void BindPlayService(httplib::Server& server, PlayService& service,
                            const std::string& static_dir = "") {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = service.Handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Post(R"(/games(/.*)?)", forward);
  server.Get(R"(/games(/.*)?)", forward);
  if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
    throw NotFoundError("static directory " + static_dir + " does not exist");
  }
}

}  // namespace gst
