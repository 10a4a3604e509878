#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "erp/erp.h"

namespace httplib {
class Server;
}

namespace erp::service {

struct Reply {
    int status = 200;
    std::string body;
};

/// HTTP routing front end over a loaded erp_router.
///
///   POST /route    {"embedding": [...], "lambda": x?}
///               -> {"chosen_model_id": id, "scores": [{"model_id", "predicted_er",
///                   "cost_adjusted_score"}, ...]}
///   GET  /healthz  {"status": "ok", "dim": D, "models": [...]}
///
/// Both answer 503 until load() has completed. The router is read-only once
/// published, so handlers run concurrently without locking.
class RouteService {
public:
    explicit RouteService(double default_lambda = 0.0);
    ~RouteService();
    RouteService(const RouteService&) = delete;
    RouteService& operator=(const RouteService&) = delete;

    /// Throws std::runtime_error carrying erp_last_error() on failure.
    void load(const std::string& predictors_dir, const std::string& pool_path);
    bool ready() const noexcept { return router_.load(std::memory_order_acquire) != nullptr; }

    Reply handle_route(const std::string& body) const;
    Reply handle_health() const;

    /// Registers the handlers on `server`. The service must outlive it.
    void mount(httplib::Server& server) const;

private:
    double default_lambda_;
    std::atomic<erp_router*> router_{nullptr};
};

/// "host:port" -> (host, port); a bare port binds 127.0.0.1.
std::pair<std::string, int> parse_bind(const std::string& bind);

}  // namespace erp::service
