#include "route_service.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace erp::service {

using nlohmann::json;

namespace {

Reply error_reply(int status, const std::string& message) {
    return Reply{status, json{{"error", message}}.dump()};
}

Reply not_ready() { return Reply{503, json{{"status", "loading"}}.dump()}; }

}  // namespace

RouteService::RouteService(double default_lambda) : default_lambda_(default_lambda) {
    if (!(default_lambda >= 0.0) || !std::isfinite(default_lambda))
        throw std::invalid_argument("default lambda must be a finite non-negative number");
}

RouteService::~RouteService() { erp_router_free(router_.exchange(nullptr)); }

void RouteService::load(const std::string& predictors_dir, const std::string& pool_path) {
    erp_router* router = nullptr;
    if (erp_router_load(predictors_dir.c_str(), pool_path.c_str(), &router) != ERP_OK)
        throw std::runtime_error(erp_last_error());
    erp_router_free(router_.exchange(router, std::memory_order_acq_rel));
}

Reply RouteService::handle_route(const std::string& body) const {
    const erp_router* router = router_.load(std::memory_order_acquire);
    if (!router) return not_ready();

    json req;
    try {
        req = json::parse(body);
    } catch (const json::parse_error& e) {
        return error_reply(400, std::string("malformed JSON: ") + e.what());
    }
    if (!req.is_object()) return error_reply(400, "request must be a JSON object");
    const auto emb = req.find("embedding");
    if (emb == req.end() || !emb->is_array()) return error_reply(400, "\"embedding\" must be an array of numbers");
    std::vector<double> x;
    x.reserve(emb->size());
    for (const auto& v : *emb) {
        if (!v.is_number()) return error_reply(400, "\"embedding\" must be an array of numbers");
        x.push_back(v.get<double>());
    }
    double lambda = default_lambda_;
    if (const auto l = req.find("lambda"); l != req.end() && !l->is_null()) {
        if (!l->is_number()) return error_reply(400, "\"lambda\" must be a number");
        lambda = l->get<double>();
    }

    const std::size_t m = erp_router_num_models(router);
    std::size_t chosen = 0;
    std::vector<double> predicted(m), adjusted(m);
    if (erp_router_route(router, x.data(), x.size(), lambda, &chosen, predicted.data(), adjusted.data()) != ERP_OK)
        return error_reply(400, erp_last_error());

    json resp;
    resp["chosen_model_id"] = erp_router_model_id(router, chosen);
    resp["scores"] = json::array();
    for (std::size_t j = 0; j < m; ++j)
        resp["scores"].push_back({{"model_id", erp_router_model_id(router, j)},
                                  {"predicted_er", predicted[j]},
                                  {"cost_adjusted_score", adjusted[j]}});
    return Reply{200, resp.dump()};
}

Reply RouteService::handle_health() const {
    const erp_router* router = router_.load(std::memory_order_acquire);
    if (!router) return not_ready();
    json models = json::array();
    for (std::size_t j = 0; j < erp_router_num_models(router); ++j) models.push_back(erp_router_model_id(router, j));
    return Reply{200, json{{"status", "ok"}, {"dim", erp_router_dim(router)}, {"models", models}}.dump()};
}

void RouteService::mount(httplib::Server& server) const {
    server.Post("/route", [this](const httplib::Request& req, httplib::Response& res) {
        const Reply r = handle_route(req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    });
    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        const Reply r = handle_health();
        res.status = r.status;
        res.set_content(r.body, "application/json");
    });
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    std::string host = colon == std::string::npos ? "127.0.0.1" : bind.substr(0, colon);
    const std::string port_str = colon == std::string::npos ? bind : bind.substr(colon + 1);
    if (host.empty()) host = "0.0.0.0";
    int port = 0;
    try {
        std::size_t used = 0;
        port = std::stoi(port_str, &used);
        if (used != port_str.size()) throw std::invalid_argument(port_str);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad bind address '" + bind + "'");
    }
    if (port < 0 || port > 65535) throw std::invalid_argument("bad port in '" + bind + "'");
    return {host, port};
}

}  // namespace erp::service
