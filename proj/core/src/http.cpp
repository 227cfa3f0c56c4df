#include <atomic>

#include "httplib.h"
#include "mutadapt/service.hpp"

namespace mutadapt {

struct HttpServer::Impl {
    SessionService& service;
    httplib::Server server;
    std::atomic<bool> bound{false};

    explicit Impl(SessionService& s) : service(s) {
        const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
            const HttpResponse r = service.handle(req.method, req.path, req.body);
            res.status = r.status;
            res.set_content(r.body, r.content_type.c_str());
        };
        server.Get(R"(/.*)", forward);
        server.Post(R"(/.*)", forward);
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
    }
};

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound_port = -1;
    if (port == 0) {
        bound_port = impl_->server.bind_to_any_port(host);
    } else if (impl_->server.bind_to_port(host, port)) {
        bound_port = port;
    }
    impl_->bound = bound_port > 0;
    return impl_->bound ? bound_port : -1;
}

bool HttpServer::listen() {
    if (!impl_->bound) return false;
    return impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace mutadapt
