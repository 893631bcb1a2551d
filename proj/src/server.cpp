#include "gazeintent/server.hpp"

#include "gazeintent/error.hpp"
#include "gazeintent/synth.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/version.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace gazeintent {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxMessageBytes = 4 * 1024 * 1024;

Json shapes_document() {
    Json shapes = Json::array();
    const Point2 center{320.0, 240.0};
    const TrialGenerator generator(SynthConfig{});
    for (const ShapeSpec& s : shape_catalog()) {
        Json axes = Json::array();
        Json contexts = Json::array();
        for (GraspAxis a : s.axes) {
            axes.push_back(to_string(a));
            contexts.push_back(to_json(generator.context_for(s, a, center)));
        }
        Json outline = Json::array();
        for (Point2 p : s.outline) outline.push_back({p.x, p.y});
        shapes.push_back(Json{{"id", s.id},
                              {"held_out", s.held_out},
                              {"axes", std::move(axes)},
                              {"outline", std::move(outline)},
                              {"contexts", std::move(contexts)}});
    }
    return Json{{"shapes", std::move(shapes)}};
}

struct Shared {
    std::shared_ptr<const ModelStore> store;
    std::string shapes_body;
    std::atomic<std::size_t> sessions{0};
};

class WebSocketSession : public std::enable_shared_from_this<WebSocketSession> {
public:
    WebSocketSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
        : ws_(std::move(socket)), shared_(std::move(shared)), handler_(shared_->store) {
        ++shared_->sessions;
    }
    ~WebSocketSession() { --shared_->sessions; }

    void run(http::request<http::string_body> request) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(kMaxMessageBytes);
        ws_.text(true);
        ws_.async_accept(request, beast::bind_front_handler(&WebSocketSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        read();
    }

    void read() {
        buffer_.consume(buffer_.size());
        ws_.async_read(buffer_, beast::bind_front_handler(&WebSocketSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) return;  // closed by peer or failed; state dies with this object
        if (!ws_.got_text()) {
            reply_ = handler_.on_message("\x01binary frames are not supported");
        } else {
            reply_ = handler_.on_message(beast::buffers_to_string(buffer_.data()));
        }
        next_ = 0;
        write_next();
    }

    // Replies go out one at a time, in order, before the next read.
    void write_next() {
        if (next_ < reply_.messages.size()) {
            ws_.async_write(asio::buffer(reply_.messages[next_]),
                            beast::bind_front_handler(&WebSocketSession::on_write, shared_from_this()));
            return;
        }
        if (reply_.close) {
            ws_.async_close(websocket::close_code::policy_error,
                            [self = shared_from_this()](beast::error_code) {});
            return;
        }
        read();
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) return;
        ++next_;
        write_next();
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<Shared> shared_;
    SessionHandler handler_;
    beast::flat_buffer buffer_;
    Reply reply_;
    std::size_t next_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
        : stream_(std::move(socket)), shared_(std::move(shared)) {}

    void run() {
        asio::dispatch(stream_.get_executor(),
                       beast::bind_front_handler(&HttpSession::read, shared_from_this()));
    }

private:
    void read() {
        request_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, request_,
                         beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        if (websocket::is_upgrade(request_)) {
            stream_.expires_never();
            std::make_shared<WebSocketSession>(stream_.release_socket(), shared_)->run(std::move(request_));
            return;
        }
        respond();
    }

    void respond() {
        auto response = std::make_shared<http::response<http::string_body>>();
        response->version(request_.version());
        response->keep_alive(request_.keep_alive());
        response->set(http::field::server, "gazeintent");
        response->set(http::field::content_type, "application/json");
        response->set(http::field::access_control_allow_origin, "*");

        const std::string target(request_.target());
        if (request_.method() != http::verb::get) {
            response->result(http::status::method_not_allowed);
            response->body() = Json{{"error", "only GET is supported"}}.dump();
        } else if (target == "/health") {
            response->result(http::status::ok);
            response->body() = Json{{"status", "ok"},
                                    {"protocol", kProtocolVersion},
                                    {"sessions", shared_->sessions.load()}}
                                   .dump();
        } else if (target == "/models") {
            Json models = Json::array();
            for (const std::string& id : shared_->store->ids()) {
                const auto m = shared_->store->find(id);
                models.push_back(Json{{"id", id},
                                      {"kind", to_string(m->kind)},
                                      {"combination", to_string(m->combination)}});
            }
            response->result(http::status::ok);
            response->body() =
                Json{{"default", shared_->store->default_id()}, {"models", std::move(models)}}.dump();
        } else if (target == "/shapes") {
            response->result(http::status::ok);
            response->body() = shared_->shapes_body;
        } else {
            response->result(http::status::not_found);
            response->body() = Json{{"error", "not found"}}.dump();
        }
        response->prepare_payload();
        http::async_write(stream_, *response,
                          [self = shared_from_this(), response](beast::error_code ec, std::size_t) {
                              self->on_write(ec, response->need_eof());
                          });
    }

    void on_write(beast::error_code ec, bool close) {
        if (ec) return;
        if (close) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        read();
    }

    beast::tcp_stream stream_;
    std::shared_ptr<Shared> shared_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
};

class Listener : public std::enable_shared_from_this<Listener> {
public:
    Listener(asio::io_context& ioc, tcp::endpoint endpoint, std::shared_ptr<Shared> shared)
        : ioc_(ioc), acceptor_(asio::make_strand(ioc)), shared_(std::move(shared)) {
        acceptor_.open(endpoint.protocol());
        acceptor_.set_option(asio::socket_base::reuse_address(true));
        acceptor_.bind(endpoint);
        acceptor_.listen(asio::socket_base::max_listen_connections);
    }

    std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

    void run() { accept(); }

    void close() {
        asio::dispatch(acceptor_.get_executor(), [self = shared_from_this()] {
            beast::error_code ignored;
            self->acceptor_.close(ignored);
        });
    }

private:
    void accept() {
        acceptor_.async_accept(asio::make_strand(ioc_),
                               beast::bind_front_handler(&Listener::on_accept, shared_from_this()));
    }

    void on_accept(beast::error_code ec, tcp::socket socket) {
        if (ec == asio::error::operation_aborted) return;
        if (!ec) std::make_shared<HttpSession>(std::move(socket), shared_)->run();
        accept();
    }

    asio::io_context& ioc_;
    tcp::acceptor acceptor_;
    std::shared_ptr<Shared> shared_;
};

}  // namespace

struct Server::Impl {
    ServerOptions options;
    std::shared_ptr<Shared> shared = std::make_shared<Shared>();
    asio::io_context ioc;
    std::shared_ptr<Listener> listener;
    std::vector<std::thread> threads;
    std::mutex mutex;
    std::condition_variable stopped_cv;
    bool stopped = false;
};

Server::Server(ServerOptions options, std::shared_ptr<const ModelStore> store) : impl_(std::make_unique<Impl>()) {
    if (!store) throw InvalidInputError("server needs a model store");
    impl_->options = std::move(options);
    impl_->shared->store = std::move(store);
    impl_->shared->shapes_body = shapes_document().dump();
}

Server::~Server() { stop(); }

void Server::start() {
    if (impl_->listener) throw Error("server already started");
    beast::error_code ec;
    const auto address = asio::ip::make_address(impl_->options.host, ec);
    if (ec) throw InvalidInputError("invalid bind address '" + impl_->options.host + "'");
    try {
        impl_->listener = std::make_shared<Listener>(impl_->ioc, tcp::endpoint{address, impl_->options.port},
                                                     impl_->shared);
    } catch (const boost::system::system_error& e) {
        throw Error("cannot listen on " + impl_->options.host + ":" + std::to_string(impl_->options.port) +
                    ": " + e.code().message());
    }
    impl_->listener->run();
    const unsigned n = std::max(1u, impl_->options.threads);
    for (unsigned i = 0; i < n; ++i) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
}

void Server::wait() {
    std::unique_lock lock(impl_->mutex);
    impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void Server::stop() {
    {
        std::lock_guard lock(impl_->mutex);
        if (impl_->stopped) return;
        impl_->stopped = true;
    }
    if (impl_->listener) impl_->listener->close();
    impl_->ioc.stop();
    for (std::thread& t : impl_->threads) {
        if (t.joinable() && t.get_id() != std::this_thread::get_id()) t.join();
    }
    impl_->stopped_cv.notify_all();
}

std::uint16_t Server::port() const {
    if (!impl_->listener) throw Error("server not started");
    return impl_->listener->port();
}

std::size_t Server::active_sessions() const { return impl_->shared->sessions.load(); }

}  // namespace gazeintent
