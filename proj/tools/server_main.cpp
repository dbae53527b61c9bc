#include "mixplan/service.hpp"

#include <csignal>
#include <iostream>

namespace {
mixplan::service::Server* g_server = nullptr;

extern "C" void on_signal(int)
{
    if (g_server) g_server->stop();
}
}  // namespace

int main()
{
    try {
        const auto options = mixplan::service::server_options_from_env();
        mixplan::service::Server server(options);
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        const int port = server.start();
        std::cerr << "mixplan-server listening on " << options.host << ':' << port << "\n";
        server.run();
        g_server = nullptr;
    } catch (const std::exception& e) {
        std::cerr << "mixplan-server: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
