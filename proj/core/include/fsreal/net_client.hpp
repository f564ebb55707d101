#pragma once

#include <cstdint>
#include <string>

namespace fsreal {

struct ClientOptions {
    std::string host = "127.0.0.1";
    uint16_t port = 0;
    std::string id_file;          // persisted sender id, created on first hello-ack
    double backoff_base_s = 0.2;  // reconnect backoff, doubles up to backoff_max_s
    double backoff_max_s = 5.0;
    int max_connect_attempts = 10;
};

// Executor loop: hello, receive tasks, train locally, upload, repeat until
// the server sends shutdown. Returns a process exit code (0 on clean
// shutdown, 3 when the server stays unreachable).
int run_client(const ClientOptions& opts);

}  // namespace fsreal
