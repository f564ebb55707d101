#include "fsreal/net_client.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <fstream>
#include <optional>
#include <thread>

#include <json.hpp>

#include "fsreal/codec.hpp"
#include "fsreal/data.hpp"
#include "fsreal/errors.hpp"
#include "fsreal/log.hpp"
#include "fsreal/rng.hpp"
#include "fsreal/server.hpp"
#include "fsreal/train.hpp"
#include "fsreal/wire.hpp"

namespace fsreal {

namespace {

bool read_exact(int fd, uint8_t* buf, size_t n) {
    size_t done = 0;
    while (done < n) {
        const ssize_t r = ::recv(fd, buf + done, n - done, 0);
        if (r <= 0) return false;
        done += static_cast<size_t>(r);
    }
    return true;
}

bool write_all(int fd, const uint8_t* buf, size_t n) {
    size_t done = 0;
    while (done < n) {
        const ssize_t w = ::send(fd, buf + done, n - done, MSG_NOSIGNAL);
        if (w <= 0) return false;
        done += static_cast<size_t>(w);
    }
    return true;
}

std::optional<Frame> read_frame(int fd) {
    uint8_t header[kFrameHeaderBytes];
    if (!read_exact(fd, header, kFrameHeaderBytes)) return std::nullopt;
    const uint32_t payload_len = header_payload_len(header);
    std::vector<uint8_t> buf(kFrameHeaderBytes + payload_len);
    std::memcpy(buf.data(), header, kFrameHeaderBytes);
    if (payload_len > 0 && !read_exact(fd, buf.data() + kFrameHeaderBytes, payload_len)) {
        return std::nullopt;
    }
    return frame_decode(buf.data(), buf.size());
}

int connect_once(const std::string& host, uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return -1;
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
        ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        return -1;
    }
    const int nodelay = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &nodelay, sizeof(nodelay));
    return fd;
}

std::optional<uint64_t> load_persisted_id(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    uint64_t id;
    if (!(in >> id)) return std::nullopt;
    return id;
}

void persist_id(const std::string& path, uint64_t id) {
    std::ofstream out(path, std::ios::trunc);
    out << id << "\n";
}

struct TaskSetup {
    uint64_t id = 0;
    uint64_t root_seed = 0;
    DataConfig data;
    ModelArch arch;
    TrainConfig train;
    AlgorithmMode algorithm = AlgorithmMode::kFedAvg;
    ServerMode mode = ServerMode::kSync;
    CodecKind codec = CodecKind::kNone;
    double latency_inject_s = 0.0;
};

TaskSetup parse_ack(const Frame& ack) {
    const auto j = nlohmann::json::parse(std::string(ack.payload.begin(), ack.payload.end()));
    TaskSetup s;
    s.id = j.at("assigned_id").get<uint64_t>();
    s.root_seed = j.at("root_seed").get<uint64_t>();
    s.data.n_clients = j.at("total_clients").get<size_t>();
    s.data.n_classes = j.at("n_classes").get<size_t>();
    s.data.dim = j.at("dim").get<size_t>();
    s.data.samples_per_client = j.at("samples_per_client").get<size_t>();
    s.data.dirichlet_alpha = j.at("data_alpha").get<double>();
    s.arch = ModelArch{s.data.dim, j.at("hidden_width").get<size_t>(), s.data.n_classes};
    s.train.learning_rate = j.at("learning_rate").get<double>();
    s.train.local_epochs = j.at("local_epochs").get<size_t>();
    s.train.batch_size = j.at("batch_size").get<size_t>();
    s.algorithm = algorithm_mode_from_string(j.at("algorithm").get<std::string>());
    s.mode = server_mode_from_string(j.at("mode").get<std::string>());
    s.codec = codec_from_string(j.at("codec").get<std::string>());
    s.latency_inject_s = j.at("latency_inject_s").get<double>();
    return s;
}

}  // namespace

int run_client(const ClientOptions& opts) {
    std::optional<uint64_t> persisted = opts.id_file.empty()
                                            ? std::nullopt
                                            : load_persisted_id(opts.id_file);
    std::optional<TaskSetup> setup;
    ClientShard shard;
    int64_t last_answered_sync_round = -1;
    double backoff = opts.backoff_base_s;
    int attempts = 0;

    for (;;) {
        const int fd = connect_once(opts.host, opts.port);
        if (fd < 0) {
            if (++attempts >= opts.max_connect_attempts) {
                FSREAL_LOG_ERROR("client: cannot reach " << opts.host << ":" << opts.port);
                return 3;
            }
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff = std::min(backoff * 2.0, opts.backoff_max_s);
            continue;
        }
        attempts = 0;
        backoff = opts.backoff_base_s;

        Frame hello;
        hello.msg_type = MsgType::kHello;
        hello.sender_id = persisted ? *persisted : UINT64_MAX;
        const auto hello_bytes = frame_encode(hello);
        if (!write_all(fd, hello_bytes.data(), hello_bytes.size())) {
            ::close(fd);
            continue;
        }

        const auto ack = read_frame(fd);
        if (!ack || ack->msg_type != MsgType::kAck) {
            ::close(fd);
            continue;
        }
        try {
            setup = parse_ack(*ack);
        } catch (const std::exception& e) {
            FSREAL_LOG_ERROR("client: bad ack payload: " << e.what());
            ::close(fd);
            return 3;
        }
        persisted = setup->id;
        if (!opts.id_file.empty()) persist_id(opts.id_file, setup->id);
        shard = generate_synthetic_federation(setup->data, setup->root_seed)[setup->id];
        FSREAL_LOG_INFO("client " << setup->id << " ready");

        // Task loop over this connection.
        for (;;) {
            const auto frame = read_frame(fd);
            if (!frame) break;  // connection lost: reconnect with the same id

            if (frame->msg_type == MsgType::kShutdown) {
                ::close(fd);
                return 0;
            }
            if (frame->msg_type != MsgType::kTaskBroadcast) continue;

            const uint64_t round = frame->round;
            if (setup->mode == ServerMode::kSync &&
                static_cast<int64_t>(round) <= last_answered_sync_round) {
                continue;  // at-most-once training per round
            }

            ModelParams received;
            try {
                received = decode(frame->payload);
            } catch (const CodecError& e) {
                FSREAL_LOG_ERROR("client " << setup->id << ": bad task payload in round "
                                           << round << ": " << e.what());
                continue;  // skip this round
            }

            TrainConfig task_cfg = setup->train;
            task_cfg.seed = derive_seed(setup->root_seed, "train", round, setup->id);
            ModelParams trained = local_train(received, shard,
                                              task_cfg, frozen_layers_for(setup->algorithm),
                                              setup->arch);
            ModelParams upload = std::move(trained);
            if (setup->mode == ServerMode::kAsync) {
                for (size_t i = 0; i < upload.values.size(); ++i) {
                    upload.values[i] -= received.values[i];
                }
            }
            const auto mask = make_upload_mask(setup->algorithm);
            auto payload = encode(upload, setup->codec, &mask);

            if (setup->latency_inject_s > 0.0) {
                std::this_thread::sleep_for(
                    std::chrono::duration<double>(setup->latency_inject_s));
            }

            Frame reply;
            reply.msg_type = MsgType::kModelUpload;
            reply.round = static_cast<uint32_t>(round);
            reply.sender_id = setup->id;
            reply.codec_id = static_cast<uint8_t>(setup->codec);
            reply.payload = std::move(payload);
            const auto reply_bytes = frame_encode(reply);
            if (!write_all(fd, reply_bytes.data(), reply_bytes.size())) break;
            if (setup->mode == ServerMode::kSync) {
                last_answered_sync_round = static_cast<int64_t>(round);
            }
        }
        ::close(fd);
    }
}

}  // namespace fsreal
