// Denoiser wire protocol and the child-process round trip.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>

#include "tlf/denoise.hpp"
#include "tlf/errors.hpp"

namespace tlf {
namespace wire {
namespace {

constexpr char kMagic[4] = {'T', 'L', 'F', '1'};
constexpr std::size_t kReplyHeader = 16;
constexpr std::size_t kRequestHeader = 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

float get_f32(const std::vector<std::uint8_t>& in, std::size_t off) { return std::bit_cast<float>(get_u32(in, off)); }

void put_header(std::vector<std::uint8_t>& out, const Shape& s) {
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, static_cast<std::uint32_t>(s.height));
    put_u32(out, static_cast<std::uint32_t>(s.width));
    put_u32(out, static_cast<std::uint32_t>(s.channels));
}

Shape get_header(const std::vector<std::uint8_t>& in, std::size_t header_size) {
    if (in.size() < header_size) throw DenoiserError("denoiser message truncated in header");
    if (std::memcmp(in.data(), kMagic, 4) != 0) throw DenoiserError("denoiser message has bad magic");
    Shape s{get_u32(in, 4), get_u32(in, 8), get_u32(in, 12)};
    if (s.height == 0 || s.width == 0 || s.channels == 0) throw DenoiserError("denoiser message has zero dimension");
    if (in.size() != header_size + 4 * s.size())
        throw DenoiserError("denoiser message payload length " + std::to_string(in.size() - header_size) +
                            " does not match dimensions " + to_string(s));
    return s;
}

ImageTensor get_payload(const std::vector<std::uint8_t>& in, std::size_t off, const Shape& s) {
    ImageTensor x(s);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(get_f32(in, off + 4 * i));
    return x;
}

}  // namespace

std::vector<std::uint8_t> encode_request(const ImageTensor& x, float hint) {
    std::vector<std::uint8_t> out;
    out.reserve(kRequestHeader + 4 * x.size());
    put_header(out, x.shape());
    put_f32(out, hint);
    for (double v : x.values()) put_f32(out, static_cast<float>(v));
    return out;
}

std::vector<std::uint8_t> encode_reply(const ImageTensor& x) {
    std::vector<std::uint8_t> out;
    out.reserve(kReplyHeader + 4 * x.size());
    put_header(out, x.shape());
    for (double v : x.values()) put_f32(out, static_cast<float>(v));
    return out;
}

Request decode_request(const std::vector<std::uint8_t>& bytes) {
    const Shape s = get_header(bytes, kRequestHeader);
    return Request{get_payload(bytes, kRequestHeader, s), get_f32(bytes, 16)};
}

ImageTensor decode_reply(const std::vector<std::uint8_t>& bytes) {
    const Shape s = get_header(bytes, kReplyHeader);
    return get_payload(bytes, kReplyHeader, s);
}

}  // namespace wire

namespace {

class Fd {
public:
    explicit Fd(int fd = -1) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    int get() const { return fd_; }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_;
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

}  // namespace

ImageTensor external_roundtrip(const std::vector<std::string>& command, const ImageTensor& x, double hint,
                               double timeout_seconds) {
    if (command.empty()) throw DenoiserError("external denoiser command is empty");
    // One child at a time per process.
    static std::mutex serial;
    std::lock_guard lock(serial);
    const std::vector<std::uint8_t> request = wire::encode_request(x, static_cast<float>(hint));

    // stdin is a socket so writes can use MSG_NOSIGNAL when the child exits early.
    int in_pair[2];
    int out_pipe[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0)
        throw DenoiserError(std::string("socketpair failed: ") + std::strerror(errno));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pair[0]);
        ::close(in_pair[1]);
        throw DenoiserError(std::string("pipe failed: ") + std::strerror(errno));
    }
    Fd child_in(in_pair[1]), parent_in(in_pair[0]);
    Fd parent_out(out_pipe[0]), child_out(out_pipe[1]);

    std::vector<char*> argv;
    for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) throw DenoiserError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(child_in.get(), STDIN_FILENO);
        ::dup2(child_out.get(), STDOUT_FILENO);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }
    child_in.reset();
    child_out.reset();
    set_nonblocking(parent_in.get());
    set_nonblocking(parent_out.get());

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
    std::size_t written = 0;
    std::vector<std::uint8_t> reply;
    bool reading = true;
    bool timed_out = false;
    bool write_failed = false;
    std::uint8_t buf[65536];
    while (reading) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd fds[2];
        nfds_t n = 0;
        fds[n++] = {parent_out.get(), POLLIN, 0};
        if (parent_in.get() >= 0) fds[n++] = {parent_in.get(), POLLOUT, 0};
        const int rc = ::poll(fds, n, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t w = ::send(parent_in.get(), request.data() + written, request.size() - written, MSG_NOSIGNAL);
            if (w > 0) written += static_cast<std::size_t>(w);
            if (w < 0 && errno != EAGAIN && errno != EINTR) {
                write_failed = true;
                parent_in.reset();
            } else if (written == request.size()) {
                ::shutdown(parent_in.get(), SHUT_WR);
                parent_in.reset();
            }
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            const ssize_t r = ::read(parent_out.get(), buf, sizeof buf);
            if (r > 0) reply.insert(reply.end(), buf, buf + r);
            else if (r == 0) reading = false;
            else if (errno != EAGAIN && errno != EINTR) reading = false;
        }
    }

    if (timed_out) ::kill(pid, SIGKILL);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (timed_out)
        throw DenoiserError("external denoiser timed out after " + std::to_string(timeout_seconds) + " s");
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw DenoiserError("external denoiser '" + command.front() + "' exited abnormally (status " +
                            std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) + ")");
    if (write_failed) throw DenoiserError("external denoiser closed its input early");

    ImageTensor out = wire::decode_reply(reply);
    if (out.shape() != x.shape())
        throw DenoiserError("external denoiser reply shape " + to_string(out.shape()) + " does not match request " +
                            to_string(x.shape()));
    if (!out.all_finite()) throw DenoiserError("external denoiser reply contains non-finite values");
    return out;
}

}  // namespace tlf
