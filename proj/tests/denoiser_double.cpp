// Scripted external denoiser for protocol tests. Reads one TLF1 request from
// stdin and answers according to argv[1]:
//   echo     payload unchanged
//   add      payload + 0.01
//   reshape  reply claims one extra row
//   garbage  reply is not a TLF1 message
//   fail     exit status 3 without replying
//   sleep    wait argv[2] seconds, then echo

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

namespace {

std::uint32_t u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

}  // namespace

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "echo";
    std::vector<unsigned char> in;
    unsigned char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, stdin)) > 0;) in.insert(in.end(), buf, buf + n);

    if (mode == "fail") return 3;
    if (mode == "sleep") std::this_thread::sleep_for(std::chrono::duration<double>(argc > 2 ? std::stod(argv[2]) : 5.0));
    if (in.size() < 20 || std::memcmp(in.data(), "TLF1", 4) != 0) return 4;

    std::uint32_t h = u32(&in[4]), w = u32(&in[8]), c = u32(&in[12]);
    const std::size_t n = std::size_t(h) * w * c;
    if (in.size() != 20 + 4 * n) return 5;

    std::vector<float> px(n);
    std::memcpy(px.data(), &in[20], 4 * n);
    if (mode == "add")
        for (float& v : px) v += 0.01f;

    std::vector<unsigned char> out;
    if (mode == "garbage") {
        const char junk[] = "this is not a denoiser reply";
        out.assign(junk, junk + sizeof junk);
    } else {
        if (mode == "reshape") h += 1;
        out.insert(out.end(), {'T', 'L', 'F', '1'});
        put32(out, h);
        put32(out, w);
        put32(out, c);
        const auto* bytes = reinterpret_cast<const unsigned char*>(px.data());
        out.insert(out.end(), bytes, bytes + 4 * n);
    }
    std::fwrite(out.data(), 1, out.size(), stdout);
    return 0;
}
