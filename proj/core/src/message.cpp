#include "fishbone/message.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "fishbone/errors.hpp"

namespace fishbone {

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

    template <typename T>
    T get() {
        if (bytes_.size() - pos_ < sizeof(T)) throw DecodeError("truncated message at byte " + std::to_string(pos_));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return v;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

bool counts_consistent(const DisseminationMessage& msg) {
    if (msg.num_paths != msg.paths.size()) return false;
    return std::all_of(msg.paths.begin(), msg.paths.end(),
                       [](const PathInfo& p) { return p.num_relays == p.relay_device_ids.size(); });
}

}  // namespace

std::size_t encoded_size(const DisseminationMessage& msg) {
    std::size_t n = kHeaderBytes;
    for (const auto& p : msg.paths) n += kPathHeaderBytes + 4 * p.relay_device_ids.size();
    return n;
}

std::vector<std::uint8_t> encode_message(const DisseminationMessage& msg) {
    constexpr std::size_t kMax = std::numeric_limits<std::uint16_t>::max();
    if (msg.paths.size() > kMax) throw EncodeError("too many paths: " + std::to_string(msg.paths.size()));
    if (msg.num_paths != msg.paths.size()) throw EncodeError("num_paths does not match the path list");
    for (const auto& p : msg.paths) {
        if (p.relay_device_ids.size() > kMax)
            throw EncodeError("path " + std::to_string(p.path_id) + " has too many relays: " +
                              std::to_string(p.relay_device_ids.size()));
        if (p.num_relays != p.relay_device_ids.size())
            throw EncodeError("num_relays does not match the relay list of path " + std::to_string(p.path_id));
    }

    std::vector<std::uint8_t> out;
    out.reserve(encoded_size(msg));
    put<std::uint32_t>(out, msg.source_device_id);
    put<std::uint32_t>(out, msg.sequence_number);
    put<std::uint16_t>(out, msg.num_paths);
    for (const auto& p : msg.paths) {
        put<std::uint16_t>(out, p.path_id);
        put<std::uint16_t>(out, p.num_relays);
        put<std::uint8_t>(out, p.relay_flag ? 1 : 0);
        for (auto id : p.relay_device_ids) put<std::uint32_t>(out, id);
    }
    return out;
}

DisseminationMessage decode_message(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    DisseminationMessage msg;
    msg.source_device_id = r.get<std::uint32_t>();
    msg.sequence_number = r.get<std::uint32_t>();
    msg.num_paths = r.get<std::uint16_t>();
    msg.paths.resize(msg.num_paths);
    for (auto& p : msg.paths) {
        p.path_id = r.get<std::uint16_t>();
        p.num_relays = r.get<std::uint16_t>();
        const auto flag = r.get<std::uint8_t>();
        if (flag > 1) throw DecodeError("relay flag must be 0 or 1");
        p.relay_flag = flag == 1;
        p.relay_device_ids.resize(p.num_relays);
        for (auto& id : p.relay_device_ids) id = r.get<std::uint32_t>();
    }
    if (!r.done()) throw DecodeError("trailing bytes after message");
    return msg;
}

void normalize_counts(DisseminationMessage& msg) {
    msg.num_paths = static_cast<std::uint16_t>(msg.paths.size());
    for (auto& p : msg.paths) p.num_relays = static_cast<std::uint16_t>(p.relay_device_ids.size());
}

bool is_live_head(DeviceId device, const DisseminationMessage& msg) {
    return std::any_of(msg.paths.begin(), msg.paths.end(), [&](const PathInfo& p) {
        return !p.relay_flag && !p.relay_device_ids.empty() && p.relay_device_ids.front() == device;
    });
}

DisseminationMessage forwarded_by(DeviceId device, const DisseminationMessage& msg) {
    DisseminationMessage out;
    out.source_device_id = device;
    out.sequence_number = msg.sequence_number;
    out.paths.reserve(msg.paths.size());
    for (const auto& p : msg.paths) {
        if (!p.relay_device_ids.empty() && p.relay_device_ids.front() == device) {
            PathInfo q;
            q.path_id = p.path_id;
            q.relay_flag = false;
            q.relay_device_ids.assign(p.relay_device_ids.begin() + 1, p.relay_device_ids.end());
            if (!q.relay_device_ids.empty()) out.paths.push_back(std::move(q));
        } else {
            out.paths.push_back(p);
        }
    }
    normalize_counts(out);
    return out;
}

RelayDecision relay_decision(DeviceId device, const DisseminationMessage& msg, SeenSet& seen) {
    if (!seen.insert(msg.source_device_id, msg.sequence_number)) return Ignore{};
    if (!counts_consistent(msg)) return ProtocolViolation{};
    if (!is_live_head(device, msg)) return Ignore{};
    return Forward{forwarded_by(device, msg)};
}

}  // namespace fishbone
