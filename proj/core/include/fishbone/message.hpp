#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "fishbone/geometry.hpp"

namespace fishbone {

/// Relay list of one forwarding path.
///
/// With `relay_flag` set, the first entry is the junction: a device of another
/// path (or the source) that must relay before this path becomes live. Once
/// the junction relays, it strips itself and clears the flag, so the next id
/// becomes the live head.
struct PathInfo {
    std::uint16_t path_id = 0;
    std::uint16_t num_relays = 0;
    bool relay_flag = false;
    std::vector<std::uint32_t> relay_device_ids;

    bool operator==(const PathInfo&) const = default;
};

struct DisseminationMessage {
    std::uint32_t source_device_id = 0;  // the previous relay
    std::uint32_t sequence_number = 0;
    std::uint16_t num_paths = 0;
    std::vector<PathInfo> paths;

    bool operator==(const DisseminationMessage&) const = default;
};

/// Fixed-width little-endian layout:
///   source u32 | sequence u32 | num_paths u16 |
///   per path: path_id u16 | num_relays u16 | relay_flag u8 | relay ids u32 * num_relays
inline constexpr std::size_t kHeaderBytes = 10;
inline constexpr std::size_t kPathHeaderBytes = 5;

std::size_t encoded_size(const DisseminationMessage& msg);
/// Throws EncodeError when counts disagree with the lists or overflow 16 bits.
std::vector<std::uint8_t> encode_message(const DisseminationMessage& msg);
/// Throws DecodeError on truncated or trailing input.
DisseminationMessage decode_message(std::span<const std::uint8_t> bytes);

/// Sets the count fields from the list sizes.
void normalize_counts(DisseminationMessage& msg);

struct Forward {
    DisseminationMessage message;
};
struct Ignore {};
/// Inconsistent counts; the receiver treats it as Ignore.
struct ProtocolViolation {};

using RelayDecision = std::variant<Forward, Ignore, ProtocolViolation>;

/// (previous relay, sequence) pairs a device has already processed.
class SeenSet {
public:
    /// Returns false if the key was already present.
    bool insert(std::uint32_t source, std::uint32_t sequence) {
        return keys_.insert((static_cast<std::uint64_t>(source) << 32) | sequence).second;
    }
    bool contains(std::uint32_t source, std::uint32_t sequence) const {
        return keys_.contains((static_cast<std::uint64_t>(source) << 32) | sequence);
    }

private:
    std::unordered_set<std::uint64_t> keys_;
};

/// Receiver-side relay rule. A duplicate (source, sequence) copy is ignored;
/// otherwise the device relays iff it is the live head of some path (paths are
/// scanned in order, so after a junction both the continuing path and the
/// branch find their head). See `forwarded_by` for the rewrite.
RelayDecision relay_decision(DeviceId device, const DisseminationMessage& msg, SeenSet& seen);

/// The message `device` broadcasts when it relays `msg`: it becomes the new
/// source id, is stripped from every path it heads (clearing the junction flag
/// where it was the junction), and emptied paths are dropped.
DisseminationMessage forwarded_by(DeviceId device, const DisseminationMessage& msg);

/// True when `device` heads an unflagged path of `msg`.
bool is_live_head(DeviceId device, const DisseminationMessage& msg);

}  // namespace fishbone
