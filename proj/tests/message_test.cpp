#include <random>

#include <gtest/gtest.h>

#include "fishbone/errors.hpp"
#include "fishbone/message.hpp"

using namespace fishbone;

namespace {

PathInfo path(std::uint16_t id, std::vector<std::uint32_t> relays, bool flag = false) {
    PathInfo p;
    p.path_id = id;
    p.num_relays = static_cast<std::uint16_t>(relays.size());
    p.relay_flag = flag;
    p.relay_device_ids = std::move(relays);
    return p;
}

DisseminationMessage message(std::uint32_t source, std::vector<PathInfo> paths, std::uint32_t seq = 1) {
    DisseminationMessage m;
    m.source_device_id = source;
    m.sequence_number = seq;
    m.paths = std::move(paths);
    normalize_counts(m);
    return m;
}

DisseminationMessage random_message(std::mt19937_64& rng) {
    DisseminationMessage m;
    m.source_device_id = static_cast<std::uint32_t>(rng());
    m.sequence_number = static_cast<std::uint32_t>(rng());
    const std::size_t n_paths = rng() % 6;
    for (std::size_t i = 0; i < n_paths; ++i) {
        std::vector<std::uint32_t> relays(rng() % 9);
        for (auto& r : relays) r = static_cast<std::uint32_t>(rng());
        m.paths.push_back(path(static_cast<std::uint16_t>(rng()), relays, rng() % 2 == 0));
    }
    normalize_counts(m);
    return m;
}

}  // namespace

TEST(Codec, EmptyMessageIsTenBytes) {
    const auto bytes = encode_message(message(7, {}));
    EXPECT_EQ(bytes.size(), kHeaderBytes);
    EXPECT_EQ(bytes.size(), 10u);
}

TEST(Codec, OnePathTwoRelays) {
    const auto m = message(1, {path(0, {5, 6})});
    EXPECT_EQ(encode_message(m).size(), 23u);
    EXPECT_EQ(encoded_size(m), 23u);
}

TEST(Codec, LittleEndianLayout) {
    const auto bytes = encode_message(message(0x04030201, {path(0x0605, {0x0a090807}, true)}, 0x0d0c0b0a));
    const std::vector<std::uint8_t> want{0x01, 0x02, 0x03, 0x04, 0x0a, 0x0b, 0x0c, 0x0d, 0x01, 0x00,
                                         0x05, 0x06, 0x01, 0x00, 0x01, 0x07, 0x08, 0x09, 0x0a};
    EXPECT_EQ(bytes, want);
}

TEST(Codec, RandomRoundTrip) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 2000; ++i) {
        const auto m = random_message(rng);
        const auto bytes = encode_message(m);
        ASSERT_EQ(bytes.size(), encoded_size(m));
        ASSERT_EQ(decode_message(bytes), m);
    }
}

TEST(Codec, EncodeRejectsInconsistentCounts) {
    auto m = message(1, {path(0, {1, 2})});
    m.paths[0].num_relays = 3;
    EXPECT_THROW(encode_message(m), EncodeError);
    m = message(1, {path(0, {1})});
    m.num_paths = 2;
    EXPECT_THROW(encode_message(m), EncodeError);
    m = message(1, {path(0, std::vector<std::uint32_t>(70000, 1))});
    EXPECT_THROW(encode_message(m), EncodeError);
}

TEST(Codec, DecodeRejectsTruncatedAndTrailing) {
    auto bytes = encode_message(message(1, {path(0, {1, 2})}));
    auto shorter = bytes;
    shorter.pop_back();
    EXPECT_THROW(decode_message(shorter), DecodeError);
    bytes.push_back(0);
    EXPECT_THROW(decode_message(bytes), DecodeError);
    auto flagged = encode_message(message(1, {path(0, {})}));
    flagged.back() = 2;
    EXPECT_THROW(decode_message(flagged), DecodeError);
}

TEST(RelayDecision, UnlistedDeviceIgnores) {
    SeenSet seen;
    const auto m = message(0, {path(0, {1, 2})});
    EXPECT_TRUE(std::holds_alternative<Ignore>(relay_decision(9, m, seen)));
}

TEST(RelayDecision, HeadForwardsWithoutItself) {
    SeenSet seen;
    const auto m = message(0, {path(0, {1, 2, 3})});
    const auto d = relay_decision(1, m, seen);
    ASSERT_TRUE(std::holds_alternative<Forward>(d));
    const auto& out = std::get<Forward>(d).message;
    EXPECT_EQ(out.source_device_id, 1u);
    ASSERT_EQ(out.paths.size(), 1u);
    EXPECT_EQ(out.paths[0].num_relays, 2u);
    EXPECT_EQ(out.paths[0].relay_device_ids, (std::vector<std::uint32_t>{2, 3}));
}

TEST(RelayDecision, DuplicateIsIgnored) {
    SeenSet seen;
    const auto m = message(0, {path(0, {1, 2})});
    EXPECT_TRUE(std::holds_alternative<Forward>(relay_decision(1, m, seen)));
    EXPECT_TRUE(std::holds_alternative<Ignore>(relay_decision(1, m, seen)));
}

TEST(RelayDecision, InconsistentCountsAreAViolation) {
    SeenSet seen;
    auto m = message(0, {path(0, {1})});
    m.paths[0].num_relays = 4;
    EXPECT_TRUE(std::holds_alternative<ProtocolViolation>(relay_decision(1, m, seen)));
}

TEST(RelayDecision, JunctionOpensBranch) {
    // Spine 1 -> 2 -> 3; branch hangs off 2 and continues 4 -> 5.
    const auto m = message(1, {path(0, {2, 3}), path(1, {2, 4, 5}, true)});
    EXPECT_FALSE(is_live_head(4, m));
    SeenSet seen;
    const auto d = relay_decision(2, m, seen);
    ASSERT_TRUE(std::holds_alternative<Forward>(d));
    const auto& out = std::get<Forward>(d).message;
    ASSERT_EQ(out.paths.size(), 2u);
    EXPECT_EQ(out.paths[0].relay_device_ids, std::vector<std::uint32_t>{3});
    EXPECT_EQ(out.paths[1].relay_device_ids, (std::vector<std::uint32_t>{4, 5}));
    EXPECT_FALSE(out.paths[1].relay_flag);
    EXPECT_TRUE(is_live_head(3, out));
    EXPECT_TRUE(is_live_head(4, out));
}

TEST(RelayDecision, EmptiedPathsAreDropped) {
    const auto out = forwarded_by(3, message(2, {path(0, {3}), path(1, {4})}));
    ASSERT_EQ(out.paths.size(), 1u);
    EXPECT_EQ(out.num_paths, 1u);
    EXPECT_EQ(out.paths[0].path_id, 1u);
}
