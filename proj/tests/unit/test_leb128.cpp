#include <gtest/gtest.h>

#include <random>

#include "wasmdesk/binary.hpp"

using namespace wasmdesk;

namespace {

// Independent encoders: count the 7-bit groups first, then emit them.
std::vector<uint8_t> ref_uleb(uint64_t v) {
  int groups = 1;
  while (groups < 10 && (v >> (7 * groups)) != 0) ++groups;
  std::vector<uint8_t> out;
  for (int i = 0; i < groups; ++i) {
    const auto chunk = static_cast<uint8_t>((v >> (7 * i)) & 0x7F);
    out.push_back(i + 1 < groups ? chunk | 0x80 : chunk);
  }
  return out;
}

std::vector<uint8_t> ref_sleb(int64_t v) {
  // Smallest group count whose 7g-bit two's complement range holds v.
  int groups = 1;
  while (groups < 10) {
    const __int128 lo = -(__int128{1} << (7 * groups - 1));
    const __int128 hi = (__int128{1} << (7 * groups - 1)) - 1;
    if (v >= lo && v <= hi) break;
    ++groups;
  }
  const auto u = static_cast<unsigned __int128>(static_cast<__int128>(v));
  std::vector<uint8_t> out;
  for (int i = 0; i < groups; ++i) {
    const auto chunk = static_cast<uint8_t>((u >> (7 * i)) & 0x7F);
    out.push_back(i + 1 < groups ? chunk | 0x80 : chunk);
  }
  return out;
}

uint64_t sample_u64(std::mt19937_64& rng) {
  // Spread over magnitudes so every encoded length shows up.
  const int width = static_cast<int>(rng() % 65);
  if (width == 0) return 0;
  const uint64_t v = rng();
  return width == 64 ? v : v & ((uint64_t{1} << width) - 1);
}

uint64_t decode_u(const std::vector<uint8_t>& b, unsigned bits) {
  ByteCursor c(b);
  const uint64_t v = read_uleb128(c, bits);
  EXPECT_TRUE(c.at_end());
  return v;
}

int64_t decode_s(const std::vector<uint8_t>& b, unsigned bits) {
  ByteCursor c(b);
  const int64_t v = read_sleb128(c, bits);
  EXPECT_TRUE(c.at_end());
  return v;
}

MalformedKind decode_error(const std::vector<uint8_t>& b, unsigned bits, bool is_signed) {
  ByteCursor c(b);
  try {
    if (is_signed) read_sleb128(c, bits);
    else read_uleb128(c, bits);
  } catch (const MalformedError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a decode error";
  return MalformedKind::BadEncoding;
}

}  // namespace

TEST(Leb128, UnsignedRoundTripAgainstReferenceEncoder) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100000; ++i) {
    const uint64_t v = sample_u64(rng);
    std::vector<uint8_t> mine;
    write_uleb128(mine, v);
    ASSERT_EQ(mine, ref_uleb(v)) << v;
    ASSERT_EQ(decode_u(mine, 64), v);
    if (v <= 0xFFFFFFFFu) {
      ASSERT_EQ(decode_u(mine, 32), v);
    }
  }
}

TEST(Leb128, SignedRoundTripAgainstReferenceEncoder) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100000; ++i) {
    const auto v = static_cast<int64_t>(sample_u64(rng));
    const int64_t w = (rng() & 1) ? v : static_cast<int64_t>(static_cast<uint64_t>(v) >> (rng() % 64));
    std::vector<uint8_t> mine;
    write_sleb128(mine, w);
    ASSERT_EQ(mine, ref_sleb(w)) << w;
    ASSERT_EQ(decode_s(mine, 64), w);
    if (w >= INT32_MIN && w <= INT32_MAX) {
      ASSERT_EQ(decode_s(mine, 32), w);
    }
  }
}

TEST(Leb128, BoundaryValues) {
  for (uint64_t v : {uint64_t{0}, uint64_t{127}, uint64_t{128}, uint64_t{0xFFFFFFFF}, ~uint64_t{0}}) {
    std::vector<uint8_t> b;
    write_uleb128(b, v);
    EXPECT_EQ(decode_u(b, 64), v);
  }
  for (int64_t v : {int64_t{0}, int64_t{-1}, int64_t{63}, int64_t{64}, int64_t{-64}, int64_t{-65}, INT64_MIN,
                    INT64_MAX}) {
    std::vector<uint8_t> b;
    write_sleb128(b, v);
    EXPECT_EQ(decode_s(b, 64), v);
  }
  std::vector<uint8_t> b;
  write_sleb128(b, -1);
  EXPECT_EQ(b, (std::vector<uint8_t>{0x7F}));
}

TEST(Leb128, NonMinimalButInRangeEncodingsDecode) {
  EXPECT_EQ(decode_u({0x80, 0x00}, 32), 0u);
  EXPECT_EQ(decode_u({0xFF, 0xFF, 0xFF, 0xFF, 0x0F}, 32), 0xFFFFFFFFu);
  EXPECT_EQ(decode_s({0xFF, 0x7F}, 32), -1);
}

TEST(Leb128, TooManyBytesIsOverlong) {
  EXPECT_EQ(decode_error({0x80, 0x80, 0x80, 0x80, 0x80, 0x00}, 32, false), MalformedKind::OverlongVarint);
  EXPECT_EQ(decode_error({0x80, 0x80, 0x80, 0x80, 0x80, 0x00}, 32, true), MalformedKind::OverlongVarint);
  std::vector<uint8_t> eleven(10, 0x80);
  eleven.push_back(0x00);
  EXPECT_EQ(decode_error(eleven, 64, false), MalformedKind::OverlongVarint);
}

TEST(Leb128, UnusedHighBitsMustBeClear) {
  // 2^32 does not fit 32 bits.
  EXPECT_EQ(decode_error({0x80, 0x80, 0x80, 0x80, 0x10}, 32, false), MalformedKind::OverlongVarint);
  // Sign bits of the final byte must agree with bit 31.
  EXPECT_EQ(decode_error({0xFF, 0xFF, 0xFF, 0xFF, 0x4F}, 32, true), MalformedKind::OverlongVarint);
  EXPECT_EQ(decode_s({0xFF, 0xFF, 0xFF, 0xFF, 0x7F}, 32), -1);
  EXPECT_EQ(decode_error({0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x02}, 64, false),
            MalformedKind::OverlongVarint);
}

TEST(Leb128, TruncatedInput) {
  EXPECT_EQ(decode_error({0x80}, 32, false), MalformedKind::Truncated);
  EXPECT_EQ(decode_error({}, 64, true), MalformedKind::Truncated);
}
