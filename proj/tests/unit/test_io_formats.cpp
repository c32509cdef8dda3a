#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "kanto/checksum.hpp"
#include "kanto/error.hpp"
#include "kanto/kspec.hpp"
#include "kanto/wav.hpp"
#include "test_util.hpp"

using namespace kanto;

TEST(Checksum, KnownVectors) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(std::string_view("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Checksum, FileMatchesBytes) {
  testutil::TempDir dir;
  testutil::write_text(dir.path() / "f.bin", "hello\n");
  EXPECT_EQ(sha256_file(dir.path() / "f.bin"), sha256_hex(std::string_view("hello\n")));
}

TEST(Kspec, LayoutIsLittleEndianRowMajor) {
  FloatMatrix m{2, 3, {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, -0.5f}};
  const auto bytes = encode_kspec(m);
  ASSERT_EQ(bytes.size(), 4u + 1u + 4u + 4u + 6u * 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "KSPC");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 2);  // rows, low byte first
  EXPECT_EQ(bytes[9], 3);  // cols
  float last;
  std::memcpy(&last, bytes.data() + bytes.size() - 4, 4);
  EXPECT_EQ(last, -0.5f);
}

TEST(Kspec, RoundTripIsBitExact) {
  FloatMatrix m{3, 4, {}};
  for (int i = 0; i < 12; ++i) m.values.push_back(std::nextafter(static_cast<float>(i) / 7.0f, 1e9f));
  m.values[5] = -0.0f;
  m.values[6] = std::numeric_limits<float>::denorm_min();
  const auto bytes = encode_kspec(m);
  const FloatMatrix back = decode_kspec(bytes);
  ASSERT_EQ(back.rows, m.rows);
  ASSERT_EQ(back.cols, m.cols);
  EXPECT_EQ(std::memcmp(back.values.data(), m.values.data(), m.values.size() * 4), 0);
  EXPECT_EQ(encode_kspec(back), bytes);
}

TEST(Kspec, FileRoundTrip) {
  testutil::TempDir dir;
  FloatMatrix m{1, 2, {0.25f, -65.0f}};
  write_kspec(dir.path() / "a.kspec", m);
  EXPECT_EQ(read_kspec(dir.path() / "a.kspec"), m);
}

TEST(Kspec, BadMagicIsParseError) {
  auto bytes = encode_kspec(FloatMatrix{1, 1, {1.0f}});
  bytes[0] = 'X';
  try {
    decode_kspec(bytes, "x.kspec");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find("x.kspec"), std::string::npos);
  }
}

TEST(Kspec, TruncatedPayloadIsParseError) {
  auto bytes = encode_kspec(FloatMatrix{2, 2, {1, 2, 3, 4}});
  bytes.pop_back();
  EXPECT_THROW(decode_kspec(bytes), Error);
}

TEST(Kspec, UnknownVersionIsReported) {
  auto bytes = encode_kspec(FloatMatrix{1, 1, {1.0f}});
  bytes[4] = 9;
  try {
    decode_kspec(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_version);
  }
}

TEST(Wav, Float32RoundTripIsExact) {
  testutil::TempDir dir;
  Audio a;
  a.sample_rate_hz = 22050;
  for (int i = 0; i < 1000; ++i) a.samples.push_back(std::sin(i * 0.01f) * 0.7f);
  write_wav(dir.path() / "a.wav", a, WavEncoding::float32);
  const Audio b = read_wav(dir.path() / "a.wav");
  EXPECT_EQ(b.sample_rate_hz, 22050);
  EXPECT_EQ(b.samples, a.samples);
  const WavInfo info = read_wav_info(dir.path() / "a.wav");
  EXPECT_EQ(info.frames, 1000u);
  EXPECT_EQ(info.channels, 1);
}

TEST(Wav, Pcm16RoundTripWithinQuantisation) {
  testutil::TempDir dir;
  Audio a;
  a.sample_rate_hz = 48000;
  for (int i = 0; i < 500; ++i) a.samples.push_back(std::cos(i * 0.03f) * 0.5f);
  write_wav(dir.path() / "a.wav", a, WavEncoding::pcm16);
  const Audio b = read_wav(dir.path() / "a.wav");
  ASSERT_EQ(b.samples.size(), a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_NEAR(b.samples[i], a.samples[i], 1.0 / 32767.0);
}

TEST(Wav, StereoIsAveraged) {
  testutil::TempDir dir;
  // Hand-built 16-bit stereo file with frames (1000, 3000) and (-2000, 0).
  std::string f = "RIFF";
  auto u32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) f.push_back(static_cast<char>(v >> (8 * i))); };
  auto u16 = [&](std::uint16_t v) { for (int i = 0; i < 2; ++i) f.push_back(static_cast<char>(v >> (8 * i))); };
  u32(36 + 8);
  f += "WAVEfmt ";
  u32(16);
  u16(1);
  u16(2);
  u32(8000);
  u32(8000 * 4);
  u16(4);
  u16(16);
  f += "data";
  u32(8);
  u16(1000);
  u16(3000);
  u16(static_cast<std::uint16_t>(-2000));
  u16(0);
  testutil::write_text(dir.path() / "s.wav", f);
  const Audio a = read_wav(dir.path() / "s.wav");
  ASSERT_EQ(a.samples.size(), 2u);
  EXPECT_NEAR(a.samples[0], 2000.0 / 32768.0, 1e-6);
  EXPECT_NEAR(a.samples[1], -1000.0 / 32768.0, 1e-6);
}

TEST(Wav, NotAWavIsParseError) {
  testutil::TempDir dir;
  testutil::write_text(dir.path() / "x.wav", "definitely not audio");
  try {
    read_wav(dir.path() / "x.wav");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
  }
}

TEST(Wav, MissingFileIsIoError) {
  try {
    read_wav("/nonexistent/kanto.wav");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
}
