// fade/audio.cc

// Copyright 2026  The fadekit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fade/audio.h"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace fade {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate_audio(const AudioBuffer &a, const std::string &context) {
  if (a.sample_rate <= 0)
    throw InvalidArgument(context + ": sample rate must be positive");
  if (a.samples.empty()) throw InvalidArgument(context + ": empty audio");
  for (double s : a.samples)
    if (!std::isfinite(s)) throw InvalidArgument(context + ": non-finite sample");
}

double rms_level(const AudioBuffer &a) {
  if (a.samples.empty()) throw InvalidArgument("rms_level: empty audio");
  double acc = 0.0;
  for (double s : a.samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(a.samples.size()));
}

namespace {

struct ChunkHeader {
  char id[4];
  uint32_t size;
};

uint32_t read_u32(std::istream &in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char *>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream &in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char *>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream &out, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream &out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

AudioBuffer read_wav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("read_wav: cannot open " + path);

  char riff[4], wave[4];
  in.read(riff, 4);
  read_u32(in);  // total size, unused
  in.read(wave, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
    throw LoadError("read_wav: not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  AudioBuffer out;

  while (in) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    uint32_t size = read_u32(in);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (size > 16) in.ignore(size - 16);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw LoadError("read_wav: data before fmt in " + path);
      if (channels != 1)
        throw LoadError("read_wav: " + path + " has " + std::to_string(channels) +
                        " channels; only mono input is supported");
      std::vector<char> raw(size);
      in.read(raw.data(), size);
      if (!in) throw LoadError("read_wav: truncated data chunk in " + path);
      if (format == 1 && bits == 16) {
        const size_t n = size / 2;
        out.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          int16_t v;
          std::memcpy(&v, raw.data() + 2 * i, 2);
          out.samples[i] = static_cast<double>(v) / 32768.0;
        }
      } else if (format == 3 && bits == 32) {
        const size_t n = size / 4;
        out.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          float v;
          std::memcpy(&v, raw.data() + 4 * i, 4);
          out.samples[i] = static_cast<double>(v);
        }
      } else {
        throw LoadError("read_wav: unsupported encoding in " + path +
                        " (need 16-bit integer or 32-bit float PCM)");
      }
      out.sample_rate = static_cast<int>(sample_rate);
      validate_audio(out, "read_wav: " + path);
      return out;
    } else {
      in.ignore(size + (size & 1));
    }
  }
  throw LoadError("read_wav: no data chunk in " + path);
}

void write_wav(const std::string &path, const AudioBuffer &a, WavFormat format) {
  validate_audio(a, "write_wav");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("write_wav: cannot open " + path);

  const uint16_t bytes_per_sample = format == WavFormat::kPcm16 ? 2 : 4;
  const uint32_t data_size = static_cast<uint32_t>(a.samples.size()) * bytes_per_sample;

  out.write("RIFF", 4);
  write_u32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, format == WavFormat::kPcm16 ? 1 : 3);
  write_u16(out, 1);
  write_u32(out, static_cast<uint32_t>(a.sample_rate));
  write_u32(out, static_cast<uint32_t>(a.sample_rate) * bytes_per_sample);
  write_u16(out, bytes_per_sample);
  write_u16(out, static_cast<uint16_t>(bytes_per_sample * 8));
  out.write("data", 4);
  write_u32(out, data_size);

  if (format == WavFormat::kPcm16) {
    for (double s : a.samples) {
      double clamped = std::fmin(1.0, std::fmax(-1.0, s));
      int16_t v = static_cast<int16_t>(std::lrint(clamped * 32767.0));
      char b[2];
      std::memcpy(b, &v, 2);
      out.write(b, 2);
    }
  } else {
    for (double s : a.samples) {
      float v = static_cast<float>(s);
      char b[4];
      std::memcpy(b, &v, 4);
      out.write(b, 4);
    }
  }
  if (!out) throw LoadError("write_wav: write failed for " + path);
}

}  // namespace fade
