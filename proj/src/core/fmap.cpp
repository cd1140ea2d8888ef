#include "filmrec/core/fmap.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace filmrec {

namespace {

constexpr uint32_t kVersion = 1;
const char kMagic[4] = {'F', 'M', 'A', 'P'};

static_assert(std::endian::native == std::endian::little,
              "fmap i/o assumes a little-endian host");

void put_u32(std::vector<unsigned char>& buf, uint32_t v) {
  buf.push_back(static_cast<unsigned char>(v & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

void fmap_write(const Raster& r, const std::filesystem::path& path) {
  std::vector<unsigned char> header;
  header.insert(header.end(), kMagic, kMagic + 4);
  put_u32(header, kVersion);
  put_u32(header, static_cast<uint32_t>(r.width()));
  put_u32(header, static_cast<uint32_t>(r.height()));
  put_u32(header, static_cast<uint32_t>(r.channels()));
  put_u32(header, 0);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::io, "cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(header.data()),
          static_cast<std::streamsize>(header.size()));
  auto samples = r.samples();
  f.write(reinterpret_cast<const char*>(samples.data()),
          static_cast<std::streamsize>(samples.size() * sizeof(float)));
  if (!f) raise(Errc::io, "write failed: " + path.string());
}

Raster fmap_read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(Errc::io, "cannot open for reading: " + path.string());

  unsigned char header[24];
  f.read(reinterpret_cast<char*>(header), sizeof(header));
  if (f.gcount() != sizeof(header))
    raise(Errc::truncated_file, "header short read: " + path.string());
  if (std::memcmp(header, kMagic, 4) != 0)
    raise(Errc::bad_magic, "not an FMAP file: " + path.string());
  if (get_u32(header + 4) != kVersion)
    raise(Errc::bad_magic,
          "unsupported FMAP version " + std::to_string(get_u32(header + 4)));

  const uint32_t w = get_u32(header + 8);
  const uint32_t h = get_u32(header + 12);
  const uint32_t c = get_u32(header + 16);
  if (c < 1 || c > 3)
    raise(Errc::unsupported_channels,
          "FMAP channel count " + std::to_string(c) + ": " + path.string());
  if (w < 1 || h < 1 || w > (1u << 20) || h > (1u << 20))
    raise(Errc::invalid_dimension, "implausible FMAP dimensions " +
                                       std::to_string(w) + "x" +
                                       std::to_string(h));

  Raster r(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  auto samples = r.samples();
  f.read(reinterpret_cast<char*>(samples.data()),
         static_cast<std::streamsize>(samples.size() * sizeof(float)));
  if (static_cast<size_t>(f.gcount()) != samples.size() * sizeof(float))
    raise(Errc::truncated_file, "payload short read: " + path.string());
  return r;
}

}  // namespace filmrec
