#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "conical/errors.hpp"

namespace conical {

// 8-bit grayscale image, row-major pixels.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
};

namespace detail {

inline int pgm_next_token(std::istream& in) {
  // Skips whitespace and '#' comments, returns the next integer.
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int value = 0;
  if (!(in >> value)) throw ValidationError("malformed PGM header");
  return value;
}

}  // namespace detail

inline Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") {
    throw ValidationError(path + ": not an 8-bit PGM (P2/P5) file");
  }
  Image img;
  img.width = static_cast<std::size_t>(detail::pgm_next_token(in));
  img.height = static_cast<std::size_t>(detail::pgm_next_token(in));
  const int maxval = detail::pgm_next_token(in);
  if (maxval <= 0 || maxval > 255) {
    throw ValidationError(path + ": only 8-bit PGM supported (maxval <= 255)");
  }
  img.pixels.resize(img.width * img.height);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
      throw ValidationError(path + ": truncated pixel data");
    }
  } else {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      const int v = detail::pgm_next_token(in);
      if (v < 0 || v > maxval) throw ValidationError(path + ": pixel out of range");
      img.pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

inline void write_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

// Sorted list of .pgm files in a directory; lexicographic order keeps frame
// numbering deterministic.
inline std::vector<std::string> list_pgm_files(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError(dir + " is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".PGM") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .pgm files in " + dir);
  return files;
}

}  // namespace conical
