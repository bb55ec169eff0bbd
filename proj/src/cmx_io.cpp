#include "qsl/cmx_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace qsl {

namespace {

constexpr char kMagic[4] = {'C', 'M', 'X', '1'};

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffU));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f64(std::vector<unsigned char>& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }

}  // namespace

std::vector<unsigned char> encode_cmx(const ComplexMatrix& m) {
  std::vector<unsigned char> out;
  out.reserve(20 + 16 * static_cast<std::size_t>(m.size()));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      put_f64(out, m(i, j).real());
      put_f64(out, m(i, j).imag());
    }
  return out;
}

ComplexMatrix decode_cmx(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("CMX1: bad magic or truncated header");
  const std::uint64_t rows = get_u64(bytes.data() + 4);
  const std::uint64_t cols = get_u64(bytes.data() + 12);
  if (rows != 0 && cols > (bytes.size() / 16) / rows) throw IoError("CMX1: payload shorter than header claims");
  if (bytes.size() != 20 + 16 * rows * cols) throw IoError("CMX1: payload size does not match header");
  ComplexMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  const unsigned char* p = bytes.data() + 20;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i, p += 16) m(i, j) = Complex(get_f64(p), get_f64(p + 8));
  return m;
}

void write_cmx(std::ostream& os, const ComplexMatrix& m) {
  const auto bytes = encode_cmx(m);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("CMX1: write failed");
}

ComplexMatrix read_cmx(std::istream& is) {
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_cmx(bytes);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_cmx(const std::filesystem::path& path, const ComplexMatrix& m) {
  const auto bytes = encode_cmx(m);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

ComplexMatrix read_cmx(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return read_cmx(is);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace qsl
