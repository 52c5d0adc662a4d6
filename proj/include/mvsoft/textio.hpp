#ifndef MVSOFT_TEXTIO_HPP_
#define MVSOFT_TEXTIO_HPP_

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace mvsoft {

// Shortest decimal form that round-trips the exact double (so emitted files
// are reproducible bit for bit). Infinities print as "inf"/"-inf".
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(std::int64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return fmt(static_cast<std::int64_t>(v)); }

inline std::string fmt(std::uint64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mvsoft

#endif  // MVSOFT_TEXTIO_HPP_
