#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ransomguard {

// process exit codes: 1 usage, 2 data/io, 3 pe parse, 4 numerical
enum class errc : int {
    usage = 1,
    data = 2,
    parse = 3,
    numeric = 4,
};

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    errc code() const { return code_; }
    int exit_code() const { return static_cast<int>(code_); }

  private:
    errc code_;
};

class data_error : public error {
  public:
    explicit data_error(const std::string& msg) : error(errc::data, msg) {}
};

class parse_error : public error {
  public:
    parse_error(const std::string& msg, std::uint64_t offset)
        : error(errc::parse, msg + " (offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::uint64_t offset() const { return offset_; }

  private:
    std::uint64_t offset_;
};

class numeric_error : public error {
  public:
    explicit numeric_error(const std::string& msg) : error(errc::numeric, msg) {}
};

} // namespace ransomguard
