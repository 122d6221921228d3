#pragma once

#include <stdexcept>
#include <string>

namespace treeten {

enum class errc {
  parse_error,
  index_out_of_range,
  overlapping_sons,
  incomplete_union,
  single_son,
  non_singleton_leaf,
  invalid_mode_count,
  shape_mismatch,
  invalid_rank_tuple,
  invalid_argument,
  io_error,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace treeten
