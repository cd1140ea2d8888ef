#pragma once

#include <stdexcept>
#include <string>

namespace filmrec {

// Every failure mode surfaced by the public API. Messages carry context,
// the code is what callers should branch on.
enum class Errc {
  invalid_dimension,
  invalid_config,
  degenerate_range,
  io,
  bad_magic,
  truncated_file,
  unsupported_channels,
  shape_mismatch,
  empty_mask,
  degenerate_geometry,
  too_few_points,
  corner_detection_failed,
  fold_detected,
  rejection_exhausted,
  missing_map,
  no_component_found,
  image_too_small,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace filmrec
