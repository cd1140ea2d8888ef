#include "filmrec/core/error.hpp"

namespace filmrec {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_dimension: return "invalid-dimension";
    case Errc::invalid_config: return "invalid-config";
    case Errc::degenerate_range: return "degenerate-range";
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad-magic";
    case Errc::truncated_file: return "truncated-file";
    case Errc::unsupported_channels: return "unsupported-channels";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::empty_mask: return "empty-mask";
    case Errc::degenerate_geometry: return "degenerate-geometry";
    case Errc::too_few_points: return "too-few-points";
    case Errc::corner_detection_failed: return "corner-detection-failed";
    case Errc::fold_detected: return "fold-detected";
    case Errc::rejection_exhausted: return "rejection-exhausted";
    case Errc::missing_map: return "missing-map";
    case Errc::no_component_found: return "no-component-found";
    case Errc::image_too_small: return "image-too-small";
  }
  return "unknown";
}

}  // namespace filmrec
