#pragma once

#include <string>

#include "fraclab/grid.hpp"

namespace fraclab {

/// Binary layout: "FRL1", dim u8, M u32 LE, L f64 LE, decay flag u8, then
/// M^n (re, im) f64 LE pairs. The flag records that a certificate existed;
/// on load it is rebuilt by refitting.
void write_snapshot(const std::string& path, const Field& u);
Field read_snapshot(const std::string& path);

}  // namespace fraclab
